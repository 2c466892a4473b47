#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "advtext/attack/engine.hpp"
#include "advtext/core/types.hpp"
#include "advtext/models/victim.hpp"
#include "advtext/oracles/oracles.hpp"

namespace advtext {

// All rates are percents. acc_ba / acc_aa average the probability given to
// the gold label; conf_ba / conf_aa average the top-class probability
// instead. The *_excl fields repeat the metrics without skipped entries.
// Error entries are counted in n_error and left out of everything else.
struct MetricsReport {
  std::string model_id;
  std::string dataset_tag;
  std::string config_hash;
  std::size_t n_samples = 0;
  std::size_t n_success = 0;
  std::size_t n_failed = 0;
  std::size_t n_skipped = 0;
  std::size_t n_error = 0;
  double att_sr = 0.0;
  double acc_ba = 0.0;
  double acc_aa = 0.0;
  double att_dr = 0.0;
  double att_sr_excl = 0.0;
  double acc_ba_excl = 0.0;
  double acc_aa_excl = 0.0;
  double att_dr_excl = 0.0;
  double conf_ba = 0.0;
  double conf_aa = 0.0;
  double mean_queries = 0.0;
  double mean_perturbed_words = 0.0;  // over successes

  nlohmann::ordered_json to_json() const;
};

// Throws InvalidArgument on an empty log ("empty log") or when entries
// carry different config hashes.
MetricsReport compute_metrics(const std::vector<AttackLogEntry>& log);

struct TransferCell {
  std::string source_model;
  std::string victim_model;
  std::size_t n = 0;
  bool available = true;
  std::size_t successes_available = 0;
  double acc_x = 0.0;
  double acc_xadv = 0.0;
  double delta = 0.0;
  // Share of adversarial examples on which the victim keeps the label it
  // gave the original, as an alternative to gold agreement.
  double consistency = 0.0;
};

struct NamedClassifier {
  std::string id;
  Classifier* classifier;
};

// For every (source, victim) pair with distinct ids, scores the victim
// (argmax vs gold) on the first n successes of the source log by example id
// and on their adversarial counterparts. A source with fewer than n
// successes yields cells marked unavailable.
std::vector<TransferCell> transfer_matrix(
    const std::map<std::string, std::vector<AttackLogEntry>>& logs_by_source,
    const std::vector<NamedClassifier>& victims, std::size_t n);

struct DefenseReport {
  std::string model_id;
  std::string defended_model_id;
  double acc_ba = 0.0;
  double acc_aa = 0.0;
  double adversarial_training_acc = 0.0;
  double recovery = 0.0;
  std::size_t n_augmented = 0;
  // Argmax-vs-gold accuracy on the augmenting adversarial texts.
  double replay_before = 0.0;
  double replay_after = 0.0;
};

// Pure arithmetic form: recovery = adversarial_training_acc - acc_aa.
// Throws InvalidArgument when a value lies outside [0, 100].
DefenseReport defense_report(double acc_ba, double acc_aa, double adversarial_training_acc);

struct DefenseOutcome {
  DefenseReport report;
  TrainedModel defended;
  std::vector<AttackLogEntry> reattack_log;
};

using SessionForModel = std::function<OracleSession(std::shared_ptr<const VictimModel>)>;

// Adds every successful adversarial text of `log` to `train` under its
// original gold label, refine-tunes `victim`, and re-attacks the same
// example ids on the defended model.
DefenseOutcome run_defense(const VictimModel& victim, const LabeledDataset& train,
                           const LabeledDataset& test, const std::vector<AttackLogEntry>& log,
                           const AttackEngine& engine, const SessionForModel& sessions,
                           const TrainConfig& config, std::size_t workers = 1);

// Adversarial training examples built from the successes of a log.
std::vector<Example> adversarial_examples(const std::vector<AttackLogEntry>& log);

// CSV exports: one row per metric or cell.
std::string metrics_csv(const std::vector<MetricsReport>& reports);
std::string transfer_csv(const std::vector<TransferCell>& cells);
std::string defense_csv(const std::vector<DefenseReport>& reports);

// Plain-text tables shaped like the usual result tables.
std::string render_metrics_table(const std::vector<MetricsReport>& reports);
std::string render_transfer_table(const std::vector<TransferCell>& cells);
std::string render_defense_table(const std::vector<DefenseReport>& reports);

}  // namespace advtext
