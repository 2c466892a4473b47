#include "advtext/eval/metrics.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "advtext/core/csv.hpp"
#include "advtext/core/error.hpp"

namespace advtext {

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["model_id"] = model_id;
  j["dataset_tag"] = dataset_tag;
  j["config_hash"] = config_hash;
  j["n_samples"] = n_samples;
  j["n_success"] = n_success;
  j["n_failed"] = n_failed;
  j["n_skipped"] = n_skipped;
  j["n_error"] = n_error;
  j["att_sr"] = att_sr;
  j["acc_ba"] = acc_ba;
  j["acc_aa"] = acc_aa;
  j["att_dr"] = att_dr;
  j["att_sr_excl"] = att_sr_excl;
  j["acc_ba_excl"] = acc_ba_excl;
  j["acc_aa_excl"] = acc_aa_excl;
  j["att_dr_excl"] = att_dr_excl;
  j["conf_ba"] = conf_ba;
  j["conf_aa"] = conf_aa;
  j["mean_queries"] = mean_queries;
  j["mean_perturbed_words"] = mean_perturbed_words;
  return j;
}

namespace {

const Prediction& after(const AttackLogEntry& e) {
  return e.adversarial_prediction ? *e.adversarial_prediction : e.original_prediction;
}

double max_score(const Prediction& p) { return p.score(p.label()); }

}  // namespace

MetricsReport compute_metrics(const std::vector<AttackLogEntry>& log) {
  if (log.empty()) throw InvalidArgument("empty log");
  MetricsReport r;
  r.config_hash = log.front().config_hash;
  r.model_id = log.front().model_id;
  r.dataset_tag = log.front().dataset_tag;
  double ba = 0, aa = 0, ba_x = 0, aa_x = 0, cba = 0, caa = 0, queries = 0, words = 0;
  for (const auto& e : log) {
    if (e.config_hash != r.config_hash)
      throw InvalidArgument("log mixes config hashes " + r.config_hash + " and " +
                            e.config_hash);
    if (e.model_id != r.model_id) r.model_id = "mixed";
    if (e.dataset_tag != r.dataset_tag) r.dataset_tag = "mixed";
    if (e.status == AttackStatus::kError) {
      ++r.n_error;
      continue;
    }
    ++r.n_samples;
    const double b = e.original_prediction.score(e.gold_label);
    const double a = after(e).score(e.gold_label);
    ba += b;
    aa += a;
    cba += max_score(e.original_prediction);
    caa += max_score(after(e));
    queries += static_cast<double>(e.query_count);
    switch (e.status) {
      case AttackStatus::kSuccess:
        ++r.n_success;
        words += static_cast<double>(e.substitutions.size());
        break;
      case AttackStatus::kFailed: ++r.n_failed; break;
      case AttackStatus::kSkippedMisclassified: ++r.n_skipped; break;
      case AttackStatus::kError: break;
    }
    if (e.status != AttackStatus::kSkippedMisclassified) {
      ba_x += b;
      aa_x += a;
    }
  }
  if (r.n_samples == 0) return r;
  const double n = static_cast<double>(r.n_samples);
  r.att_sr = 100.0 * static_cast<double>(r.n_success) / n;
  r.acc_ba = 100.0 * ba / n;
  r.acc_aa = 100.0 * aa / n;
  r.att_dr = r.acc_ba - r.acc_aa;
  r.conf_ba = 100.0 * cba / n;
  r.conf_aa = 100.0 * caa / n;
  r.mean_queries = queries / n;
  if (r.n_success) r.mean_perturbed_words = words / static_cast<double>(r.n_success);
  const std::size_t attacked = r.n_samples - r.n_skipped;
  if (attacked) {
    const double m = static_cast<double>(attacked);
    r.att_sr_excl = 100.0 * static_cast<double>(r.n_success) / m;
    r.acc_ba_excl = 100.0 * ba_x / m;
    r.acc_aa_excl = 100.0 * aa_x / m;
    r.att_dr_excl = r.acc_ba_excl - r.acc_aa_excl;
  }
  return r;
}

std::vector<TransferCell> transfer_matrix(
    const std::map<std::string, std::vector<AttackLogEntry>>& logs_by_source,
    const std::vector<NamedClassifier>& victims, std::size_t n) {
  std::vector<TransferCell> cells;
  for (const auto& [source, log] : logs_by_source) {
    std::vector<const AttackLogEntry*> successes;
    for (const auto& e : log)
      if (e.status == AttackStatus::kSuccess && e.adversarial_text) successes.push_back(&e);
    std::stable_sort(successes.begin(), successes.end(),
                     [](auto a, auto b) { return a->example_id < b->example_id; });
    for (const auto& victim : victims) {
      if (victim.id == source) continue;
      TransferCell cell;
      cell.source_model = source;
      cell.victim_model = victim.id;
      cell.n = n;
      cell.successes_available = successes.size();
      if (successes.size() < n || n == 0) {
        cell.available = false;
        cells.push_back(cell);
        continue;
      }
      std::size_t ok_x = 0, ok_adv = 0, same = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const AttackLogEntry& e = *successes[i];
        const LabelIndex lx = victim.classifier->classify(e.original_text).label();
        const LabelIndex la = victim.classifier->classify(*e.adversarial_text).label();
        ok_x += lx == e.gold_label;
        ok_adv += la == e.gold_label;
        same += lx == la;
      }
      const double d = static_cast<double>(n);
      cell.acc_x = 100.0 * static_cast<double>(ok_x) / d;
      cell.acc_xadv = 100.0 * static_cast<double>(ok_adv) / d;
      cell.delta = cell.acc_x - cell.acc_xadv;
      cell.consistency = 100.0 * static_cast<double>(same) / d;
      cells.push_back(cell);
    }
  }
  return cells;
}

DefenseReport defense_report(double acc_ba, double acc_aa, double adversarial_training_acc) {
  for (double v : {acc_ba, acc_aa, adversarial_training_acc})
    if (!(v >= 0.0 && v <= 100.0)) throw InvalidArgument("defense values must be percents");
  DefenseReport r;
  r.acc_ba = acc_ba;
  r.acc_aa = acc_aa;
  r.adversarial_training_acc = adversarial_training_acc;
  r.recovery = adversarial_training_acc - acc_aa;
  return r;
}

std::vector<Example> adversarial_examples(const std::vector<AttackLogEntry>& log) {
  std::vector<Example> out;
  for (const auto& e : log) {
    if (e.status != AttackStatus::kSuccess || !e.adversarial_text) continue;
    out.push_back({e.example_id + "#adv", *e.adversarial_text, e.gold_label, e.dataset_tag});
  }
  return out;
}

DefenseOutcome run_defense(const VictimModel& victim, const LabeledDataset& train,
                           const LabeledDataset& test, const std::vector<AttackLogEntry>& log,
                           const AttackEngine& engine, const SessionForModel& sessions,
                           const TrainConfig& config, std::size_t workers) {
  const MetricsReport before = compute_metrics(log);
  const std::vector<Example> adv = adversarial_examples(log);

  LabeledDataset augmented = train;
  std::set<std::string> ids;
  for (const auto& e : train.examples) ids.insert(e.id);
  for (const auto& e : adv)
    if (ids.insert(e.id).second) augmented.examples.push_back(e);

  auto replay = [&](const VictimModel& m) {
    return adv.empty() ? 0.0 : 100.0 * m.accuracy(adv);
  };
  const double replay_before = replay(victim);
  TrainedModel defended = refinetune(victim, train, augmented, test, config);
  auto model = std::make_shared<const VictimModel>(defended.model);

  std::vector<Example> sample;
  for (const auto& e : log)
    sample.push_back({e.example_id, e.original_text, e.gold_label, e.dataset_tag});
  std::vector<AttackLogEntry> reattack =
      run_attacks(sample, engine, [&] { return sessions(model); }, workers);
  const MetricsReport after_report = compute_metrics(reattack);

  DefenseOutcome out{defense_report(before.acc_ba, before.acc_aa, after_report.acc_aa),
                     std::move(defended), std::move(reattack)};
  out.report.model_id = victim.model_id();
  out.report.defended_model_id = out.defended.model.model_id();
  out.report.n_augmented = adv.size();
  out.report.replay_before = replay_before;
  out.report.replay_after = replay(out.defended.model);
  return out;
}

namespace {

std::string num(double v) { return fmt::format("{:.4f}", v); }

std::string row(const std::vector<std::string>& fields) { return csv::format_row(fields) + "\n"; }

}  // namespace

std::string metrics_csv(const std::vector<MetricsReport>& reports) {
  std::string out = row({"model_id", "dataset_tag", "metric", "value"});
  for (const auto& r : reports) {
    const std::vector<std::pair<const char*, std::string>> rows = {
        {"n_samples", std::to_string(r.n_samples)},
        {"n_success", std::to_string(r.n_success)},
        {"n_failed", std::to_string(r.n_failed)},
        {"n_skipped", std::to_string(r.n_skipped)},
        {"n_error", std::to_string(r.n_error)},
        {"att_sr", num(r.att_sr)},
        {"acc_ba", num(r.acc_ba)},
        {"acc_aa", num(r.acc_aa)},
        {"att_dr", num(r.att_dr)},
        {"att_sr_excl_skipped", num(r.att_sr_excl)},
        {"acc_ba_excl_skipped", num(r.acc_ba_excl)},
        {"acc_aa_excl_skipped", num(r.acc_aa_excl)},
        {"att_dr_excl_skipped", num(r.att_dr_excl)},
        {"conf_ba", num(r.conf_ba)},
        {"conf_aa", num(r.conf_aa)},
        {"mean_queries", num(r.mean_queries)},
        {"mean_perturbed_words", num(r.mean_perturbed_words)},
    };
    for (const auto& [k, v] : rows) out += row({r.model_id, r.dataset_tag, k, v});
  }
  return out;
}

std::string transfer_csv(const std::vector<TransferCell>& cells) {
  std::string out = row({"source_model", "victim_model", "n", "available",
                                     "successes_available", "acc_x", "acc_xadv", "delta",
                                     "consistency"});
  for (const auto& c : cells)
    out += row({c.source_model, c.victim_model, std::to_string(c.n),
                            c.available ? "true" : "false",
                            std::to_string(c.successes_available),
                            c.available ? num(c.acc_x) : "", c.available ? num(c.acc_xadv) : "",
                            c.available ? num(c.delta) : "",
                            c.available ? num(c.consistency) : ""});
  return out;
}

std::string defense_csv(const std::vector<DefenseReport>& reports) {
  std::string out = row({"model_id", "metric", "value"});
  for (const auto& r : reports) {
    out += row({r.model_id, "acc_ba", num(r.acc_ba)});
    out += row({r.model_id, "acc_aa", num(r.acc_aa)});
    out += row({r.model_id, "adversarial_training_acc", num(r.adversarial_training_acc)});
    out += row({r.model_id, "recovery", num(r.recovery)});
    out += row({r.model_id, "n_augmented", std::to_string(r.n_augmented)});
    out += row({r.model_id, "replay_before", num(r.replay_before)});
    out += row({r.model_id, "replay_after", num(r.replay_after)});
    out += row({r.model_id, "defended_model_id", r.defended_model_id});
  }
  return out;
}

std::string render_metrics_table(const std::vector<MetricsReport>& reports) {
  std::string out = fmt::format("{:<28} {:<10} {:>8} {:>8} {:>8} {:>8}\n", "Model", "Dataset",
                                "Att_SR", "Acc_BA", "Acc_AA", "Att_DR");
  for (const auto& r : reports)
    out += fmt::format("{:<28} {:<10} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f}\n", r.model_id,
                       r.dataset_tag, r.att_sr, r.acc_ba, r.acc_aa, r.att_dr);
  return out;
}

std::string render_transfer_table(const std::vector<TransferCell>& cells) {
  std::string out = fmt::format("{:<24} {:<24} {:>8} {:>8} {:>8}\n", "Source", "Victim", "X",
                                "X_adv", "Delta");
  for (const auto& c : cells) {
    if (c.available)
      out += fmt::format("{:<24} {:<24} {:>8.2f} {:>8.2f} {:>8.2f}\n", c.source_model,
                         c.victim_model, c.acc_x, c.acc_xadv, c.delta);
    else
      out += fmt::format("{:<24} {:<24} unavailable: {} of {} successes\n", c.source_model,
                         c.victim_model, c.successes_available, c.n);
  }
  return out;
}

std::string render_defense_table(const std::vector<DefenseReport>& reports) {
  std::string out = fmt::format("{:<28} {:>8} {:>8} {:>10} {:>9}\n", "Model", "Acc_BA",
                                "Acc_AA", "Adv_Train", "Recovery");
  for (const auto& r : reports)
    out += fmt::format("{:<28} {:>8.2f} {:>8.2f} {:>10.2f} {:>+9.2f}\n", r.model_id, r.acc_ba,
                       r.acc_aa, r.adversarial_training_acc, r.recovery);
  return out;
}

}  // namespace advtext
