#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "advtext/core/types.hpp"
#include "advtext/eval/metrics.hpp"
#include "advtext/humaneval/study.hpp"
#include "advtext/oracles/mock.hpp"
#include "advtext/oracles/oracles.hpp"
#include "reference_values.hpp"

namespace fixtures {

// Scores over k classes with `gold_prob` on `gold`. When `gold_wins` the
// rest is spread evenly so gold is the argmax; otherwise the rest goes to
// class (gold + 1) % k, which then wins.
advtext::Prediction shaped(std::size_t k, advtext::LabelIndex gold, double gold_prob,
                           bool gold_wins);

advtext::AttackLogEntry success_entry(const std::string& id, const std::string& model,
                                      const std::string& tag, const std::string& original,
                                      const std::string& adversarial);

// N entries whose gold probabilities average to the row's accuracies, with
// att_sr * N / 100 successes.
std::vector<advtext::AttackLogEntry> attack_log(const reference::AttackRow& row,
                                                std::size_t n = 1000);

// Source logs of `n` successes each and lookup victims scoring
// round(acc * n / 100) originals / adversarials correctly per cell.
struct TransferFixture {
  std::map<std::string, std::vector<advtext::AttackLogEntry>> logs;
  std::map<std::string, std::unique_ptr<advtext::mock::LookupClassifier>> victims;
  std::vector<advtext::NamedClassifier> named() const;
};
TransferFixture transfer_fixture(const std::string& dataset, std::size_t n = 245);

// Two-class keyword corpus, labels {positive, negative}. `planted` examples
// carry one positive keyword whose thesaurus list holds a negative keyword
// behind two decoys; the others carry a negative keyword with no flipping
// synonym.
struct MockCorpus {
  advtext::LabeledDataset data;
  std::map<std::string, advtext::LabelIndex> keywords;
  std::map<std::string, std::vector<std::string>> thesaurus;
  std::map<std::string, std::string> lexicon;
  std::set<std::string> planted;

  advtext::OracleSession session() const;
};
MockCorpus mock_corpus(std::size_t size = 50, std::size_t planted = 30);

// Study over three models with per-evaluator ratings whose group means hit
// the reference human-evaluation rows.
struct RatedStudy {
  advtext::humaneval::Study study;
  std::vector<advtext::humaneval::Evaluator> evaluators;
  std::vector<advtext::humaneval::RatingRecord> ratings;
};
RatedStudy rated_study(std::uint64_t seed = 11);

std::vector<advtext::AttackLogEntry> success_log(const std::string& model, std::size_t n,
                                                 const std::string& tag = "hard");

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
