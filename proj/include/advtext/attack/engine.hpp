#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "advtext/attack/clean.hpp"
#include "advtext/core/types.hpp"
#include "advtext/oracles/oracles.hpp"

namespace advtext {

enum class ImportanceMode {
  kOnce,              // rank once on the original sentence
  kAfterEachSwap,     // re-rank the remaining words after every applied swap
};

enum class SimilarityReference {
  kOriginal,  // candidate sentences are compared to the original
  kCurrent,   // ... to the currently perturbed sentence
};

struct AttackConfig {
  std::size_t top_k = 50;
  double sim_threshold = 0.80;
  std::optional<std::size_t> max_words_perturbed;  // nullopt: unlimited
  std::string stopword_resource = "builtin";
  std::string mask_token = "[MASK]";
  std::uint64_t seed = 0;
  ImportanceMode importance_mode = ImportanceMode::kOnce;
  SimilarityReference similarity_reference = SimilarityReference::kOriginal;

  // Throws InvalidArgument unless 0 < sim_threshold <= 1 and top_k >= 1.
  void validate() const;

  // Canonical form; keys in fixed order.
  nlohmann::ordered_json to_json() const;
  static AttackConfig from_json(const nlohmann::json& j);
  // Stable hash of to_json(), recorded in every log entry.
  std::string hash() const;
};

struct RankedWord {
  std::size_t position = 0;  // index into the cleaned content-word list
  std::string word;
  double score = 0.0;

  friend bool operator==(const RankedWord&, const RankedWord&) = default;
};

// Sorted by score descending, ties broken by lower position.
struct ImportanceRanking {
  std::vector<RankedWord> entries;
};

// Importance of each content word: P(y|x) - P(y|x without the word), y the
// label predicted for the unmodified text. Issues exactly size()+1
// classify calls (one for the original text).
ImportanceRanking rank_word_importance(std::string_view text, const CleanedText& cleaned,
                                       Classifier& classifier);

// Variant reusing an already computed prediction for `text`; issues
// exactly size() calls.
ImportanceRanking rank_word_importance(std::string_view text, const CleanedText& cleaned,
                                       const Prediction& original,
                                       Classifier& classifier);

// One attack target: the sentence being perturbed and the sentence that
// similarity is measured against.
struct SubstitutionContext {
  std::string_view text;           // current sentence
  const CleanedText& cleaned;      // its tokens
  std::string_view reference;      // sentence for the similarity filter
};

// mask_fill(top_k) -> drop non-word and identity candidates -> POS filter
// (coarse tag of the candidate in sentence context equals the original
// word's) -> similarity filter (>= sim_threshold). Survivors keep MLM order.
// victim_score_delta and flipped are left for the caller to fill.
std::vector<CandidateSubstitution> propose_candidates(const SubstitutionContext& ctx,
                                                      std::size_t position,
                                                      MaskedLanguageModel& mlm,
                                                      PosTagger& tagger,
                                                      SimilarityScorer& similarity,
                                                      const AttackConfig& config);

struct AttackResult {
  AttackLogEntry entry;
  ImportanceRanking ranking;
  std::size_t candidates_evaluated = 0;
};

// Greedy synonym-substitution attack on one example. The prediction for
// the unmodified text decides the label to flip; examples it already
// misclassifies are skipped after one query.
class AttackEngine {
 public:
  explicit AttackEngine(AttackConfig config);
  AttackEngine(AttackConfig config, StopwordList stopwords);

  AttackResult attack(const Example& example, const OracleSet& oracles) const;

  const AttackConfig& config() const { return config_; }
  const StopwordList& stopwords() const { return stopwords_; }
  const std::string& config_hash() const { return config_hash_; }

 private:
  AttackConfig config_;
  StopwordList stopwords_;
  std::string config_hash_;
};

using OracleSessionFactory = std::function<OracleSession()>;

// Attacks `examples` with `workers` threads, each owning one oracle session
// from `factory`. Output order follows `examples`. `on_entry`, if set, is
// called under a lock as each entry completes.
std::vector<AttackLogEntry> run_attacks(
    const std::vector<Example>& examples, const AttackEngine& engine,
    const OracleSessionFactory& factory, std::size_t workers,
    const std::function<void(const AttackLogEntry&)>& on_entry = {});

}  // namespace advtext
