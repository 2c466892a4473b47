#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "advtext/core/types.hpp"

namespace advtext {

// The four black-box oracles an attack talks to. The engine is compiled
// against these interfaces only; a victim model is reachable exclusively
// through Classifier::classify.

struct MaskedQuery {
  // Sentence segmented into tokens; tokens[mask_position] holds the word to
  // be masked. Adapters substitute their own mask token.
  std::vector<std::string> tokens;
  std::size_t mask_position = 0;
  std::size_t top_k = 50;

  // Throws InvalidArgument when the position is out of range or top_k is 0.
  void validate() const;
};

struct SynonymCandidate {
  std::string token;
  std::size_t mlm_rank = 0;
  double mlm_score = 0.0;

  friend bool operator==(const SynonymCandidate&, const SynonymCandidate&) = default;
};

struct PosTagSequence {
  std::vector<std::string> tags;
};

struct SimilarityScore {
  double value = 0.0;  // cosine, in [-1, 1]
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Prediction classify(std::string_view text) = 0;
  virtual std::string model_id() const { return "anonymous"; }
};

class MaskedLanguageModel {
 public:
  virtual ~MaskedLanguageModel() = default;
  // At most top_k candidates, rank-ordered by decreasing score.
  virtual std::vector<SynonymCandidate> mask_fill(const MaskedQuery& query) = 0;
};

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  // One tag per token; unknown words tag as "X".
  virtual PosTagSequence pos_tag(const std::vector<std::string>& tokens) = 0;
};

class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual SimilarityScore similarity(std::string_view a, std::string_view b) = 0;
};

// Non-owning bundle handed to the attack engine for one attack session.
struct OracleSet {
  Classifier& classifier;
  MaskedLanguageModel& mlm;
  PosTagger& tagger;
  SimilarityScorer& similarity;
};

// Owning bundle, one per worker.
struct OracleSession {
  std::unique_ptr<Classifier> classifier;
  std::unique_ptr<MaskedLanguageModel> mlm;
  std::unique_ptr<PosTagger> tagger;
  std::unique_ptr<SimilarityScorer> similarity;

  OracleSet view() const { return {*classifier, *mlm, *tagger, *similarity}; }
};

// Decorator counting classify calls. Not thread-safe; one per attack.
class CountingClassifier final : public Classifier {
 public:
  explicit CountingClassifier(Classifier& inner) : inner_(inner) {}
  Prediction classify(std::string_view text) override {
    ++count_;
    return inner_.classify(text);
  }
  std::string model_id() const override { return inner_.model_id(); }
  std::size_t count() const { return count_; }

 private:
  Classifier& inner_;
  std::size_t count_ = 0;
};

// Drops candidates that are not single whole words (continuation pieces,
// punctuation, digits) or equal the mask token, then truncates to top_k and
// re-ranks densely. Order is preserved, so the result for k is a prefix of
// the result for k+1.
std::vector<SynonymCandidate> keep_whole_words(std::vector<SynonymCandidate> raw,
                                               std::string_view mask_token,
                                               std::size_t top_k);

// Maps a tagger's native tag onto NOUN/VERB/ADJ/ADV/OTHER. Understands the
// Universal, Penn Treebank and CAMeL (Arabic) tag families.
std::string coarse_pos(std::string_view tag);

}  // namespace advtext
