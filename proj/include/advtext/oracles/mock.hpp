#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "advtext/oracles/oracles.hpp"

// Deterministic, dependency-free oracles for tests and desk-scale runs.
namespace advtext::mock {

// Scores classes by counting planted keywords. With h_c keyword hits for
// class c the logits are strength * h_c; no hits (including empty text)
// gives the uniform distribution. The default strength ln(9) makes a single
// hit in a two-class space score [0.9, 0.1].
class KeywordClassifier final : public Classifier {
 public:
  KeywordClassifier(std::size_t num_classes,
                    std::map<std::string, LabelIndex> keywords,
                    double strength = 2.1972245773362196);

  Prediction classify(std::string_view text) override;
  std::string model_id() const override { return model_id_; }
  void set_model_id(std::string id) { model_id_ = std::move(id); }

  std::size_t num_classes() const { return num_classes_; }

 private:
  std::size_t num_classes_;
  std::unordered_map<std::string, LabelIndex> keywords_;
  double strength_;
  std::string model_id_ = "mock-keyword";
};

// Fixed word -> ranked synonyms dictionary. Scores are 1/(rank+1).
class ThesaurusMlm final : public MaskedLanguageModel {
 public:
  explicit ThesaurusMlm(std::map<std::string, std::vector<std::string>> entries);
  std::vector<SynonymCandidate> mask_fill(const MaskedQuery& query) override;

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

class LexiconTagger final : public PosTagger {
 public:
  explicit LexiconTagger(std::map<std::string, std::string> lexicon);
  PosTagSequence pos_tag(const std::vector<std::string>& tokens) override;

 private:
  std::unordered_map<std::string, std::string> lexicon_;
};

// |tokens(a) & tokens(b)| / |tokens(a) | tokens(b)| over whitespace tokens.
class OverlapSimilarity final : public SimilarityScorer {
 public:
  SimilarityScore similarity(std::string_view a, std::string_view b) override;
};

// Classifier with a fixed text -> label table; unknown texts fall back to a
// default label. Scores put `confidence` on the label and spread the rest.
class LookupClassifier final : public Classifier {
 public:
  LookupClassifier(std::size_t num_classes, std::map<std::string, LabelIndex> table,
                   LabelIndex fallback = 0, double confidence = 0.9);
  Prediction classify(std::string_view text) override;

 private:
  std::size_t num_classes_;
  std::map<std::string, LabelIndex, std::less<>> table_;
  LabelIndex fallback_;
  double confidence_;
};

}  // namespace advtext::mock
