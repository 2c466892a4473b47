#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "advtext/core/types.hpp"
#include "advtext/models/glove.hpp"
#include "advtext/models/vocab.hpp"
#include "advtext/nn/autograd.hpp"
#include "advtext/oracles/oracles.hpp"

// Small learned stand-ins for the pretrained oracles, trained on the
// corpus at hand so a full attack can run offline on a CPU.
namespace advtext::desk {

struct CbowConfig {
  std::size_t dim = 32;
  std::size_t window = 2;
  std::size_t epochs = 8;
  double learning_rate = 0.01;
  std::size_t min_count = 1;
  std::uint64_t seed = 0;
};

// Continuous bag-of-words masked-word model: the masked token is predicted
// by a softmax over the vocabulary from the mean of its context embeddings.
// Copies share the trained weights; mask_fill is const-safe across threads.
class CbowMlm final : public MaskedLanguageModel {
 public:
  static CbowMlm train(const std::vector<std::vector<std::string>>& sentences,
                       const CbowConfig& config);

  std::vector<SynonymCandidate> mask_fill(const MaskedQuery& query) override;
  // Full distribution over the vocabulary for a context (ids 0 and 1 get 0).
  std::vector<double> distribution(const std::vector<std::string>& tokens,
                                   std::size_t position) const;
  const Vocabulary& vocab() const { return state_->vocab; }

 private:
  struct State {
    Vocabulary vocab;
    CbowConfig config;
    nn::Parameter emb, out_w, out_b;
  };
  explicit CbowMlm(std::shared_ptr<const State> s) : state_(std::move(s)) {}
  std::shared_ptr<const State> state_;
};

// Cosine between mean word vectors. Texts without any known word score 1
// against an identical text and 0 otherwise.
class EmbeddingSimilarity final : public SimilarityScorer {
 public:
  explicit EmbeddingSimilarity(std::shared_ptr<const EmbeddingTable> table)
      : table_(std::move(table)) {}
  SimilarityScore similarity(std::string_view a, std::string_view b) override;

 private:
  std::shared_ptr<const EmbeddingTable> table_;
};

struct DeskOracleConfig {
  CbowConfig mlm;
  GloveConfig glove{.dim = 50, .window = 5, .min_count = 1, .epochs = 30};
};

// Oracles fitted on one corpus plus a POS lexicon. session() hands out
// independent per-worker views that share the trained weights.
class DeskOracles {
 public:
  static DeskOracles train(const LabeledDataset& corpus,
                           std::map<std::string, std::string> lexicon,
                           const DeskOracleConfig& config);

  OracleSession session(std::unique_ptr<Classifier> classifier) const;
  const CbowMlm& mlm() const { return mlm_; }
  std::shared_ptr<const EmbeddingTable> embeddings() const { return embeddings_; }
  const std::map<std::string, std::string>& lexicon() const { return lexicon_; }

 private:
  DeskOracles(CbowMlm mlm, std::shared_ptr<const EmbeddingTable> emb,
              std::map<std::string, std::string> lexicon)
      : mlm_(std::move(mlm)), embeddings_(std::move(emb)), lexicon_(std::move(lexicon)) {}
  CbowMlm mlm_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  std::map<std::string, std::string> lexicon_;
};

}  // namespace advtext::desk
