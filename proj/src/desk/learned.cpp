#include "advtext/desk/learned.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advtext/core/error.hpp"
#include "advtext/core/rng.hpp"
#include "advtext/core/text.hpp"
#include "advtext/oracles/mock.hpp"

namespace advtext::desk {

using nn::Graph;
using nn::Matrix;
using nn::Var;

namespace {

std::vector<std::size_t> context_ids(const Vocabulary& vocab,
                                     const std::vector<std::string>& tokens,
                                     std::size_t position, std::size_t window) {
  std::vector<std::size_t> ids;
  const std::size_t lo = position >= window ? position - window : 0;
  const std::size_t hi = std::min(tokens.size(), position + window + 1);
  for (std::size_t i = lo; i < hi; ++i)
    if (i != position) ids.push_back(vocab.id(tokens[i]));
  if (ids.empty()) ids.push_back(Vocabulary::kPad);
  return ids;
}

}  // namespace

CbowMlm CbowMlm::train(const std::vector<std::vector<std::string>>& sentences,
                       const CbowConfig& config) {
  if (sentences.empty()) throw InvalidArgument("empty corpus");
  if (config.dim == 0 || config.window == 0)
    throw InvalidArgument("dim and window must be at least 1");
  auto state = std::make_shared<State>();
  state->vocab = Vocabulary::build(sentences, config.min_count);
  state->config = config;
  const std::size_t v = state->vocab.size();
  Rng rng(config.seed);
  state->emb = nn::Parameter("emb", nn::glorot(v, config.dim, rng));
  state->out_w = nn::Parameter("out.w", nn::glorot(config.dim, v, rng));
  state->out_b = nn::Parameter("out.b", Matrix::Zero(1, static_cast<Eigen::Index>(v)));

  struct Sample {
    std::vector<std::size_t> ctx;
    std::size_t target;
  };
  std::vector<Sample> samples;
  for (const auto& s : sentences)
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::size_t t = state->vocab.id(s[i]);
      if (t == Vocabulary::kUnk) continue;
      samples.push_back({context_ids(state->vocab, s, i, config.window), t});
    }
  if (samples.empty()) throw InvalidArgument("no in-vocabulary tokens to train on");

  nn::Adam adam(config.learning_rate);
  std::vector<nn::Parameter*> params{&state->emb, &state->out_w, &state->out_b};
  std::vector<std::size_t> order(samples.size());
  const std::size_t batch = 32;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = samples[order[k]];
        Graph g;
        Var h = mean_rows(gather_rows(g.param(state->emb), s.ctx));
        Var logits = add_row(matmul(h, g.param(state->out_w)), g.param(state->out_b));
        g.backward(scale(cross_entropy(logits, s.target), 1.0 / double(end - start)));
      }
      adam.step(params);
    }
  }
  return CbowMlm(std::move(state));
}

std::vector<double> CbowMlm::distribution(const std::vector<std::string>& tokens,
                                          std::size_t position) const {
  const State& s = *state_;
  std::vector<std::string> norm;
  norm.reserve(tokens.size());
  for (const auto& t : tokens) norm.push_back(text::normalize(t));
  const auto ctx = context_ids(s.vocab, norm, position, s.config.window);
  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(s.emb.value.cols());
  for (auto id : ctx) h += s.emb.value.row(static_cast<Eigen::Index>(id));
  h /= static_cast<double>(ctx.size());
  Eigen::RowVectorXd z = h * s.out_w.value + s.out_b.value.row(0);
  z(0) = z(1) = -std::numeric_limits<double>::infinity();
  const double mx = z.maxCoeff();
  Eigen::RowVectorXd p = (z.array() - mx).exp();
  p /= p.sum();
  return std::vector<double>(p.data(), p.data() + p.size());
}

std::vector<SynonymCandidate> CbowMlm::mask_fill(const MaskedQuery& query) {
  query.validate();
  const auto p = distribution(query.tokens, query.mask_position);
  std::vector<std::size_t> ids(p.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](auto a, auto b) { return p[a] > p[b]; });
  std::vector<SynonymCandidate> out;
  for (auto id : ids) {
    if (id <= Vocabulary::kUnk) continue;
    if (out.size() == query.top_k) break;
    out.push_back({state_->vocab.token(id), out.size(), p[id]});
  }
  return out;
}

SimilarityScore EmbeddingSimilarity::similarity(std::string_view a, std::string_view b) {
  auto mean_vector = [&](std::string_view s, bool& any) {
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(table_->dim()));
    std::size_t n = 0;
    for (const auto& w : text::word_runs(s)) {
      if (auto row = table_->vector(text::normalize(w))) {
        v += *row;
        ++n;
      }
    }
    any = n > 0;
    if (n) v /= static_cast<double>(n);
    return v;
  };
  bool ka = false, kb = false;
  const Eigen::RowVectorXd va = mean_vector(a, ka), vb = mean_vector(b, kb);
  if (!ka || !kb) return {a == b ? 1.0 : 0.0};
  const double na = va.norm(), nb = vb.norm();
  if (na == 0.0 || nb == 0.0) return {a == b ? 1.0 : 0.0};
  return {std::clamp(va.dot(vb) / (na * nb), -1.0, 1.0)};
}

DeskOracles DeskOracles::train(const LabeledDataset& corpus,
                               std::map<std::string, std::string> lexicon,
                               const DeskOracleConfig& config) {
  std::vector<std::vector<std::string>> lm_sentences, word_sentences;
  for (const auto& e : corpus.examples) {
    lm_sentences.push_back(text::word_symbol_tokens(e.text));
    std::vector<std::string> words;
    for (const auto& w : text::word_runs(e.text)) words.push_back(text::normalize(w));
    word_sentences.push_back(std::move(words));
  }
  CbowMlm mlm = CbowMlm::train(lm_sentences, config.mlm);
  auto emb = std::make_shared<const EmbeddingTable>(train_embeddings(word_sentences, config.glove));
  return DeskOracles(std::move(mlm), std::move(emb), std::move(lexicon));
}

OracleSession DeskOracles::session(std::unique_ptr<Classifier> classifier) const {
  OracleSession s;
  s.classifier = std::move(classifier);
  s.mlm = std::make_unique<CbowMlm>(mlm_);
  s.tagger = std::make_unique<mock::LexiconTagger>(lexicon_);
  s.similarity = std::make_unique<EmbeddingSimilarity>(embeddings_);
  return s;
}

}  // namespace advtext::desk
