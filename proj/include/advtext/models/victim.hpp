#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "advtext/core/types.hpp"
#include "advtext/models/glove.hpp"
#include "advtext/models/vocab.hpp"
#include "advtext/nn/autograd.hpp"
#include "advtext/oracles/oracles.hpp"

namespace advtext {

enum class Arch { kWordCnn, kWordLstm, kTransformer };

std::string_view to_string(Arch arch);
// Accepts "word_cnn", "word_lstm", "transformer_finetune" and the short
// aliases "cnn", "lstm", "transformer".
Arch parse_arch(std::string_view s);

// Architecture parameters (arch_params), with defaults:
//   word_cnn:    windows [3,4,5], filters 100, stopwords "builtin"
//   word_lstm:   hidden 150, stopwords "builtin"
//   transformer: d_model 64, heads 4, layers 2, ff 128, max_length 64
// The two word models embed into embedding_dim; the transformer uses d_model.
struct ModelSpec {
  Arch arch = Arch::kWordCnn;
  nlohmann::json arch_params = nlohmann::json::object();
  std::size_t embedding_dim = 200;
  LabelSpace label_space;
  std::uint64_t seed = 0;

  nlohmann::json resolved_params() const;
  nlohmann::ordered_json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);
};

struct TrainConfig {
  std::size_t epochs = 5;
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  double clip_norm = 5.0;
  // Vocabulary cut-off for the victim's own token table.
  std::size_t min_count = 1;
  // Word models: fit GloVe on the training split when no table is given.
  bool pretrain_embeddings = true;
  GloveConfig glove;

  nlohmann::ordered_json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct TrainReport {
  std::string model_id;
  double eval_accuracy = 0.0;  // held-out split only
  double train_accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t epochs = 0;
  double wall_time = 0.0;  // seconds
  double final_loss = 0.0;

  nlohmann::ordered_json to_json() const;
  static TrainReport from_json(const nlohmann::json& j);
};

// A trained classifier. Copies are deep and independent; prediction is
// const and safe to call from several threads at once.
class VictimModel {
 public:
  VictimModel(ModelSpec spec, Vocabulary vocab, std::string model_id);
  VictimModel(const VictimModel& other);
  VictimModel& operator=(const VictimModel& other);
  VictimModel(VictimModel&&) noexcept;
  VictimModel& operator=(VictimModel&&) noexcept;
  ~VictimModel();

  const ModelSpec& spec() const { return spec_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::string& model_id() const { return model_id_; }
  void set_model_id(std::string id) { model_id_ = std::move(id); }

  // Word models see the cleaned, normalized content words; the transformer
  // sees every word and symbol of the raw text.
  std::vector<std::string> tokenize(std::string_view text) const;
  std::vector<std::size_t> encode(std::string_view text) const;

  Prediction predict(std::string_view text) const;
  double accuracy(const std::vector<Example>& examples) const;

  nn::Var logits(nn::Graph& graph, const std::vector<std::size_t>& ids);
  std::vector<nn::Parameter*> parameters();
  const nn::Parameter& embedding() const;

  // Copies pretrained rows into the embedding layer for in-vocabulary
  // words; returns how many rows were set.
  std::size_t load_embeddings(const EmbeddingTable& table);

  void save_weights(const std::filesystem::path& path) const;
  void load_weights(const std::filesystem::path& path);

  struct Network;

 private:
  ModelSpec spec_;
  Vocabulary vocab_;
  std::string model_id_;
  std::unique_ptr<Network> net_;
};

// Tokens as the given architecture's model would see them.
std::vector<std::string> model_tokens(const ModelSpec& spec, std::string_view text);

struct TrainedModel {
  VictimModel model;
  TrainReport report;
};

// Trains a victim from scratch. Throws InvalidArgument before any training
// when the label spaces of spec, train and test differ, and TrainingDiverged
// when the loss becomes non-finite.
TrainedModel train_victim(const ModelSpec& spec, const LabeledDataset& train,
                          const LabeledDataset& test, const TrainConfig& config,
                          const EmbeddingTable* pretrained = nullptr);

// Continues training a copy of `base` on `augmented`, which must contain
// every example id of `original_train`. `base` stays usable.
TrainedModel refinetune(const VictimModel& base, const LabeledDataset& original_train,
                        const LabeledDataset& augmented, const LabeledDataset& test,
                        const TrainConfig& config);

// Registry layout: <root>/<model_id>/{spec.json, vocab.txt, weights.bin,
// report.json}.
std::filesystem::path save_model(const std::filesystem::path& registry,
                                 const VictimModel& model, const TrainReport& report);
TrainedModel load_model(const std::filesystem::path& model_dir);

// Classify oracle backed by a local model.
class ModelClassifier final : public Classifier {
 public:
  explicit ModelClassifier(std::shared_ptr<const VictimModel> model)
      : model_(std::move(model)) {}
  Prediction classify(std::string_view text) override { return model_->predict(text); }
  std::string model_id() const override { return model_->model_id(); }

 private:
  std::shared_ptr<const VictimModel> model_;
};

}  // namespace advtext
