#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace advtext {

struct GloveConfig {
  std::size_t dim = 200;
  std::size_t window = 5;
  std::size_t min_count = 2;
  std::size_t epochs = 25;
  double x_max = 100.0;
  double alpha = 0.75;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> words, Eigen::MatrixXd vectors);

  std::size_t size() const { return words_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  bool contains(std::string_view word) const;
  // Row for `word`, or nullopt when the word is not in the table.
  std::optional<Eigen::RowVectorXd> vector(std::string_view word) const;
  const std::vector<std::string>& words() const { return words_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }

  // GloVe text format: one "word v1 v2 ..." line per entry.
  void save(const std::filesystem::path& path) const;
  static EmbeddingTable load(const std::filesystem::path& path);

 private:
  std::vector<std::string> words_;
  Eigen::MatrixXd vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Fits GloVe vectors (sum of word and context vectors) on tokenized
// sentences. Throws InvalidArgument for dim 0, an empty corpus, or a corpus
// with no co-occurring pair of retained words inside the window.
EmbeddingTable train_embeddings(const std::vector<std::vector<std::string>>& sentences,
                                const GloveConfig& config);

}  // namespace advtext
