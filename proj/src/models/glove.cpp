#include "advtext/models/glove.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "advtext/core/error.hpp"
#include "advtext/core/rng.hpp"

namespace advtext {

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, Eigen::MatrixXd vectors)
    : words_(std::move(words)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(words_.size()) != vectors_.rows())
    throw InvalidArgument("embedding table: word count does not match rows");
  for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

bool EmbeddingTable::contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

std::optional<Eigen::RowVectorXd> EmbeddingTable::vector(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return Eigen::RowVectorXd(vectors_.row(static_cast<Eigen::Index>(it->second)));
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write embeddings " + path.string());
  out.precision(17);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i];
    for (Eigen::Index j = 0; j < vectors_.cols(); ++j)
      out << ' ' << vectors_(static_cast<Eigen::Index>(i), j);
    out << '\n';
  }
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read embeddings " + path.string());
  std::vector<std::string> words;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string w;
    ss >> w;
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (!rows.empty() && v.size() != rows.front().size())
      throw DataError("embedding row has the wrong dimension", row);
    words.push_back(w);
    rows.push_back(std::move(v));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return EmbeddingTable(std::move(words), std::move(m));
}

EmbeddingTable train_embeddings(const std::vector<std::vector<std::string>>& sentences,
                                const GloveConfig& config) {
  if (config.dim == 0) throw InvalidArgument("embedding dimension must be at least 1");
  if (config.window == 0) throw InvalidArgument("co-occurrence window must be at least 1");
  if (sentences.empty()) throw InvalidArgument("empty corpus");

  std::map<std::string, std::size_t> counts;
  for (const auto& s : sentences)
    for (const auto& t : s) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [w, c] : counts)
    if (c >= config.min_count) kept.emplace_back(w, c);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> words;
  for (auto& [w, c] : kept) {
    index.emplace(w, words.size());
    words.push_back(w);
  }

  std::map<std::pair<std::size_t, std::size_t>, double> cooc;
  for (const auto& s : sentences) {
    std::vector<std::size_t> ids;
    for (const auto& t : s) {
      auto it = index.find(t);
      if (it != index.end()) ids.push_back(it->second);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t d = 1; d <= config.window && i + d < ids.size(); ++d) {
        const double w = 1.0 / static_cast<double>(d);
        cooc[{ids[i], ids[i + d]}] += w;
        cooc[{ids[i + d], ids[i]}] += w;
      }
    }
  }
  if (cooc.empty())
    throw InvalidArgument("corpus smaller than the co-occurrence window: no word pairs");

  const auto v = static_cast<Eigen::Index>(words.size());
  const auto d = static_cast<Eigen::Index>(config.dim);
  Rng rng(config.seed);
  Eigen::MatrixXd w(v, d), c(v, d);
  for (Eigen::Index i = 0; i < v; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      w(i, j) = (rng.uniform() - 0.5) / static_cast<double>(d);
      c(i, j) = (rng.uniform() - 0.5) / static_cast<double>(d);
    }
  Eigen::VectorXd bw = Eigen::VectorXd::Zero(v), bc = Eigen::VectorXd::Zero(v);
  Eigen::MatrixXd gw = Eigen::MatrixXd::Ones(v, d), gc = Eigen::MatrixXd::Ones(v, d);
  Eigen::VectorXd gbw = Eigen::VectorXd::Ones(v), gbc = Eigen::VectorXd::Ones(v);

  struct Entry {
    Eigen::Index i, j;
    double x;
  };
  std::vector<Entry> entries;
  entries.reserve(cooc.size());
  for (auto& [k, x] : cooc)
    entries.push_back({static_cast<Eigen::Index>(k.first), static_cast<Eigen::Index>(k.second), x});

  const double lr = config.learning_rate;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<Entry>(entries));
    for (const auto& e : entries) {
      const double weight =
          e.x < config.x_max ? std::pow(e.x / config.x_max, config.alpha) : 1.0;
      const double diff = w.row(e.i).dot(c.row(e.j)) + bw(e.i) + bc(e.j) - std::log(e.x);
      const double f = weight * diff;
      const Eigen::RowVectorXd grad_w = f * c.row(e.j);
      const Eigen::RowVectorXd grad_c = f * w.row(e.i);
      w.row(e.i).array() -= lr * grad_w.array() / gw.row(e.i).array().sqrt();
      c.row(e.j).array() -= lr * grad_c.array() / gc.row(e.j).array().sqrt();
      gw.row(e.i).array() += grad_w.array().square();
      gc.row(e.j).array() += grad_c.array().square();
      bw(e.i) -= lr * f / std::sqrt(gbw(e.i));
      bc(e.j) -= lr * f / std::sqrt(gbc(e.j));
      gbw(e.i) += f * f;
      gbc(e.j) += f * f;
    }
  }
  return EmbeddingTable(std::move(words), w + c);
}

}  // namespace advtext
