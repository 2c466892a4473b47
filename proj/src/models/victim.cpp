#include "advtext/models/victim.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>

#include "advtext/attack/clean.hpp"
#include "advtext/core/dataset.hpp"
#include "advtext/core/error.hpp"
#include "advtext/core/hash.hpp"
#include "advtext/core/rng.hpp"
#include "advtext/core/text.hpp"

namespace advtext {

using nn::Graph;
using nn::Matrix;
using nn::Parameter;
using nn::Var;
using json = nlohmann::json;

std::string_view to_string(Arch arch) {
  switch (arch) {
    case Arch::kWordCnn: return "word_cnn";
    case Arch::kWordLstm: return "word_lstm";
    case Arch::kTransformer: return "transformer_finetune";
  }
  return "word_cnn";
}

Arch parse_arch(std::string_view s) {
  if (s == "word_cnn" || s == "cnn") return Arch::kWordCnn;
  if (s == "word_lstm" || s == "lstm") return Arch::kWordLstm;
  if (s == "transformer_finetune" || s == "transformer" || s == "bert")
    return Arch::kTransformer;
  throw InvalidArgument("unknown architecture: " + std::string(s));
}

json ModelSpec::resolved_params() const {
  json p;
  switch (arch) {
    case Arch::kWordCnn:
      p = {{"windows", {3, 4, 5}}, {"filters", 100}, {"stopwords", "builtin"}};
      break;
    case Arch::kWordLstm:
      p = {{"hidden", 150}, {"stopwords", "builtin"}};
      break;
    case Arch::kTransformer:
      p = {{"d_model", 64}, {"heads", 4}, {"layers", 2}, {"ff", 128}, {"max_length", 64}};
      break;
  }
  if (!arch_params.is_null()) {
    for (auto it = arch_params.begin(); it != arch_params.end(); ++it) {
      if (!p.contains(it.key()))
        throw InvalidArgument("unknown parameter '" + it.key() + "' for " +
                              std::string(to_string(arch)));
      p[it.key()] = it.value();
    }
  }
  return p;
}

nlohmann::ordered_json ModelSpec::to_json() const {
  nlohmann::ordered_json j;
  j["arch"] = to_string(arch);
  j["arch_params"] = resolved_params();
  j["embedding_dim"] = embedding_dim;
  j["labels"] = label_space.class_names();
  j["seed"] = seed;
  return j;
}

ModelSpec ModelSpec::from_json(const json& j) {
  ModelSpec s;
  s.arch = parse_arch(j.at("arch").get<std::string>());
  s.arch_params = j.value("arch_params", json::object());
  s.embedding_dim = j.value("embedding_dim", std::size_t{200});
  s.label_space = LabelSpace(j.at("labels").get<std::vector<std::string>>());
  s.seed = j.value("seed", std::uint64_t{0});
  s.resolved_params();
  return s;
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["epochs"] = epochs;
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["clip_norm"] = clip_norm;
  j["min_count"] = min_count;
  j["pretrain_embeddings"] = pretrain_embeddings;
  j["glove"] = {{"window", glove.window},        {"min_count", glove.min_count},
                {"epochs", glove.epochs},        {"x_max", glove.x_max},
                {"alpha", glove.alpha},          {"learning_rate", glove.learning_rate}};
  return j;
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.min_count = j.value("min_count", c.min_count);
  c.pretrain_embeddings = j.value("pretrain_embeddings", c.pretrain_embeddings);
  if (j.contains("glove")) {
    const auto& g = j.at("glove");
    c.glove.window = g.value("window", c.glove.window);
    c.glove.min_count = g.value("min_count", c.glove.min_count);
    c.glove.epochs = g.value("epochs", c.glove.epochs);
    c.glove.x_max = g.value("x_max", c.glove.x_max);
    c.glove.alpha = g.value("alpha", c.glove.alpha);
    c.glove.learning_rate = g.value("learning_rate", c.glove.learning_rate);
  }
  if (c.batch_size == 0) throw InvalidArgument("batch_size must be at least 1");
  return c;
}

nlohmann::ordered_json TrainReport::to_json() const {
  nlohmann::ordered_json j;
  j["model_id"] = model_id;
  j["eval_accuracy"] = eval_accuracy;
  j["train_accuracy"] = train_accuracy;
  j["train_size"] = train_size;
  j["test_size"] = test_size;
  j["epochs"] = epochs;
  j["wall_time"] = wall_time;
  j["final_loss"] = final_loss;
  return j;
}

TrainReport TrainReport::from_json(const json& j) {
  TrainReport r;
  r.model_id = j.at("model_id").get<std::string>();
  r.eval_accuracy = j.at("eval_accuracy").get<double>();
  r.train_accuracy = j.value("train_accuracy", 0.0);
  r.train_size = j.value("train_size", std::size_t{0});
  r.test_size = j.value("test_size", std::size_t{0});
  r.epochs = j.value("epochs", std::size_t{0});
  r.wall_time = j.value("wall_time", 0.0);
  r.final_loss = j.value("final_loss", 0.0);
  return r;
}

// ---------------------------------------------------------------------------
// Tokenization

namespace {

const StopwordList& cached_stopwords(const std::string& resource) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<StopwordList>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[resource];
  if (!slot) slot = std::make_unique<StopwordList>(StopwordList::from_resource(resource));
  return *slot;
}

}  // namespace

std::vector<std::string> model_tokens(const ModelSpec& spec, std::string_view input) {
  const json p = spec.resolved_params();
  if (spec.arch == Arch::kTransformer) {
    auto t = text::word_symbol_tokens(input);
    const auto max_len = p.at("max_length").get<std::size_t>();
    if (t.size() > max_len) t.resize(max_len);
    return t;
  }
  const CleanedText c = clean(input, cached_stopwords(p.at("stopwords").get<std::string>()));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(text::normalize(c.word(i).text));
  return out;
}

// ---------------------------------------------------------------------------
// Networks

struct VictimModel::Network {
  virtual ~Network() = default;
  virtual std::unique_ptr<Network> clone() const = 0;
  virtual Var forward(Graph& g, std::vector<std::size_t> ids) = 0;
  virtual std::vector<Parameter*> params() = 0;
  Parameter emb;
};

namespace {

Matrix zeros(std::size_t r, std::size_t c) {
  return Matrix::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

Matrix embedding_init(std::size_t vocab, std::size_t dim, Rng& rng) {
  Matrix m(static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-0.25, 0.25);
  m.row(0).setZero();
  return m;
}

struct Linear {
  Parameter w, b;
  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng)
      : w(name + ".w", nn::glorot(in, out, rng)), b(name + ".b", zeros(1, out)) {}
  Var operator()(Graph& g, Var x) { return add_row(matmul(x, g.param(w)), g.param(b)); }
};

struct WordCnn final : VictimModel::Network {
  std::vector<std::size_t> windows;
  std::vector<Linear> convs;
  Linear out;

  WordCnn(std::size_t vocab, std::size_t dim, std::vector<std::size_t> win, std::size_t filters,
          std::size_t classes, Rng& rng)
      : windows(std::move(win)) {
    emb = Parameter("embedding", embedding_init(vocab, dim, rng));
    for (auto w : windows)
      convs.emplace_back("conv" + std::to_string(w), w * dim, filters, rng);
    out = Linear("out", filters * windows.size(), classes, rng);
  }
  std::unique_ptr<Network> clone() const override { return std::make_unique<WordCnn>(*this); }
  Var forward(Graph& g, std::vector<std::size_t> ids) override {
    const std::size_t need = *std::max_element(windows.begin(), windows.end());
    while (ids.size() < need) ids.push_back(Vocabulary::kPad);
    Var x = gather_rows(g.param(emb), ids);
    std::vector<Var> pooled;
    for (std::size_t k = 0; k < windows.size(); ++k)
      pooled.push_back(max_rows(relu(convs[k](g, unfold(x, windows[k])))));
    return out(g, concat_cols(pooled));
  }
  std::vector<Parameter*> params() override {
    std::vector<Parameter*> p{&emb};
    for (auto& c : convs) {
      p.push_back(&c.w);
      p.push_back(&c.b);
    }
    p.push_back(&out.w);
    p.push_back(&out.b);
    return p;
  }
};

struct LstmDirection {
  Parameter wx, wh, b;
  LstmDirection() = default;
  LstmDirection(const std::string& name, std::size_t in, std::size_t hidden, Rng& rng)
      : wx(name + ".wx", nn::glorot(in, 4 * hidden, rng)),
        wh(name + ".wh", nn::glorot(hidden, 4 * hidden, rng)),
        b(name + ".b", zeros(1, 4 * hidden)) {
    // Gate order i, f, g, o; forget gate starts open.
    b.value.middleCols(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(hidden))
        .setOnes();
  }

  Var run(Graph& g, Var x, bool reverse, std::size_t hidden) {
    const std::size_t t_len = x.rows();
    Var xw = add_row(matmul(x, g.param(wx)), g.param(b));
    Var whv = g.param(wh);
    Var h = g.constant(zeros(1, hidden));
    Var c = g.constant(zeros(1, hidden));
    for (std::size_t s = 0; s < t_len; ++s) {
      const std::size_t t = reverse ? t_len - 1 - s : s;
      Var z = add(slice_rows(xw, t, 1), matmul(h, whv));
      Var i = sigmoid(slice_cols(z, 0, hidden));
      Var f = sigmoid(slice_cols(z, hidden, hidden));
      Var gg = tanh(slice_cols(z, 2 * hidden, hidden));
      Var o = sigmoid(slice_cols(z, 3 * hidden, hidden));
      c = add(mul(f, c), mul(i, gg));
      h = mul(o, tanh(c));
    }
    return h;
  }
};

struct WordLstm final : VictimModel::Network {
  std::size_t hidden;
  LstmDirection fwd, bwd;
  Linear out;

  WordLstm(std::size_t vocab, std::size_t dim, std::size_t hid, std::size_t classes, Rng& rng)
      : hidden(hid) {
    emb = Parameter("embedding", embedding_init(vocab, dim, rng));
    fwd = LstmDirection("fwd", dim, hidden, rng);
    bwd = LstmDirection("bwd", dim, hidden, rng);
    out = Linear("out", 2 * hidden, classes, rng);
  }
  std::unique_ptr<Network> clone() const override { return std::make_unique<WordLstm>(*this); }
  Var forward(Graph& g, std::vector<std::size_t> ids) override {
    if (ids.empty()) ids.push_back(Vocabulary::kPad);
    Var x = gather_rows(g.param(emb), ids);
    return out(g, nn::concat_cols({fwd.run(g, x, false, hidden), bwd.run(g, x, true, hidden)}));
  }
  std::vector<Parameter*> params() override {
    return {&emb,   &fwd.wx, &fwd.wh, &fwd.b, &bwd.wx,
            &bwd.wh, &bwd.b,  &out.w,  &out.b};
  }
};

struct EncoderLayer {
  Linear q, k, v, o, ff1, ff2;
  Parameter ln1_g, ln1_b, ln2_g, ln2_b;
  EncoderLayer() = default;
  EncoderLayer(const std::string& n, std::size_t d, std::size_t ff, Rng& rng)
      : q(n + ".q", d, d, rng),
        k(n + ".k", d, d, rng),
        v(n + ".v", d, d, rng),
        o(n + ".o", d, d, rng),
        ff1(n + ".ff1", d, ff, rng),
        ff2(n + ".ff2", ff, d, rng),
        ln1_g(n + ".ln1.g", Matrix::Ones(1, static_cast<Eigen::Index>(d))),
        ln1_b(n + ".ln1.b", zeros(1, d)),
        ln2_g(n + ".ln2.g", Matrix::Ones(1, static_cast<Eigen::Index>(d))),
        ln2_b(n + ".ln2.b", zeros(1, d)) {}

  Var operator()(Graph& g, Var x, std::size_t heads) {
    const std::size_t d = x.cols();
    const std::size_t dh = d / heads;
    Var qq = q(g, x), kk = k(g, x), vv = v(g, x);
    std::vector<Var> outs;
    for (std::size_t h = 0; h < heads; ++h) {
      Var qh = slice_cols(qq, h * dh, dh);
      Var kh = slice_cols(kk, h * dh, dh);
      Var vh = slice_cols(vv, h * dh, dh);
      Var att = softmax_rows(scale(matmul_nt(qh, kh), 1.0 / std::sqrt(double(dh))));
      outs.push_back(matmul(att, vh));
    }
    Var a = layer_norm_rows(add(x, o(g, concat_cols(outs))), g.param(ln1_g), g.param(ln1_b));
    Var f = ff2(g, relu(ff1(g, a)));
    return layer_norm_rows(add(a, f), g.param(ln2_g), g.param(ln2_b));
  }
  void collect(std::vector<Parameter*>& p) {
    for (Linear* l : {&q, &k, &v, &o, &ff1, &ff2}) {
      p.push_back(&l->w);
      p.push_back(&l->b);
    }
    for (Parameter* x : {&ln1_g, &ln1_b, &ln2_g, &ln2_b}) p.push_back(x);
  }
};

struct SmallTransformer final : VictimModel::Network {
  std::size_t heads, max_length;
  Parameter pos;
  std::vector<EncoderLayer> layers;
  Linear out;

  SmallTransformer(std::size_t vocab, std::size_t d, std::size_t h, std::size_t n_layers,
                   std::size_t ff, std::size_t max_len, std::size_t classes, Rng& rng)
      : heads(h), max_length(max_len) {
    if (h == 0 || d % h != 0) throw InvalidArgument("d_model must be divisible by heads");
    emb = Parameter("embedding", embedding_init(vocab, d, rng));
    Matrix p(static_cast<Eigen::Index>(max_len), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = rng.normal(0.0, 0.02);
    pos = Parameter("position", std::move(p));
    for (std::size_t l = 0; l < n_layers; ++l)
      layers.emplace_back("layer" + std::to_string(l), d, ff, rng);
    out = Linear("out", d, classes, rng);
  }
  std::unique_ptr<Network> clone() const override {
    return std::make_unique<SmallTransformer>(*this);
  }
  Var forward(Graph& g, std::vector<std::size_t> ids) override {
    if (ids.empty()) ids.push_back(Vocabulary::kPad);
    if (ids.size() > max_length) ids.resize(max_length);
    Var x = add(gather_rows(g.param(emb), ids), slice_rows(g.param(pos), 0, ids.size()));
    for (auto& layer : layers) x = layer(g, x, heads);
    return out(g, mean_rows(x));
  }
  std::vector<Parameter*> params() override {
    std::vector<Parameter*> p{&emb, &pos};
    for (auto& l : layers) l.collect(p);
    p.push_back(&out.w);
    p.push_back(&out.b);
    return p;
  }
};

std::unique_ptr<VictimModel::Network> make_network(const ModelSpec& spec, std::size_t vocab) {
  const json p = spec.resolved_params();
  const std::size_t classes = spec.label_space.size();
  if (classes < 2) throw InvalidArgument("a classifier needs at least two classes");
  Rng rng(derive_seed(spec.seed, 1));
  switch (spec.arch) {
    case Arch::kWordCnn:
      return std::make_unique<WordCnn>(vocab, spec.embedding_dim,
                                       p.at("windows").get<std::vector<std::size_t>>(),
                                       p.at("filters").get<std::size_t>(), classes, rng);
    case Arch::kWordLstm:
      return std::make_unique<WordLstm>(vocab, spec.embedding_dim,
                                        p.at("hidden").get<std::size_t>(), classes, rng);
    case Arch::kTransformer:
      return std::make_unique<SmallTransformer>(
          vocab, p.at("d_model").get<std::size_t>(), p.at("heads").get<std::size_t>(),
          p.at("layers").get<std::size_t>(), p.at("ff").get<std::size_t>(),
          p.at("max_length").get<std::size_t>(), classes, rng);
  }
  throw InvalidArgument("unknown architecture");
}

}  // namespace

// ---------------------------------------------------------------------------
// VictimModel

VictimModel::VictimModel(ModelSpec spec, Vocabulary vocab, std::string model_id)
    : spec_(std::move(spec)), vocab_(std::move(vocab)), model_id_(std::move(model_id)) {
  net_ = make_network(spec_, vocab_.size());
}

VictimModel::VictimModel(const VictimModel& other)
    : spec_(other.spec_), vocab_(other.vocab_), model_id_(other.model_id_),
      net_(other.net_->clone()) {}

VictimModel& VictimModel::operator=(const VictimModel& other) {
  if (this != &other) {
    spec_ = other.spec_;
    vocab_ = other.vocab_;
    model_id_ = other.model_id_;
    net_ = other.net_->clone();
  }
  return *this;
}

VictimModel::VictimModel(VictimModel&&) noexcept = default;
VictimModel& VictimModel::operator=(VictimModel&&) noexcept = default;
VictimModel::~VictimModel() = default;

std::vector<std::string> VictimModel::tokenize(std::string_view input) const {
  return model_tokens(spec_, input);
}

std::vector<std::size_t> VictimModel::encode(std::string_view input) const {
  return vocab_.encode(tokenize(input));
}

Prediction VictimModel::predict(std::string_view input) const {
  Graph g(false);
  Var z = net_->forward(g, encode(input));
  const Matrix& m = z.value();
  return Prediction::from_logits(std::vector<double>(m.data(), m.data() + m.size()));
}

double VictimModel::accuracy(const std::vector<Example>& examples) const {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& e : examples) correct += predict(e.text).label() == e.gold_label;
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

Var VictimModel::logits(Graph& graph, const std::vector<std::size_t>& ids) {
  return net_->forward(graph, ids);
}

std::vector<Parameter*> VictimModel::parameters() { return net_->params(); }

const Parameter& VictimModel::embedding() const { return net_->emb; }

std::size_t VictimModel::load_embeddings(const EmbeddingTable& table) {
  if (spec_.arch == Arch::kTransformer)
    throw InvalidArgument("the transformer does not take word embeddings");
  if (table.dim() != spec_.embedding_dim)
    throw InvalidArgument("embedding table dimension " + std::to_string(table.dim()) +
                          " does not match embedding_dim " +
                          std::to_string(spec_.embedding_dim));
  std::size_t n = 0;
  for (std::size_t id = 2; id < vocab_.size(); ++id) {
    if (auto v = table.vector(vocab_.token(id))) {
      net_->emb.value.row(static_cast<Eigen::Index>(id)) = *v;
      ++n;
    }
  }
  return n;
}

namespace {
constexpr char kWeightsMagic[8] = {'A', 'D', 'V', 'W', 'E', 'I', 'G', '1'};
}

void VictimModel::save_weights(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write weights " + path.string());
  out.write(kWeightsMagic, sizeof kWeightsMagic);
  auto params = net_->params();
  const std::uint64_t count = params.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (const Parameter* p : params) {
    const std::uint64_t len = p->name.size();
    const std::int64_t rows = p->value.rows(), cols = p->value.cols();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(p->name.data(), static_cast<std::streamsize>(len));
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(double) * p->value.size()));
  }
}

void VictimModel::load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read weights " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + 8, kWeightsMagic))
    throw DataError("not a weights file: " + path.string());
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  auto params = net_->params();
  if (count != params.size()) throw DataError("weights file has the wrong parameter count");
  for (Parameter* p : params) {
    std::uint64_t len = 0;
    std::int64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string name(len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(len));
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    if (!in || name != p->name || rows != p->value.rows() || cols != p->value.cols())
      throw DataError("weights file does not match parameter " + p->name);
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(sizeof(double) * p->value.size()));
    if (!in) throw DataError("truncated weights file");
    p->zero_grad();
  }
}

// ---------------------------------------------------------------------------
// Training

namespace {

void check_label_spaces(const ModelSpec& spec, const LabeledDataset& train,
                        const LabeledDataset& test) {
  if (!(spec.label_space == train.label_space))
    throw InvalidArgument("label space of the training set differs from the model spec");
  if (!(spec.label_space == test.label_space))
    throw InvalidArgument("label space of the test set differs from the model spec");
}

struct FitResult {
  double final_loss = 0.0;
};

FitResult fit(VictimModel& model, const LabeledDataset& train, const TrainConfig& config,
              std::uint64_t seed) {
  if (train.empty()) throw InvalidArgument("empty training set");
  std::vector<std::vector<std::size_t>> encoded;
  encoded.reserve(train.size());
  for (const auto& e : train.examples) encoded.push_back(model.encode(e.text));

  nn::Adam adam(config.learning_rate, 0.9, 0.999, 1e-8, config.clip_norm);
  auto params = model.parameters();
  for (auto* p : params) p->zero_grad();
  std::vector<std::size_t> order(train.size());
  FitResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 100 + epoch));
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        Graph g;
        Var loss = scale(cross_entropy(model.logits(g, encoded[i]),
                                       train.examples[i].gold_label),
                         inv);
        const double l = loss.value()(0, 0);
        if (!std::isfinite(l))
          throw TrainingDiverged("loss is not finite at epoch " + std::to_string(epoch) +
                                 ", example " + train.examples[i].id + " (value " +
                                 std::to_string(l) + ")");
        batch_loss += l;
        g.backward(loss);
      }
      const double norm = adam.step(params);
      if (!std::isfinite(norm))
        throw TrainingDiverged("gradient norm is not finite at epoch " +
                               std::to_string(epoch) + ", batch starting " +
                               std::to_string(start));
      epoch_loss += batch_loss * static_cast<double>(end - start);
    }
    result.final_loss = epoch_loss / static_cast<double>(train.size());
  }
  return result;
}

std::string short_hash(const std::string& s) { return hash_hex(s).substr(0, 8); }

}  // namespace

TrainedModel train_victim(const ModelSpec& spec, const LabeledDataset& train,
                          const LabeledDataset& test, const TrainConfig& config,
                          const EmbeddingTable* pretrained) {
  check_label_spaces(spec, train, test);
  if (spec.arch != Arch::kTransformer && spec.embedding_dim == 0)
    throw InvalidArgument("embedding_dim must be at least 1");
  const auto start = std::chrono::steady_clock::now();

  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(train.size());
  for (const auto& e : train.examples) sentences.push_back(model_tokens(spec, e.text));
  Vocabulary vocab = Vocabulary::build(sentences, config.min_count);

  const std::string id = std::string(to_string(spec.arch)) + "-" +
                         short_hash(spec.to_json().dump() + dataset_hash(train) +
                                    config.to_json().dump());
  VictimModel model(spec, std::move(vocab), id);

  if (spec.arch != Arch::kTransformer) {
    if (pretrained) {
      model.load_embeddings(*pretrained);
    } else if (config.pretrain_embeddings) {
      GloveConfig g = config.glove;
      g.dim = spec.embedding_dim;
      g.seed = derive_seed(spec.seed, 2);
      model.load_embeddings(train_embeddings(sentences, g));
    }
  }

  const FitResult fr = fit(model, train, config, derive_seed(spec.seed, 3));
  TrainReport report;
  report.model_id = id;
  report.eval_accuracy = model.accuracy(test.examples);
  report.train_accuracy = model.accuracy(train.examples);
  report.train_size = train.size();
  report.test_size = test.size();
  report.epochs = config.epochs;
  report.final_loss = fr.final_loss;
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), report};
}

TrainedModel refinetune(const VictimModel& base, const LabeledDataset& original_train,
                        const LabeledDataset& augmented, const LabeledDataset& test,
                        const TrainConfig& config) {
  check_label_spaces(base.spec(), augmented, test);
  std::set<std::string> ids;
  for (const auto& e : augmented.examples) ids.insert(e.id);
  for (const auto& e : original_train.examples)
    if (!ids.count(e.id))
      throw InvalidArgument("augmented set is missing original example " + e.id);
  const auto start = std::chrono::steady_clock::now();

  VictimModel model = base;
  const std::string tag = short_hash(base.model_id() + dataset_hash(augmented) +
                                     config.to_json().dump());
  model.set_model_id(base.model_id() + "+ft-" + tag);
  const FitResult fr = fit(model, augmented, config,
                           derive_seed(base.spec().seed, std::stoull(tag, nullptr, 16)));
  TrainReport report;
  report.model_id = model.model_id();
  report.eval_accuracy = model.accuracy(test.examples);
  report.train_accuracy = model.accuracy(augmented.examples);
  report.train_size = augmented.size();
  report.test_size = test.size();
  report.epochs = config.epochs;
  report.final_loss = fr.final_loss;
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), report};
}

std::filesystem::path save_model(const std::filesystem::path& registry,
                                 const VictimModel& model, const TrainReport& report) {
  const auto dir = registry / model.model_id();
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "spec.json");
    out << model.spec().to_json().dump(2) << '\n';
  }
  model.vocab().save(dir / "vocab.txt");
  model.save_weights(dir / "weights.bin");
  {
    std::ofstream out(dir / "report.json");
    out << report.to_json().dump(2) << '\n';
  }
  return dir;
}

TrainedModel load_model(const std::filesystem::path& model_dir) {
  auto read_json = [&](const char* name) {
    std::ifstream in(model_dir / name);
    if (!in) throw Error("model registry entry lacks " + std::string(name) + ": " +
                         model_dir.string());
    return json::parse(in);
  };
  ModelSpec spec = ModelSpec::from_json(read_json("spec.json"));
  TrainReport report = TrainReport::from_json(read_json("report.json"));
  VictimModel model(std::move(spec), Vocabulary::load(model_dir / "vocab.txt"),
                    report.model_id);
  model.load_weights(model_dir / "weights.bin");
  return {std::move(model), report};
}

}  // namespace advtext
