#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "advtext/core/rng.hpp"

// A small reverse-mode autodiff tape over dense matrices, sized for the
// victim classifiers trained here (word CNN, BiLSTM, small transformer).
namespace advtext::nn {

using Matrix = Eigen::MatrixXd;

// Trainable tensor with its gradient accumulator and Adam moments.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;

  Parameter() = default;
  Parameter(std::string n, Matrix init);
  void zero_grad() { grad.setZero(); }
};

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng);

class Graph;

// Handle to a node on a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}
  const Matrix& value() const;
  std::size_t rows() const { return static_cast<std::size_t>(value().rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(value().cols()); }
  Graph* graph() const { return graph_; }
  std::size_t id() const { return id_; }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

class Graph {
 public:
  using Backward = std::function<void(Graph&, std::size_t)>;

  // With tracking off, parameters enter as constants and no tape is kept.
  explicit Graph(bool track_gradients = true) : track_(track_gradients) {}

  // Wraps a parameter; gradients flow into parameter.grad on backward().
  Var param(Parameter& p);
  // Read-only use; only valid on a graph that does not track gradients.
  Var param(const Parameter& p);
  Var constant(Matrix value);

  // Runs reverse accumulation from a 1x1 node.
  void backward(Var loss);

  const Matrix& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.param ? n.param->value : n.value;
  }
  // Parameter leaves accumulate straight into the parameter's gradient.
  Matrix& grad(std::size_t id) {
    Node& n = nodes_[id];
    return n.param ? n.param->grad : n.grad;
  }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

  // Appends an op node. `inputs` decide whether it needs a gradient.
  Var record(Matrix value, std::vector<std::size_t> inputs, Backward backward);
  const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<std::size_t> inputs;
    Backward backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
  bool track_ = true;
};

Var matmul(Var a, Var b);
// a * b^T
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
// Adds a 1xN row to every row of a.
Var add_row(Var a, Var row);
Var scale(Var a, double s);
Var mul(Var a, Var b);
Var relu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
// Rows `ids` of `table` (embedding lookup).
Var gather_rows(Var table, const std::vector<std::size_t>& ids);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var concat_cols(const std::vector<Var>& parts);
// T x d -> (T-w+1) x (w*d); row t holds rows t..t+w-1 side by side.
Var unfold(Var a, std::size_t width);
// Column-wise max over rows -> 1 x N.
Var max_rows(Var a);
// Column-wise mean over rows -> 1 x N.
Var mean_rows(Var a);
Var softmax_rows(Var a);
Var layer_norm_rows(Var a, Var gain, Var bias, double eps = 1e-5);
// Mean negative log-likelihood of `label` under softmax(logits), logits 1xC.
Var cross_entropy(Var logits, std::size_t label);

// Adam with bias correction and optional global-norm gradient clipping.
class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8, double clip_norm = 0.0)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), clip_norm_(clip_norm) {}

  // Applies one update to every parameter from its accumulated gradient,
  // then zeroes the gradients. Returns the pre-clip global gradient norm.
  double step(const std::vector<Parameter*>& params);

 private:
  double lr_, beta1_, beta2_, eps_, clip_norm_;
  long long t_ = 0;
};

}  // namespace advtext::nn
