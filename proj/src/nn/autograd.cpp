#include "advtext/nn/autograd.hpp"

#include <cmath>

#include "advtext/core/error.hpp"

namespace advtext::nn {

namespace {

Graph& same_graph(Var a, Var b) {
  if (a.graph() != b.graph() || a.graph() == nullptr)
    throw InvalidArgument("operands belong to different graphs");
  return *a.graph();
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace

Parameter::Parameter(std::string n, Matrix init)
    : name(std::move(n)),
      value(std::move(init)),
      grad(Matrix::Zero(value.rows(), value.cols())),
      m(Matrix::Zero(value.rows(), value.cols())),
      v(Matrix::Zero(value.rows(), value.cols())) {}

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix w(rows, cols);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-limit, limit);
  return w;
}

const Matrix& Var::value() const { return graph_->value(id_); }

Var Graph::param(Parameter& p) {
  Node n;
  n.param = &p;
  n.needs_grad = track_;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(const Parameter& p) {
  if (track_) throw InvalidArgument("const parameter on a gradient-tracking graph");
  Node n;
  n.param = const_cast<Parameter*>(&p);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Matrix value, std::vector<std::size_t> inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  for (auto i : inputs) n.needs_grad = n.needs_grad || nodes_[i].needs_grad;
  n.inputs = std::move(inputs);
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Graph::backward(Var loss) {
  require(loss.graph() == this, "loss belongs to another graph");
  require(loss.rows() == 1 && loss.cols() == 1, "backward needs a scalar loss");
  for (auto& n : nodes_) {
    if (n.needs_grad && !n.param) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  }
  if (!track_) return;
  if (!nodes_[loss.id()].needs_grad) return;
  if (nodes_[loss.id()].param) {
    nodes_[loss.id()].param->grad(0, 0) += 1.0;
    return;
  }
  nodes_[loss.id()].grad(0, 0) = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.needs_grad && n.backward) n.backward(*this, i);
  }
}

Var matmul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require(a.cols() == b.rows(), "matmul shape mismatch");
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(a.value() * b.value(), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
    const Matrix& gc = g.grad(self);
    if (g.needs_grad(ia)) g.grad(ia).noalias() += gc * g.value(ib).transpose();
    if (g.needs_grad(ib)) g.grad(ib).noalias() += g.value(ia).transpose() * gc;
  });
}

Var matmul_nt(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require(a.cols() == b.cols(), "matmul_nt shape mismatch");
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(a.value() * b.value().transpose(), {ia, ib},
                  [ia, ib](Graph& g, std::size_t self) {
                    const Matrix& gc = g.grad(self);
                    if (g.needs_grad(ia)) g.grad(ia).noalias() += gc * g.value(ib);
                    if (g.needs_grad(ib))
                      g.grad(ib).noalias() += gc.transpose() * g.value(ia);
                  });
}

Var add(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add shape mismatch");
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(a.value() + b.value(), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
    const Matrix& gc = g.grad(self);
    if (g.needs_grad(ia)) g.grad(ia) += gc;
    if (g.needs_grad(ib)) g.grad(ib) += gc;
  });
}

Var add_row(Var a, Var row) {
  Graph& g = same_graph(a, row);
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row shape mismatch");
  const std::size_t ia = a.id(), ir = row.id();
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return g.record(std::move(out), {ia, ir}, [ia, ir](Graph& g, std::size_t self) {
    const Matrix& gc = g.grad(self);
    if (g.needs_grad(ia)) g.grad(ia) += gc;
    if (g.needs_grad(ir)) g.grad(ir) += gc.colwise().sum();
  });
}

Var scale(Var a, double s) {
  Graph& g = *a.graph();
  const std::size_t ia = a.id();
  return g.record(a.value() * s, {ia}, [ia, s](Graph& g, std::size_t self) {
    g.grad(ia) += s * g.grad(self);
  });
}

Var mul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "mul shape mismatch");
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(a.value().cwiseProduct(b.value()), {ia, ib},
                  [ia, ib](Graph& g, std::size_t self) {
                    const Matrix& gc = g.grad(self);
                    if (g.needs_grad(ia)) g.grad(ia) += gc.cwiseProduct(g.value(ib));
                    if (g.needs_grad(ib)) g.grad(ib) += gc.cwiseProduct(g.value(ia));
                  });
}

Var relu(Var a) {
  Graph& g = *a.graph();
  const std::size_t ia = a.id();
  return g.record(a.value().cwiseMax(0.0), {ia}, [ia](Graph& g, std::size_t self) {
    g.grad(ia) += (g.value(ia).array() > 0.0).cast<double>().matrix().cwiseProduct(
        g.grad(self));
  });
}

Var tanh(Var a) {
  Graph& g = *a.graph();
  const std::size_t ia = a.id();
  return g.record(a.value().array().tanh().matrix(), {ia}, [ia](Graph& g, std::size_t self) {
    const Matrix& y = g.value(self);
    g.grad(ia) += (g.grad(self).array() * (1.0 - y.array().square())).matrix();
  });
}

Var sigmoid(Var a) {
  Graph& g = *a.graph();
  const std::size_t ia = a.id();
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return g.record(std::move(y), {ia}, [ia](Graph& g, std::size_t self) {
    const Matrix& y = g.value(self);
    g.grad(ia) += (g.grad(self).array() * y.array() * (1.0 - y.array())).matrix();
  });
}

Var gather_rows(Var table, const std::vector<std::size_t>& ids) {
  Graph& g = *table.graph();
  const Matrix& t = table.value();
  Matrix out(static_cast<Eigen::Index>(ids.size()), t.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] < static_cast<std::size_t>(t.rows()), "gather index out of range");
    out.row(static_cast<Eigen::Index>(i)) = t.row(static_cast<Eigen::Index>(ids[i]));
  }
  const std::size_t it = table.id();
  return g.record(std::move(out), {it}, [it, ids](Graph& g, std::size_t self) {
    const Matrix& gc = g.grad(self);
    Matrix& gt = g.grad(it);
    for (std::size_t i = 0; i < ids.size(); ++i)
      gt.row(static_cast<Eigen::Index>(ids[i])) += gc.row(static_cast<Eigen::Index>(i));
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  Graph& g = *a.graph();
  require(begin + count <= a.rows(), "slice_rows out of range");
  const auto b = static_cast<Eigen::Index>(begin), c = static_cast<Eigen::Index>(count);
  const std::size_t ia = a.id();
  return g.record(a.value().middleRows(b, c), {ia}, [ia, b, c](Graph& g, std::size_t self) {
    g.grad(ia).middleRows(b, c) += g.grad(self);
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  Graph& g = *a.graph();
  require(begin + count <= a.cols(), "slice_cols out of range");
  const auto b = static_cast<Eigen::Index>(begin), c = static_cast<Eigen::Index>(count);
  const std::size_t ia = a.id();
  return g.record(a.value().middleCols(b, c), {ia}, [ia, b, c](Graph& g, std::size_t self) {
    g.grad(ia).middleCols(b, c) += g.grad(self);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat of nothing");
  Graph& g = *parts.front().graph();
  const Eigen::Index rows = parts.front().value().rows();
  Eigen::Index cols = 0;
  std::vector<std::size_t> ids;
  std::vector<Eigen::Index> widths;
  for (const auto& p : parts) {
    require(p.graph() == &g && p.value().rows() == rows, "concat_cols shape mismatch");
    cols += p.value().cols();
    ids.push_back(p.id());
    widths.push_back(p.value().cols());
  }
  Matrix out(rows, cols);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    out.middleCols(off, p.value().cols()) = p.value();
    off += p.value().cols();
  }
  return g.record(std::move(out), ids, [ids, widths](Graph& g, std::size_t self) {
    const Matrix& gc = g.grad(self);
    Eigen::Index off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (g.needs_grad(ids[k])) g.grad(ids[k]) += gc.middleCols(off, widths[k]);
      off += widths[k];
    }
  });
}

Var unfold(Var a, std::size_t width) {
  Graph& g = *a.graph();
  require(width >= 1 && width <= a.rows(), "unfold width exceeds sequence length");
  const Matrix& x = a.value();
  const Eigen::Index t_out = x.rows() - static_cast<Eigen::Index>(width) + 1;
  const Eigen::Index d = x.cols();
  const auto w = static_cast<Eigen::Index>(width);
  Matrix out(t_out, w * d);
  for (Eigen::Index t = 0; t < t_out; ++t)
    for (Eigen::Index k = 0; k < w; ++k) out.block(t, k * d, 1, d) = x.row(t + k);
  const std::size_t ia = a.id();
  return g.record(std::move(out), {ia}, [ia, t_out, w, d](Graph& g, std::size_t self) {
    const Matrix& gc = g.grad(self);
    Matrix& gx = g.grad(ia);
    for (Eigen::Index t = 0; t < t_out; ++t)
      for (Eigen::Index k = 0; k < w; ++k) gx.row(t + k) += gc.block(t, k * d, 1, d);
  });
}

Var max_rows(Var a) {
  Graph& g = *a.graph();
  const Matrix& x = a.value();
  require(x.rows() >= 1, "max over zero rows");
  Matrix out(1, x.cols());
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::Index r = 0;
    out(0, j) = x.col(j).maxCoeff(&r);
    arg[static_cast<std::size_t>(j)] = r;
  }
  const std::size_t ia = a.id();
  return g.record(std::move(out), {ia}, [ia, arg](Graph& g, std::size_t self) {
    const Matrix& gc = g.grad(self);
    Matrix& gx = g.grad(ia);
    for (std::size_t j = 0; j < arg.size(); ++j)
      gx(arg[j], static_cast<Eigen::Index>(j)) += gc(0, static_cast<Eigen::Index>(j));
  });
}

Var mean_rows(Var a) {
  Graph& g = *a.graph();
  const Matrix& x = a.value();
  require(x.rows() >= 1, "mean over zero rows");
  const double n = static_cast<double>(x.rows());
  const std::size_t ia = a.id();
  return g.record(x.colwise().mean(), {ia}, [ia, n](Graph& g, std::size_t self) {
    const Matrix row = g.grad(self) / n;
    g.grad(ia).rowwise() += row.row(0);
  });
}

Var softmax_rows(Var a) {
  Graph& g = *a.graph();
  Matrix y = a.value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double mx = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - mx).exp();
    y.row(r) /= y.row(r).sum();
  }
  const std::size_t ia = a.id();
  return g.record(std::move(y), {ia}, [ia](Graph& g, std::size_t self) {
    const Matrix& y = g.value(self);
    const Matrix& gy = g.grad(self);
    Matrix& gx = g.grad(ia);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double dot = gy.row(r).dot(y.row(r));
      gx.row(r) += (y.row(r).array() * (gy.row(r).array() - dot)).matrix();
    }
  });
}

Var layer_norm_rows(Var a, Var gain, Var bias, double eps) {
  Graph& g = same_graph(a, gain);
  require(gain.graph() == bias.graph(), "layer_norm operands on different graphs");
  const Matrix& x = a.value();
  const Eigen::Index n = x.cols();
  require(gain.rows() == 1 && gain.cols() == static_cast<std::size_t>(n) &&
              bias.rows() == 1 && bias.cols() == static_cast<std::size_t>(n),
          "layer_norm parameter shape mismatch");
  Matrix xhat(x.rows(), n);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mu) * inv_std(r);
  }
  Matrix y = xhat;
  for (Eigen::Index r = 0; r < y.rows(); ++r)
    y.row(r) = y.row(r).cwiseProduct(gain.value().row(0)) + bias.value().row(0);
  const std::size_t ia = a.id(), ig = gain.id(), ib = bias.id();
  return g.record(std::move(y), {ia, ig, ib},
                  [ia, ig, ib, xhat, inv_std](Graph& g, std::size_t self) {
                    const Matrix& gy = g.grad(self);
                    const Matrix& gain = g.value(ig);
                    if (g.needs_grad(ig))
                      g.grad(ig) += gy.cwiseProduct(xhat).colwise().sum();
                    if (g.needs_grad(ib)) g.grad(ib) += gy.colwise().sum();
                    if (!g.needs_grad(ia)) return;
                    Matrix& gx = g.grad(ia);
                    const double n = static_cast<double>(gy.cols());
                    for (Eigen::Index r = 0; r < gy.rows(); ++r) {
                      const Eigen::RowVectorXd dxhat = gy.row(r).cwiseProduct(gain.row(0));
                      const double mean_d = dxhat.sum() / n;
                      const double mean_dx = dxhat.dot(xhat.row(r)) / n;
                      gx.row(r) += inv_std(r) *
                                   (dxhat.array() - mean_d - xhat.row(r).array() * mean_dx)
                                       .matrix();
                    }
                  });
}

Var cross_entropy(Var logits, std::size_t label) {
  Graph& g = *logits.graph();
  const Matrix& z = logits.value();
  require(z.rows() == 1 && label < static_cast<std::size_t>(z.cols()),
          "cross_entropy expects 1xC logits and a valid label");
  const double mx = z.maxCoeff();
  Matrix p = (z.array() - mx).exp().matrix();
  const double sum = p.sum();
  p /= sum;
  const auto l = static_cast<Eigen::Index>(label);
  Matrix loss(1, 1);
  loss(0, 0) = -(z(0, l) - mx - std::log(sum));
  const std::size_t iz = logits.id();
  return g.record(std::move(loss), {iz}, [iz, p, l](Graph& g, std::size_t self) {
    Matrix d = p;
    d(0, l) -= 1.0;
    g.grad(iz) += g.grad(self)(0, 0) * d;
  });
}

double Adam::step(const std::vector<Parameter*>& params) {
  double sq = 0.0;
  for (const auto* p : params) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  const double factor = (clip_norm_ > 0.0 && norm > clip_norm_) ? clip_norm_ / norm : 1.0;
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto* p : params) {
    const Matrix gclip = p->grad * factor;
    p->m = beta1_ * p->m + (1.0 - beta1_) * gclip;
    p->v = beta2_ * p->v + (1.0 - beta2_) * gclip.cwiseProduct(gclip);
    p->value.array() -=
        lr_ * (p->m.array() / c1) / ((p->v.array() / c2).sqrt() + eps_);
    p->zero_grad();
  }
  return norm;
}

}  // namespace advtext::nn
