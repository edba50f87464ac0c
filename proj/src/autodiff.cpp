#include "tabbench/autodiff.hpp"

#include <cmath>
#include <string>

#include "tabbench/error.hpp"

namespace tabbench::ad {

namespace {

std::string shape(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

Graph& same_graph(Var a, Var b) {
  if (a.graph == nullptr || a.graph != b.graph) fail(ErrorCode::InvalidArgument, "operands belong to different graphs");
  return *a.graph;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::DimensionMismatch, std::string(op) + ": shapes " + shape(a) + " and " + shape(b));
}

void require_row(const Tensor& a, const Tensor& row, const char* op) {
  if (row.rows() != 1 || row.cols() != a.cols())
    fail(ErrorCode::DimensionMismatch, std::string(op) + ": expected 1x" + std::to_string(a.cols()) + " row, got " +
                                           shape(row));
}

void require_scalar(const Tensor& s, const char* op) {
  if (s.rows() != 1 || s.cols() != 1) fail(ErrorCode::DimensionMismatch, std::string(op) + ": expected 1x1, got " + shape(s));
}

Tensor scalar_tensor(double v) {
  Tensor t(1, 1);
  t(0, 0) = v;
  return t;
}

}  // namespace

const Tensor& Var::value() const { return graph->value(id); }
double Var::scalar() const {
  const auto& v = value();
  require_scalar(v, "scalar");
  return v(0, 0);
}
Tensor Var::grad() const { return graph->grad(id); }

Var Graph::variable(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::scalar_constant(double value) { return constant(scalar_tensor(value)); }

Var Graph::push(Op op, std::vector<NodeId> inputs, Tensor value, double a, double b, Eigen::Index offset,
                Eigen::Index width) {
  Node n;
  n.op = op;
  for (NodeId in : inputs) n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  n.a = a;
  n.b = b;
  n.offset = offset;
  n.width = width;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Tensor Graph::grad(NodeId id) const {
  const auto& n = nodes_[id];
  if (n.grad.size() == 0) return Tensor::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Graph::accumulate(NodeId id, const Tensor& g) {
  auto& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Graph::backward(Var root) {
  if (root.graph != this) fail(ErrorCode::InvalidArgument, "root belongs to another graph");
  const auto& rv = nodes_[root.id].value;
  if (rv.rows() != 1 || rv.cols() != 1)
    fail(ErrorCode::NonScalarRoot, "backward root must be 1x1, got " + shape(rv));
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[root.id].requires_grad) return;
  nodes_[root.id].grad = Tensor::Ones(1, 1);
  for (NodeId id = root.id + 1; id-- > 0;) {
    if (nodes_[id].grad.size() == 0 || nodes_[id].op == Op::Leaf) continue;
    propagate(id);
  }
}

void Graph::propagate(NodeId id) {
  // Copy out what we need: accumulate() may touch other nodes but never this one.
  const Node& n = nodes_[id];
  const Tensor& g = n.grad;
  const Tensor& y = n.value;
  const auto in = n.inputs;
  auto x = [&](std::size_t k) -> const Tensor& { return nodes_[in[k]].value; };
  auto wants = [&](std::size_t k) { return nodes_[in[k]].requires_grad; };

  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::Add:
      accumulate(in[0], g);
      accumulate(in[1], g);
      break;
    case Op::Sub:
      accumulate(in[0], g);
      if (wants(1)) accumulate(in[1], -g);
      break;
    case Op::Mul:
      if (wants(0)) accumulate(in[0], g.cwiseProduct(x(1)));
      if (wants(1)) accumulate(in[1], g.cwiseProduct(x(0)));
      break;
    case Op::Div:
      if (wants(0)) accumulate(in[0], g.cwiseQuotient(x(1)));
      if (wants(1)) accumulate(in[1], (-g.cwiseProduct(y)).cwiseQuotient(x(1)));
      break;
    case Op::Neg:
      accumulate(in[0], -g);
      break;
    case Op::AddScalar:
      accumulate(in[0], g);
      break;
    case Op::MulScalar:
      accumulate(in[0], g * n.a);
      break;
    case Op::AddRow:
      accumulate(in[0], g);
      if (wants(1)) accumulate(in[1], g.colwise().sum());
      break;
    case Op::SubRow:
      accumulate(in[0], g);
      if (wants(1)) accumulate(in[1], -g.colwise().sum());
      break;
    case Op::MulRow: {
      if (wants(0)) {
        Tensor ga = g;
        for (Eigen::Index r = 0; r < ga.rows(); ++r) ga.row(r) = ga.row(r).cwiseProduct(x(1));
        accumulate(in[0], ga);
      }
      if (wants(1)) accumulate(in[1], g.cwiseProduct(x(0)).colwise().sum());
      break;
    }
    case Op::DivRow: {
      if (wants(0)) {
        Tensor ga = g;
        for (Eigen::Index r = 0; r < ga.rows(); ++r) ga.row(r) = ga.row(r).cwiseQuotient(x(1));
        accumulate(in[0], ga);
      }
      if (wants(1)) {
        // d(a/r)/dr = -y/r
        Tensor gy = g.cwiseProduct(y).colwise().sum();
        accumulate(in[1], -gy.cwiseQuotient(x(1)));
      }
      break;
    }
    case Op::MulByScalarNode: {
      const double s = x(1)(0, 0);
      if (wants(0)) accumulate(in[0], g * s);
      if (wants(1)) accumulate(in[1], scalar_tensor(g.cwiseProduct(x(0)).sum()));
      break;
    }
    case Op::DivByScalarNode: {
      const double s = x(1)(0, 0);
      if (wants(0)) accumulate(in[0], g / s);
      if (wants(1)) accumulate(in[1], scalar_tensor(-g.cwiseProduct(y).sum() / s));
      break;
    }
    case Op::MatMul:
      if (wants(0)) accumulate(in[0], g * x(1).transpose());
      if (wants(1)) accumulate(in[1], x(0).transpose() * g);
      break;
    case Op::Affine:
      if (wants(0)) accumulate(in[0], g * x(1).transpose());
      if (wants(1)) accumulate(in[1], x(0).transpose() * g);
      if (wants(2)) accumulate(in[2], g.colwise().sum());
      break;
    case Op::Relu:
      accumulate(in[0], g.cwiseProduct((x(0).array() > 0.0).cast<double>().matrix()));
      break;
    case Op::LeakyRelu: {
      const double slope = n.a;
      Tensor d = x(0).unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
      accumulate(in[0], g.cwiseProduct(d));
      break;
    }
    case Op::Sigmoid:
      accumulate(in[0], g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
      break;
    case Op::Tanh:
      accumulate(in[0], g.cwiseProduct((1.0 - y.array().square()).matrix()));
      break;
    case Op::Exp:
      accumulate(in[0], g.cwiseProduct(y));
      break;
    case Op::Log:
      accumulate(in[0], g.cwiseQuotient(x(0)));
      break;
    case Op::Sqrt: {
      Tensor d = y.unaryExpr([](double v) { return v > 0.0 ? 0.5 / v : 0.0; });
      accumulate(in[0], g.cwiseProduct(d));
      break;
    }
    case Op::Abs: {
      Tensor d = x(0).unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
      accumulate(in[0], g.cwiseProduct(d));
      break;
    }
    case Op::Square:
      accumulate(in[0], 2.0 * g.cwiseProduct(x(0)));
      break;
    case Op::Clamp: {
      const double lo = n.a, hi = n.b;
      Tensor d = x(0).unaryExpr([lo, hi](double v) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
      accumulate(in[0], g.cwiseProduct(d));
      break;
    }
    case Op::Sum:
      accumulate(in[0], Tensor::Constant(x(0).rows(), x(0).cols(), g(0, 0)));
      break;
    case Op::Mean:
      accumulate(in[0], Tensor::Constant(x(0).rows(), x(0).cols(), g(0, 0) / static_cast<double>(x(0).size())));
      break;
    case Op::SumRows:
      accumulate(in[0], g.replicate(x(0).rows(), 1));
      break;
    case Op::MeanRows:
      accumulate(in[0], g.replicate(x(0).rows(), 1) / static_cast<double>(x(0).rows()));
      break;
    case Op::SumCols:
      accumulate(in[0], g.replicate(1, x(0).cols()));
      break;
    case Op::SliceCols: {
      Tensor full = Tensor::Zero(x(0).rows(), x(0).cols());
      full.middleCols(n.offset, n.width) = g;
      accumulate(in[0], full);
      break;
    }
    case Op::ConcatCols: {
      Eigen::Index off = 0;
      for (std::size_t k = 0; k < in.size(); ++k) {
        const auto w = x(k).cols();
        if (wants(k)) accumulate(in[k], g.middleCols(off, w));
        off += w;
      }
      break;
    }
    case Op::SoftmaxRows: {
      // dx = y ⊙ (g - rowsum(g ⊙ y))
      Eigen::VectorXd dot = g.cwiseProduct(y).rowwise().sum();
      Tensor d = g;
      d.colwise() -= dot;
      accumulate(in[0], d.cwiseProduct(y));
      break;
    }
    case Op::GuardMagnitude: {
      const double v = x(0)(0, 0);
      if (std::abs(v) >= n.a) accumulate(in[0], g);
      break;
    }
  }
}

// ---- builders ---------------------------------------------------------------

Var add(Var a, Var b) {
  auto& g = same_graph(a, b);
  require_same_shape(a.value(), b.value(), "add");
  return g.push(Op::Add, {a.id, b.id}, a.value() + b.value());
}

Var sub(Var a, Var b) {
  auto& g = same_graph(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  return g.push(Op::Sub, {a.id, b.id}, a.value() - b.value());
}

Var mul(Var a, Var b) {
  auto& g = same_graph(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  return g.push(Op::Mul, {a.id, b.id}, a.value().cwiseProduct(b.value()));
}

Var div(Var a, Var b) {
  auto& g = same_graph(a, b);
  require_same_shape(a.value(), b.value(), "div");
  return g.push(Op::Div, {a.id, b.id}, a.value().cwiseQuotient(b.value()));
}

Var neg(Var a) { return a.graph->push(Op::Neg, {a.id}, -a.value()); }

Var add_scalar(Var a, double s) {
  return a.graph->push(Op::AddScalar, {a.id}, (a.value().array() + s).matrix(), s);
}

Var mul_scalar(Var a, double s) { return a.graph->push(Op::MulScalar, {a.id}, a.value() * s, s); }

Var add_row(Var a, Var row) {
  auto& g = same_graph(a, row);
  require_row(a.value(), row.value(), "add_row");
  Tensor v = a.value();
  v.rowwise() += row.value().row(0);
  return g.push(Op::AddRow, {a.id, row.id}, std::move(v));
}

Var sub_row(Var a, Var row) {
  auto& g = same_graph(a, row);
  require_row(a.value(), row.value(), "sub_row");
  Tensor v = a.value();
  v.rowwise() -= row.value().row(0);
  return g.push(Op::SubRow, {a.id, row.id}, std::move(v));
}

Var mul_row(Var a, Var row) {
  auto& g = same_graph(a, row);
  require_row(a.value(), row.value(), "mul_row");
  Tensor v = a.value();
  for (Eigen::Index r = 0; r < v.rows(); ++r) v.row(r) = v.row(r).cwiseProduct(row.value());
  return g.push(Op::MulRow, {a.id, row.id}, std::move(v));
}

Var div_row(Var a, Var row) {
  auto& g = same_graph(a, row);
  require_row(a.value(), row.value(), "div_row");
  Tensor v = a.value();
  for (Eigen::Index r = 0; r < v.rows(); ++r) v.row(r) = v.row(r).cwiseQuotient(row.value());
  return g.push(Op::DivRow, {a.id, row.id}, std::move(v));
}

Var mul_by_scalar(Var a, Var s) {
  auto& g = same_graph(a, s);
  require_scalar(s.value(), "mul_by_scalar");
  return g.push(Op::MulByScalarNode, {a.id, s.id}, a.value() * s.value()(0, 0));
}

Var div_by_scalar(Var a, Var s) {
  auto& g = same_graph(a, s);
  require_scalar(s.value(), "div_by_scalar");
  return g.push(Op::DivByScalarNode, {a.id, s.id}, a.value() / s.value()(0, 0));
}

Var matmul(Var a, Var b) {
  auto& g = same_graph(a, b);
  if (a.value().cols() != b.value().rows())
    fail(ErrorCode::DimensionMismatch, "matmul: " + shape(a.value()) + " times " + shape(b.value()));
  return g.push(Op::MatMul, {a.id, b.id}, a.value() * b.value());
}

Var affine(Var x, Var weight, Var bias) {
  auto& g = same_graph(x, weight);
  same_graph(x, bias);
  if (x.value().cols() != weight.value().rows())
    fail(ErrorCode::DimensionMismatch, "affine: input " + shape(x.value()) + " vs weight " + shape(weight.value()));
  require_row(Tensor(1, weight.value().cols()), bias.value(), "affine bias");
  Tensor v = x.value() * weight.value();
  v.rowwise() += bias.value().row(0);
  return g.push(Op::Affine, {x.id, weight.id, bias.id}, std::move(v));
}

Var relu(Var a) { return a.graph->push(Op::Relu, {a.id}, a.value().cwiseMax(0.0)); }

Var leaky_relu(Var a, double slope) {
  Tensor v = a.value().unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
  return a.graph->push(Op::LeakyRelu, {a.id}, std::move(v), slope);
}

Var sigmoid(Var a) {
  Tensor v = a.value().unaryExpr([](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return a.graph->push(Op::Sigmoid, {a.id}, std::move(v));
}

Var tanh(Var a) { return a.graph->push(Op::Tanh, {a.id}, a.value().array().tanh().matrix()); }
Var exp(Var a) { return a.graph->push(Op::Exp, {a.id}, a.value().array().exp().matrix()); }
Var log(Var a) { return a.graph->push(Op::Log, {a.id}, a.value().array().log().matrix()); }
Var sqrt(Var a) { return a.graph->push(Op::Sqrt, {a.id}, a.value().array().sqrt().matrix()); }
Var abs(Var a) { return a.graph->push(Op::Abs, {a.id}, a.value().cwiseAbs()); }
Var square(Var a) { return a.graph->push(Op::Square, {a.id}, a.value().array().square().matrix()); }

Var clamp(Var a, double lo, double hi) {
  return a.graph->push(Op::Clamp, {a.id}, a.value().cwiseMax(lo).cwiseMin(hi), lo, hi);
}

Var softmax_rows(Var a) {
  Tensor v = a.value();
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const double m = v.row(r).maxCoeff();
    v.row(r) = (v.row(r).array() - m).exp().matrix();
    v.row(r) /= v.row(r).sum();
  }
  return a.graph->push(Op::SoftmaxRows, {a.id}, std::move(v));
}

Var guard_magnitude(Var a, double eps) {
  require_scalar(a.value(), "guard_magnitude");
  double v = a.value()(0, 0);
  if (std::abs(v) < eps) v = v < 0.0 ? -eps : eps;
  return a.graph->push(Op::GuardMagnitude, {a.id}, scalar_tensor(v), eps);
}

Var sum(Var a) { return a.graph->push(Op::Sum, {a.id}, scalar_tensor(a.value().sum())); }
Var mean(Var a) { return a.graph->push(Op::Mean, {a.id}, scalar_tensor(a.value().mean())); }
Var sum_rows(Var a) { return a.graph->push(Op::SumRows, {a.id}, a.value().colwise().sum()); }
Var mean_rows(Var a) { return a.graph->push(Op::MeanRows, {a.id}, a.value().colwise().mean()); }
Var sum_cols(Var a) { return a.graph->push(Op::SumCols, {a.id}, a.value().rowwise().sum()); }

Var slice_cols(Var a, Eigen::Index offset, Eigen::Index width) {
  if (offset < 0 || width < 0 || offset + width > a.value().cols())
    fail(ErrorCode::DimensionMismatch, "slice_cols out of range");
  return a.graph->push(Op::SliceCols, {a.id}, a.value().middleCols(offset, width), 0.0, 0.0, offset, width);
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorCode::InvalidArgument, "concat_cols of nothing");
  Graph* g = parts.front().graph;
  const auto rows = parts.front().value().rows();
  Eigen::Index cols = 0;
  std::vector<NodeId> ids;
  for (const auto& p : parts) {
    if (p.graph != g) fail(ErrorCode::InvalidArgument, "operands belong to different graphs");
    if (p.value().rows() != rows) fail(ErrorCode::DimensionMismatch, "concat_cols: row counts differ");
    cols += p.value().cols();
    ids.push_back(p.id);
  }
  Tensor v(rows, cols);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    v.middleCols(off, p.value().cols()) = p.value();
    off += p.value().cols();
  }
  return g->push(Op::ConcatCols, std::move(ids), std::move(v));
}

}  // namespace tabbench::ad
