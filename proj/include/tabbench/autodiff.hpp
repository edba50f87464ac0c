#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tabbench::ad {

using Tensor = Eigen::MatrixXd;
using NodeId = std::size_t;

enum class Op {
  Leaf,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  AddScalar,
  MulScalar,
  AddRow,   // B×n + 1×n
  SubRow,   // B×n - 1×n
  MulRow,   // B×n * 1×n
  DivRow,   // B×n / 1×n
  MulByScalarNode,  // B×n * 1×1
  DivByScalarNode,  // B×n / 1×1
  MatMul,
  Affine,   // X·W + b
  Relu,
  LeakyRelu,
  Sigmoid,
  Tanh,
  Exp,
  Log,
  Sqrt,
  Abs,
  Square,
  Clamp,
  Sum,
  Mean,
  SumRows,   // column totals: B×n -> 1×n
  MeanRows,  // column means: B×n -> 1×n
  SumCols,   // row totals: B×n -> B×1
  SliceCols,
  ConcatCols,
  SoftmaxRows,
  GuardMagnitude,  // |x| < eps -> ±eps (constant)
};

class Graph;

// Lightweight handle to a graph node.
struct Var {
  Graph* graph = nullptr;
  NodeId id = 0;

  const Tensor& value() const;
  double scalar() const;
  Tensor grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

// Append-only tape. Node inputs always carry smaller ids than the node itself,
// so reverse id order is a valid reverse topological order.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var variable(Tensor value);
  Var constant(Tensor value);
  Var scalar_constant(double value);

  // Populates gradients of every ancestor of root. Root must be 1×1.
  void backward(Var root);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  // Zero tensor for nodes outside the last backward's ancestor set.
  Tensor grad(NodeId id) const;
  bool requires_grad(NodeId id) const { return nodes_[id].requires_grad; }
  std::span<const NodeId> inputs(NodeId id) const { return nodes_[id].inputs; }
  Op op(NodeId id) const { return nodes_[id].op; }
  std::size_t size() const { return nodes_.size(); }

  // Used by the op builders below.
  Var push(Op op, std::vector<NodeId> inputs, Tensor value, double a = 0.0, double b = 0.0,
           Eigen::Index offset = 0, Eigen::Index width = 0);

 private:
  struct Node {
    Op op = Op::Leaf;
    std::vector<NodeId> inputs;
    Tensor value;
    Tensor grad;
    double a = 0.0;
    double b = 0.0;
    Eigen::Index offset = 0;
    Eigen::Index width = 0;
    bool requires_grad = false;
  };

  void accumulate(NodeId id, const Tensor& g);
  void propagate(NodeId id);

  std::vector<Node> nodes_;
};

// ---- elementwise --------------------------------------------------------
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var neg(Var a);
Var add_scalar(Var a, double s);
Var mul_scalar(Var a, double s);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator/(Var a, Var b) { return div(a, b); }
inline Var operator-(Var a) { return neg(a); }
inline Var operator+(Var a, double s) { return add_scalar(a, s); }
inline Var operator+(double s, Var a) { return add_scalar(a, s); }
inline Var operator-(Var a, double s) { return add_scalar(a, -s); }
inline Var operator-(double s, Var a) { return add_scalar(neg(a), s); }
inline Var operator*(Var a, double s) { return mul_scalar(a, s); }
inline Var operator*(double s, Var a) { return mul_scalar(a, s); }

// ---- broadcasting -------------------------------------------------------
Var add_row(Var a, Var row);
Var sub_row(Var a, Var row);
Var mul_row(Var a, Var row);
Var div_row(Var a, Var row);
Var mul_by_scalar(Var a, Var s);
Var div_by_scalar(Var a, Var s);

// ---- linear algebra -----------------------------------------------------
Var matmul(Var a, Var b);
Var affine(Var x, Var weight, Var bias);

// ---- nonlinearities -----------------------------------------------------
Var relu(Var a);
Var leaky_relu(Var a, double slope);
Var sigmoid(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
// Subgradient 0 at sqrt(0).
Var sqrt(Var a);
// Subgradient 0 at |0|.
Var abs(Var a);
Var square(Var a);
// Gradient passes where lo <= x <= hi, zero outside.
Var clamp(Var a, double lo, double hi);
Var softmax_rows(Var a);
// Scalar guard: values with |x| < eps become sign(x)·eps (+eps at 0) and
// stop the gradient.
Var guard_magnitude(Var a, double eps);

// ---- reductions and reshaping -------------------------------------------
Var sum(Var a);
Var mean(Var a);
Var sum_rows(Var a);
Var mean_rows(Var a);
Var sum_cols(Var a);
Var slice_cols(Var a, Eigen::Index offset, Eigen::Index width);
Var concat_cols(std::span<const Var> parts);

}  // namespace tabbench::ad
