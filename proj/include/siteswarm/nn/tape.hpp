#ifndef SITESWARM_NN_TAPE_HPP_
#define SITESWARM_NN_TAPE_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace siteswarm::nn {

using Matrix = Eigen::MatrixXd;

// Parameter name -> accumulated gradient (same shape as the parameter).
using GradientMap = std::map<std::string, Matrix>;

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  // Value of a 1x1 node.
  double scalar() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Matrix-granular reverse-mode tape. Nodes are appended in evaluation order,
// so reverse insertion order is a valid topological order for backward().
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // Registers a trainable leaf. Gradients are reported under `name`; binding
  // the same name twice accumulates into one entry.
  Var param(const std::string& name, const Matrix& value);

  // Reverse sweep from a 1x1 loss node. Every registered parameter gets an
  // entry, zero when the loss does not depend on it. Throws UsageError when
  // called twice.
  GradientMap backward(Var loss);

  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }

  // Used by the op implementations.
  using Backprop = std::function<void(Tape&, std::size_t)>;
  // Nodes without a backprop closure and not marked as params are treated as
  // constants and never receive gradient.
  Var push(Matrix value, Backprop backprop, bool requires_grad);
  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  Matrix& grad(std::size_t id);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backprop backprop;
    std::string param_name;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// Element-wise ops require equal shapes unless noted.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var shift(Var a, double s);
Var tanh(Var a);
Var exp(Var a);
Var square(Var a);
// Zero gradient outside [lo, hi].
Var clamp(Var a, double lo, double hi);
// Gradient flows to `a` on ties.
Var minimum(Var a, Var b);
// B x C -> B x 1
Var row_sum(Var a);
// -> 1 x 1
Var sum(Var a);
Var mean(Var a);
// 1 x C -> rows x C
Var broadcast_rows(Var a, Eigen::Index rows);
// x: B x in, w: out x in, b: 1 x out  ->  B x out
Var linear(Var x, Var w, Var b);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }

}  // namespace siteswarm::nn

#endif  // SITESWARM_NN_TAPE_HPP_
