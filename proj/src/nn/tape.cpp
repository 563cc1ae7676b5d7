#include "siteswarm/nn/tape.hpp"

#include <utility>

#include "siteswarm/errors.hpp"

namespace siteswarm::nn {

namespace {

// Gradient accumulator for an operand, or null when the operand is constant.
Matrix* acc(Tape& t, std::size_t id) {
  return t.requires_grad(id) ? &t.grad(id) : nullptr;
}

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Tape& same_tape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw UsageError("tape: operands belong to different tapes");
  }
  return *a.tape();
}

bool req(Var a) { return a.tape()->requires_grad(a.id()); }
bool req(Var a, Var b) { return req(a) || req(b); }

void require_same_shape(const char* op, Var a, Var b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string("tape: ") + op + " shape mismatch " +
                     shape_str(a.value()) + " vs " + shape_str(b.value()));
  }
}

}  // namespace

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw UsageError("tape: unbound Var");
  return tape_->value(id_);
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ShapeError("tape: scalar() on " + shape_str(v));
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  return push(std::move(value), nullptr, false);
}

Var Tape::param(const std::string& name, const Matrix& value) {
  Var v = push(value, nullptr, true);
  nodes_[v.id()].param_name = name;
  return v;
}

Var Tape::push(Matrix value, Backprop backprop, bool requires_grad) {
  if (consumed_) throw UsageError("tape: already consumed");
  if (!requires_grad) backprop = nullptr;
  nodes_.push_back(
      Node{std::move(value), Matrix(), std::move(backprop), {}, requires_grad});
  return Var(this, nodes_.size() - 1);
}

Matrix& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

GradientMap Tape::backward(Var loss) {
  if (consumed_) throw UsageError("tape: backward() called on a consumed tape");
  if (loss.tape() != this) throw UsageError("tape: loss is not on this tape");
  if (loss.value().size() != 1) {
    throw ShapeError("tape: loss must be 1x1, got " + shape_str(loss.value()));
  }
  consumed_ = true;

  grad(loss.id())(0, 0) = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0 || !n.backprop) continue;
    n.backprop(*this, i);
  }

  GradientMap out;
  for (Node& n : nodes_) {
    if (n.param_name.empty()) continue;
    Matrix g = n.grad.size() == 0 ? Matrix::Zero(n.value.rows(), n.value.cols())
                                  : std::move(n.grad);
    auto [it, inserted] = out.try_emplace(n.param_name, g);
    if (!inserted) it->second += g;
  }
  return out;
}

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tape& t = same_tape(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return t.push(
      a.value() + b.value(),
      [ia, ib](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        if (Matrix* ga = acc(t, ia)) *ga += g;
        if (Matrix* gb = acc(t, ib)) *gb += g;
      },
      req(a, b));
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Tape& t = same_tape(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return t.push(
      a.value() - b.value(),
      [ia, ib](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        if (Matrix* ga = acc(t, ia)) *ga += g;
        if (Matrix* gb = acc(t, ib)) *gb -= g;
      },
      req(a, b));
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Tape& t = same_tape(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return t.push(
      a.value().cwiseProduct(b.value()),
      [ia, ib](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        if (Matrix* ga = acc(t, ia)) *ga += g.cwiseProduct(t.value(ib));
        if (Matrix* gb = acc(t, ib)) *gb += g.cwiseProduct(t.value(ia));
      },
      req(a, b));
}

Var scale(Var a, double s) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.push(
      a.value() * s,
      [ia, s](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        t.grad(ia) += g * s;
      },
      req(a));
}

Var shift(Var a, double s) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.push(
      (a.value().array() + s).matrix(),
      [ia](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        t.grad(ia) += g;
      },
      req(a));
}

Var tanh(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.push(
      a.value().array().tanh().matrix(),
      [ia](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        const Matrix& y = t.value(self);
        t.grad(ia).array() += g.array() * (1.0 - y.array().square());
      },
      req(a));
}

Var exp(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.push(
      a.value().array().exp().matrix(),
      [ia](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        t.grad(ia).array() += g.array() * t.value(self).array();
      },
      req(a));
}

Var square(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.push(
      a.value().array().square().matrix(),
      [ia](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        t.grad(ia).array() += 2.0 * g.array() * t.value(ia).array();
      },
      req(a));
}

Var clamp(Var a, double lo, double hi) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.push(
      a.value().cwiseMax(lo).cwiseMin(hi),
      [ia, lo, hi](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        const Matrix& x = t.value(ia);
        Matrix& ga = t.grad(ia);
        for (Eigen::Index k = 0; k < x.size(); ++k) {
          if (x(k) > lo && x(k) < hi) ga(k) += g(k);
        }
      },
      req(a));
}

Var minimum(Var a, Var b) {
  require_same_shape("minimum", a, b);
  Tape& t = same_tape(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return t.push(
      a.value().cwiseMin(b.value()),
      [ia, ib](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        const Matrix& x = t.value(ia);
        const Matrix& y = t.value(ib);
        Matrix* ga = acc(t, ia);
        Matrix* gb = acc(t, ib);
        for (Eigen::Index k = 0; k < x.size(); ++k) {
          if (x(k) <= y(k)) {
            if (ga) (*ga)(k) += g(k);
          } else if (gb) {
            (*gb)(k) += g(k);
          }
        }
      },
      req(a, b));
}

Var row_sum(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.push(
      a.value().rowwise().sum(),
      [ia](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        t.grad(ia).colwise() += g.col(0);
      },
      req(a));
}

Var sum(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  return t.push(
      std::move(v),
      [ia](Tape& t, std::size_t self) {
        const double g = t.grad(self)(0, 0);
        t.grad(ia).array() += g;
      },
      req(a));
}

Var mean(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw ShapeError("tape: mean of empty matrix");
  Matrix v(1, 1);
  v(0, 0) = a.value().sum() / n;
  return t.push(
      std::move(v),
      [ia, n](Tape& t, std::size_t self) {
        const double g = t.grad(self)(0, 0) / n;
        t.grad(ia).array() += g;
      },
      req(a));
}

Var broadcast_rows(Var a, Eigen::Index rows) {
  if (a.rows() != 1) {
    throw ShapeError("tape: broadcast_rows expects a row vector, got " +
                     shape_str(a.value()));
  }
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.push(
      a.value().replicate(rows, 1),
      [ia](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self).colwise().sum();
        t.grad(ia) += g;
      },
      req(a));
}

Var linear(Var x, Var w, Var b) {
  if (x.cols() != w.cols() || b.rows() != 1 || b.cols() != w.rows()) {
    throw ShapeError("tape: linear shapes x=" + shape_str(x.value()) +
                     " w=" + shape_str(w.value()) + " b=" + shape_str(b.value()));
  }
  Tape& t = same_tape(x, w);
  if (b.tape() != &t) throw UsageError("tape: operands belong to different tapes");
  const std::size_t ix = x.id(), iw = w.id(), ib = b.id();
  Matrix y = x.value() * w.value().transpose();
  y.rowwise() += b.value().row(0);
  return t.push(
      std::move(y),
      [ix, iw, ib](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        if (Matrix* gx = acc(t, ix)) gx->noalias() += g * t.value(iw);
        if (Matrix* gw = acc(t, iw)) gw->noalias() += g.transpose() * t.value(ix);
        if (Matrix* gb = acc(t, ib)) *gb += g.colwise().sum();
      },
      req(x, w) || req(b));
}

}  // namespace siteswarm::nn
