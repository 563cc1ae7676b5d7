#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gradcheck.hpp"
#include "siteswarm/errors.hpp"
#include "siteswarm/nn/adam.hpp"
#include "siteswarm/nn/gaussian.hpp"
#include "siteswarm/nn/network.hpp"

using namespace siteswarm;
using nn::Matrix;
using nn::Vector;

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

nn::NetParams constant_net(const std::vector<Eigen::Index>& sizes, double w, double b) {
  nn::NetParams n;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    n.layers.push_back({Matrix::Constant(sizes[i + 1], sizes[i], w), Matrix::Constant(1, sizes[i + 1], b)});
    if (i + 2 < sizes.size()) n.hidden_activation.push_back(nn::Activation::Tanh);
  }
  return n;
}

}  // namespace

TEST_CASE("forward: zero net gives zeros") {
  const nn::NetParams n = constant_net({3, 4, 2}, 0.0, 0.0);
  CHECK(nn::forward(n, Vector::Constant(3, 7.0)).isZero(0.0));
}

TEST_CASE("forward: identity linear layer") {
  nn::NetParams n;
  n.layers.push_back({Matrix::Identity(2, 2), Matrix::Zero(1, 2)});
  const Vector out = nn::forward(n, Vector::Map(std::vector<double>{1.0, 2.0}.data(), 2));
  CHECK(out(0) == 1.0);
  CHECK(out(1) == 2.0);
}

TEST_CASE("forward: 2-2-1 hand evaluation") {
  const nn::NetParams n = constant_net({2, 2, 1}, 0.5, 0.0);
  const Vector out = nn::forward(n, Vector::Ones(2));
  CHECK(out(0) == doctest::Approx(0.76159).epsilon(1e-5));
  CHECK(out(0) == doctest::Approx(0.5 * (std::tanh(1.0) + std::tanh(1.0))).epsilon(1e-15));
}

TEST_CASE("forward: batch rows match single evaluation") {
  std::mt19937_64 rng(3);
  const nn::NetParams n = nn::make_mlp(5, {8, 8}, 3, std::sqrt(2.0), 1.0, rng);
  Matrix x = Matrix::Random(6, 5);
  const Matrix y = nn::forward_batch(n, x);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Vector single = nn::forward(n, Vector(x.row(r).transpose()));
    CHECK((single - y.row(r).transpose()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("network validation and shapes") {
  std::mt19937_64 rng(1);
  nn::NetParams n = nn::make_mlp(4, {64, 64}, 2, std::sqrt(2.0), 0.01, rng);
  CHECK(n.in_dim() == 4);
  CHECK(n.out_dim() == 2);
  CHECK(n.param_count() == static_cast<std::size_t>(4 * 64 + 64 + 64 * 64 + 64 + 64 * 2 + 2));
  CHECK_NOTHROW(n.validate());
  CHECK_THROWS_AS(nn::forward(n, Vector::Zero(3)), ShapeError);
  n.layers[1].weight(0, 0) = std::nan("");
  CHECK_THROWS_AS(n.validate(), NumericError);
  n.layers[1].weight = Matrix::Zero(5, 64);
  CHECK_THROWS_AS(n.validate(), ShapeError);
}

TEST_CASE("orthogonal init: rows orthonormal up to gain") {
  std::mt19937_64 rng(11);
  const nn::NetParams n = nn::make_mlp(10, {16}, 4, std::sqrt(2.0), 0.01, rng);
  const Matrix& w0 = n.layers[0].weight;  // 16 x 10: orthonormal columns
  CHECK((w0.transpose() * w0 - 2.0 * Matrix::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-12);
  const Matrix& w1 = n.layers[1].weight;  // 4 x 16: orthonormal rows
  CHECK((w1 * w1.transpose() - 1e-4 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(n.layers[0].bias.isZero(0.0));
}

TEST_CASE("gaussian: closed-form densities") {
  nn::GaussianHead h{Vector::Zero(1), Vector::Zero(1)};
  CHECK(nn::log_prob(h, Vector::Zero(1)) == doctest::Approx(-0.91894).epsilon(1e-5));
  CHECK(nn::log_prob(h, Vector::Ones(1)) == doctest::Approx(-1.41894).epsilon(1e-5));
  CHECK(nn::log_prob(h, Vector::Ones(1)) == doctest::Approx(-0.5 - kHalfLog2Pi).epsilon(1e-15));

  nn::GaussianHead p{Vector::Constant(3, 0.3), Vector::Map(std::vector<double>{-1.0, 0.0, 0.5}.data(), 3)};
  const double peak = -(p.log_std.array() + kHalfLog2Pi).sum();
  CHECK(nn::log_prob(p, p.mean) == doctest::Approx(peak).epsilon(1e-15));
}

TEST_CASE("gaussian: entropy") {
  CHECK(nn::entropy({Vector::Zero(1), Vector::Zero(1)}) == doctest::Approx(1.41894).epsilon(1e-5));
  CHECK(nn::entropy({Vector::Zero(2), Vector::Zero(2)}) == doctest::Approx(2 * 1.41894).epsilon(1e-5));
  Vector a = Vector::Zero(2), b = Vector::Zero(2);
  a(0) = 0.3;
  b(0) = 0.1;
  CHECK(nn::entropy({Vector::Zero(2), a}) > nn::entropy({Vector::Zero(2), b}));
}

TEST_CASE("gaussian: sampling is reproducible and consistent with log_prob") {
  nn::GaussianHead h{Vector::Map(std::vector<double>{0.2, -0.4}.data(), 2),
                     Vector::Map(std::vector<double>{-0.3, 0.1}.data(), 2)};
  std::mt19937_64 a(99), b(99);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const nn::ActionSample s = nn::sample_action(h, a);
    const nn::ActionSample t = nn::sample_action(h, b);
    REQUIRE(s.action == t.action);
    worst = std::max(worst, std::abs(s.log_prob - nn::log_prob(h, s.action)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("gaussian: clamp floor collapses the draw onto the mean") {
  nn::PolicyParams p;
  std::mt19937_64 rng(2);
  p.net = nn::make_mlp(3, {4}, 2, 1.0, 1.0, rng);
  p.log_std = Matrix::Constant(1, 2, -100.0);
  nn::clamp_log_std(p);
  CHECK(p.log_std.minCoeff() == nn::kLogStdMin);
  p.log_std(0, 1) = 10.0;
  nn::clamp_log_std(p);
  CHECK(p.log_std(0, 1) == nn::kLogStdMax);
  p.log_std = Matrix::Constant(1, 2, nn::kLogStdMin);
  const nn::GaussianHead h = nn::head_for(p, Vector::Ones(3));
  const nn::ActionSample s = nn::sample_action(h, rng);
  CHECK((s.action - h.mean).cwiseAbs().maxCoeff() < 0.05);
  CHECK(h.mean.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("tape: scalar gradient cases") {
  {
    nn::Tape t;
    nn::Var w = t.param("w", Matrix::Constant(1, 1, 0.7));
    nn::Var x = t.constant(Matrix::Constant(1, 1, 3.0));
    const nn::GradientMap g = t.backward(nn::sum(w * x));
    CHECK(g.at("w")(0, 0) == 3.0);
  }
  {
    nn::Tape t;
    nn::Var w = t.param("w", Matrix::Zero(1, 1));
    const nn::GradientMap g = t.backward(nn::sum(nn::tanh(w)));
    CHECK(g.at("w")(0, 0) == 1.0);
  }
}

TEST_CASE("tape: backward twice is a usage error, unused params get zeros") {
  nn::Tape t;
  nn::Var w = t.param("w", Matrix::Ones(2, 2));
  t.param("unused", Matrix::Ones(1, 3));
  nn::Var loss = nn::sum(nn::square(w));
  const nn::GradientMap g = t.backward(loss);
  CHECK(g.at("unused").isZero(0.0));
  CHECK(g.at("unused").cols() == 3);
  CHECK_THROWS_AS(t.backward(loss), UsageError);
}

TEST_CASE("tape: shape mismatch is rejected") {
  nn::Tape t;
  nn::Var a = t.constant(Matrix::Ones(2, 2));
  nn::Var b = t.constant(Matrix::Ones(2, 3));
  CHECK_THROWS_AS(nn::add(a, b), ShapeError);
  CHECK_THROWS_AS(t.backward(a), ShapeError);
}

TEST_CASE("tape: finite differences on random two-layer nets") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const nn::NetParams net = nn::make_mlp(3, {5}, 2, 1.0, 1.0, rng);
    const Matrix x = Matrix::Random(4, 3);
    const Matrix target = Matrix::Random(4, 2);
    gradcheck::Params p;
    p["w0"] = net.layers[0].weight;
    p["b0"] = net.layers[0].bias;
    p["w1"] = net.layers[1].weight;
    p["b1"] = net.layers[1].bias;
    const gradcheck::LossFn f = [&](nn::Tape& t, const gradcheck::Params& q) {
      nn::Var h = nn::tanh(nn::linear(t.constant(x), t.param("w0", q.at("w0")), t.param("b0", q.at("b0"))));
      nn::Var y = nn::linear(h, t.param("w1", q.at("w1")), t.param("b1", q.at("b1")));
      return nn::mean(nn::square(y - t.constant(target)));
    };
    CHECK(gradcheck::check(f, p).max_rel < 1e-4);
  }
}

TEST_CASE("tape: every op passes a finite-difference check") {
  const Matrix a0 = (Matrix(2, 3) << 0.3, -0.2, 0.5, 0.1, 0.4, -0.6).finished();
  const Matrix b0 = (Matrix(2, 3) << -0.1, 0.2, 0.7, -0.4, 0.2, 0.05).finished();
  const Matrix r0 = (Matrix(1, 3) << 0.2, -0.3, 0.1).finished();
  gradcheck::Params p{{"a", a0}, {"b", b0}, {"r", r0}};
  const gradcheck::LossFn f = [](nn::Tape& t, const gradcheck::Params& q) {
    nn::Var a = t.param("a", q.at("a"));
    nn::Var b = t.param("b", q.at("b"));
    nn::Var r = t.param("r", q.at("r"));
    nn::Var m = nn::minimum(nn::exp(a), nn::shift(nn::scale(b, 2.0), 1.0));
    nn::Var c = nn::clamp(a * b, -0.05, 0.05);
    nn::Var s = nn::row_sum(m + c - nn::broadcast_rows(r, 2));
    return nn::sum(nn::square(s)) + nn::mean(nn::tanh(a - b));
  };
  CHECK(gradcheck::check(f, p).max_rel < 1e-4);
}

TEST_CASE("adam: first step moves each entry by lr against the gradient") {
  Matrix w = (Matrix(1, 3) << 1.0, -2.0, 0.5).finished();
  std::vector<nn::ParamRef> params{{"w", &w}};
  nn::GradientMap g{{"w", (Matrix(1, 3) << 0.3, -4.0, 1e-3).finished()}};
  nn::AdamState st;
  const Matrix before = w;
  nn::adam_step(params, g, st, 0.01);
  CHECK(st.step == 1);
  const Matrix delta = w - before;
  // m_hat = g and v_hat = g^2, so the step is lr * g / (|g| + eps).
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double gi = g.at("w")(0, i);
    CHECK(delta(0, i) == doctest::Approx(-0.01 * gi / (std::abs(gi) + 1e-8)).epsilon(1e-12));
  }
}

TEST_CASE("adam: zero gradient leaves params, advances the counter; deterministic") {
  Matrix w = Matrix::Ones(2, 2), w2 = Matrix::Ones(2, 2);
  std::vector<nn::ParamRef> p{{"w", &w}}, p2{{"w", &w2}};
  nn::AdamState st, st2;
  nn::adam_step(p, {{"w", Matrix::Zero(2, 2)}}, st, 0.1);
  CHECK(w == Matrix::Ones(2, 2));
  CHECK(st.step == 1);
  nn::adam_step(p, {{"w", Matrix::Constant(2, 2, 0.5)}}, st, 0.1);
  nn::adam_step(p2, {{"w", Matrix::Zero(2, 2)}}, st2, 0.1);
  nn::adam_step(p2, {{"w", Matrix::Constant(2, 2, 0.5)}}, st2, 0.1);
  CHECK(w == w2);
  CHECK(st == st2);
}

TEST_CASE("adam: non-finite gradient throws and leaves params untouched") {
  Matrix w = Matrix::Ones(1, 2);
  std::vector<nn::ParamRef> p{{"w", &w}};
  nn::AdamState st;
  Matrix g = Matrix::Ones(1, 2);
  g(0, 1) = INFINITY;
  CHECK_THROWS_AS(nn::adam_step(p, {{"w", g}}, st, 0.1), NumericError);
  CHECK(w == Matrix::Ones(1, 2));
}

TEST_CASE("global norm clipping") {
  Matrix a = Matrix::Zero(1, 2), b = Matrix::Zero(1, 1);
  std::vector<nn::ParamRef> p{{"a", &a}, {"b", &b}};
  nn::GradientMap g{{"a", (Matrix(1, 2) << 3.0, 0.0).finished()}, {"b", Matrix::Constant(1, 1, 4.0)}};
  CHECK(nn::global_norm(p, g) == 5.0);
  CHECK(nn::clip_global_norm(p, g, 0.5) == 5.0);
  CHECK(nn::global_norm(p, g) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(nn::clip_global_norm(p, g, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(nn::global_norm(p, g) == doctest::Approx(0.5).epsilon(1e-15));
}
