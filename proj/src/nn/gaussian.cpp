#include "siteswarm/nn/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "siteswarm/errors.hpp"

namespace siteswarm::nn {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

void check_head(const GaussianHead& head) {
  if (head.mean.size() != head.log_std.size()) {
    throw ShapeError("gaussian: mean/log_std length mismatch");
  }
}

}  // namespace

ActionSample sample_action(const GaussianHead& head, std::mt19937_64& rng) {
  check_head(head);
  // Fresh distribution per call: no cached Box-Muller value survives between
  // calls, so the stream position is the only state.
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSample out;
  out.action.resize(head.mean.size());
  for (Eigen::Index d = 0; d < head.mean.size(); ++d) {
    out.action(d) = head.mean(d) + std::exp(head.log_std(d)) * normal(rng);
  }
  out.log_prob = log_prob(head, out.action);
  return out;
}

double log_prob(const GaussianHead& head, const Vector& action) {
  check_head(head);
  if (action.size() != head.mean.size()) {
    throw ShapeError("gaussian: action length mismatch");
  }
  double lp = 0.0;
  for (Eigen::Index d = 0; d < action.size(); ++d) {
    const double z = (action(d) - head.mean(d)) * std::exp(-head.log_std(d));
    lp += -0.5 * z * z - head.log_std(d) - kHalfLog2Pi;
  }
  return lp;
}

double entropy(const GaussianHead& head) {
  double h = 0.0;
  for (Eigen::Index d = 0; d < head.log_std.size(); ++d) {
    h += head.log_std(d) + 0.5 + kHalfLog2Pi;
  }
  return h;
}

Var log_prob(Var mean, Var log_std, const Matrix& actions) {
  if (log_std.rows() != 1 || log_std.cols() != mean.cols() ||
      actions.rows() != mean.rows() || actions.cols() != mean.cols()) {
    throw ShapeError("gaussian: tape log_prob shape mismatch");
  }
  Tape& t = *mean.tape();
  const Eigen::Index rows = mean.rows();
  const double dims = static_cast<double>(mean.cols());
  Var ls = broadcast_rows(log_std, rows);
  Var z = mul(sub(t.constant(actions), mean), exp(scale(ls, -1.0)));
  Var per_dim = sub(scale(square(z), -0.5), ls);
  return shift(row_sum(per_dim), -dims * kHalfLog2Pi);
}

Var entropy(Var log_std) {
  const double dims = static_cast<double>(log_std.cols());
  return shift(sum(log_std), dims * (0.5 + kHalfLog2Pi));
}

GaussianHead head_for(const PolicyParams& policy, const Vector& state) {
  GaussianHead head;
  head.mean = forward(policy.net, state).array().tanh().matrix();
  head.log_std = policy.log_std.row(0).transpose();
  return head;
}

std::vector<ParamRef> named_params(PolicyParams& policy, const std::string& prefix) {
  std::vector<ParamRef> out = named_params(policy.net, prefix);
  out.push_back({prefix + ".log_std", &policy.log_std});
  return out;
}

void clamp_log_std(PolicyParams& policy) {
  policy.log_std = policy.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

}  // namespace siteswarm::nn
