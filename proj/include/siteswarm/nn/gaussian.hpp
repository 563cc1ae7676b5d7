#ifndef SITESWARM_NN_GAUSSIAN_HPP_
#define SITESWARM_NN_GAUSSIAN_HPP_

#include <random>

#include "siteswarm/nn/network.hpp"
#include "siteswarm/nn/tape.hpp"

namespace siteswarm::nn {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian action distribution with a state-independent log-std.
struct GaussianHead {
  Vector mean;
  Vector log_std;
};

struct ActionSample {
  Vector action;  // unclamped draw
  double log_prob = 0.0;
};

// action = mean + exp(log_std) * z with z ~ N(0, I) drawn from `rng`.
ActionSample sample_action(const GaussianHead& head, std::mt19937_64& rng);
double log_prob(const GaussianHead& head, const Vector& action);
// Differential entropy: sum_d (log_std_d + 0.5 * log(2 pi e)).
double entropy(const GaussianHead& head);

// Tape versions. mean: B x D, log_std: 1 x D, actions: B x D -> B x 1.
Var log_prob(Var mean, Var log_std, const Matrix& actions);
Var entropy(Var log_std);

// Policy network: tanh(net(s)) gives the mean, log_std is a free 1 x D row.
struct PolicyParams {
  NetParams net;
  Matrix log_std;

  bool operator==(const PolicyParams& o) const { return net == o.net && same(log_std, o.log_std); }
};

GaussianHead head_for(const PolicyParams& policy, const Vector& state);
std::vector<ParamRef> named_params(PolicyParams& policy, const std::string& prefix);
void clamp_log_std(PolicyParams& policy);

}  // namespace siteswarm::nn

#endif  // SITESWARM_NN_GAUSSIAN_HPP_
