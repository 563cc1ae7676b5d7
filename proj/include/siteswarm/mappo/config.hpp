#ifndef SITESWARM_MAPPO_CONFIG_HPP_
#define SITESWARM_MAPPO_CONFIG_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace siteswarm::mappo {

struct TrainerConfig {
  std::int64_t total_steps = 2'000'000;  // N, environment steps
  std::int64_t buffer_size = 2000;       // M
  std::int64_t minibatches = 5;          // n
  std::int64_t epochs = 4;               // K
  double learning_rate = 5e-4;
  double clip = 0.2;           // zeta
  double value_coef = 0.5;     // lambda_1
  double entropy_coef = 0.01;  // lambda_2
  double gae_lambda = 0.95;    // xi
  double gamma = 0.99;
  std::int64_t episode_length = 20;  // T
  std::uint64_t seed = 0;

  std::vector<Eigen::Index> hidden = {64, 64};
  double max_grad_norm = 0.5;  // per network; <= 0 disables clipping
  bool normalize_advantages = true;
  double init_log_std = -0.5;
  // Environment instances; each collects buffer_size / envs steps per
  // iteration. The split is fixed, so results do not depend on threads.
  std::int64_t envs = 4;
  // 1 = serial reference; 0 = OpenMP default; otherwise that many threads.
  int threads = 1;

  std::int64_t iterations() const;  // ceil(N / M)
  void validate() const;            // throws ConfigError

  bool operator==(const TrainerConfig&) const = default;
};

}  // namespace siteswarm::mappo

#endif  // SITESWARM_MAPPO_CONFIG_HPP_
