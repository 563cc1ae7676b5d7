#ifndef SITESWARM_MAPPO_ENVIRONMENT_HPP_
#define SITESWARM_MAPPO_ENVIRONMENT_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace siteswarm::mappo {

struct EnvStep {
  std::vector<Eigen::VectorXd> observations;  // one per agent, after the step
  std::vector<double> rewards;
  bool done = false;
  bool timeout = false;  // done only because the step budget ran out
  bool success = false;
  bool self_collision = false;
};

// Cooperative environment with one observation and one action vector per
// agent. Instances are confined to one thread at a time.
class MultiAgentEnv {
 public:
  virtual ~MultiAgentEnv() = default;

  virtual std::size_t agent_count() const = 0;
  virtual std::vector<Eigen::Index> observation_dims() const = 0;
  virtual std::vector<Eigen::Index> action_dims() const = 0;

  virtual std::vector<Eigen::VectorXd> reset(std::uint64_t seed) = 0;
  // Actions are clamped to [-1, 1] by the environment.
  virtual EnvStep step(std::span<const Eigen::VectorXd> actions) = 0;
};

// Called with the worker index so that workers can be given distinct sinks.
using EnvFactory = std::function<std::unique_ptr<MultiAgentEnv>(std::size_t worker)>;

}  // namespace siteswarm::mappo

#endif  // SITESWARM_MAPPO_ENVIRONMENT_HPP_
