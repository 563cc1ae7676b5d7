#ifndef SITESWARM_HARNESS_EVALUATE_HPP_
#define SITESWARM_HARNESS_EVALUATE_HPP_

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "siteswarm/mappo/learner.hpp"
#include "siteswarm/tasks/task_env.hpp"

namespace siteswarm::harness {

// Maps per-agent observations to per-agent actions. Must not keep state
// between calls when evaluation runs in parallel.
using Controller = std::function<std::vector<Eigen::VectorXd>(
    const std::vector<Eigen::VectorXd>& observations, const tasks::TaskEnv& env)>;

// Deterministic controller from the policy means.
Controller mean_policy(const std::vector<mappo::AgentLearner>& learners);

struct EvalOptions {
  std::int64_t episodes = 100;
  std::uint64_t seed = 0;
  int threads = 1;  // 1 = serial; 0 = OpenMP default
};

struct EvalReport {
  tasks::TaskId task = tasks::TaskId::Task1;
  std::int64_t episodes = 0;
  std::vector<std::string> arms;
  std::vector<double> pickup_rate;     // %, per arm
  std::vector<double> placement_rate;  // %, per arm (task 3 left: handed over)
  std::vector<double> arm_success_rate;  // %, per arm; task 4 tag reached and lift finished
  double episode_success_rate = 0.0;   // %
  double handoff_rate = 0.0;           // %, task 3
  double self_collisions_per_episode = 0.0;
  // Finishing moves started from a met staging condition.
  std::int64_t ik_attempts = 0;
  std::int64_t ik_successes = 0;        // success with final error under tolerance
  std::map<std::string, std::int64_t> ik_failures;  // failure kind -> count
  std::int64_t ik_failures_without_diagnostic = 0;
  double ik_max_error_on_success = 0.0;

  nlohmann::json to_json() const;
};

// Episode seeds derive from (seed, episode index), so serial and parallel
// runs give the same report.
EvalReport evaluate(const tasks::TaskSpec& spec, const Controller& controller,
                    const EvalOptions& opts);
// Throws ConfigError when the learners do not match the task roster.
EvalReport evaluate(const tasks::TaskSpec& spec, const std::vector<mappo::AgentLearner>& learners,
                    const EvalOptions& opts);

std::uint64_t eval_episode_seed(std::uint64_t seed, std::int64_t episode);

}  // namespace siteswarm::harness

#endif  // SITESWARM_HARNESS_EVALUATE_HPP_
