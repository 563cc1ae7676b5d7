#ifndef SITESWARM_MAPPO_TRAINER_HPP_
#define SITESWARM_MAPPO_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "siteswarm/mappo/config.hpp"
#include "siteswarm/mappo/environment.hpp"
#include "siteswarm/mappo/learner.hpp"
#include "siteswarm/rollout/buffer.hpp"

namespace siteswarm::mappo {

inline constexpr std::size_t kRollingWindow = 50;

struct EpisodeOutcome {
  bool success = false;
  std::int64_t self_collision_steps = 0;

  bool operator==(const EpisodeOutcome&) const = default;
};

struct IterationMetrics {
  std::int64_t iteration = 0;  // 1-based
  std::int64_t env_steps = 0;  // cumulative
  std::vector<double> mean_episode_return;  // per agent; NaN when no episode ended
  std::vector<double> policy_loss;
  std::vector<double> value_loss;
  std::vector<double> entropy;
  std::vector<double> clip_fraction;
  double success_rate_rolling = 0.0;  // NaN until an episode ended
  double self_collisions_rolling = 0.0;

  bool operator==(const IterationMetrics&) const;
};

// Everything needed to continue a run bit-identically.
struct TrainerState {
  TrainerConfig config;
  std::vector<AgentLearner> learners;
  std::int64_t iteration = 0;
  std::int64_t env_steps = 0;
  std::vector<std::uint64_t> episode_counters;  // per environment instance
  std::vector<EpisodeOutcome> window;           // most recent last
  std::vector<IterationMetrics> history;

  bool operator==(const TrainerState&) const = default;
};

struct Collection {
  rollout::RolloutBuffer buffer;
  std::vector<std::vector<double>> episode_returns;  // per finished episode, per agent
  std::vector<EpisodeOutcome> outcomes;
};

// Runs the learners on one environment for `steps` steps starting from a
// fresh episode. Deterministic in (config.seed, iteration, worker, counter).
Collection collect(MultiAgentEnv& env, const std::vector<AgentLearner>& learners,
                   std::size_t steps, const TrainerConfig& config, std::int64_t iteration,
                   std::size_t worker, std::uint64_t& episode_counter);

std::uint64_t episode_seed(std::uint64_t seed, std::size_t worker, std::uint64_t counter);

class Trainer {
 public:
  Trainer(EnvFactory factory, const TrainerConfig& config);
  // Resumes from a saved state.
  Trainer(EnvFactory factory, TrainerState state);

  bool finished() const;
  const IterationMetrics& run_iteration();
  // Runs to completion; `after` (if set) sees the state after each iteration.
  void train(const std::function<void(const TrainerState&)>& after = {});

  const TrainerState& state() const { return state_; }
  std::size_t env_count() const { return envs_.size(); }

 private:
  void make_envs();

  EnvFactory factory_;
  TrainerState state_;
  std::vector<std::unique_ptr<MultiAgentEnv>> envs_;
};

}  // namespace siteswarm::mappo

#endif  // SITESWARM_MAPPO_TRAINER_HPP_
