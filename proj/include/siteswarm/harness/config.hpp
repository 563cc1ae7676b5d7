#ifndef SITESWARM_HARNESS_CONFIG_HPP_
#define SITESWARM_HARNESS_CONFIG_HPP_

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include "siteswarm/mappo/config.hpp"
#include "siteswarm/mappo/environment.hpp"
#include "siteswarm/tasks/rewards.hpp"
#include "siteswarm/tasks/task_env.hpp"

namespace siteswarm::harness {

// Task-level knobs exposed in the config file.
struct TaskOptions {
  bool share_actions = true;
  bool ik_handoff = true;
  tasks::HgMode hg_mode = tasks::HgMode::Zero;
  int collision_budget = 0;
  double grasp_distance = 0.1;
  double grasp_alignment = 0.95;
  double collision_margin = 0.01;
  double max_joint_delta = 0.15;

  bool operator==(const TaskOptions&) const = default;
};

struct ExperimentConfig {
  tasks::TaskId task = tasks::TaskId::Task1;
  mappo::TrainerConfig trainer;
  TaskOptions options;
  tasks::RewardWeights weights;
  std::string output_dir = "run";
  std::int64_t checkpoint_interval = 10;  // iterations; 0 = only at the end
  std::int64_t eval_episodes = 100;

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// Training defaults per task (N, M, n, K, lr, clip, coefficients, T).
mappo::TrainerConfig default_trainer(tasks::TaskId id);
ExperimentConfig default_experiment(tasks::TaskId id);

nlohmann::json to_json(const ExperimentConfig& c);
// Keys absent from `j` keep the defaults of the selected task; unknown keys
// raise ConfigError. `task` overrides the file's "task" entry when set.
ExperimentConfig from_json(const nlohmann::json& j,
                           std::optional<tasks::TaskId> task = std::nullopt);
ExperimentConfig load_experiment(const std::filesystem::path& path,
                                 std::optional<tasks::TaskId> task = std::nullopt);

// The environment spec with options, weights and episode length applied.
tasks::TaskSpec build_task(const ExperimentConfig& c);

// Environment factory for the trainer; `sink` (if set) is attached to worker 0.
mappo::EnvFactory make_env_factory(const ExperimentConfig& c,
                                   std::function<void(const tasks::StepRecord&)> sink = {});

}  // namespace siteswarm::harness

#endif  // SITESWARM_HARNESS_CONFIG_HPP_
