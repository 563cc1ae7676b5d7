#ifndef SITESWARM_MAPPO_LEARNER_HPP_
#define SITESWARM_MAPPO_LEARNER_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "siteswarm/mappo/config.hpp"
#include "siteswarm/mappo/losses.hpp"
#include "siteswarm/nn/adam.hpp"
#include "siteswarm/nn/gaussian.hpp"
#include "siteswarm/rollout/advantage.hpp"
#include "siteswarm/rollout/buffer.hpp"

namespace siteswarm::mappo {

// splitmix64 mix of a base seed with a path of stream indices.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

// One agent's actor and critic with their optimiser moments.
struct AgentLearner {
  std::size_t index = 0;
  nn::PolicyParams policy;
  nn::NetParams value;
  nn::AdamState policy_opt;
  nn::AdamState value_opt;

  bool operator==(const AgentLearner&) const = default;
};

AgentLearner make_learner(std::size_t index, Eigen::Index obs_dim, Eigen::Index action_dim,
                          const TrainerConfig& config);

struct UpdateStats {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;  // share of samples with |ratio - 1| > clip
  double policy_loss = 0.0;    // -L_clip
  double value_loss = 0.0;
  double entropy = 0.0;
  double grad_norm = 0.0;      // policy gradient norm before clipping
  double initial_ratio_error = 0.0;  // max |ratio - 1| on the first minibatch
  std::int64_t optimizer_steps = 0;
};

// Minibatch for `rows` of the buffer from one agent's perspective.
Minibatch gather(const rollout::RolloutBuffer& buffer, std::size_t agent,
                 const rollout::AdvantageSet& adv, std::span<const std::size_t> rows,
                 bool normalize_advantages);

// K epochs x n minibatches of Adam steps on the combined loss. Reads only this
// agent's columns of the buffer and its own parameters.
UpdateStats update_agent(AgentLearner& learner, const rollout::RolloutBuffer& buffer,
                         const rollout::AdvantageSet& adv, const TrainerConfig& config,
                         std::mt19937_64& rng);

// Every agent in turn, each with its own minibatch stream derived from
// `stream_seed`.
std::vector<UpdateStats> update_agents(std::vector<AgentLearner>& learners,
                                       const rollout::RolloutBuffer& buffer,
                                       const std::vector<rollout::AdvantageSet>& adv,
                                       const TrainerConfig& config,
                                       std::uint64_t stream_seed);

}  // namespace siteswarm::mappo

#endif  // SITESWARM_MAPPO_LEARNER_HPP_
