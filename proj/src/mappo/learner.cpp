#include "siteswarm/mappo/learner.hpp"

#include <cmath>

#include "siteswarm/errors.hpp"

namespace siteswarm::mappo {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix(seed);
  for (std::uint64_t p : path) h = splitmix(h ^ splitmix(p + 0x632be59bd9b4e019ULL));
  return h;
}

AgentLearner make_learner(std::size_t index, Eigen::Index obs_dim, Eigen::Index action_dim,
                          const TrainerConfig& config) {
  std::mt19937_64 rng(derive_seed(config.seed, {0x1ea4, index}));
  AgentLearner l;
  l.index = index;
  l.policy.net = nn::make_mlp(obs_dim, config.hidden, action_dim, std::sqrt(2.0), 0.01, rng);
  l.policy.log_std = nn::Matrix::Constant(1, action_dim, config.init_log_std);
  nn::clamp_log_std(l.policy);
  l.value = nn::make_mlp(obs_dim, config.hidden, 1, std::sqrt(2.0), 1.0, rng);
  return l;
}

Minibatch gather(const rollout::RolloutBuffer& buffer, std::size_t agent,
                 const rollout::AdvantageSet& adv, std::span<const std::size_t> rows,
                 bool normalize_advantages) {
  const nn::Matrix& obs = buffer.observations(agent);
  const nn::Matrix& act = buffer.actions(agent);
  const std::span<const double> lp = buffer.log_probs(agent);
  const Eigen::Index b = static_cast<Eigen::Index>(rows.size());
  Minibatch mb;
  mb.observations.resize(b, obs.cols());
  mb.actions.resize(b, act.cols());
  mb.old_log_probs.resize(b);
  mb.advantages.resize(b);
  mb.returns.resize(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const std::size_t r = rows[static_cast<std::size_t>(i)];
    mb.observations.row(i) = obs.row(static_cast<Eigen::Index>(r));
    mb.actions.row(i) = act.row(static_cast<Eigen::Index>(r));
    mb.old_log_probs(i) = lp[r];
    mb.advantages(i) = adv.advantages[r];
    mb.returns(i) = adv.returns[r];
  }
  if (normalize_advantages && b > 1) {
    rollout::normalize(std::span<double>(mb.advantages.data(), mb.advantages.size()));
  }
  return mb;
}

UpdateStats update_agent(AgentLearner& learner, const rollout::RolloutBuffer& buffer,
                         const rollout::AdvantageSet& adv, const TrainerConfig& config,
                         std::mt19937_64& rng) {
  if (!buffer.full()) throw UsageError("update: buffer must be full");
  if (buffer.has_open_segment()) throw UsageError("update: buffer has an open segment");
  if (adv.advantages.size() != buffer.size()) throw ShapeError("update: advantage length");

  std::vector<nn::ParamRef> pparams = nn::named_params(learner.policy, kPolicyPrefix);
  std::vector<nn::ParamRef> vparams = nn::named_params(learner.value, kValuePrefix);

  UpdateStats st;
  double ratio_sum = 0.0, clipped = 0.0, samples = 0.0;
  for (std::int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches = rollout::minibatch_indices(
        buffer.size(), static_cast<std::size_t>(config.minibatches), rng);
    for (const std::vector<std::size_t>& rows : batches) {
      const Minibatch mb =
          gather(buffer, learner.index, adv, rows, config.normalize_advantages);
      nn::Tape tape;
      const PpoLoss loss = ppo_loss(tape, learner.policy, learner.value, mb, config);
      nn::GradientMap grads = tape.backward(loss.total);

      double gnorm;
      if (config.max_grad_norm > 0.0) {
        gnorm = nn::clip_global_norm(pparams, grads, config.max_grad_norm);
        nn::clip_global_norm(vparams, grads, config.max_grad_norm);
      } else {
        gnorm = nn::global_norm(pparams, grads);
      }
      nn::adam_step(pparams, grads, learner.policy_opt, config.learning_rate);
      nn::adam_step(vparams, grads, learner.value_opt, config.learning_rate);
      nn::clamp_log_std(learner.policy);

      if (st.optimizer_steps == 0) {
        st.initial_ratio_error = (loss.ratio.array() - 1.0).abs().maxCoeff();
      }
      ++st.optimizer_steps;
      ratio_sum += loss.ratio.sum();
      clipped += static_cast<double>(
          ((loss.ratio.array() - 1.0).abs() > config.clip).count());
      samples += static_cast<double>(loss.ratio.size());
      st.policy_loss += -loss.surrogate.scalar();
      st.value_loss += loss.value.scalar();
      st.entropy += loss.entropy.scalar();
      st.grad_norm += gnorm;
    }
  }
  const double steps = static_cast<double>(st.optimizer_steps);
  st.mean_ratio = ratio_sum / samples;
  st.clip_fraction = clipped / samples;
  st.policy_loss /= steps;
  st.value_loss /= steps;
  st.entropy /= steps;
  st.grad_norm /= steps;
  return st;
}

std::vector<UpdateStats> update_agents(std::vector<AgentLearner>& learners,
                                       const rollout::RolloutBuffer& buffer,
                                       const std::vector<rollout::AdvantageSet>& adv,
                                       const TrainerConfig& config,
                                       std::uint64_t stream_seed) {
  if (learners.size() != buffer.agent_count() || adv.size() != learners.size()) {
    throw ShapeError("update: learner, buffer and advantage agent counts differ");
  }
  std::vector<UpdateStats> out;
  for (std::size_t i = 0; i < learners.size(); ++i) {
    std::mt19937_64 rng(derive_seed(stream_seed, {i}));
    out.push_back(update_agent(learners[i], buffer, adv[i], config, rng));
  }
  return out;
}

}  // namespace siteswarm::mappo
