#include "siteswarm/mappo/trainer.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <limits>
#include <optional>

#include "siteswarm/errors.hpp"
#include "siteswarm/rollout/advantage.hpp"

namespace siteswarm::mappo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

bool IterationMetrics::operator==(const IterationMetrics& o) const {
  return iteration == o.iteration && env_steps == o.env_steps &&
         same(mean_episode_return, o.mean_episode_return) && same(policy_loss, o.policy_loss) &&
         same(value_loss, o.value_loss) && same(entropy, o.entropy) &&
         same(clip_fraction, o.clip_fraction) &&
         same(success_rate_rolling, o.success_rate_rolling) &&
         same(self_collisions_rolling, o.self_collisions_rolling);
}

std::uint64_t episode_seed(std::uint64_t seed, std::size_t worker, std::uint64_t counter) {
  return derive_seed(seed, {2, worker, counter});
}

Collection collect(MultiAgentEnv& env, const std::vector<AgentLearner>& learners,
                   std::size_t steps, const TrainerConfig& config, std::int64_t iteration,
                   std::size_t worker, std::uint64_t& episode_counter) {
  const std::size_t n = env.agent_count();
  if (learners.size() != n) {
    throw ShapeError("collect: " + std::to_string(learners.size()) + " learners for " +
                     std::to_string(n) + " agents");
  }
  Collection out{rollout::RolloutBuffer(steps, env.observation_dims(), env.action_dims()),
                 {},
                 {}};
  std::mt19937_64 rng(derive_seed(config.seed, {1, static_cast<std::uint64_t>(iteration), worker}));

  std::vector<Eigen::VectorXd> obs = env.reset(episode_seed(config.seed, worker, episode_counter++));
  std::vector<double> ep_return(n, 0.0);
  std::int64_t ep_self = 0;
  bool last_done = false;

  rollout::Transition tr;
  tr.actions.resize(n);
  tr.values.resize(n);
  tr.log_probs.resize(n);
  std::vector<Eigen::VectorXd> env_actions(n);
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const nn::GaussianHead head = nn::head_for(learners[i].policy, obs[i]);
      const nn::ActionSample a = nn::sample_action(head, rng);
      tr.actions[i] = a.action;
      tr.log_probs[i] = a.log_prob;
      tr.values[i] = nn::forward(learners[i].value, obs[i])(0);
      env_actions[i] = a.action.cwiseMax(-1.0).cwiseMin(1.0);
    }
    EnvStep st = env.step(env_actions);
    tr.observations = std::move(obs);
    tr.rewards = st.rewards;
    tr.masks.assign(n, st.done ? 0 : 1);
    out.buffer.append(tr);

    for (std::size_t i = 0; i < n; ++i) ep_return[i] += st.rewards[i];
    if (st.self_collision) ++ep_self;
    last_done = st.done;
    if (st.done) {
      out.episode_returns.push_back(ep_return);
      out.outcomes.push_back({st.success, ep_self});
      ep_return.assign(n, 0.0);
      ep_self = 0;
      if (s + 1 < steps) {
        obs = env.reset(episode_seed(config.seed, worker, episode_counter++));
      } else {
        obs = std::move(st.observations);
      }
    } else {
      obs = std::move(st.observations);
    }
  }

  std::vector<double> bootstrap(n, 0.0);
  if (!last_done) {
    for (std::size_t i = 0; i < n; ++i) bootstrap[i] = nn::forward(learners[i].value, obs[i])(0);
  }
  out.buffer.end_segment(std::move(bootstrap));
  return out;
}

Trainer::Trainer(EnvFactory factory, const TrainerConfig& config)
    : factory_(std::move(factory)) {
  config.validate();
  state_.config = config;
  make_envs();
  const MultiAgentEnv& env = *envs_.front();
  const auto od = env.observation_dims();
  const auto ad = env.action_dims();
  for (std::size_t i = 0; i < env.agent_count(); ++i) {
    state_.learners.push_back(make_learner(i, od[i], ad[i], config));
  }
  state_.episode_counters.assign(envs_.size(), 0);
}

Trainer::Trainer(EnvFactory factory, TrainerState state)
    : factory_(std::move(factory)), state_(std::move(state)) {
  state_.config.validate();
  make_envs();
  const MultiAgentEnv& env = *envs_.front();
  if (state_.learners.size() != env.agent_count()) {
    throw ConfigError("resume: state has " + std::to_string(state_.learners.size()) +
                      " learners, environment has " + std::to_string(env.agent_count()) +
                      " agents");
  }
  const auto od = env.observation_dims();
  for (std::size_t i = 0; i < state_.learners.size(); ++i) {
    if (state_.learners[i].policy.net.in_dim() != od[i]) {
      throw ConfigError("resume: observation size differs from the saved learners");
    }
  }
  if (state_.episode_counters.size() != envs_.size()) {
    throw ConfigError("resume: environment count differs from the saved state");
  }
}

void Trainer::make_envs() {
  envs_.clear();
  for (std::int64_t e = 0; e < state_.config.envs; ++e) {
    envs_.push_back(factory_(static_cast<std::size_t>(e)));
    if (!envs_.back()) throw ConfigError("trainer: environment factory returned null");
  }
}

bool Trainer::finished() const { return state_.iteration >= state_.config.iterations(); }

const IterationMetrics& Trainer::run_iteration() {
  if (finished()) throw UsageError("trainer: all iterations already ran");
  const TrainerConfig& cfg = state_.config;
  const std::size_t n_env = envs_.size();
  const std::size_t per_env = static_cast<std::size_t>(cfg.buffer_size / cfg.envs);
  const std::int64_t it = state_.iteration;

  std::vector<std::optional<Collection>> parts(n_env);
  std::vector<std::exception_ptr> errors(n_env);
  const auto work = [&](std::size_t e) {
    try {
      parts[e] = collect(*envs_[e], state_.learners, per_env, cfg, it, e,
                         state_.episode_counters[e]);
    } catch (...) {
      errors[e] = std::current_exception();
    }
  };
  if (cfg.threads == 1) {
    for (std::size_t e = 0; e < n_env; ++e) work(e);
  } else {
    const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::int64_t e = 0; e < static_cast<std::int64_t>(n_env); ++e) {
      work(static_cast<std::size_t>(e));
    }
  }
  for (const std::exception_ptr& ep : errors) {
    if (ep) std::rethrow_exception(ep);
  }

  const MultiAgentEnv& env0 = *envs_.front();
  rollout::RolloutBuffer buffer(static_cast<std::size_t>(cfg.buffer_size),
                                env0.observation_dims(), env0.action_dims());
  const std::size_t n_agents = state_.learners.size();
  std::vector<double> ret_sum(n_agents, 0.0);
  std::size_t episodes = 0;
  for (std::optional<Collection>& p : parts) {
    buffer.append_buffer(p->buffer);
    for (const auto& r : p->episode_returns) {
      for (std::size_t i = 0; i < n_agents; ++i) ret_sum[i] += r[i];
      ++episodes;
    }
    for (const EpisodeOutcome& o : p->outcomes) {
      state_.window.push_back(o);
      if (state_.window.size() > kRollingWindow) state_.window.erase(state_.window.begin());
    }
  }

  const std::vector<rollout::AdvantageSet> adv =
      rollout::compute_advantages(buffer, cfg.gamma, cfg.gae_lambda);
  const std::vector<UpdateStats> stats = update_agents(
      state_.learners, buffer, adv, cfg, derive_seed(cfg.seed, {3, static_cast<std::uint64_t>(it)}));

  ++state_.iteration;
  state_.env_steps += cfg.buffer_size;

  IterationMetrics m;
  m.iteration = state_.iteration;
  m.env_steps = state_.env_steps;
  for (std::size_t i = 0; i < n_agents; ++i) {
    m.mean_episode_return.push_back(episodes ? ret_sum[i] / static_cast<double>(episodes) : kNaN);
    m.policy_loss.push_back(stats[i].policy_loss);
    m.value_loss.push_back(stats[i].value_loss);
    m.entropy.push_back(stats[i].entropy);
    m.clip_fraction.push_back(stats[i].clip_fraction);
  }
  if (state_.window.empty()) {
    m.success_rate_rolling = kNaN;
    m.self_collisions_rolling = kNaN;
  } else {
    double succ = 0.0, coll = 0.0;
    for (const EpisodeOutcome& o : state_.window) {
      succ += o.success ? 1.0 : 0.0;
      coll += static_cast<double>(o.self_collision_steps);
    }
    m.success_rate_rolling = succ / static_cast<double>(state_.window.size());
    m.self_collisions_rolling = coll / static_cast<double>(state_.window.size());
  }
  state_.history.push_back(std::move(m));
  return state_.history.back();
}

void Trainer::train(const std::function<void(const TrainerState&)>& after) {
  while (!finished()) {
    run_iteration();
    if (after) after(state_);
  }
}

}  // namespace siteswarm::mappo
