#include "siteswarm/harness/evaluate.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>

#include "siteswarm/errors.hpp"
#include "siteswarm/nn/gaussian.hpp"

namespace siteswarm::harness {

namespace {

struct EpisodeResult {
  tasks::Progress progress;
  std::vector<tasks::StageEvent> events;
};

EpisodeResult run_episode(const tasks::TaskSpec& spec, const Controller& controller,
                          std::uint64_t seed) {
  tasks::TaskEnv env(spec);
  std::vector<Eigen::VectorXd> obs = env.reset(seed);
  while (true) {
    const std::vector<Eigen::VectorXd> actions = controller(obs, env);
    mappo::EnvStep st = env.step(actions);
    if (st.done) break;
    obs = std::move(st.observations);
  }
  return {env.progress(), env.events()};
}

double pct(std::int64_t count, std::int64_t total) {
  return total > 0 ? 100.0 * static_cast<double>(count) / static_cast<double>(total) : 0.0;
}

}  // namespace

std::uint64_t eval_episode_seed(std::uint64_t seed, std::int64_t episode) {
  return mappo::derive_seed(seed, {9, static_cast<std::uint64_t>(episode)});
}

Controller mean_policy(const std::vector<mappo::AgentLearner>& learners) {
  return [&learners](const std::vector<Eigen::VectorXd>& obs, const tasks::TaskEnv&) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(learners.size());
    for (std::size_t i = 0; i < learners.size(); ++i) {
      out.push_back(nn::head_for(learners[i].policy, obs[i]).mean);
    }
    return out;
  };
}

EvalReport evaluate(const tasks::TaskSpec& spec, const Controller& controller,
                    const EvalOptions& opts) {
  if (opts.episodes <= 0) throw ConfigError("evaluate: episodes must be > 0");
  spec.validate();
  const std::size_t n_ep = static_cast<std::size_t>(opts.episodes);
  std::vector<EpisodeResult> results(n_ep);
  std::vector<std::exception_ptr> errors(n_ep);
  const auto work = [&](std::size_t e) {
    try {
      results[e] = run_episode(spec, controller, eval_episode_seed(opts.seed, static_cast<std::int64_t>(e)));
    } catch (...) {
      errors[e] = std::current_exception();
    }
  };
  if (opts.threads == 1) {
    for (std::size_t e = 0; e < n_ep; ++e) work(e);
  } else {
    const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();
#pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (std::int64_t e = 0; e < static_cast<std::int64_t>(n_ep); ++e) work(static_cast<std::size_t>(e));
  }
  for (const std::exception_ptr& ep : errors) {
    if (ep) std::rethrow_exception(ep);
  }

  const std::size_t arms = spec.world.arms.size();
  EvalReport r;
  r.task = spec.id;
  r.episodes = opts.episodes;
  r.arms.assign(spec.agent_names.begin(), spec.agent_names.begin() + static_cast<std::ptrdiff_t>(arms));
  std::vector<std::int64_t> picked(arms, 0), placed(arms, 0);
  std::int64_t success = 0, handoffs = 0, self = 0;
  for (const EpisodeResult& e : results) {
    for (std::size_t a = 0; a < arms; ++a) {
      picked[a] += e.progress.picked[a];
      placed[a] += e.progress.placed[a];
    }
    success += e.progress.success;
    handoffs += e.progress.handoff;
    self += e.progress.self_collision_steps;
    for (const tasks::StageEvent& ev : e.events) {
      if (!ev.ik_used) continue;
      ++r.ik_attempts;
      if (ev.ik.success) {
        ++r.ik_successes;
        r.ik_max_error_on_success = std::max(r.ik_max_error_on_success, ev.ik.final_error);
      } else {
        ++r.ik_failures[ik::to_string(ev.ik.failure)];
        if (ev.ik.diagnostic.empty()) ++r.ik_failures_without_diagnostic;
      }
    }
  }
  for (std::size_t a = 0; a < arms; ++a) {
    r.pickup_rate.push_back(pct(picked[a], opts.episodes));
    r.placement_rate.push_back(pct(placed[a], opts.episodes));
    r.arm_success_rate.push_back(pct(placed[a], opts.episodes));
  }
  r.episode_success_rate = pct(success, opts.episodes);
  r.handoff_rate = pct(handoffs, opts.episodes);
  r.self_collisions_per_episode = static_cast<double>(self) / static_cast<double>(opts.episodes);
  return r;
}

EvalReport evaluate(const tasks::TaskSpec& spec, const std::vector<mappo::AgentLearner>& learners,
                    const EvalOptions& opts) {
  tasks::TaskEnv probe(spec);
  if (learners.size() != probe.agent_count()) {
    throw ConfigError("evaluate: " + std::to_string(learners.size()) + " policies for " +
                      std::to_string(probe.agent_count()) + " agents");
  }
  const auto od = probe.observation_dims();
  const auto ad = probe.action_dims();
  for (std::size_t i = 0; i < learners.size(); ++i) {
    if (learners[i].policy.net.in_dim() != od[i] || learners[i].policy.net.out_dim() != ad[i]) {
      throw ConfigError("evaluate: policy " + std::to_string(i) + " does not match agent '" +
                        spec.agent_names[i] + "'");
    }
  }
  return evaluate(spec, mean_policy(learners), opts);
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j = {{"task", tasks::task_name(task)},
                      {"episodes", episodes},
                      {"arms", arms},
                      {"pickup_rate", pickup_rate},
                      {"episode_success_rate", episode_success_rate},
                      {"self_collisions_per_episode", self_collisions_per_episode},
                      {"ik_attempts", ik_attempts},
                      {"ik_successes", ik_successes},
                      {"ik_failures", ik_failures},
                      {"ik_max_error_on_success", ik_max_error_on_success}};
  if (task == tasks::TaskId::Task4) {
    j["arm_success_rate"] = arm_success_rate;
  } else {
    j["placement_rate"] = placement_rate;
  }
  if (task == tasks::TaskId::Task3) j["handoff_rate"] = handoff_rate;
  return j;
}

}  // namespace siteswarm::harness
