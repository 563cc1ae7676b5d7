// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            all criteria
//   acceptance 1 4 9      a subset
//
// Criteria 7 and 8 train full-budget policies and take hours on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "siteswarm/errors.hpp"
#include "siteswarm/harness/checkpoint.hpp"
#include "siteswarm/harness/config.hpp"
#include "siteswarm/harness/evaluate.hpp"
#include "siteswarm/harness/metrics.hpp"
#include "siteswarm/harness/oracles.hpp"
#include "siteswarm/harness/trace.hpp"
#include "siteswarm/mappo/learner.hpp"
#include "siteswarm/mappo/losses.hpp"
#include "siteswarm/mappo/trainer.hpp"
#include "siteswarm/nn/gaussian.hpp"

using namespace siteswarm;
namespace fs = std::filesystem;
using nn::Matrix;
using nn::Vector;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("siteswarm_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// 1 ----------------------------------------------------------------------

void criterion1() {
  const auto t0 = Clock::now();
  const harness::OracleResult r = harness::gae_oracle(2024, 1000);
  const double s = seconds_since(t0);
  report("1 gae/returns oracle", r.passed && r.cases == 1000 && r.max_error <= 1e-10 && s < 5.0,
         fmt("%zu sequences, max error %.3g (tol 1e-10), %.2f s (limit 5 s)", r.cases,
             r.max_error, s));
}

// 2 ----------------------------------------------------------------------

void criterion2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> width(2, 8), depth(1, 3), dim(1, 6), batch(2, 6);
  double worst_net = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::Index> hidden(static_cast<std::size_t>(depth(rng)));
    for (Eigen::Index& h : hidden) h = width(rng);
    const Eigen::Index in = dim(rng), out = dim(rng), b = batch(rng);
    const nn::NetParams net = nn::make_mlp(in, hidden, out, std::sqrt(2.0), 1.0, rng);
    const Matrix x = Matrix::Random(b, in);
    const Matrix target = Matrix::Random(b, out);
    nn::NetParams scratch_net = net;
    gradcheck::Params p;
    for (const nn::ParamRef& r : nn::named_params(scratch_net, "net")) p[r.name] = *r.value;
    const gradcheck::LossFn f = [&](nn::Tape& t, const gradcheck::Params& q) {
      nn::NetParams c = net;
      for (const nn::ParamRef& r : nn::named_params(c, "net")) *r.value = q.at(r.name);
      const nn::NetVars v = nn::bind(t, c, "net");
      return nn::mean(nn::square(nn::forward(c, v, t.constant(x)) - t.constant(target)));
    };
    worst_net = std::max(worst_net, gradcheck::check(f, p).max_rel);
  }

  double worst_ppo = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    mappo::TrainerConfig cfg;
    cfg.hidden = {6, 5};
    const Eigen::Index obs = 4, act = 2, b = 8;
    mappo::AgentLearner l = mappo::make_learner(static_cast<std::size_t>(trial), obs, act, cfg);
    l.policy.log_std = Matrix::Constant(1, act, -0.4 + 0.1 * trial);
    std::normal_distribution<double> n;
    mappo::Minibatch mb;
    mb.observations = Matrix::NullaryExpr(b, obs, [&] { return n(rng); });
    mb.actions = Matrix::NullaryExpr(b, act, [&] { return n(rng); });
    mb.old_log_probs = Vector::NullaryExpr(b, [&] { return -2.0 + 0.3 * n(rng); });
    mb.advantages = Vector::NullaryExpr(b, [&] { return n(rng); });
    mb.returns = Vector::NullaryExpr(b, [&] { return n(rng); });
    gradcheck::Params p;
    for (const nn::ParamRef& r : nn::named_params(l.policy, "pi")) p[r.name] = *r.value;
    for (const nn::ParamRef& r : nn::named_params(l.value, "v")) p[r.name] = *r.value;
    const gradcheck::LossFn f = [&](nn::Tape& t, const gradcheck::Params& q) {
      mappo::AgentLearner c = l;
      for (const nn::ParamRef& r : nn::named_params(c.policy, "pi")) *r.value = q.at(r.name);
      for (const nn::ParamRef& r : nn::named_params(c.value, "v")) *r.value = q.at(r.name);
      return mappo::ppo_loss(t, c.policy, c.value, mb, cfg).total;
    };
    worst_ppo = std::max(worst_ppo, gradcheck::check(f, p).max_rel);
  }
  const double s = seconds_since(t0);
  report("2 gradient check", worst_net < 1e-4 && worst_ppo < 1e-4 && s < 30.0,
         fmt("20 nets max rel %.3g, PPO total loss max rel %.3g (tol 1e-4, h 1e-5), %.2f s "
             "(limit 30 s)",
             worst_net, worst_ppo, s));
}

// 3 ----------------------------------------------------------------------

void criterion3() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  mappo::TrainerConfig cfg;
  cfg.hidden = {5};
  cfg.value_coef = 0.0;
  cfg.entropy_coef = 0.0;
  std::size_t cases = 0, nonzero = 0;
  double identity_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const mappo::AgentLearner l = mappo::make_learner(static_cast<std::size_t>(trial), 3, 2, cfg);
    const Eigen::Index b = 4;
    mappo::Minibatch mb;
    mb.observations = Matrix::Random(b, 3);
    mb.actions = Matrix::Random(b, 2);
    mb.old_log_probs.resize(b);
    mb.advantages.resize(b);
    mb.returns = Vector::Zero(b);
    for (Eigen::Index i = 0; i < b; ++i) {
      const double lp = nn::log_prob(nn::head_for(l.policy, Vector(mb.observations.row(i).transpose())),
                                     Vector(mb.actions.row(i).transpose()));
      const bool above = u(rng) < 0.5;
      const double ratio = above ? 1.0 + cfg.clip + 0.01 + u(rng) : 1.0 - cfg.clip - 0.01 - 0.5 * u(rng);
      const double adv = (0.1 + u(rng)) * (above ? 1.0 : -1.0);
      mb.old_log_probs(i) = lp - std::log(ratio);
      mb.advantages(i) = adv;
    }
    nn::Tape tape;
    const mappo::PpoLoss loss = mappo::ppo_loss(tape, l.policy, l.value, mb, cfg);
    const nn::GradientMap g = tape.backward(loss.total);
    for (const nn::ParamRef& r : nn::named_params(const_cast<nn::PolicyParams&>(l.policy), "pi")) {
      auto it = g.find(r.name);
      if (it != g.end() && !it->second.isZero(0.0)) ++nonzero;
    }
    ++cases;

    // Identity case: ratio exactly 1.
    mappo::Minibatch one = mb;
    for (Eigen::Index i = 0; i < b; ++i) {
      one.old_log_probs(i) = nn::log_prob(nn::head_for(l.policy, Vector(mb.observations.row(i).transpose())),
                                          Vector(mb.actions.row(i).transpose()));
      one.advantages(i) = 2.0 * u(rng) - 1.0;
    }
    nn::Tape t2;
    const mappo::PpoLoss l2 = mappo::ppo_loss(t2, l.policy, l.value, one, cfg);
    identity_err = std::max(identity_err, std::abs(l2.surrogate.scalar() - one.advantages.mean()));
    for (Eigen::Index i = 0; i < b; ++i) {
      identity_err = std::max(identity_err,
                              std::abs(mappo::clipped_surrogate(1.0, one.advantages(i), cfg.clip) -
                                       one.advantages(i)));
    }
  }
  report("3 clip branch", nonzero == 0 && identity_err <= 1e-12,
         fmt("%zu clipped batches, %zu nonzero policy gradients; ratio=1 surrogate vs A max "
             "diff %.3g",
             cases, nonzero, identity_err));
}

// 4, 5 -------------------------------------------------------------------

void criterion4() {
  const auto t0 = Clock::now();
  const harness::OracleResult r = harness::ik_oracle(4242, 10000);
  const double s = seconds_since(t0);
  report("4 ik fidelity", r.passed && r.max_error < 1e-9 && s < 5.0,
         fmt("%zu targets, max |FK(IK(t)) - t| %.3g (tol 1e-9); %s; %.2f s (limit 5 s)", r.cases,
             r.max_error, r.detail.c_str(), s));
}

void criterion5() {
  const harness::OracleResult c = harness::collision_oracle(555, 100);
  const harness::OracleResult d = harness::segment_distance_oracle(556, 50);
  report("5 collision oracle", c.passed && c.cases == 100 && d.passed && d.max_error <= 2e-3,
         fmt("%zu worlds: %s; segment distance vs dense sampling max %.3g (tol 2e-3)", c.cases,
             c.detail.c_str(), d.max_error));
}

// 6 ----------------------------------------------------------------------

void criterion6() {
  using tasks::RewardWeights;
  using tasks::TaskId;
  const bool weights_ok =
      tasks::default_weights(TaskId::Task1) == RewardWeights{0.2, 0.2, 0.1, 1.0, 1.0, 0.2} &&
      tasks::default_weights(TaskId::Task2) == RewardWeights{0.2, 0.2, 0.1, 1.0, 1.0, -0.1} &&
      tasks::default_weights(TaskId::Task3) == RewardWeights{0.2, 0.2, 0.1, 1.0, 1.0, 0.1} &&
      tasks::default_weights(TaskId::Task4) == RewardWeights{0.1, 0.5, 0.05, 1.0, 1.0, 0.0} &&
      harness::default_experiment(TaskId::Task1).options.hg_mode == tasks::HgMode::Zero;

  double worst = 0.0;
  std::size_t rewards = 0, reversals = 0;
  const fs::path dir = scratch("trace");
  for (TaskId id : {TaskId::Task1, TaskId::Task2, TaskId::Task3, TaskId::Task4, TaskId::Reach}) {
    harness::ExperimentConfig c = harness::default_experiment(id);
    c.trainer.total_steps = 2 * c.trainer.buffer_size;
    c.trainer.seed = 6;
    const fs::path path = dir / (tasks::task_name(id) + ".jsonl");
    {
      harness::TraceWriter w(path, harness::trace_header(c, harness::build_task(c)), 20);
      mappo::Trainer t(harness::make_env_factory(c, w.sink()), c.trainer);
      t.train();
    }
    const harness::RewardAudit a = harness::audit_rewards(harness::read_trace(path));
    worst = std::max(worst, a.max_abs_error);
    rewards += a.rewards;
    reversals += a.flag_reversals;
  }
  report("6 reward faithfulness", weights_ok && rewards > 0 && worst <= 1e-12 && reversals == 0,
         fmt("%zu logged rewards over 5 task traces, max recompute error %.3g (tol 1e-12); "
             "default coefficients %s; flag reversals %zu",
             rewards, worst, weights_ok ? "exact" : "MISMATCH", reversals));
}

// 7, 8 -------------------------------------------------------------------

struct Run {
  harness::EvalReport report;
  double seconds = 0.0;
};

Run train_and_evaluate(tasks::TaskId id, std::uint64_t seed, bool share_actions) {
  harness::ExperimentConfig c = harness::default_experiment(id);
  c.trainer.seed = seed;
  c.options.share_actions = share_actions;
  const auto t0 = Clock::now();
  mappo::Trainer t(harness::make_env_factory(c), c.trainer);
  t.train();
  Run r;
  r.seconds = seconds_since(t0);
  harness::EvalOptions o;
  o.episodes = c.eval_episodes;
  o.seed = seed;
  r.report = harness::evaluate(harness::build_task(c), t.state().learners, o);
  std::printf("    task %s seed %llu%s: %s (%.0f s)\n", tasks::task_name(id).c_str(),
              static_cast<unsigned long long>(seed), share_actions ? "" : " no-share",
              r.report.to_json().dump().c_str(), r.seconds);
  std::fflush(stdout);
  return r;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::vector<harness::EvalReport> ik_reports;

void criterion7() {
  const std::vector<std::uint64_t> seeds = {1, 2, 3};

  const Run reach = train_and_evaluate(tasks::TaskId::Reach, 1, true);
  report("7a reach", reach.report.episode_success_rate >= 90.0 && reach.seconds < 600.0,
         fmt("success %.1f%% (need >= 90%%) after 300k steps, %.0f s (limit 600 s)",
             reach.report.episode_success_rate, reach.seconds));

  std::vector<double> left, right, collisions, shared_pick, ablation_pick;
  double slowest = 0.0;
  for (std::uint64_t s : seeds) {
    const Run r = train_and_evaluate(tasks::TaskId::Task1, s, true);
    left.push_back(r.report.pickup_rate[0]);
    right.push_back(r.report.pickup_rate[1]);
    collisions.push_back(r.report.self_collisions_per_episode);
    shared_pick.push_back(mean(r.report.pickup_rate));
    slowest = std::max(slowest, r.seconds);
    ik_reports.push_back(r.report);
  }
  for (std::uint64_t s : seeds) {
    const Run r = train_and_evaluate(tasks::TaskId::Task1, s, false);
    ablation_pick.push_back(mean(r.report.pickup_rate));
    slowest = std::max(slowest, r.seconds);
  }
  const bool b_ok = mean(left) >= 70.0 && mean(right) >= 70.0 && mean(collisions) <= 0.2 &&
                    mean(shared_pick) > mean(ablation_pick) && slowest < 7200.0;
  report("7b task 1", b_ok,
         fmt("pick-up left %.1f%% right %.1f%% (need >= 70%%), self-collisions %.3f/episode "
             "(need <= 0.2), sharing %.1f%% vs no sharing %.1f%% (must be higher), mean over 3 "
             "seeds; slowest run %.0f s (limit 7200 s)",
             mean(left), mean(right), mean(collisions), mean(shared_pick), mean(ablation_pick),
             slowest));

  std::vector<double> transfers;
  for (std::uint64_t s : seeds) {
    const Run r = train_and_evaluate(tasks::TaskId::Task3, s, true);
    transfers.push_back(r.report.handoff_rate);
    ik_reports.push_back(r.report);
  }
  report("7c task 3 hand-off", mean(transfers) >= 50.0,
         fmt("transfers %.1f%% / %.1f%% / %.1f%%, mean %.1f%% (need >= 50%%)", transfers[0],
             transfers[1], transfers[2], mean(transfers)));
}

void criterion8() {
  if (ik_reports.empty()) {
    for (std::uint64_t s : {1, 2, 3}) {
      ik_reports.push_back(train_and_evaluate(tasks::TaskId::Task1, s, true).report);
    }
  }
  std::int64_t attempts = 0, ok = 0, undiagnosed = 0;
  double max_err = 0.0;
  std::map<std::string, std::int64_t> kinds;
  for (const harness::EvalReport& r : ik_reports) {
    attempts += r.ik_attempts;
    ok += r.ik_successes;
    undiagnosed += r.ik_failures_without_diagnostic;
    max_err = std::max(max_err, r.ik_max_error_on_success);
    for (const auto& [k, n] : r.ik_failures) kinds[k] += n;
  }
  // Collision, or reachability: outside the workspace or beyond the per-step joint limit.
  std::int64_t other = 0;
  std::string breakdown;
  for (const auto& [k, n] : kinds) {
    if (k != "collision" && k != "unreachable" && k != "joint-delta") other += n;
    breakdown += " " + k + "=" + std::to_string(n);
  }
  const double rate = attempts > 0 ? 100.0 * static_cast<double>(ok) / static_cast<double>(attempts) : 0.0;
  report("8 rl->ik handoff",
         attempts > 0 && rate >= 95.0 && max_err < 1e-3 && undiagnosed == 0 && other == 0,
         fmt("%lld staged finishes, %.1f%% succeeded (need >= 95%%), max error on success %.3g m; "
             "failures:%s; without diagnostic %lld",
             static_cast<long long>(attempts), rate, max_err,
             breakdown.empty() ? " none" : breakdown.c_str(), static_cast<long long>(undiagnosed)));
}

// 9 ----------------------------------------------------------------------

void criterion9() {
  harness::ExperimentConfig c = harness::default_experiment(tasks::TaskId::Task1);
  c.trainer.total_steps = 20000;
  c.trainer.seed = 9;
  c.trainer.threads = 1;
  const std::vector<std::string> agents = harness::build_task(c).agent_names;
  const fs::path dir = scratch("determinism");

  const auto run = [&](const fs::path& out) {
    mappo::Trainer t(harness::make_env_factory(c), c.trainer);
    t.train();
    harness::export_metrics(t.state().history, agents, out);
    return t.state();
  };
  const mappo::TrainerState full = run(dir / "a.csv");
  run(dir / "b.csv");
  const bool same_bytes = harness::read_file(dir / "a.csv") == harness::read_file(dir / "b.csv");

  mappo::Trainer first(harness::make_env_factory(c), c.trainer);
  for (int i = 0; i < 4; ++i) first.run_iteration();
  harness::save_checkpoint({c, first.state()}, dir / "mid.bin");
  harness::Checkpoint ck = harness::load_checkpoint(dir / "mid.bin");
  mappo::Trainer resumed(harness::make_env_factory(ck.experiment), std::move(ck.state));
  resumed.train();
  harness::export_metrics(resumed.state().history, agents, dir / "resumed.csv");
  const bool resume_same =
      harness::read_file(dir / "resumed.csv") == harness::read_file(dir / "a.csv") &&
      harness::learner_hash(resumed.state().learners) == harness::learner_hash(full.learners);
  report("9 determinism and resume", same_bytes && resume_same,
         fmt("%zu iterations: repeated run metrics %s; resume after 4 iterations %s",
             full.history.size(), same_bytes ? "byte-identical" : "DIFFER",
             resume_same ? "matches (metrics bytes and parameters)" : "DIFFERS"));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const auto want = [&](int k) { return only.empty() || only.count(k) > 0; };
  const std::vector<std::pair<int, std::function<void()>>> all = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  for (const auto& [k, f] : all) {
    if (!want(k)) continue;
    try {
      f();
    } catch (const std::exception& e) {
      report(std::to_string(k), false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d criterion line(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
