// siteswarm: train, evaluate and inspect multi-arm construction policies.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "siteswarm/errors.hpp"
#include "siteswarm/harness/checkpoint.hpp"
#include "siteswarm/harness/config.hpp"
#include "siteswarm/harness/evaluate.hpp"
#include "siteswarm/harness/metrics.hpp"
#include "siteswarm/harness/oracles.hpp"
#include "siteswarm/harness/trace.hpp"
#include "siteswarm/mappo/trainer.hpp"

namespace fs = std::filesystem;
using namespace siteswarm;

namespace {

struct TrainArgs {
  std::string task;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string resume;
  std::size_t trace_episodes = 0;
  std::optional<std::int64_t> total_steps;
  std::optional<int> threads;
  bool skip_eval = false;
  bool quiet = false;
};

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("SITE_SWARM_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw UsageError(std::string("SITE_SWARM_SEED is not an integer: ") + s);
  return v;
}

void print_report(const harness::EvalReport& r) {
  std::cout << r.to_json().dump(2) << "\n";
}

void save_all(const harness::ExperimentConfig& cfg, const mappo::TrainerState& st,
              const std::vector<std::string>& agents, const fs::path& out) {
  harness::save_checkpoint({cfg, st}, out / "checkpoint.bin");
  if (!st.history.empty()) harness::export_metrics(st.history, agents, out / "metrics.csv");
}

int run_train(const TrainArgs& a) {
  harness::ExperimentConfig cfg;
  std::optional<mappo::TrainerState> resume_state;
  if (!a.resume.empty()) {
    harness::Checkpoint ck = harness::load_checkpoint(a.resume);
    cfg = ck.experiment;
    resume_state = std::move(ck.state);
  } else {
    std::optional<tasks::TaskId> task;
    if (!a.task.empty()) task = tasks::parse_task(a.task);
    if (!a.config.empty()) {
      cfg = harness::load_experiment(a.config, task);
    } else {
      if (!task) throw UsageError("train: --task or --config is required");
      cfg = harness::default_experiment(*task);
    }
    if (a.seed) {
      cfg.trainer.seed = *a.seed;
    } else if (auto s = env_seed()) {
      cfg.trainer.seed = *s;
    }
    if (a.total_steps) cfg.trainer.total_steps = *a.total_steps;
  }
  if (a.threads) {
    cfg.trainer.threads = *a.threads;
    if (resume_state) resume_state->config.threads = *a.threads;
  }
  if (!a.out.empty()) cfg.output_dir = a.out;
  cfg.validate();

  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  harness::write_file_atomic(out / "config.json", harness::to_json(cfg).dump(2) + "\n");

  const tasks::TaskSpec spec = harness::build_task(cfg);
  std::unique_ptr<harness::TraceWriter> trace;
  std::function<void(const tasks::StepRecord&)> sink;
  if (a.trace_episodes > 0) {
    trace = std::make_unique<harness::TraceWriter>(out / "trace.jsonl", harness::trace_header(cfg, spec),
                                                   a.trace_episodes);
    sink = trace->sink();
  }
  const mappo::EnvFactory factory = harness::make_env_factory(cfg, sink);
  mappo::Trainer trainer = resume_state ? mappo::Trainer(factory, std::move(*resume_state))
                                        : mappo::Trainer(factory, cfg.trainer);

  const std::int64_t total = cfg.trainer.iterations();
  trainer.train([&](const mappo::TrainerState& st) {
    const mappo::IterationMetrics& m = st.history.back();
    if (!a.quiet) {
      std::printf("iter %lld/%lld steps %lld return", static_cast<long long>(m.iteration),
                  static_cast<long long>(total), static_cast<long long>(m.env_steps));
      for (double r : m.mean_episode_return) std::printf(" %.3f", r);
      std::printf(" success %.2f self %.3f\n", m.success_rate_rolling, m.self_collisions_rolling);
      std::fflush(stdout);
    }
    if (cfg.checkpoint_interval > 0 && st.iteration % cfg.checkpoint_interval == 0) {
      save_all(cfg, st, spec.agent_names, out);
    }
  });
  save_all(cfg, trainer.state(), spec.agent_names, out);

  if (!a.skip_eval) {
    harness::EvalOptions eo;
    eo.episodes = cfg.eval_episodes;
    eo.seed = cfg.trainer.seed;
    eo.threads = cfg.trainer.threads;
    const harness::EvalReport r = harness::evaluate(spec, trainer.state().learners, eo);
    harness::write_file_atomic(out / "eval.json", r.to_json().dump(2) + "\n");
    print_report(r);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent PPO for planar construction arms"};
  app.require_subcommand(1);

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "Train policies for a task");
  train->add_option("--task", ta.task, "1, 2, 3, 4 or reach");
  train->add_option("--config", ta.config, "JSON experiment file")->check(CLI::ExistingFile);
  train->add_option("--seed", ta.seed, "Seed (falls back to SITE_SWARM_SEED)");
  train->add_option("--out", ta.out, "Output directory");
  train->add_option("--resume", ta.resume, "Continue from a checkpoint");
  train->add_option("--trace", ta.trace_episodes, "Write the first N episodes of worker 0 to trace.jsonl");
  train->add_option("--total-steps", ta.total_steps, "Override the environment step budget");
  train->add_option("--threads", ta.threads, "1 = serial, 0 = all cores");
  train->add_flag("--no-eval", ta.skip_eval, "Skip the final evaluation");
  train->add_flag("--quiet", ta.quiet, "No per-iteration log");

  std::string ckpt;
  std::optional<std::int64_t> episodes;
  std::optional<std::uint64_t> eval_seed;
  int eval_threads = 1;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate the policy means of a checkpoint");
  eval->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
  eval->add_option("--episodes", episodes, "Episode count (default from the config)");
  eval->add_option("--seed", eval_seed, "Evaluation seed");
  eval->add_option("--threads", eval_threads, "1 = serial, 0 = all cores");

  std::string trace_path;
  CLI::App* replay = app.add_subcommand("replay", "Pretty-print a trace");
  replay->add_option("--trace", trace_path, "trace.jsonl file")->required();
  bool audit = false;
  replay->add_flag("--audit", audit, "Recompute rewards from the logged terms");

  CLI::App* oracle = app.add_subcommand("oracle-check", "Run the reference oracle suites");
  std::uint64_t oracle_seed = 7;
  oracle->add_option("--seed", oracle_seed, "Seed for the random cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*train) return run_train(ta);
    if (*eval) {
      const harness::Checkpoint ck = harness::load_checkpoint(ckpt);
      harness::EvalOptions eo;
      eo.episodes = episodes.value_or(ck.experiment.eval_episodes);
      eo.seed = eval_seed ? *eval_seed : env_seed().value_or(ck.experiment.trainer.seed);
      eo.threads = eval_threads;
      print_report(harness::evaluate(harness::build_task(ck.experiment), ck.state.learners, eo));
      return 0;
    }
    if (*replay) {
      const harness::Trace t = harness::read_trace(trace_path);
      harness::print_trace(t, std::cout);
      if (audit) {
        const harness::RewardAudit r = harness::audit_rewards(t);
        std::printf("audit: %zu rewards, max error %.3g, flag reversals %zu\n", r.rewards,
                    r.max_abs_error, r.flag_reversals);
        return r.max_abs_error <= 1e-12 && r.flag_reversals == 0 ? 0 : 1;
      }
      return 0;
    }
    if (*oracle) {
      bool ok = true;
      for (const harness::OracleResult& r : harness::run_oracle_suites(oracle_seed)) {
        std::printf("%-10s %s  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.detail.c_str());
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const NotFoundError& e) {
    std::fprintf(stderr, "not found: %s\n", e.what());
    return 3;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
