// Serial reference vs OpenMP for the two parallel paths: rollout collection
// across environment instances and evaluation across episodes.

#include <benchmark/benchmark.h>

#include "siteswarm/harness/config.hpp"
#include "siteswarm/harness/evaluate.hpp"
#include "siteswarm/mappo/trainer.hpp"

using namespace siteswarm;

namespace {

harness::ExperimentConfig bench_config(int threads) {
  harness::ExperimentConfig c = harness::default_experiment(tasks::TaskId::Task1);
  c.trainer.total_steps = c.trainer.buffer_size;
  c.trainer.threads = threads;
  c.trainer.seed = 3;
  return c;
}

// One training iteration: collection on every environment, then the update.
void BM_TrainIteration(benchmark::State& state) {
  const harness::ExperimentConfig c = bench_config(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    mappo::Trainer t(harness::make_env_factory(c), c.trainer);
    benchmark::DoNotOptimize(t.run_iteration());
  }
  state.SetItemsProcessed(state.iterations() * c.trainer.buffer_size);
}
BENCHMARK(BM_TrainIteration)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  const harness::ExperimentConfig c = bench_config(1);
  const mappo::Trainer t(harness::make_env_factory(c), c.trainer);
  const tasks::TaskSpec spec = harness::build_task(c);
  harness::EvalOptions o;
  o.episodes = 100;
  o.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(harness::evaluate(spec, t.state().learners, o));
  }
  state.SetItemsProcessed(state.iterations() * o.episodes);
}
BENCHMARK(BM_Evaluate)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
