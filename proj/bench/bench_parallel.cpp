// OpenMP kernels against their serial references: batch collection over
// environment copies, and seed sweeps over jobs.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "adaptive_ac/experiments.hpp"
#include "adaptive_ac/harness.hpp"

using namespace adaptive_ac;

namespace {

struct Fixture {
  explicit Fixture(int n)
      : params(ChainEnv::kNumStates, 2, 10), streams(1, n) {
    for (int i = 0; i < n; ++i) {
      envs.push_back({std::make_unique<ChainEnv>()});
      envs.back().env->reset(streams.env(i)());
    }
  }
  AgentParams params;
  NormStats stats;
  CommitmentConfig commitment{10, CommitmentMode::kLearned, 1};
  LearnerConfig learner;
  RngStreams streams;
  std::vector<EnvCopy> envs;

  ActingContext ctx() const {
    return {&params, &stats, false, &commitment, &learner};
  }
};

void BM_CollectSerial(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Batch b = collect_batch_serial(f.envs, f.ctx(), f.streams, 15, 1LL << 40);
    benchmark::DoNotOptimize(b.env_steps);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 15);
}

void BM_CollectParallel(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  const int threads = omp_get_max_threads();
  for (auto _ : state) {
    Batch b = collect_batch(f.envs, f.ctx(), f.streams, 15, 1LL << 40, threads);
    benchmark::DoNotOptimize(b.env_steps);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 15);
  state.counters["threads"] = threads;
}

void BM_Sweep(benchmark::State& state) {
  SweepSpec spec = default_sweep_spec(Experiment::kRepeats);
  spec.num_seeds = 4;
  spec.budget = 2000;
  spec.jobs = state.range(0) == 0 ? 1 : omp_get_max_threads();
  for (auto _ : state) {
    SweepResult r = run_sweep(spec);
    benchmark::DoNotOptimize(r.rows.data());
  }
  state.counters["jobs"] = spec.jobs;
}

}  // namespace

BENCHMARK(BM_CollectSerial)->Arg(8)->Arg(64)->Arg(512);
BENCHMARK(BM_CollectParallel)->Arg(8)->Arg(64)->Arg(512);
BENCHMARK(BM_Sweep)->Arg(0)->ArgName("parallel")->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
