// Serial reference against the OpenMP kernel for the two parallel paths:
// the Omega pattern reduction and the Monte Carlo trial loop.
#include <benchmark/benchmark.h>

#include <string>

#include "smpc/simulation.hpp"

namespace {

const smpc::Scenario& scenario(const char* name) {
  static const smpc::Scenario a = smpc::load_scenario(std::string(SMPC_SCENARIO_DIR) + "/simA.json");
  static const smpc::Scenario b = smpc::load_scenario(std::string(SMPC_SCENARIO_DIR) + "/simB.json");
  return std::string(name) == "simA.json" ? a : b;
}

template <bool Parallel>
void BM_OmegaReduction(benchmark::State& state) {
  auto s = scenario("simA.json");
  s.spec.N = static_cast<int>(state.range(0));
  const auto g = smpc::design_gains(s);
  const auto patterns = smpc::enumerate_gamma_patterns(s.spec.N, s.model.lambda);
  for (auto _ : state) {
    auto op = Parallel ? smpc::reduce_omega_parallel(s.model, g, patterns)
                       : smpc::reduce_omega_serial(s.model, g, patterns);
    benchmark::DoNotOptimize(op.sigma_map.data());
  }
  state.counters["patterns"] = static_cast<double>(patterns.size());
}
BENCHMARK(BM_OmegaReduction<false>)->Name("omega_reduction/serial")->Arg(5)->Arg(8)->Arg(10)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OmegaReduction<true>)->Name("omega_reduction/parallel")->Arg(5)->Arg(8)->Arg(10)
    ->Unit(benchmark::kMillisecond);

template <bool Parallel>
void BM_Trials(benchmark::State& state) {
  const auto pre = smpc::build_precompute(scenario("simB.json"));
  smpc::TrialOptions o;
  o.T = 200;
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto r = Parallel ? smpc::run_trials_parallel(pre, o, n, 1)
                      : smpc::run_trials_serial(pre, o, n, 1);
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_Trials<false>)->Name("mpc_trials/serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Trials<true>)->Name("mpc_trials/parallel")->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
