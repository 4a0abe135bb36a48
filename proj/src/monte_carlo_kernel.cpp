// Trials are independent and each writes only its own slot, so the parallel
// kernel reproduces the serial reference exactly.
#include <exception>
#include <string>

#include "smpc/errors.hpp"
#include "smpc/simulation.hpp"

namespace smpc {

std::vector<TrialResult> run_trials_serial(const Precompute& pre, const TrialOptions& options,
                                           int n, std::uint64_t seed0) {
  std::vector<TrialResult> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(i);
    try {
      out.push_back(run_trial(pre, options, seed));
    } catch (const std::exception& e) {
      throw NumericalError("trial with seed " + std::to_string(seed) + " failed: " + e.what());
    }
  }
  return out;
}

std::vector<TrialResult> run_trials_parallel(const Precompute& pre, const TrialOptions& options,
                                             int n, std::uint64_t seed0) {
  if (options.trace) return run_trials_serial(pre, options, n, seed0);
  std::vector<TrialResult> out(n);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(i);
    try {
      out[i] = run_trial(pre, options, seed);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      throw NumericalError("trial with seed " + std::to_string(seed0 + i) +
                           " failed: " + errors[i]);
    }
  }
  return out;
}

}  // namespace smpc
