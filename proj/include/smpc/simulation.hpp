#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smpc/mpc.hpp"

namespace smpc {

enum class ControllerKind { MPC, LQG };
std::string_view to_string(ControllerKind kind);

/// Per-step record, filled only when a trace is requested.
struct StepRecord {
  Vector x;
  Vector xhat;
  Vector u;
  int gamma = 0;
  double mu = 0.0;
  double J = 0.0;
  double stage_cost = 0.0;
  double stage_constraint = 0.0;
  SolveStatus status = SolveStatus::Interior;
};

struct TrialOptions {
  ControllerKind controller = ControllerKind::MPC;
  int T = 150;
  /// Arrival probability used to draw gamma; the model's lambda when absent.
  std::optional<double> lambda_actual;
  /// Overrides the scenario's mu0 policy for MPC.
  std::optional<Mu0Policy> mu0_policy;
  std::vector<StepRecord>* trace = nullptr;
};

struct TrialResult {
  std::uint64_t seed = 0;
  int T = 0;
  double discounted_cost = 0.0;        ///< sum beta1^k (|x|_Q^2 + |u|_R^2)
  double discounted_constraint = 0.0;  ///< sum beta2^k |H x|^2
  double avg_undiscounted_cost = 0.0;  ///< (1/T) sum (|x|_Q^2 + |u|_R^2)
  int infeasible_count = 0;
  double J0 = 0.0;                     ///< optimal cost of the k = 0 problem (MPC)
  double mu0 = 0.0;

  bool operator==(const TrialResult&) const = default;
};

/// Noise realisation at step k: w_k, v_k and gamma_k drawn from separate
/// substreams of the seed, so MPC and LQG runs with the same seed see the
/// same realisation.
struct NoiseDraw {
  Vector w;
  Vector v;
  int gamma = 0;
};

class NoiseGenerator {
 public:
  NoiseGenerator(const SystemModel& model, std::uint64_t seed, double lambda);
  NoiseDraw draw(std::uint64_t k) const;

 private:
  Matrix sqrt_w_, sqrt_v_;
  std::uint64_t seed_;
  double lambda_;
};

/// Simulates the true plant under the chosen controller. An infeasible MPC
/// solve is recorded and ends the trial.
TrialResult run_trial(const Precompute& pre, const TrialOptions& options, std::uint64_t seed);

struct Stats {
  double mean = 0.0;
  double stderr_ = 0.0;  ///< sample std / sqrt(n)
};

struct AggregateReport {
  ControllerKind controller = ControllerKind::MPC;
  int n = 0;
  int T = 0;
  std::uint64_t seed0 = 0;
  Stats discounted_cost, discounted_constraint, avg_undiscounted_cost, infeasible_count;
  long total_infeasible = 0;
  std::vector<TrialResult> trials;
};

Stats summarize(const std::vector<double>& values);
AggregateReport aggregate(const std::vector<TrialResult>& trials, ControllerKind controller,
                          std::uint64_t seed0);

/// Trials with seeds seed0 .. seed0 + n - 1. The parallel kernel produces
/// the same per-trial results as the serial reference.
std::vector<TrialResult> run_trials_serial(const Precompute& pre, const TrialOptions& options,
                                           int n, std::uint64_t seed0);
std::vector<TrialResult> run_trials_parallel(const Precompute& pre, const TrialOptions& options,
                                             int n, std::uint64_t seed0);

AggregateReport run_monte_carlo(const Precompute& pre, const TrialOptions& options, int n,
                                std::uint64_t seed0, Execution exec = Execution::Parallel);

}  // namespace smpc
