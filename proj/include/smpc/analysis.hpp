#pragma once

#include <optional>
#include <vector>

#include "smpc/mpc.hpp"

namespace smpc {

struct StabilityCertificate {
  Matrix K_c;
  Matrix P_xhat;
  double sigma_cert = 0.0;  ///< largest eigenvalue of P_xhat Q^{-1}
  double beta = 0.0;
  bool holds = false;       ///< sigma < 1 / (1 - beta)
  double bound_denominator = 0.0;
};

/// P_xhat for the constraint-minimising feedback c = K_c xhat, and sigma.
/// Throws ValidationError when Q is singular.
StabilityCertificate compute_sigma(const Precompute& pre);

/// Solves P - E{Psi^T P Psi} = I and tests P - A^T P A > 0 and
/// P - (A-AMC)^T P (A-AMC) > 0. Returns P when both hold. Sufficient only.
/// Throws MssError when the averaged recursion is not mean-square stable.
std::optional<Matrix> common_lyapunov_check(const SystemModel& model, const Matrix& M);

/// tr(Z1 Xbar).
double asymptotic_bound(const Precompute& pre);
double asymptotic_bound(const Scenario& scenario);

/// Per-step sensitivity of the expected threshold to the arrival probability
/// for the restricted policy:
///   E{mu_{k+1}} - E{mu^n_{k+1}} = (lambda_a - lambda_n) L(Sigma_k).
double sensitivity(const Precompute& pre, const Matrix& sigma_k);

/// E{Sigma_k}, k = 0..T-1, when arrivals have probability lambda.
std::vector<Matrix> expected_covariance_trajectory(const SystemModel& model, const Matrix& M,
                                                   double lambda, const Matrix& sigma0, int T);

struct RobustnessReport {
  double lambda_nominal = 0.0;
  double lambda_actual = 0.0;
  double delta_lambda = 0.0;
  std::vector<double> sensitivity_series;  ///< L_{k+1}(Sigma_k)
  double discounted_sensitivity = 0.0;     ///< sum_k beta^{k+1} L_{k+1}(Sigma_k)
  double mu0 = 0.0;
  double margin = 0.0;                      ///< epsilon - mu0
  bool margin_ok = false;                   ///< delta_lambda * discounted <= margin
};

/// pre must use the restricted policy and every theta in the trajectory must
/// have L = 0 (PolicyError otherwise). mu0 is the threshold the controller
/// starts from. Throws MssError if the estimator is not MSS at either
/// probability.
RobustnessReport robustness_sensitivity(const Precompute& pre, double lambda_actual,
                                        const std::vector<Matrix>& sigmas,
                                        const std::vector<DecisionVars>& thetas, double mu0);

}  // namespace smpc
