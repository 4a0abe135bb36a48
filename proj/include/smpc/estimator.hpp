#pragma once

#include "smpc/model.hpp"

namespace smpc {

struct FilterState {
  Vector xhat;
  Matrix sigma;
};

/// Infinite-horizon LQR gain (u = K x) by Riccati fixed-point iteration.
/// Throws NumericalError carrying the last residual if it fails to converge.
Matrix design_lqr_gain(const SystemModel& model, const Matrix& Q, const Matrix& R);

/// Observer gain from the Riccati equation of the Kalman filter with
/// intermittent observations, iterated from D sigma_w D^T. Throws
/// NumericalError when the iteration diverges (lambda below critical).
Matrix design_intermittent_kalman_gain(const SystemModel& model);

/// Same, returning the fixed point instead of the gain.
Matrix intermittent_riccati_solution(const SystemModel& model);

/// Spectral radius of (1-lambda) A(x)A + lambda (A-AMC)(x)(A-AMC).
double mss_margin(const SystemModel& model, const Matrix& M);
double mss_margin(const SystemModel& model, const Matrix& M, double lambda);

/// Gains from the scenario override, or designed from the model. Checks that
/// A+BK is Schur and the estimation error recursion is mean-square stable.
GainPair design_gains(const Scenario& scenario);

/// One step of the closed-loop estimator. z is ignored when gamma == 0.
FilterState filter_step(const FilterState& state, const Vector& u, int gamma,
                        const Vector& z, const SystemModel& model,
                        const Matrix& M);

}  // namespace smpc
