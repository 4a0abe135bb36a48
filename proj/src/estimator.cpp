#include "smpc/estimator.hpp"

#include <cmath>
#include <sstream>

#include "smpc/errors.hpp"

namespace smpc {

namespace {

constexpr double kRiccatiTol = 1e-12;
constexpr long kMaxIterations = 1000000;
constexpr long kDivergenceRun = 10000;

double rel_change(const Matrix& next, const Matrix& prev) {
  const double scale = std::max(next.cwiseAbs().maxCoeff(), 1e-300);
  return (next - prev).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

Matrix design_lqr_gain(const SystemModel& model, const Matrix& Q, const Matrix& R) {
  const Matrix& A = model.A;
  const Matrix& B = model.B;
  Matrix P = Q;
  double residual = 0.0;
  for (long it = 0; it < kMaxIterations; ++it) {
    const Matrix BtP = B.transpose() * P;
    const Matrix K = -(R + BtP * B).ldlt().solve(BtP * A);
    Matrix next = Q + A.transpose() * P * A + A.transpose() * P * B * K;
    next = linalg::symmetrize(next);
    residual = rel_change(next, P);
    P = std::move(next);
    if (!P.allFinite()) break;
    if (residual <= kRiccatiTol) {
      const Matrix BtPn = B.transpose() * P;
      return -(R + BtPn * B).ldlt().solve(BtPn * A);
    }
  }
  std::ostringstream os;
  os << "LQR Riccati iteration did not converge (last relative residual "
     << residual << ")";
  throw NumericalError(os.str());
}

Matrix intermittent_riccati_solution(const SystemModel& model) {
  const Matrix& A = model.A;
  const Matrix& C = model.C;
  const Matrix Sw = model.D * model.sigma_w * model.D.transpose();
  Matrix S = Sw;
  double residual = 0.0;
  double last_trace = S.trace();
  long growing = 0;
  for (long it = 0; it < kMaxIterations; ++it) {
    const Matrix CS = C * S;
    const Matrix gain_part =
        (CS * C.transpose() + model.sigma_v).ldlt().solve(CS * A.transpose());
    Matrix next = A * S * A.transpose() + Sw -
                  model.lambda * (A * S * C.transpose()) * gain_part;
    next = linalg::symmetrize(next);
    residual = rel_change(next, S);
    S = std::move(next);
    if (!S.allFinite()) {
      throw NumericalError("λ below critical value: estimator Riccati iteration overflowed");
    }
    if (residual <= kRiccatiTol) return S;
    const double tr = S.trace();
    growing = tr > last_trace ? growing + 1 : 0;
    last_trace = tr;
    if (growing >= kDivergenceRun) {
      throw NumericalError("λ below critical value: estimator Riccati trace grew for 10^4 steps");
    }
  }
  std::ostringstream os;
  os << "estimator Riccati iteration did not converge (last relative residual "
     << residual << ")";
  throw NumericalError(os.str());
}

Matrix design_intermittent_kalman_gain(const SystemModel& model) {
  const Matrix S = intermittent_riccati_solution(model);
  const Matrix& C = model.C;
  const Matrix innov = C * S * C.transpose() + model.sigma_v;
  // M = S C^T innov^{-1}, via the symmetric solve on the transpose.
  return innov.ldlt().solve(C * S).transpose();
}

double mss_margin(const SystemModel& model, const Matrix& M, double lambda) {
  const Matrix& A = model.A;
  const Matrix psi1 = A - A * M * model.C;
  const Matrix op = (1.0 - lambda) * linalg::kron(A, A) +
                    lambda * linalg::kron(psi1, psi1);
  return linalg::spectral_radius(op);
}

double mss_margin(const SystemModel& model, const Matrix& M) {
  return mss_margin(model, M, model.lambda);
}

GainPair design_gains(const Scenario& scenario) {
  GainPair g;
  if (scenario.gains) {
    g = *scenario.gains;
  } else {
    g.K = design_lqr_gain(scenario.model, scenario.spec.Q, scenario.spec.R);
    g.M = design_intermittent_kalman_gain(scenario.model);
  }
  const double rho_phi =
      linalg::spectral_radius(scenario.model.A + scenario.model.B * g.K);
  if (rho_phi >= 1.0) {
    throw MssError("A + BK is not Schur stable", rho_phi);
  }
  const double rho_psi = mss_margin(scenario.model, g.M);
  if (rho_psi >= 1.0) {
    throw MssError("estimation error recursion is not mean-square stable", rho_psi);
  }
  return g;
}

FilterState filter_step(const FilterState& state, const Vector& u, int gamma,
                        const Vector& z, const SystemModel& model,
                        const Matrix& M) {
  const Matrix& A = model.A;
  FilterState next;
  next.xhat = A * state.xhat + model.B * u;
  Matrix psi = A;
  if (gamma != 0) {
    const Matrix AM = A * M;
    next.xhat += AM * (z - model.C * state.xhat);
    psi -= AM * model.C;
    next.sigma = psi * state.sigma * psi.transpose() +
                 AM * model.sigma_v * AM.transpose();
  } else {
    next.sigma = psi * state.sigma * psi.transpose();
  }
  next.sigma += model.D * model.sigma_w * model.D.transpose();
  next.sigma = linalg::symmetrize(next.sigma);
  return next;
}

}  // namespace smpc
