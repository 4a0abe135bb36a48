#include "smpc/analysis.hpp"

#include <cmath>
#include <sstream>

#include "smpc/errors.hpp"

namespace smpc {

namespace {

Matrix weighted_blocks(const Matrix& W, double beta, int N) {
  Matrix out = Matrix::Zero(N * W.rows(), N * W.cols());
  double w = 1.0;
  for (int i = 0; i < N; ++i, w *= beta) {
    out.block(i * W.rows(), i * W.cols(), W.rows(), W.cols()) = w * W;
  }
  return out;
}

}  // namespace

StabilityCertificate compute_sigma(const Precompute& pre) {
  const ProblemSpec& spec = pre.scenario.spec;
  const StackedOperators& ops = pre.ops;
  const int N = ops.N, nx = ops.nx;
  if (linalg::min_eigenvalue(spec.Q) <= 0.0) {
    throw ValidationError("σ via eigenvalue unavailable: Q is not positive definite");
  }

  StabilityCertificate cert;
  cert.beta = spec.beta1;
  cert.K_c = feasible_feedback_gain(ops, pre.maps, spec);

  const double bN = std::pow(spec.beta1, N);
  const Matrix Qb = weighted_blocks(spec.Q, spec.beta1, N);
  const Matrix Rb = weighted_blocks(spec.R, spec.beta1, N);
  const Matrix Z22 = pre.maps.Z1_tilde.bottomRightCorner(nx, nx);
  const Matrix Sx = ops.S_phi + ops.T_phiB * cert.K_c;
  const Matrix Su = ops.Kbold * Sx + cert.K_c;
  const Matrix SN = ops.SN_phi + ops.TN_phiB * cert.K_c;
  cert.P_xhat = linalg::symmetrize(Sx.transpose() * Qb * Sx + Su.transpose() * Rb * Su +
                                   0.5 * bN * SN.transpose() * (Z22.transpose() + Z22) * SN);

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(cert.P_xhat, linalg::symmetrize(spec.Q),
                                                       Eigen::EigenvaluesOnly);
  cert.sigma_cert = ges.eigenvalues().maxCoeff();
  const double limit = 1.0 / (1.0 - cert.beta);
  cert.bound_denominator = limit - cert.sigma_cert;
  cert.holds = cert.sigma_cert < limit;
  return cert;
}

std::optional<Matrix> common_lyapunov_check(const SystemModel& model, const Matrix& M) {
  const Matrix& A = model.A;
  const Matrix psi1 = A - A * M * model.C;
  const double lam = model.lambda;
  const Matrix op = (1.0 - lam) * linalg::kron(A.transpose(), A.transpose()) +
                    lam * linalg::kron(psi1.transpose(), psi1.transpose());
  const double rho = linalg::spectral_radius(op);
  if (rho >= 1.0) throw MssError("estimation error recursion is not mean-square stable", rho);

  const Eigen::Index n = A.rows();
  const Matrix P = linalg::symmetrize(linalg::solve_vectorized(op, Matrix::Identity(n, n)));
  const double margin = 1e-9 * std::max(1.0, linalg::max_eigenvalue(P));
  if (linalg::min_eigenvalue(P) <= margin) return std::nullopt;
  if (linalg::min_eigenvalue(P - A.transpose() * P * A) <= margin) return std::nullopt;
  if (linalg::min_eigenvalue(P - psi1.transpose() * P * psi1) <= margin) return std::nullopt;
  return P;
}

double asymptotic_bound(const Precompute& pre) {
  if (!pre.maps.Xbar) {
    throw MssError("undiscounted closed-loop recursion is not mean-square stable",
                   mss_check(pre.closed_loop, 1.0).rho);
  }
  return (pre.maps.Z1 * *pre.maps.Xbar).trace();
}

double asymptotic_bound(const Scenario& scenario) {
  const GainPair gains = design_gains(scenario);
  const ClosedLoopOperator op = build_closed_loop(scenario.model, gains);
  const Matrix Xbar = steady_state_second_moment(op);
  const Matrix& Q = scenario.spec.Q;
  const Eigen::Index nx = Q.rows();
  Matrix Z1(2 * nx, 2 * nx);
  Z1 << Q, Q, Q, Q + gains.K.transpose() * scenario.spec.R * gains.K;
  return (Z1 * Xbar).trace();
}

double sensitivity(const Precompute& pre, const Matrix& sigma_k) {
  const SystemModel& m = pre.scenario.model;
  const ProblemSpec& spec = pre.scenario.spec;
  const StackedOperators& ops = pre.ops;
  const int N = ops.N, nx = ops.nx;
  const Matrix AM = m.A * pre.gains.M;
  const Matrix psi1 = m.A - AM * m.C;
  const Matrix innov = m.C * sigma_k * m.C.transpose() + m.sigma_v;
  const double bN = std::pow(spec.beta2, N);
  const Matrix Hb = weighted_blocks(spec.H.transpose() * spec.H, spec.beta2, N);
  const Matrix& Z2t = pre.maps.Z2_tilde;
  const Matrix Z22 = Z2t.bottomRightCorner(nx, nx);

  const Matrix V = ops.S_phi * AM;
  const Matrix VN = ops.SN_phi * AM;
  const double t1 = (Hb * V * innov * V.transpose()).trace();
  const double t3 = bN * (Z22 * VN * innov * VN.transpose()).trace();

  const Matrix delta = psi1 * sigma_k * psi1.transpose() + AM * m.sigma_v * AM.transpose() -
                       m.A * sigma_k * m.A.transpose();
  const InnovationCovariance dOmega = apply_sigma_part(pre.omega_op, delta);

  const Matrix Pi = ops.T_phiA * ops.Mbold;
  Matrix IPi(N * nx, Pi.cols() + N * nx);
  IPi << Matrix::Identity(N * nx, N * nx), Pi;
  const double t2 = (IPi.transpose() * Hb * IPi * dOmega.omega).trace();

  const Matrix PiN = ops.TN_phiA * ops.Mbold;
  const Matrix E = linalg::block_diag(Matrix::Identity(nx, nx), PiN);
  const double t4 = bN * (E.transpose() * Z2t * E * dOmega.omega_N).trace();
  return t1 + t2 + t3 + t4;
}

std::vector<Matrix> expected_covariance_trajectory(const SystemModel& model, const Matrix& M,
                                                   double lambda, const Matrix& sigma0, int T) {
  const Matrix& A = model.A;
  const Matrix AM = A * M;
  const Matrix psi1 = A - AM * model.C;
  const Matrix forcing = model.D * model.sigma_w * model.D.transpose();
  const Matrix update_noise = AM * model.sigma_v * AM.transpose();
  std::vector<Matrix> out;
  out.reserve(T);
  Matrix s = sigma0;
  for (int k = 0; k < T; ++k) {
    out.push_back(s);
    s = linalg::symmetrize((1.0 - lambda) * A * s * A.transpose() +
                           lambda * (psi1 * s * psi1.transpose() + update_noise) + forcing);
  }
  return out;
}

RobustnessReport robustness_sensitivity(const Precompute& pre, double lambda_actual,
                                        const std::vector<Matrix>& sigmas,
                                        const std::vector<DecisionVars>& thetas, double mu0) {
  if (pre.policy != PolicyKind::Restricted) {
    throw PolicyError("robustness sensitivity requires the restricted (L = 0) policy");
  }
  for (const auto& th : thetas) {
    if (th.L.size() > 0 && th.L.cwiseAbs().maxCoeff() != 0.0) {
      throw PolicyError("robustness sensitivity requires every L block to be zero");
    }
  }
  const SystemModel& m = pre.scenario.model;
  const double rho_n = mss_margin(m, pre.gains.M, m.lambda);
  if (rho_n >= 1.0) throw MssError("estimator not MSS at the nominal arrival probability", rho_n);
  const double rho_a = mss_margin(m, pre.gains.M, lambda_actual);
  if (rho_a >= 1.0) throw MssError("estimator not MSS at the actual arrival probability", rho_a);

  RobustnessReport r;
  r.lambda_nominal = m.lambda;
  r.lambda_actual = lambda_actual;
  r.delta_lambda = lambda_actual - m.lambda;
  const double beta = pre.scenario.spec.beta2;
  double w = beta;
  for (const auto& s : sigmas) {
    const double l = sensitivity(pre, s);
    r.sensitivity_series.push_back(l);
    r.discounted_sensitivity += w * l;
    w *= beta;
  }
  r.mu0 = mu0;
  r.margin = pre.scenario.spec.epsilon - mu0;
  r.margin_ok = r.delta_lambda * r.discounted_sensitivity <= r.margin;
  return r;
}

}  // namespace smpc
