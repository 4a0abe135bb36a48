#include "smpc/lyapunov.hpp"

#include <cmath>

#include "smpc/errors.hpp"

namespace smpc {

Matrix ClosedLoopOperator::second_moment_operator() const {
  return (1.0 - lambda) * linalg::kron(psi_tilde_0, psi_tilde_0) +
         lambda * linalg::kron(psi_tilde_1, psi_tilde_1);
}

Matrix ClosedLoopOperator::forcing() const {
  return linalg::symmetrize((1.0 - lambda) * d_tilde_0 * noise * d_tilde_0.transpose() +
                            lambda * d_tilde_1 * noise * d_tilde_1.transpose());
}

Matrix ClosedLoopOperator::propagate(const Matrix& X) const {
  return (1.0 - lambda) * psi_tilde_0 * X * psi_tilde_0.transpose() +
         lambda * psi_tilde_1 * X * psi_tilde_1.transpose();
}

ClosedLoopOperator build_closed_loop(const SystemModel& model, const GainPair& gains) {
  const int nx = model.nx(), ny = model.ny(), nw = model.nw();
  const Matrix& A = model.A;
  const Matrix AM = A * gains.M;
  const Matrix AMC = AM * model.C;
  const Matrix Phi = A + model.B * gains.K;

  ClosedLoopOperator op;
  op.lambda = model.lambda;
  for (int g = 0; g < 2; ++g) {
    Matrix psi = Matrix::Zero(2 * nx, 2 * nx);
    psi.topLeftCorner(nx, nx) = g ? Matrix(A - AMC) : A;
    if (g) psi.bottomLeftCorner(nx, nx) = AMC;
    psi.bottomRightCorner(nx, nx) = Phi;
    Matrix d = Matrix::Zero(2 * nx, ny + nw);
    if (g) {
      d.topLeftCorner(nx, ny) = -AM;
      d.bottomLeftCorner(nx, ny) = AM;
    }
    d.topRightCorner(nx, nw) = model.D;
    (g ? op.psi_tilde_1 : op.psi_tilde_0) = psi;
    (g ? op.d_tilde_1 : op.d_tilde_0) = d;
  }
  op.noise = linalg::block_diag(model.sigma_v, model.sigma_w);
  return op;
}

MssResult mss_check(const ClosedLoopOperator& op, double beta) {
  const double rho = beta * linalg::spectral_radius(op.second_moment_operator());
  return {rho < 1.0, rho};
}

Resolvent build_resolvent(const ClosedLoopOperator& op, double beta, int N) {
  const MssResult m = mss_check(op, beta);
  if (!m.stable) {
    throw MssError("discounted closed-loop recursion is not mean-square stable", m.rho);
  }
  const Eigen::Index n = op.psi_tilde_0.rows();
  Resolvent r;
  r.beta = beta;
  const Matrix lhs = Matrix::Identity(n * n, n * n) - beta * op.second_moment_operator();
  r.W1 = lhs.partialPivLu().inverse();
  r.W2 = std::pow(beta, N + 1) / (1.0 - beta) * op.forcing();
  return r;
}

Matrix reshape_weight(const Matrix& W1, const Matrix& Z) {
  const Eigen::Index n = Z.rows();
  const Matrix zt_transposed = linalg::unvec(W1.transpose() * linalg::vec(Z), n, n);
  return linalg::symmetrize(zt_transposed.transpose());
}

TerminalMaps build_terminal_maps(const ClosedLoopOperator& op, const ProblemSpec& spec,
                                 const GainPair& gains) {
  TerminalMaps maps;
  maps.N = spec.N;
  maps.cost = build_resolvent(op, spec.beta1, spec.N);
  if (spec.beta2 == spec.beta1) {
    maps.constraint = maps.cost;
  } else {
    maps.constraint = build_resolvent(op, spec.beta2, spec.N);
  }

  const Matrix& Q = spec.Q;
  const Eigen::Index nx = Q.rows();
  maps.Z1.resize(2 * nx, 2 * nx);
  maps.Z1 << Q, Q, Q, Q + gains.K.transpose() * spec.R * gains.K;
  const Matrix HtH = spec.H.transpose() * spec.H;
  maps.Z2.resize(2 * nx, 2 * nx);
  maps.Z2 << HtH, HtH, HtH, HtH;

  maps.Z1_tilde = reshape_weight(maps.cost.W1, maps.Z1);
  maps.Z2_tilde = reshape_weight(maps.constraint.W1, maps.Z2);

  if (mss_check(op, 1.0).stable) maps.Xbar = steady_state_second_moment(op);
  return maps;
}

Matrix solve_discounted_lyapunov(const Resolvent& res, const Matrix& X_N, int N) {
  const Eigen::Index n = X_N.rows();
  const Matrix rhs = std::pow(res.beta, N) * X_N + res.W2;
  return linalg::symmetrize(linalg::unvec(res.W1 * linalg::vec(rhs), n, n));
}

double discounted_lyapunov_residual(const ClosedLoopOperator& op, const Resolvent& res,
                                    const Matrix& X_N, int N, const Matrix& P) {
  const Matrix r = P - res.beta * op.propagate(P) - std::pow(res.beta, N) * X_N - res.W2;
  return r.norm() / std::max(P.norm(), 1e-300);
}

Matrix steady_state_second_moment(const ClosedLoopOperator& op) {
  const MssResult m = mss_check(op, 1.0);
  if (!m.stable) {
    throw MssError("undiscounted closed-loop recursion is not mean-square stable", m.rho);
  }
  const Matrix X = linalg::solve_vectorized(op.second_moment_operator(), op.forcing());
  return linalg::enforce_psd(X);
}

}  // namespace smpc
