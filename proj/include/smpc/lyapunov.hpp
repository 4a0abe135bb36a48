#pragma once

#include <optional>

#include "smpc/model.hpp"

namespace smpc {

/// Jump-linear recursion of xi = [e; xhat] beyond the horizon:
///   xi+ = Psi~(gamma) xi + D~(gamma) [v; w]
struct ClosedLoopOperator {
  Matrix psi_tilde_0, psi_tilde_1;
  Matrix d_tilde_0, d_tilde_1;
  Matrix noise;  ///< blkdiag(sigma_v, sigma_w)
  double lambda = 1.0;

  /// (1-lambda) Psi~0 (x) Psi~0 + lambda Psi~1 (x) Psi~1
  Matrix second_moment_operator() const;
  /// E{D~ noise D~^T}
  Matrix forcing() const;
  /// E{Psi~ X Psi~^T}
  Matrix propagate(const Matrix& X) const;
};

ClosedLoopOperator build_closed_loop(const SystemModel& model, const GainPair& gains);

struct MssResult {
  bool stable = false;
  double rho = 0.0;
};

/// Spectral radius of beta times the second-moment operator.
MssResult mss_check(const ClosedLoopOperator& op, double beta);

/// Resolvent for one discount factor:
///   W1 = [I - beta (second-moment operator)]^{-1}
///   W2 = beta^{N+1} / (1-beta) E{D~ noise D~^T}
struct Resolvent {
  double beta = 0.0;
  Matrix W1;
  Matrix W2;
};

struct TerminalMaps {
  int N = 1;
  Resolvent cost;        ///< beta1
  Resolvent constraint;  ///< beta2; shares W1 when beta1 == beta2
  Matrix Z1, Z2;
  /// tr(Z~ X) = tr(Z P(X)) where vec(P) = W1 vec(X); symmetrised.
  Matrix Z1_tilde, Z2_tilde;
  /// Undiscounted steady state; absent when that recursion is not MSS.
  std::optional<Matrix> Xbar;
};

Resolvent build_resolvent(const ClosedLoopOperator& op, double beta, int N);

/// Throws MssError when beta1 or beta2 makes the resolvent singular.
TerminalMaps build_terminal_maps(const ClosedLoopOperator& op, const ProblemSpec& spec,
                                 const GainPair& gains);

/// Z~ with vec(Z~^T) = W1^T vec(Z), symmetrised.
Matrix reshape_weight(const Matrix& W1, const Matrix& Z);

/// Discounted tail sum P = sum_{i >= N} beta^i X_{i|k}, from
/// vec(P) = W1 vec(beta^N X_N + W2).
Matrix solve_discounted_lyapunov(const Resolvent& res, const Matrix& X_N, int N);

/// Relative residual of P = beta E{Psi~ P Psi~^T} + beta^N X_N + W2.
double discounted_lyapunov_residual(const ClosedLoopOperator& op, const Resolvent& res,
                                    const Matrix& X_N, int N, const Matrix& P);

/// Xbar = E{Psi~ Xbar Psi~^T} + E{D~ noise D~^T}. Throws MssError when the
/// undiscounted recursion is not mean-square stable.
Matrix steady_state_second_moment(const ClosedLoopOperator& op);

}  // namespace smpc
