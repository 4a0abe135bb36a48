#pragma once

#include <vector>

#include "smpc/model.hpp"

namespace smpc {

/// Full policy: c and the causal innovation gains L are both decisions.
/// Restricted policy: L is fixed at zero and only c is optimised.
enum class PolicyKind { Full, Restricted };

enum class Execution { Serial, Parallel };

/// theta = (c, L). c stacks c_0..c_{N-1}; L is N*nu x N*ny with block (i, j)
/// the gain applied at step i to the innovation of step j, zero for j > i.
struct DecisionVars {
  Vector c;
  Matrix L;

  static DecisionVars zero(int N, int nu, int ny);
  bool operator==(const DecisionVars& other) const;
};

/// Maps DecisionVars to the flat decision vector tau = [c; free entries of L].
/// Free entries are ordered block-row-major over (i, j <= i) and column-major
/// inside each nu x ny block.
struct DecisionLayout {
  int N = 1;
  int nu = 1;
  int ny = 1;
  PolicyKind policy = PolicyKind::Full;

  int n_c() const { return N * nu; }
  int n_l() const { return policy == PolicyKind::Full ? nu * ny * N * (N + 1) / 2 : 0; }
  int dim() const { return n_c() + n_l(); }

  Vector pack(const DecisionVars& theta) const;
  DecisionVars unpack(const Eigen::Ref<const Vector>& tau) const;
  /// (row, col) of L addressed by free entry k.
  std::pair<int, int> l_position(int k) const;
};

/// Prediction operators for a time-varying sequence of transition matrices
/// P_0..P_{N-1} driven through an input matrix G:
///   S  block i   = P_{i-1} ... P_0            (block 0 = I)
///   T  block i,j = P_{i-1} ... P_{j+1} G       (i > j, zero otherwise)
///   SN = P_{N-1} ... P_0,  TN block j = P_{N-1} ... P_{j+1} G
struct Stack {
  Matrix S, T, SN, TN;
};
Stack build_stack(const std::vector<Matrix>& transitions, const Matrix& input);

struct StackedOperators {
  int N = 1;
  int nx = 0, nu = 0, ny = 0, nw = 0;
  Matrix Phi;  ///< A + BK
  Matrix S_phi, T_phiB, T_phiA;
  Matrix SN_phi, TN_phiB, TN_phiA;
  Matrix Kbold, Mbold, Cbold;  ///< I_N (x) K, I_N (x) M, I_N (x) C
};

StackedOperators build_operators(const SystemModel& model, const GainPair& gains, int N);

/// One diagonal of the arrival matrix over the horizon and its probability.
struct GammaPattern {
  std::vector<int> diag;
  double prob = 0.0;
};

/// All 2^N patterns; pattern j holds the binary digits of j with the last
/// step as least significant bit (pattern 0 = all dropped). Throws
/// CapacityError for N > 20.
std::vector<GammaPattern> enumerate_gamma_patterns(int N, double lambda);

/// Second moments of [e_0..e_{N-1}; zeta_0..zeta_{N-1}] where e is the
/// estimation error and zeta_i = gamma_i (C e_i + v_i), and of [e_N; zeta].
struct InnovationCovariance {
  Matrix omega;    ///< (N nx + N ny) square
  Matrix omega_N;  ///< (nx + N ny) square
  int nx = 0;
  int N = 0;

  auto ee() const { return omega.topLeftCorner(N * nx, N * nx); }
  auto ez() const { return omega.topRightCorner(N * nx, omega.cols() - N * nx); }
  auto zz() const { return omega.bottomRightCorner(omega.cols() - N * nx, omega.cols() - N * nx); }
  auto N_ee() const { return omega_N.topLeftCorner(nx, nx); }
  auto N_ez() const { return omega_N.topRightCorner(nx, omega_N.cols() - nx); }
};

/// Omega is affine in the initial error covariance:
///   vec(Omega) = sigma_map vec(Sigma) + offset
/// where both parts sum over all drop patterns. Built once per scenario.
struct OmegaOperator {
  int N = 0, nx = 0, ny = 0;
  Matrix sigma_map, sigma_map_N;
  Vector offset, offset_N;
};

/// Contribution of a single pattern, weighted by its probability.
struct OmegaPatternTerm {
  Matrix sigma_map, sigma_map_N;
  Vector offset, offset_N;
};
OmegaPatternTerm omega_pattern_term(const SystemModel& model, const GainPair& gains,
                                    const GammaPattern& pattern);

/// Pattern reduction; see omega_kernel.cpp.
OmegaOperator reduce_omega_serial(const SystemModel& model, const GainPair& gains,
                                  const std::vector<GammaPattern>& patterns);
OmegaOperator reduce_omega_parallel(const SystemModel& model, const GainPair& gains,
                                    const std::vector<GammaPattern>& patterns);

OmegaOperator build_omega_operator(const SystemModel& model, const GainPair& gains,
                                   const std::vector<GammaPattern>& patterns,
                                   Execution exec = Execution::Parallel);

/// Omega for a given Sigma_k; the result is symmetrised and small negative
/// eigenvalues (above -1e-9 ||Omega||) clipped.
InnovationCovariance assemble_omega(const OmegaOperator& op, const Matrix& sigma_k);

/// Only the linear part of the map, for perturbations of Sigma.
InnovationCovariance apply_sigma_part(const OmegaOperator& op, const Matrix& delta);

/// Reference: explicit sum over patterns of [F; G] blkdiag(...) [F; G]^T.
InnovationCovariance assemble_omega_direct(const SystemModel& model, const GainPair& gains,
                                           const std::vector<GammaPattern>& patterns,
                                           const Matrix& sigma_k);

struct MomentSet {
  Vector pi;    ///< E of the predicted state stack
  Matrix Pi;    ///< sensitivity of the estimate stack to zeta
  Matrix X;     ///< second moment of [e stack; xhat stack]
  Matrix U;     ///< second moment of the input stack
  Vector pi_N;
  Matrix Pi_N;
  Matrix X_N;   ///< second moment of [e_N; xhat_N]
};

MomentSet predicted_moments(const DecisionVars& theta, const Vector& xhat_k,
                            const StackedOperators& ops,
                            const InnovationCovariance& omega);

}  // namespace smpc
