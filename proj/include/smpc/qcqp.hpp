#pragma once

#include "smpc/lyapunov.hpp"
#include "smpc/prediction.hpp"

namespace smpc {

/// tau -> tau^T Hq tau + 2 g^T tau + c0
struct QuadraticForm {
  Matrix Hq;
  Vector g;
  double c0 = 0.0;

  double operator()(const Eigen::Ref<const Vector>& tau) const;
  /// Half the gradient: Hq tau + g.
  Vector half_gradient(const Eigen::Ref<const Vector>& tau) const;
};

/// Objective and constraint of the MPC problem at one (xhat, Sigma).
struct FormPair {
  QuadraticForm cost;
  QuadraticForm constraint;
};

/// Sigma- and xhat-independent pieces of one trace functional
///   sum_i beta^i E|x_i|^2_W + sum_i beta^i E|u_i|^2_R + beta^N tr(Z~ X_N) + tr(Z~ W2)
/// (R = 0 for the constraint). Built once per scenario.
struct FormWeights {
  double beta = 0.0;
  double betaN = 0.0;
  Matrix Wb;         ///< blkdiag(beta^i W)
  Matrix Rb;         ///< blkdiag(beta^i R)
  Matrix Z11, Z21, Z22;
  double tail_const = 0.0;  ///< tr(Z~ W2)
  Matrix Hc;         ///< c-block Hessian, also the row factor of the L-block
  Matrix Gc;         ///< c-block gradient = Gc xhat
  Matrix Px;         ///< xhat quadratic in the constant term
  Matrix WbT;        ///< T_B^T Wb, multiplies Omega_e,zeta
  Matrix BL;         ///< multiplies Omega_zeta,zeta in the L gradient
  Matrix ZT;         ///< beta^N T^N_B^T Z21, multiplies Omega_N e,zeta
  Matrix WbPi0;      ///< Wb Pi0, paired with Omega_e,zeta in the constant
  Matrix Z21tPi0N;   ///< beta^N Z21^T Pi0_N, paired with Omega_N e,zeta
  Matrix Pzeta;      ///< paired with Omega_zeta,zeta in the constant
};

FormWeights build_form_weights(const StackedOperators& ops, const Matrix& W, const Matrix& R,
                               double beta, const Matrix& Z_tilde, const Resolvent& res);

struct FormBuilder {
  DecisionLayout layout;
  FormWeights cost;
  FormWeights constraint;
  std::vector<std::pair<int, int>> l_positions;
};

FormBuilder build_form_builder(const StackedOperators& ops, const TerminalMaps& maps,
                               const ProblemSpec& spec, PolicyKind policy);

FormPair assemble_forms(const FormBuilder& builder, const InnovationCovariance& omega,
                        const Vector& xhat_k);

/// Convenience overload that builds the weights on the fly.
FormPair assemble_forms(const StackedOperators& ops, const InnovationCovariance& omega,
                        const TerminalMaps& maps, const Vector& xhat_k,
                        const ProblemSpec& spec, PolicyKind policy = PolicyKind::Full);

/// Reference evaluation of both trace functionals through predicted_moments
/// and explicit terminal Lyapunov solves.
struct DirectValues {
  double cost = 0.0;
  double constraint = 0.0;
};
DirectValues evaluate_direct(const DecisionVars& theta, const Vector& xhat_k,
                             const StackedOperators& ops, const InnovationCovariance& omega,
                             const TerminalMaps& maps, const ProblemSpec& spec);

enum class SolveStatus { Interior, Active, Infeasible };
std::string_view to_string(SolveStatus s);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
};

struct SolveResult {
  DecisionVars theta_star;
  Vector tau;
  double J = 0.0;
  double g_value = 0.0;
  double nu = 0.0;
  double t = 0.0;       ///< nu / (1 + nu)
  double g_min = 0.0;   ///< constraint floor
  SolveStatus status = SolveStatus::Interior;
  KktResiduals kkt;
  int iterations = 0;
};

/// Basis V with V^T Hf V = diag(phi) and V^T Hg V = diag(lam), restricted to
/// the range of Hf + Hg.
struct Diagonalization {
  Matrix V;
  Vector phi;
  Vector lam;
};
Diagonalization simultaneous_diagonalization(const Matrix& Hf, const Matrix& Hg);

struct SolveOptions {
  /// When > 0 the Hessians are block diagonal with this leading block size.
  int block_split = 0;
  /// Cached diagonalisation of the leading block.
  const Diagonalization* leading_block = nullptr;
  /// Records g along the bisection path.
  std::vector<double>* trace = nullptr;
};

/// min cost(tau) s.t. constraint(tau) <= mu. Dual bisection on
/// t = nu / (1 + nu) in [0, 1]. mu = +inf disables the constraint.
SolveResult solve(const QuadraticForm& cost, const QuadraticForm& constraint, double mu,
                  const DecisionLayout& layout, const SolveOptions& options = {});

/// Global minimiser of the constraint form (pseudoinverse, cutoff 1e-10).
struct ConstraintMinimum {
  DecisionVars theta_f;
  Vector tau_f;
  double g_min = 0.0;
};
ConstraintMinimum minimize_constraint(const QuadraticForm& constraint, const DecisionLayout& layout);

/// K_c with c^f = K_c xhat for the constraint minimiser.
Matrix feasible_feedback_gain(const StackedOperators& ops, const TerminalMaps& maps,
                              const ProblemSpec& spec);

/// Whether [[Q^1/2, 0], [Q^1/2, K^T R^1/2]] has full column rank (uniqueness
/// of the terminal matrix at the optimum).
bool terminal_weight_full_rank(const ProblemSpec& spec, const GainPair& gains);

}  // namespace smpc
