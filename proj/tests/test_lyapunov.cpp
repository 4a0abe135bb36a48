#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "smpc/errors.hpp"

namespace {

using fixtures::scalar;
using smpc::Matrix;
using smpc::Vector;

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

smpc::ClosedLoopOperator scalar_chain(double psi0, double psi1, double lambda) {
  smpc::ClosedLoopOperator op;
  op.psi_tilde_0 = scalar(psi0);
  op.psi_tilde_1 = scalar(psi1);
  op.d_tilde_0 = Matrix::Constant(1, 2, 0.0);
  op.d_tilde_0(0, 1) = 1.0;
  op.d_tilde_1 = Matrix::Constant(1, 2, 1.0);
  op.noise = Matrix::Identity(2, 2);
  op.noise(0, 0) = 0.5;
  op.lambda = lambda;
  return op;
}

Matrix random_psd(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Matrix a(n, n + 1);
  for (int i = 0; i < a.size(); ++i) a(i) = nd(gen);
  return a * a.transpose();
}

smpc::Precompute two_state_pre() {
  return smpc::build_precompute(fixtures::two_state_scenario(3));
}

TEST(Lyapunov, ScalarPhiRadius) {
  // A = 0: only the estimate block Phi = A + BK survives
  auto s = fixtures::scalar_scenario(0.0, 1.0, 1.0);
  s.model.lambda = 0.6;
  const auto op = smpc::build_closed_loop(s.model, {scalar(0.5), scalar(0.3)});
  EXPECT_NEAR(smpc::mss_check(op, 0.8).rho, 0.2, 1e-14);
  EXPECT_TRUE(smpc::mss_check(op, 0.8).stable);
  EXPECT_LT(smpc::mss_check(op, 1e-9).rho, 1e-9);
}

TEST(Lyapunov, PendulumRecursionIsMeanSquareStable) {
  const auto s = smpc::load_scenario(fixtures::scenario_path("simA.json"));
  const auto op = smpc::build_closed_loop(s.model, smpc::design_gains(s));
  EXPECT_LT(smpc::mss_check(op, 0.8).rho, 1.0);
}

TEST(Lyapunov, UnstableRecursionRejected) {
  const auto op = scalar_chain(1.2, 1.1, 0.5);
  EXPECT_THROW(smpc::build_resolvent(op, 0.9, 2), smpc::MssError);
  EXPECT_THROW(smpc::steady_state_second_moment(op), smpc::MssError);
}

TEST(Lyapunov, ZeroDynamicsGiveIdentityResolvent) {
  auto op = scalar_chain(0.0, 0.0, 0.4);
  op.psi_tilde_0 = Matrix::Zero(2, 2);
  op.psi_tilde_1 = Matrix::Zero(2, 2);
  op.d_tilde_0 = Matrix::Identity(2, 2);
  op.d_tilde_1 = Matrix::Identity(2, 2);
  const auto res = smpc::build_resolvent(op, 0.8, 3);
  EXPECT_LE(max_abs(res.W1 - Matrix::Identity(4, 4)), 1e-15);
  std::mt19937_64 gen(1);
  const Matrix Z = random_psd(2, gen);
  const Matrix X = random_psd(2, gen);
  EXPECT_NEAR((smpc::reshape_weight(res.W1, Z) * X).trace(), (Z * X).trace(), 1e-12);
  const Matrix P = smpc::solve_discounted_lyapunov(res, X, 3);
  EXPECT_LE(max_abs(P - (std::pow(0.8, 3) * X + res.W2)), 1e-14);
}

TEST(Lyapunov, ScalarResolventClosedForm) {
  const double psi0 = 0.9, psi1 = 0.4, lambda = 0.3, beta = 0.95;
  const auto op = scalar_chain(psi0, psi1, lambda);
  const auto res = smpc::build_resolvent(op, beta, 2);
  const double a = (1.0 - lambda) * psi0 * psi0 + lambda * psi1 * psi1;
  EXPECT_NEAR(res.W1(0, 0), 1.0 / (1.0 - beta * a), 1e-12);
  const double forcing = (1.0 - lambda) * 1.0 + lambda * 1.5;
  EXPECT_NEAR(res.W2(0, 0), std::pow(beta, 3) / (1.0 - beta) * forcing, 1e-12);
  EXPECT_NEAR(smpc::steady_state_second_moment(op)(0, 0), forcing / (1.0 - a), 1e-12);
}

TEST(Lyapunov, KroneckerSolveMatchesSeries) {
  const auto pre = two_state_pre();
  const auto& op = pre.closed_loop;
  const auto& res = pre.maps.cost;
  const int N = 3;
  const double beta = res.beta;
  const Matrix F = op.forcing();
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix XN = random_psd(4, gen);
    // sum_{i >= N} beta^i X_i with X_{i+1} = E{Psi X_i Psi^T} + forcing
    Matrix X = XN;
    Matrix sum = std::pow(beta, N) * XN;
    double w = std::pow(beta, N);
    for (int i = 0; i < 100000; ++i) {
      X = op.propagate(X) + F;
      w *= beta;
      const Matrix term = w * X;
      sum += term;
      if (max_abs(term) < 1e-16 * max_abs(sum)) break;
    }
    const Matrix P = smpc::solve_discounted_lyapunov(res, XN, N);
    EXPECT_LE(max_abs(P - sum), 1e-9 * max_abs(sum)) << "trial " << trial;
    EXPECT_LE(smpc::discounted_lyapunov_residual(op, res, XN, N, P), 1e-9);
  }
}

TEST(Lyapunov, ContractionLimitEqualsSolve) {
  const auto pre = two_state_pre();
  const auto& op = pre.closed_loop;
  const auto& res = pre.maps.constraint;
  std::mt19937_64 gen(5);
  const Matrix XN = random_psd(4, gen);
  const Matrix rhs = std::pow(res.beta, 3) * XN + res.W2;
  Matrix P = Matrix::Zero(4, 4);
  for (int i = 0; i < 5000; ++i) P = res.beta * op.propagate(P) + rhs;
  const Matrix Ps = smpc::solve_discounted_lyapunov(res, XN, 3);
  EXPECT_LE(max_abs(P - Ps), 1e-10 * max_abs(Ps));
}

TEST(Lyapunov, ReshapedWeightIdentity) {
  const auto pre = two_state_pre();
  const auto& maps = pre.maps;
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix XN = random_psd(4, gen);
    const Matrix P1 = smpc::solve_discounted_lyapunov(maps.cost, XN, 3);
    const Matrix in = std::pow(maps.cost.beta, 3) * XN + maps.cost.W2;
    const double lhs = (maps.Z1 * P1).trace();
    EXPECT_NEAR(lhs, (maps.Z1_tilde * in).trace(), 1e-10 * std::abs(lhs));
    const Matrix P2 = smpc::solve_discounted_lyapunov(maps.constraint, XN, 3);
    const Matrix in2 = std::pow(maps.constraint.beta, 3) * XN + maps.constraint.W2;
    const double lhs2 = (maps.Z2 * P2).trace();
    EXPECT_NEAR(lhs2, (maps.Z2_tilde * in2).trace(), 1e-10 * std::abs(lhs2));
  }
  EXPECT_TRUE(smpc::linalg::is_symmetric(maps.Z1_tilde));
}

TEST(Lyapunov, SolutionIsMonotoneInTerminalMoment) {
  const auto pre = two_state_pre();
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix X = random_psd(4, gen);
    const Matrix Y = X + random_psd(4, gen);
    const Matrix d = smpc::solve_discounted_lyapunov(pre.maps.cost, Y, 3) -
                     smpc::solve_discounted_lyapunov(pre.maps.cost, X, 3);
    EXPECT_GE(smpc::linalg::min_eigenvalue(d), -1e-10 * max_abs(d));
  }
}

TEST(Lyapunov, SeparateMapsForDistinctDiscounts) {
  auto s = fixtures::two_state_scenario(3);
  s.spec.beta1 = 0.9;
  const auto pre = smpc::build_precompute(s);
  EXPECT_DOUBLE_EQ(pre.maps.cost.beta, 0.9);
  EXPECT_DOUBLE_EQ(pre.maps.constraint.beta, 0.8);
  EXPECT_GT(max_abs(pre.maps.cost.W1 - pre.maps.constraint.W1), 0.0);
}

TEST(Lyapunov, SteadyStateIsFixedPoint) {
  const auto pre = two_state_pre();
  ASSERT_TRUE(pre.maps.Xbar.has_value());
  const Matrix& X = *pre.maps.Xbar;
  const Matrix next = pre.closed_loop.propagate(X) + pre.closed_loop.forcing();
  EXPECT_LE(max_abs(next - X), 1e-10 * max_abs(X));

  auto s = fixtures::two_state_scenario(3);
  s.model.sigma_w.setZero();
  auto op = smpc::build_closed_loop(s.model, pre.gains);
  op.noise.setZero();
  EXPECT_EQ(max_abs(smpc::steady_state_second_moment(op)), 0.0);
}

TEST(Lyapunov, TerminalWeightBlocks) {
  const auto pre = two_state_pre();
  const auto& spec = pre.scenario.spec;
  const Matrix& K = pre.gains.K;
  EXPECT_EQ(pre.maps.Z1.topLeftCorner(2, 2), spec.Q);
  EXPECT_LE(max_abs(pre.maps.Z1.bottomRightCorner(2, 2) - (spec.Q + K.transpose() * spec.R * K)),
            1e-15);
  const Matrix HtH = spec.H.transpose() * spec.H;
  EXPECT_EQ(pre.maps.Z2.topRightCorner(2, 2), HtH);
}

}  // namespace
