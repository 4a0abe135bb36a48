#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "smpc/errors.hpp"

namespace {

using fixtures::scalar;
using smpc::Matrix;
using smpc::Vector;

smpc::DecisionVars random_theta(const smpc::DecisionLayout& lay, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Vector tau(lay.dim());
  for (Eigen::Index i = 0; i < tau.size(); ++i) tau(i) = nd(gen);
  return lay.unpack(tau);
}

TEST(Mpc, TailPolicyDropShiftsOnly) {
  const smpc::DecisionLayout lay{4, 2, 1, smpc::PolicyKind::Full};
  std::mt19937_64 gen(1);
  const auto theta = random_theta(lay, gen);
  const auto tail = smpc::tail_policy(theta, 0, Vector::Constant(1, 3.0), lay);
  EXPECT_EQ(tail.c.head(6), theta.c.tail(6));
  EXPECT_EQ(tail.c.tail(2), Vector::Zero(2));
  EXPECT_EQ(tail.L.topLeftCorner(6, 3), theta.L.bottomRightCorner(6, 3));
  EXPECT_EQ(tail.L.bottomRows(2), Matrix::Zero(2, 4));
  EXPECT_EQ(tail.L.rightCols(1), Matrix::Zero(8, 1));
  // the shifted gains stay block lower triangular
  EXPECT_TRUE(lay.unpack(lay.pack(tail)) == tail);
}

TEST(Mpc, TailPolicyOfZeroIsZero) {
  const smpc::DecisionLayout lay{3, 1, 2, smpc::PolicyKind::Full};
  const auto zero = smpc::DecisionVars::zero(3, 1, 2);
  EXPECT_TRUE(smpc::tail_policy(zero, 1, Vector::Constant(2, 1.0), lay) == zero);
}

TEST(Mpc, TailPolicyTwoStepHandExample) {
  const smpc::DecisionLayout lay{2, 1, 1, smpc::PolicyKind::Full};
  smpc::DecisionVars theta = smpc::DecisionVars::zero(2, 1, 1);
  theta.c << 0.3, -0.7;
  theta.L << 1.1, 0.0, 2.0, 0.4;
  const auto tail = smpc::tail_policy(theta, 1, Vector::Constant(1, 0.5), lay);
  EXPECT_DOUBLE_EQ(tail.c(0), -0.7 + 2.0 * 0.5);
  EXPECT_DOUBLE_EQ(tail.c(1), 0.0);
  EXPECT_DOUBLE_EQ(tail.L(0, 0), 0.4);
  EXPECT_DOUBLE_EQ(tail.L(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(tail.L(1, 1), 0.0);
}

TEST(Mpc, InitialThresholdPolicies) {
  const auto pre = smpc::build_precompute(fixtures::two_state_scenario(3));
  const auto st = smpc::init_controller(pre);
  EXPECT_DOUBLE_EQ(st.mu, 5.8);
  const auto cm = smpc::minimize_constraint(st.forms.constraint, pre.layout());
  const auto minimal = smpc::init_controller(pre, smpc::Mu0Policy::MinimalFeasible);
  EXPECT_NEAR(minimal.mu, cm.g_min * (1.0 + 1e-9), 1e-12 * cm.g_min);
  EXPECT_GT(minimal.mu, cm.g_min);
  EXPECT_NE(smpc::plan(minimal, pre).status, smpc::SolveStatus::Infeasible);
}

TEST(Mpc, EpsilonBelowFloorReportsGap) {
  auto s = fixtures::two_state_scenario(3);
  s.spec.epsilon = 1.0;
  const auto pre = smpc::build_precompute(s);
  try {
    smpc::init_controller(pre);
    FAIL() << "expected InfeasibleError";
  } catch (const smpc::InfeasibleError& e) {
    EXPECT_GT(e.g_min(), 1.0);
    EXPECT_DOUBLE_EQ(e.mu(), 1.0);
    EXPECT_NE(std::string(e.what()).find("gap"), std::string::npos);
  }
}

TEST(Mpc, PendulumInitialBudgetIsEpsilon) {
  const auto pre = smpc::build_precompute(smpc::load_scenario(fixtures::scenario_path("simA.json")));
  const auto st = smpc::init_controller(pre);
  EXPECT_DOUBLE_EQ(st.mu, 2.0);
  EXPECT_NE(smpc::plan(st, pre).status, smpc::SolveStatus::Infeasible);
}

TEST(Mpc, ControlInputBranches) {
  const auto pre = smpc::build_precompute(fixtures::two_state_scenario(3));
  const auto st = smpc::init_controller(pre);
  std::mt19937_64 gen(9);
  auto theta = random_theta(pre.layout(), gen);
  const Vector z = Vector::Constant(1, 0.8);
  const Vector u0 = smpc::control_input(theta, st.filter, 0, z, pre);
  EXPECT_LE((u0 - (pre.gains.K * st.filter.xhat + theta.c.head(1))).norm(), 1e-15);

  // L_00 = K M reproduces u = K (xhat + gamma M innovation) + c
  theta.L(0, 0) = (pre.gains.K * pre.gains.M)(0, 0);
  const Vector innov = z - pre.scenario.model.C * st.filter.xhat;
  const Vector basic =
      pre.gains.K * (st.filter.xhat + pre.gains.M * innov) + theta.c.head(1);
  EXPECT_LE((smpc::control_input(theta, st.filter, 1, z, pre) - basic).norm(), 1e-14);
}

TEST(Mpc, StepThresholdIsConstraintAtTail) {
  const auto pre = smpc::build_precompute(fixtures::two_state_scenario(3));
  const auto st = smpc::init_controller(pre);
  const Vector z = Vector::Constant(1, 1.3);
  const auto step = smpc::controller_step(st, 1, z, pre);
  EXPECT_EQ(step.next.mu, smpc::update_threshold(step.next.last_theta, step.next.filter, pre));
  EXPECT_EQ(step.next.k, 1);
  // the tail is feasible for the next problem by construction
  const auto next_solve = smpc::plan(step.next, pre);
  EXPECT_NE(next_solve.status, smpc::SolveStatus::Infeasible);
  EXPECT_LE(next_solve.J, step.next.forms.cost(pre.layout().pack(step.next.last_theta)) + 1e-9);
}

TEST(Mpc, StepIsDeterministic) {
  const auto pre = smpc::build_precompute(fixtures::two_state_scenario(3));
  const auto st = smpc::init_controller(pre);
  const Vector z = Vector::Constant(1, -0.4);
  const auto a = smpc::controller_step(st, 1, z, pre);
  const auto b = smpc::controller_step(st, 1, z, pre);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.next.mu, b.next.mu);
  EXPECT_TRUE(a.next.last_theta == b.next.last_theta);
  EXPECT_EQ(a.next.filter.sigma, b.next.filter.sigma);
}

TEST(Mpc, InfeasibleStepThrows) {
  const auto pre = smpc::build_precompute(fixtures::two_state_scenario(3));
  auto st = smpc::init_controller(pre);
  st.mu = 0.5;
  EXPECT_THROW(smpc::controller_step(st, 1, Vector::Zero(1), pre), smpc::InfeasibleError);
}

struct OneStep {
  fixtures::Moments budget, cost;
  double mu = 0.0, J = 0.0;
};

// One-step Monte Carlo over (x_k - xhat_k, w, v, gamma) at a fixed controller
// state. The re-solved problem at k+1 treats x - xhat as independent of the
// innovation just received, which is exact only when M is the Kalman gain of
// sigma_k, so callers pick sigma_k accordingly.
OneStep one_step(smpc::PolicyKind policy, bool stationary_sigma) {
  const auto pre = smpc::build_precompute(fixtures::two_state_scenario(3), policy);
  const auto& s = pre.scenario;
  auto st = smpc::init_controller(pre);
  if (stationary_sigma) {
    st.filter.sigma = smpc::intermittent_riccati_solution(s.model);
    st.forms = smpc::forms_at(pre, st.filter);
  }
  const auto sol = smpc::plan(st, pre);
  EXPECT_EQ(sol.status, smpc::SolveStatus::Active);
  OneStep out;
  out.mu = st.mu;
  out.J = sol.J;
  const double b1 = s.spec.beta1, b2 = s.spec.beta2;

  const Matrix sq0 = smpc::linalg::psd_sqrt(st.filter.sigma);
  const Matrix sqw = smpc::linalg::psd_sqrt(s.model.sigma_w);
  const Matrix sqv = smpc::linalg::psd_sqrt(s.model.sigma_v);
  std::mt19937_64 gen(77);
  std::bernoulli_distribution arrival(s.model.lambda);
  for (int t = 0; t < 100000; ++t) {
    const Vector x = st.filter.xhat + fixtures::gaussian(gen, sq0);
    const Vector v = fixtures::gaussian(gen, sqv);
    const int gamma = arrival(gen) ? 1 : 0;
    const Vector z = static_cast<double>(gamma) * (s.model.C * x + v);
    const Vector u = smpc::control_input(sol.theta_star, st.filter, gamma, z, pre);
    const auto filt = smpc::filter_step(st.filter, u, gamma, z, s.model, pre.gains.M);
    const auto tail = smpc::tail_policy(sol.theta_star, gamma,
                                        z - s.model.C * st.filter.xhat, pre.layout());
    const auto forms = smpc::forms_at(pre, filt);
    const Vector tau = pre.layout().pack(tail);
    const Vector hx = s.spec.H * x;
    out.budget.add(b2 * forms.constraint(tau) + hx.squaredNorm());
    out.cost.add(b1 * forms.cost(tau) + x.dot(s.spec.Q * x) + u.dot(s.spec.R * u));
  }
  return out;
}

TEST(Mpc, SupermartingaleStepFullPolicy) {
  const auto r = one_step(smpc::PolicyKind::Full, true);
  EXPECT_LE(r.budget.mean(), r.mu + 5.0 * r.budget.stderr_());
  EXPECT_LE(std::abs(r.cost.mean() - r.J), 5.0 * r.cost.stderr_());
}

TEST(Mpc, SupermartingaleStepRestrictedPolicy) {
  const auto r = one_step(smpc::PolicyKind::Restricted, true);
  EXPECT_LE(r.budget.mean(), r.mu + 5.0 * r.budget.stderr_());
  EXPECT_LE(std::abs(r.cost.mean() - r.J), 5.0 * r.cost.stderr_());
}

TEST(Mpc, OneStepBudgetDriftsWhenGainIsMismatched) {
  // sigma_0 is far from the fixed point, so the step leaves e_{k+1} correlated
  // with the innovation and the re-conditioned budget overshoots mu
  const auto r = one_step(smpc::PolicyKind::Restricted, false);
  EXPECT_GT(r.budget.mean(), r.mu + 5.0 * r.budget.stderr_());
}

TEST(Mpc, ValidationFailureSurfaces) {
  auto s = fixtures::two_state_scenario(3);
  s.spec.beta2 = 1.2;
  EXPECT_THROW(smpc::build_precompute(s), smpc::ValidationError);
}

}  // namespace
