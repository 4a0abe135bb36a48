#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "smpc/errors.hpp"

namespace {

using fixtures::scalar;
using smpc::Matrix;
using smpc::Vector;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const smpc::ValidationCheck* find_check(const smpc::ValidationReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

TEST(Model, SimulationAFilePassesEveryCheck) {
  const smpc::Scenario s = smpc::load_scenario(fixtures::scenario_path("simA.json"));
  const auto report = smpc::validate(s);
  EXPECT_TRUE(report.ok()) << report.failures();
  EXPECT_EQ(s.model.nx(), 4);
  EXPECT_EQ(s.model.nu(), 2);
  EXPECT_EQ(s.model.ny(), 2);
  EXPECT_DOUBLE_EQ(s.model.lambda, 0.6);
  EXPECT_DOUBLE_EQ(s.model.A(1, 0), 0.098);
  EXPECT_DOUBLE_EQ(s.model.A(3, 2), 0.2942);
  EXPECT_DOUBLE_EQ(s.model.B(3, 1), 0.05);
  EXPECT_DOUBLE_EQ(s.model.sigma_w(2, 2), 0.9);
  EXPECT_DOUBLE_EQ(s.model.sigma_v(1, 1), 1.1);
  EXPECT_DOUBLE_EQ(s.spec.Q(0, 0), 10.0);
  EXPECT_DOUBLE_EQ(s.spec.R(1, 1), 0.01);
  EXPECT_DOUBLE_EQ(s.spec.epsilon, 2.0);
  EXPECT_DOUBLE_EQ(s.spec.beta1, 0.8);
  EXPECT_EQ(s.spec.N, 5);
  EXPECT_DOUBLE_EQ(s.init.x0(0), -0.8);
  EXPECT_DOUBLE_EQ(s.init.sigma0(0, 1), -0.5);
}

TEST(Model, StableScalarPasses) {
  const auto s = fixtures::scalar_scenario(0.0, 1.0, 1.0);
  EXPECT_TRUE(smpc::validate(s).ok());
}

TEST(Model, ZeroMeasurementNoiseFails) {
  auto s = fixtures::scalar_scenario(0.5, 1.0, 1.0);
  s.model.sigma_v = scalar(0.0);
  const auto report = smpc::validate(s);
  EXPECT_FALSE(report.ok());
  const auto* c = find_check(report, "sigma_v");
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->passed);
  EXPECT_NE(c->message.find("Σ_v not positive definite"), std::string::npos);
  EXPECT_NE(report.failures().find("Σ_v not positive definite"), std::string::npos);
}

TEST(Model, MissingBeta2DefaultsToBeta1) {
  auto text = read_file(fixtures::scenario_path("simC.json"));
  const auto s_full = smpc::parse_scenario(text);
  ASSERT_NE(s_full.spec.beta1, s_full.spec.beta2);
  const auto pos = text.find("\"beta2\"");
  ASSERT_NE(pos, std::string::npos);
  const auto end = text.find('\n', pos);
  text.erase(pos, end - pos + 1);
  const auto s = smpc::parse_scenario(text);
  EXPECT_DOUBLE_EQ(s.spec.beta2, s.spec.beta1);
  EXPECT_DOUBLE_EQ(s.spec.beta1, 0.98);
}

TEST(Model, ZeroHorizonRejected) {
  auto s = fixtures::scalar_scenario(0.5, 1.0, 1.0);
  s.spec.N = 0;
  const std::string text = smpc::serialize_scenario(s);
  try {
    smpc::parse_scenario(text);
    FAIL() << "expected ValidationError";
  } catch (const smpc::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("N ≥ 1 required"), std::string::npos);
  }
}

TEST(Model, RoundTripPreservesEveryField) {
  auto s = smpc::load_scenario(fixtures::scenario_path("simA.json"));
  s.spec.beta2 = 0.75;
  s.mu0_policy = smpc::Mu0Policy::MinimalFeasible;
  s.gains = smpc::GainPair{Matrix::Constant(2, 4, 0.1), Matrix::Constant(4, 2, 0.2)};
  const auto back = smpc::parse_scenario(smpc::serialize_scenario(s));
  EXPECT_TRUE(back == s);
}

TEST(Model, MalformedJsonIsParseError) {
  EXPECT_THROW(smpc::parse_scenario("{\"A\": [[1, 2]"), smpc::ParseError);
  EXPECT_THROW(smpc::parse_scenario("[1, 2, 3]"), smpc::ParseError);
  EXPECT_THROW(smpc::load_scenario("/nonexistent/scenario.json"), smpc::ParseError);
}

TEST(Model, RaggedMatrixIsParseError) {
  auto text = smpc::serialize_scenario(fixtures::two_state_scenario());
  auto j = text.find("\"A\"");
  ASSERT_NE(j, std::string::npos);
  std::string bad = text;
  bad.replace(bad.find("0.95", j), 4, "0.95, 7");
  EXPECT_THROW(smpc::parse_scenario(bad), smpc::ParseError);
}

TEST(Model, DimensionMismatchNamesFields) {
  auto s = fixtures::two_state_scenario();
  s.model.B = Matrix::Zero(3, 1);
  try {
    smpc::validate(s);
    FAIL() << "expected DimensionError";
  } catch (const smpc::DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("B"), std::string::npos);
    EXPECT_NE(msg.find("dimension mismatch"), std::string::npos);
  }
}

TEST(Model, RangeChecks) {
  auto s = fixtures::two_state_scenario();
  s.model.lambda = 1.5;
  EXPECT_FALSE(find_check(smpc::validate(s), "lambda")->passed);
  s = fixtures::two_state_scenario();
  s.spec.beta1 = 1.0;
  EXPECT_FALSE(find_check(smpc::validate(s), "beta1")->passed);
  s = fixtures::two_state_scenario();
  s.spec.epsilon = -1.0;
  EXPECT_FALSE(find_check(smpc::validate(s), "epsilon")->passed);
  s = fixtures::two_state_scenario();
  s.model.sigma_w(0, 0) = -0.1;
  EXPECT_FALSE(find_check(smpc::validate(s), "sigma_w")->passed);
  s = fixtures::two_state_scenario();
  s.spec.N = 21;
  EXPECT_FALSE(find_check(smpc::validate(s), "N_capacity")->passed);
}

TEST(Model, UnstabilizableAndUndetectableModesFail) {
  auto s = fixtures::two_state_scenario();
  s.model.A << 1.2, 0.0, 0.0, 0.5;
  s.model.B << 0.0, 1.0;  // unstable mode 1 is not actuated
  EXPECT_FALSE(find_check(smpc::validate(s), "stabilizable")->passed);
  s = fixtures::two_state_scenario();
  s.model.A << 0.5, 0.0, 0.0, 1.2;
  s.model.C << 1.0, 0.0;  // unstable mode 2 is not seen
  EXPECT_FALSE(find_check(smpc::validate(s), "detectable")->passed);
}

}  // namespace
