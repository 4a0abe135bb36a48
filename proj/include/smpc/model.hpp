#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smpc/linalg.hpp"

namespace smpc {

/// Plant x+ = A x + B u + D w, y = C x + v, z = gamma * y with
/// gamma ~ Bernoulli(lambda) i.i.d.
struct SystemModel {
  Matrix A, B, C, D;
  Matrix sigma_w;  ///< disturbance covariance, PSD
  Matrix sigma_v;  ///< measurement noise covariance, PD
  double lambda = 1.0;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  int ny() const { return static_cast<int>(C.rows()); }
  int nw() const { return static_cast<int>(D.cols()); }
};

/// Discounted cost and discounted second-moment constraint.
struct ProblemSpec {
  Matrix Q, R, H;
  double epsilon = 0.0;
  double beta1 = 0.5;  ///< cost discount
  double beta2 = 0.5;  ///< constraint discount
  int N = 1;           ///< prediction horizon

  int nh() const { return static_cast<int>(H.rows()); }
};

struct InitialCondition {
  Vector x0;      ///< true initial state, only used by the simulator
  Vector xhat0;   ///< prior mean of x0
  Matrix sigma0;  ///< covariance of x0 - xhat0
};

/// Fixed feedback gain K (u = K x) and observer gain M.
struct GainPair {
  Matrix K;
  Matrix M;
};

enum class Mu0Policy { Epsilon, MinimalFeasible };

struct Scenario {
  SystemModel model;
  ProblemSpec spec;
  InitialCondition init;
  std::optional<GainPair> gains;  ///< designed from the model when absent
  Mu0Policy mu0_policy = Mu0Policy::Epsilon;
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  std::string message;

  bool operator==(const ValidationCheck&) const = default;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const;
  /// Human-readable list of failed checks, empty when ok().
  std::string failures() const;

  bool operator==(const ValidationReport&) const = default;
};

/// Field-wise equality; numeric entries compare bitwise and shapes must match.
bool operator==(const SystemModel& a, const SystemModel& b);
bool operator==(const ProblemSpec& a, const ProblemSpec& b);
bool operator==(const InitialCondition& a, const InitialCondition& b);
bool operator==(const GainPair& a, const GainPair& b);
bool operator==(const Scenario& a, const Scenario& b);

/// Checks every scenario invariant. Throws DimensionError naming the first
/// pair of fields whose sizes disagree; all other problems are reported as
/// failed checks.
ValidationReport validate(const Scenario& scenario);

/// Parses a scenario from JSON text. Throws ParseError on malformed input and
/// ValidationError if the parsed scenario fails validate().
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);

/// JSON text that parse_scenario() reads back into an equal Scenario.
std::string serialize_scenario(const Scenario& scenario);

std::string_view to_string(Mu0Policy policy);

}  // namespace smpc
