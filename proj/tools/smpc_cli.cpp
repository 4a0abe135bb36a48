#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smpc/analysis.hpp"
#include "smpc/errors.hpp"
#include "smpc/report.hpp"
#include "smpc/simulation.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitUsage = 64;

struct Options {
  std::string scenario;
  std::string controller = "mpc";
  int trials = 1000;
  int steps = 150;
  std::uint64_t seed = 1;
  std::string out;
  std::string summary;
  std::optional<double> beta1;
  std::optional<std::string> mu0;
  std::vector<double> delta_lambda;
};

smpc::Scenario load(const Options& o) {
  smpc::Scenario s = smpc::load_scenario(o.scenario);
  if (o.beta1) {
    s.spec.beta1 = *o.beta1;
    const auto report = smpc::validate(s);
    if (!report.ok()) throw smpc::ValidationError(report.failures());
  }
  if (o.mu0) {
    s.mu0_policy = *o.mu0 == "minfeasible" ? smpc::Mu0Policy::MinimalFeasible
                                           : smpc::Mu0Policy::Epsilon;
  }
  return s;
}

void print_matrix(const char* name, const smpc::Matrix& m) {
  const Eigen::IOFormat fmt(8, 0, ", ", "\n", "  [", "]");
  std::cout << name << " =\n" << m.format(fmt) << "\n";
}

int cmd_validate(const Options& o) {
  // load_scenario throws ValidationError listing the failures, so only passing reports print here
  const smpc::Scenario s = smpc::load_scenario(o.scenario);
  const auto report = smpc::validate(s);
  for (const auto& c : report.checks) {
    std::cout << std::left << std::setw(14) << c.name << (c.passed ? " ok   " : " FAIL ")
              << "measured=" << c.measured << (c.message.empty() ? "" : "  " + c.message)
              << "\n";
  }
  return report.ok() ? 0 : kExitValidation;
}

int cmd_design(const Options& o) {
  const smpc::Scenario s = load(o);
  const smpc::GainPair g = smpc::design_gains(s);
  print_matrix("K", g.K);
  print_matrix("M", g.M);
  std::cout << std::setprecision(10);
  std::cout << "rho(A+BK) = " << smpc::linalg::spectral_radius(s.model.A + s.model.B * g.K) << "\n";
  std::cout << "estimator MSS margin = " << smpc::mss_margin(s.model, g.M) << "\n";
  const auto op = smpc::build_closed_loop(s.model, g);
  std::cout << "closed-loop MSS radius (beta1) = " << smpc::mss_check(op, s.spec.beta1).rho << "\n";
  std::cout << "closed-loop MSS radius (undiscounted) = " << smpc::mss_check(op, 1.0).rho << "\n";
  std::cout << "terminal weight full column rank = "
            << (smpc::terminal_weight_full_rank(s.spec, g) ? "true" : "false") << "\n";
  return 0;
}

int cmd_solve(const Options& o) {
  const smpc::Scenario s = load(o);
  const smpc::Precompute pre = smpc::build_precompute(s);
  const smpc::ControllerState st = smpc::init_controller(pre);
  const smpc::SolveResult r = smpc::plan(st, pre);
  std::cout << std::setprecision(10);
  std::cout << "J0 = " << r.J << "\n";
  std::cout << "g_min = " << r.g_min << "\n";
  std::cout << "mu0 = " << st.mu << "\n";
  std::cout << "g(theta*) = " << r.g_value << "\n";
  std::cout << "nu = " << r.nu << "\n";
  std::cout << "status = " << smpc::to_string(r.status) << "\n";
  std::cout << "kkt stationarity = " << r.kkt.stationarity << ", primal = " << r.kkt.primal
            << ", complementarity = " << r.kkt.complementarity << "\n";
  return r.status == smpc::SolveStatus::Infeasible ? kExitInfeasible : 0;
}

int cmd_simulate(const Options& o) {
  const smpc::Scenario s = load(o);
  const smpc::Precompute pre = smpc::build_precompute(s);
  smpc::TrialOptions topt;
  topt.controller = o.controller == "lqg" ? smpc::ControllerKind::LQG : smpc::ControllerKind::MPC;
  topt.T = o.steps;
  if (!o.delta_lambda.empty()) topt.lambda_actual = s.model.lambda + o.delta_lambda.front();
  const smpc::AggregateReport rep = smpc::run_monte_carlo(pre, topt, o.trials, o.seed);

  smpc::BoundBlock bounds;
  bounds.epsilon = s.spec.epsilon;
  std::map<std::string, bool> verdicts;
  if (topt.controller == smpc::ControllerKind::MPC) {
    const smpc::ControllerState st = smpc::init_controller(pre);
    bounds.J0 = smpc::plan(st, pre).J;
    verdicts["discounted_constraint_below_epsilon"] =
        rep.discounted_constraint.mean <= s.spec.epsilon + 3.0 * rep.discounted_constraint.stderr_;
    verdicts["discounted_cost_below_J0"] = rep.discounted_cost.mean <= *bounds.J0;
    verdicts["zero_infeasible"] = rep.total_infeasible == 0;
  }
  if (pre.maps.Xbar) {
    bounds.trZ1Xbar = smpc::asymptotic_bound(pre);
    verdicts["avg_cost_below_trZ1Xbar"] = rep.avg_undiscounted_cost.mean <= *bounds.trZ1Xbar;
  }

  std::cout << std::setprecision(8);
  std::cout << "controller = " << smpc::to_string(rep.controller) << ", trials = " << rep.n
            << ", T = " << rep.T << "\n";
  std::cout << "discounted cost       = " << rep.discounted_cost.mean << " +- "
            << rep.discounted_cost.stderr_ << "\n";
  std::cout << "discounted constraint = " << rep.discounted_constraint.mean << " +- "
            << rep.discounted_constraint.stderr_ << "\n";
  std::cout << "avg undiscounted cost = " << rep.avg_undiscounted_cost.mean << " +- "
            << rep.avg_undiscounted_cost.stderr_ << "\n";
  std::cout << "infeasible solves     = " << rep.total_infeasible << "\n";
  if (bounds.J0) std::cout << "J0 = " << *bounds.J0 << "\n";
  if (bounds.trZ1Xbar) std::cout << "tr(Z1 Xbar) = " << *bounds.trZ1Xbar << "\n";

  if (!o.out.empty()) {
    std::ofstream f(o.out);
    smpc::write_csv(f, rep.trials);
  }
  if (!o.summary.empty()) {
    std::ofstream f(o.summary);
    f << smpc::summary_json(rep, bounds, verdicts) << "\n";
  }
  return 0;
}

int cmd_certify(const Options& o) {
  const smpc::Scenario s = load(o);
  const smpc::Precompute pre = smpc::build_precompute(s);
  std::cout << std::setprecision(10);
  try {
    const smpc::StabilityCertificate c = smpc::compute_sigma(pre);
    std::cout << "sigma = " << c.sigma_cert << "\n";
    std::cout << "1/(1-beta) = " << 1.0 / (1.0 - c.beta) << "\n";
    std::cout << "holds = " << (c.holds ? "true" : "false") << "\n";
  } catch (const smpc::ValidationError& e) {
    std::cout << "sigma unavailable: " << e.what() << "\n";
  }
  const auto P = smpc::common_lyapunov_check(s.model, pre.gains.M);
  std::cout << "common Lyapunov check = " << (P ? "passed" : "not certified") << "\n";
  if (pre.maps.Xbar) {
    std::cout << "tr(Z1 Xbar) = " << smpc::asymptotic_bound(pre) << "\n";
  } else {
    std::cout << "tr(Z1 Xbar) unavailable: undiscounted recursion not MSS\n";
  }
  return 0;
}

int cmd_robustness(const Options& o) {
  smpc::Scenario s = load(o);
  const smpc::Precompute pre = smpc::build_precompute(s, smpc::PolicyKind::Restricted);
  const smpc::ControllerState st = smpc::init_controller(pre, smpc::Mu0Policy::MinimalFeasible);
  std::vector<double> deltas = o.delta_lambda;
  if (deltas.empty()) deltas = {-0.05, -0.02, 0.0, 0.02, 0.05};
  std::cout << std::setprecision(8);
  std::cout << "mu0 (minimal feasible) = " << st.mu << ", epsilon = " << s.spec.epsilon
            << ", margin = " << s.spec.epsilon - st.mu << "\n";
  std::cout << "delta_lambda,discounted_sensitivity,perturbation,margin_ok\n";
  for (double dl : deltas) {
    const double la = s.model.lambda + dl;
    if (la < 0.0 || la > 1.0) {
      std::cerr << "delta-lambda " << dl << " moves lambda outside [0, 1]\n";
      return kExitValidation;
    }
    const auto sig = smpc::expected_covariance_trajectory(s.model, pre.gains.M, la,
                                                          s.init.sigma0, o.steps);
    const smpc::RobustnessReport r = smpc::robustness_sensitivity(pre, la, sig, {}, st.mu);
    std::cout << dl << "," << r.discounted_sensitivity << ","
              << r.delta_lambda * r.discounted_sensitivity << ","
              << (r.margin_ok ? "true" : "false") << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic output-feedback MPC with intermittent observations"};
  app.require_subcommand(1);
  Options o;

  auto add_scenario = [&o](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
  };
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--beta1", o.beta1, "override the cost discount factor")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--mu0", o.mu0, "initial threshold policy")
        ->check(CLI::IsMember({"epsilon", "minfeasible"}));
  };

  auto* validate = app.add_subcommand("validate", "check scenario invariants");
  add_scenario(validate);
  auto* design = app.add_subcommand("design", "print gains and MSS margins");
  add_scenario(design);
  add_common(design);
  auto* solve = app.add_subcommand("solve", "solve the k = 0 problem");
  add_scenario(solve);
  add_common(solve);
  auto* simulate = app.add_subcommand("simulate", "closed-loop Monte Carlo");
  add_scenario(simulate);
  add_common(simulate);
  simulate->add_option("--controller", o.controller)->check(CLI::IsMember({"mpc", "lqg"}));
  simulate->add_option("--trials", o.trials)->check(CLI::PositiveNumber);
  simulate->add_option("--steps", o.steps)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", o.seed);
  simulate->add_option("--out", o.out, "per-trial CSV");
  simulate->add_option("--summary", o.summary, "summary JSON");
  simulate->add_option("--delta-lambda", o.delta_lambda, "actual minus nominal arrival probability")
      ->expected(1);
  auto* certify = app.add_subcommand("certify", "sigma certificate, common Lyapunov, tr(Z1 Xbar)");
  add_scenario(certify);
  add_common(certify);
  auto* robust = app.add_subcommand("robustness", "sensitivity to the arrival probability");
  add_scenario(robust);
  add_common(robust);
  robust->add_option("--delta-lambda", o.delta_lambda, "values to sweep");
  robust->add_option("--steps", o.steps, "horizon of the discounted sum")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*design) return cmd_design(o);
    if (*solve) return cmd_solve(o);
    if (*simulate) return cmd_simulate(o);
    if (*certify) return cmd_certify(o);
    if (*robust) return cmd_robustness(o);
  } catch (const smpc::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const smpc::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const smpc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const smpc::DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const smpc::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
