#include "smpc/mpc.hpp"

#include <sstream>

#include "smpc/errors.hpp"

namespace smpc {

Precompute build_precompute(const Scenario& scenario, PolicyKind policy, Execution exec) {
  const auto report = validate(scenario);
  if (!report.ok()) throw ValidationError("scenario failed validation:\n" + report.failures());

  Precompute pre;
  pre.scenario = scenario;
  pre.policy = policy;
  pre.gains = design_gains(scenario);
  const int N = scenario.spec.N;
  pre.ops = build_operators(scenario.model, pre.gains, N);
  pre.patterns = enumerate_gamma_patterns(N, scenario.model.lambda);
  pre.omega_op = build_omega_operator(scenario.model, pre.gains, pre.patterns, exec);
  pre.closed_loop = build_closed_loop(scenario.model, pre.gains);
  pre.maps = build_terminal_maps(pre.closed_loop, scenario.spec, pre.gains);
  pre.forms = build_form_builder(pre.ops, pre.maps, scenario.spec, policy);
  pre.c_block = simultaneous_diagonalization(pre.forms.cost.Hc, pre.forms.constraint.Hc);
  return pre;
}

FormPair forms_at(const Precompute& pre, const FilterState& filter) {
  return assemble_forms(pre.forms, assemble_omega(pre.omega_op, filter.sigma), filter.xhat);
}

ControllerState init_controller(const Precompute& pre) {
  return init_controller(pre, pre.scenario.mu0_policy);
}

ControllerState init_controller(const Precompute& pre, Mu0Policy policy) {
  ControllerState s;
  s.filter = {pre.scenario.init.xhat0, pre.scenario.init.sigma0};
  s.k = 0;
  s.forms = forms_at(pre, s.filter);
  const ConstraintMinimum cm = minimize_constraint(s.forms.constraint, pre.layout());
  const double eps = pre.scenario.spec.epsilon;
  if (policy == Mu0Policy::Epsilon) {
    if (eps < cm.g_min) {
      std::ostringstream os;
      os << "initial problem infeasible: epsilon " << eps << " below constraint floor "
         << cm.g_min << " (gap " << cm.g_min - eps << ")";
      throw InfeasibleError(os.str(), cm.g_min, eps);
    }
    s.mu = eps;
  } else {
    s.mu = cm.g_min + 1e-9 * std::max(1.0, cm.g_min);
  }
  s.last_theta = cm.theta_f;
  return s;
}

SolveResult plan(const ControllerState& state, const Precompute& pre) {
  SolveOptions opt;
  opt.block_split = pre.layout().n_c();
  opt.leading_block = &pre.c_block;
  return solve(state.forms.cost, state.forms.constraint, state.mu, pre.layout(), opt);
}

DecisionVars tail_policy(const DecisionVars& theta_star, int gamma, const Vector& innovation,
                         const DecisionLayout& layout) {
  const int N = layout.N, nu = layout.nu, ny = layout.ny;
  DecisionVars out = DecisionVars::zero(N, nu, ny);
  if (N > 1) {
    out.c.head((N - 1) * nu) = theta_star.c.tail((N - 1) * nu);
    if (gamma != 0) {
      out.c.head((N - 1) * nu) +=
          theta_star.L.block(nu, 0, (N - 1) * nu, ny) * innovation;
    }
    out.L.topLeftCorner((N - 1) * nu, (N - 1) * ny) =
        theta_star.L.bottomRightCorner((N - 1) * nu, (N - 1) * ny);
  }
  return out;
}

double update_threshold(const DecisionVars& theta_tail, const FilterState& new_filter,
                        const Precompute& pre) {
  const FormPair f = forms_at(pre, new_filter);
  return f.constraint(pre.layout().pack(theta_tail));
}

Vector control_input(const DecisionVars& theta_star, const FilterState& filter, int gamma,
                     const Vector& z, const Precompute& pre) {
  const int nu = pre.ops.nu, ny = pre.ops.ny;
  Vector u = pre.gains.K * filter.xhat + theta_star.c.head(nu);
  if (gamma != 0) {
    u += theta_star.L.topLeftCorner(nu, ny) * (z - pre.scenario.model.C * filter.xhat);
  }
  return u;
}

StepResult controller_step(const ControllerState& state, int gamma, const Vector& z,
                           const Precompute& pre) {
  StepResult out;
  out.solve = plan(state, pre);
  if (out.solve.status == SolveStatus::Infeasible) {
    std::ostringstream os;
    os << "MPC problem infeasible at k=" << state.k << ": floor " << out.solve.g_min
       << " above budget " << state.mu;
    throw InfeasibleError(os.str(), out.solve.g_min, state.mu);
  }
  const DecisionVars& theta = out.solve.theta_star;
  out.u = control_input(theta, state.filter, gamma, z, pre);

  const Vector innovation = z - pre.scenario.model.C * state.filter.xhat;
  ControllerState& next = out.next;
  next.filter = filter_step(state.filter, out.u, gamma, z, pre.scenario.model, pre.gains.M);
  next.last_theta = tail_policy(theta, gamma, innovation, pre.layout());
  next.forms = forms_at(pre, next.filter);
  next.mu = next.forms.constraint(pre.layout().pack(next.last_theta));
  next.k = state.k + 1;
  return out;
}

}  // namespace smpc
