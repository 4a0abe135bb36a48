#pragma once

#include "smpc/estimator.hpp"
#include "smpc/lyapunov.hpp"
#include "smpc/prediction.hpp"
#include "smpc/qcqp.hpp"

namespace smpc {

/// Everything that depends only on the scenario, shared read-only by all
/// trajectories.
struct Precompute {
  Scenario scenario;
  GainPair gains;
  PolicyKind policy = PolicyKind::Full;
  StackedOperators ops;
  std::vector<GammaPattern> patterns;
  OmegaOperator omega_op;
  ClosedLoopOperator closed_loop;
  TerminalMaps maps;
  FormBuilder forms;
  Diagonalization c_block;  ///< the c-block Hessians do not depend on the state

  const DecisionLayout& layout() const { return forms.layout; }
};

Precompute build_precompute(const Scenario& scenario, PolicyKind policy = PolicyKind::Full,
                            Execution exec = Execution::Parallel);

/// Forms for the problem posed at (xhat, Sigma).
FormPair forms_at(const Precompute& pre, const FilterState& filter);

struct ControllerState {
  FilterState filter;
  double mu = 0.0;
  DecisionVars last_theta;  ///< tail of the previous optimum, feasible now
  int k = 0;
  FormPair forms;           ///< forms at the current filter state
};

/// Filter at (xhat0, Sigma0); mu_0 per the scenario's policy. Throws
/// InfeasibleError if epsilon lies below the constraint floor.
ControllerState init_controller(const Precompute& pre);
ControllerState init_controller(const Precompute& pre, Mu0Policy policy);

/// Solve at the current state (uses no information from step k).
SolveResult plan(const ControllerState& state, const Precompute& pre);

/// Shifted policy: c_i = c*_{i+1} + L*_{i+1,0} gamma innovation, L_{i,j} = L*_{i+1,j+1}.
DecisionVars tail_policy(const DecisionVars& theta_star, int gamma, const Vector& innovation,
                         const DecisionLayout& layout);

/// Constraint value of the tail policy at the next filter state.
double update_threshold(const DecisionVars& theta_tail, const FilterState& new_filter,
                        const Precompute& pre);

/// u = K xhat + c*_0 + gamma L*_00 (z - C xhat)
Vector control_input(const DecisionVars& theta_star, const FilterState& filter, int gamma,
                     const Vector& z, const Precompute& pre);

struct StepResult {
  Vector u;
  SolveResult solve;
  ControllerState next;
};

/// One closed-loop step: solve, apply, update estimate, tail, threshold.
/// Throws InfeasibleError if the solve fails.
StepResult controller_step(const ControllerState& state, int gamma, const Vector& z,
                           const Precompute& pre);

}  // namespace smpc
