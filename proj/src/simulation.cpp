#include "smpc/simulation.hpp"

#include <cmath>

#include "smpc/errors.hpp"
#include "smpc/random.hpp"

namespace smpc {

std::string_view to_string(ControllerKind kind) {
  return kind == ControllerKind::MPC ? "mpc" : "lqg";
}

NoiseGenerator::NoiseGenerator(const SystemModel& model, std::uint64_t seed, double lambda)
    : sqrt_w_(linalg::psd_sqrt(model.sigma_w)),
      sqrt_v_(linalg::psd_sqrt(model.sigma_v)),
      seed_(seed),
      lambda_(lambda) {}

NoiseDraw NoiseGenerator::draw(std::uint64_t k) const {
  const rng::CounterStream ws(seed_, rng::Stream::Disturbance);
  const rng::CounterStream vs(seed_, rng::Stream::Measurement);
  const rng::CounterStream gs(seed_, rng::Stream::Arrival);
  const auto nw = static_cast<std::uint64_t>(sqrt_w_.rows());
  const auto ny = static_cast<std::uint64_t>(sqrt_v_.rows());
  Vector xi(nw), eta(ny);
  for (std::uint64_t i = 0; i < nw; ++i) xi(i) = ws.normal(k * nw + i);
  for (std::uint64_t i = 0; i < ny; ++i) eta(i) = vs.normal(k * ny + i);
  NoiseDraw d;
  d.w = sqrt_w_ * xi;
  d.v = sqrt_v_ * eta;
  d.gamma = gs.uniform(k) < lambda_ ? 1 : 0;
  return d;
}

namespace {

struct Accumulator {
  const ProblemSpec& spec;
  TrialResult& r;
  double w1 = 1.0, w2 = 1.0, total = 0.0;

  void add(const Vector& x, const Vector& u, StepRecord* rec) {
    const double stage = x.dot(spec.Q * x) + u.dot(spec.R * u);
    const double con = (spec.H * x).squaredNorm();
    r.discounted_cost += w1 * stage;
    r.discounted_constraint += w2 * con;
    total += stage;
    w1 *= spec.beta1;
    w2 *= spec.beta2;
    if (rec) {
      rec->stage_cost = stage;
      rec->stage_constraint = con;
    }
  }
};

void run_mpc(const Precompute& pre, const TrialOptions& opt, const NoiseGenerator& noise,
             TrialResult& r, Accumulator& acc) {
  const SystemModel& m = pre.scenario.model;
  ControllerState state = opt.mu0_policy ? init_controller(pre, *opt.mu0_policy)
                                         : init_controller(pre);
  r.mu0 = state.mu;
  Vector x = pre.scenario.init.x0;
  for (int k = 0; k < opt.T; ++k) {
    const NoiseDraw d = noise.draw(static_cast<std::uint64_t>(k));
    const Vector z = d.gamma ? Vector(m.C * x + d.v) : Vector::Zero(m.ny());
    StepResult step;
    try {
      step = controller_step(state, d.gamma, z, pre);
    } catch (const InfeasibleError&) {
      r.infeasible_count += 1;
      return;
    }
    if (k == 0) r.J0 = step.solve.J;
    StepRecord rec;
    StepRecord* recp = opt.trace ? &rec : nullptr;
    acc.add(x, step.u, recp);
    if (recp) {
      rec.x = x;
      rec.xhat = state.filter.xhat;
      rec.u = step.u;
      rec.gamma = d.gamma;
      rec.mu = state.mu;
      rec.J = step.solve.J;
      rec.status = step.solve.status;
      opt.trace->push_back(rec);
    }
    x = m.A * x + m.B * step.u + m.D * d.w;
    state = std::move(step.next);
  }
}

void run_lqg(const Precompute& pre, const TrialOptions& opt, const NoiseGenerator& noise,
             Accumulator& acc) {
  const SystemModel& m = pre.scenario.model;
  const Matrix& K = pre.gains.K;
  const Matrix DSwD = m.D * m.sigma_w * m.D.transpose();
  Vector x = pre.scenario.init.x0;
  Vector xhat = pre.scenario.init.xhat0;
  Matrix sigma = pre.scenario.init.sigma0;
  for (int k = 0; k < opt.T; ++k) {
    const NoiseDraw d = noise.draw(static_cast<std::uint64_t>(k));
    const Vector u = K * xhat;
    StepRecord rec;
    StepRecord* recp = opt.trace ? &rec : nullptr;
    acc.add(x, u, recp);
    if (recp) {
      rec.x = x;
      rec.xhat = xhat;
      rec.u = u;
      rec.gamma = d.gamma;
      opt.trace->push_back(rec);
    }
    Vector xhat_next = m.A * xhat + m.B * u;
    Matrix sigma_next = m.A * sigma * m.A.transpose() + DSwD;
    if (d.gamma) {
      const Vector y = m.C * x + d.v;
      const Matrix innov = m.C * sigma * m.C.transpose() + m.sigma_v;
      const Matrix Mk = innov.ldlt().solve(m.C * sigma).transpose();
      xhat_next += m.A * Mk * (y - m.C * xhat);
      sigma_next -= m.A * Mk * m.C * sigma * m.A.transpose();
    }
    x = m.A * x + m.B * u + m.D * d.w;
    xhat = std::move(xhat_next);
    sigma = linalg::symmetrize(sigma_next);
  }
}

}  // namespace

TrialResult run_trial(const Precompute& pre, const TrialOptions& options, std::uint64_t seed) {
  if (options.T < 1) throw ValidationError("T must be at least 1");
  const double lambda = options.lambda_actual.value_or(pre.scenario.model.lambda);
  const NoiseGenerator noise(pre.scenario.model, seed, lambda);
  TrialResult r;
  r.seed = seed;
  r.T = options.T;
  Accumulator acc{pre.scenario.spec, r};
  if (options.controller == ControllerKind::MPC) {
    run_mpc(pre, options, noise, r, acc);
  } else {
    run_lqg(pre, options, noise, acc);
  }
  r.avg_undiscounted_cost = acc.total / options.T;
  return r;
}

Stats summarize(const std::vector<double>& values) {
  Stats s;
  const double n = static_cast<double>(values.size());
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

AggregateReport aggregate(const std::vector<TrialResult>& trials, ControllerKind controller,
                          std::uint64_t seed0) {
  AggregateReport a;
  a.controller = controller;
  a.n = static_cast<int>(trials.size());
  a.T = trials.empty() ? 0 : trials.front().T;
  a.seed0 = seed0;
  std::vector<double> dc, dg, avg, inf;
  for (const auto& t : trials) {
    dc.push_back(t.discounted_cost);
    dg.push_back(t.discounted_constraint);
    avg.push_back(t.avg_undiscounted_cost);
    inf.push_back(t.infeasible_count);
    a.total_infeasible += t.infeasible_count;
  }
  a.discounted_cost = summarize(dc);
  a.discounted_constraint = summarize(dg);
  a.avg_undiscounted_cost = summarize(avg);
  a.infeasible_count = summarize(inf);
  a.trials = trials;
  return a;
}

AggregateReport run_monte_carlo(const Precompute& pre, const TrialOptions& options, int n,
                                std::uint64_t seed0, Execution exec) {
  if (n < 1) throw ValidationError("number of trials must be at least 1");
  // Initial feasibility does not depend on the seed; surface it once, typed.
  if (options.controller == ControllerKind::MPC) {
    if (options.mu0_policy) {
      init_controller(pre, *options.mu0_policy);
    } else {
      init_controller(pre);
    }
  }
  auto trials = exec == Execution::Parallel ? run_trials_parallel(pre, options, n, seed0)
                                            : run_trials_serial(pre, options, n, seed0);
  return aggregate(trials, options.controller, seed0);
}

}  // namespace smpc
