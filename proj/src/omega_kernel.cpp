// Reduction of per-pattern Omega contributions. The parallel version gives
// each thread private accumulators and merges them at the end, so results
// match the serial reference up to summation order.
#include <omp.h>

#include "smpc/errors.hpp"
#include "smpc/prediction.hpp"

namespace smpc {

namespace {

OmegaOperator empty_operator(const SystemModel& model, int N) {
  const Eigen::Index nx = model.nx(), ny = model.ny();
  const Eigen::Index n = N * (nx + ny), nN = nx + N * ny;
  OmegaOperator op;
  op.N = N;
  op.nx = static_cast<int>(nx);
  op.ny = static_cast<int>(ny);
  op.sigma_map = Matrix::Zero(n * n, nx * nx);
  op.sigma_map_N = Matrix::Zero(nN * nN, nx * nx);
  op.offset = Vector::Zero(n * n);
  op.offset_N = Vector::Zero(nN * nN);
  return op;
}

void add_term(OmegaOperator& acc, const OmegaPatternTerm& t) {
  acc.sigma_map += t.sigma_map;
  acc.sigma_map_N += t.sigma_map_N;
  acc.offset += t.offset;
  acc.offset_N += t.offset_N;
}

int horizon_of(const std::vector<GammaPattern>& patterns) {
  if (patterns.empty()) throw ValidationError("no drop patterns supplied");
  return static_cast<int>(patterns.front().diag.size());
}

}  // namespace

OmegaOperator reduce_omega_serial(const SystemModel& model, const GainPair& gains,
                                  const std::vector<GammaPattern>& patterns) {
  OmegaOperator acc = empty_operator(model, horizon_of(patterns));
  for (const auto& p : patterns) {
    if (p.prob == 0.0) continue;
    add_term(acc, omega_pattern_term(model, gains, p));
  }
  return acc;
}

OmegaOperator reduce_omega_parallel(const SystemModel& model, const GainPair& gains,
                                    const std::vector<GammaPattern>& patterns) {
  const int N = horizon_of(patterns);
  OmegaOperator acc = empty_operator(model, N);
  const long count = static_cast<long>(patterns.size());
#pragma omp parallel
  {
    OmegaOperator local = empty_operator(model, N);
#pragma omp for schedule(static) nowait
    for (long j = 0; j < count; ++j) {
      if (patterns[j].prob == 0.0) continue;
      add_term(local, omega_pattern_term(model, gains, patterns[j]));
    }
#pragma omp critical(smpc_omega_reduce)
    add_term(acc, OmegaPatternTerm{local.sigma_map, local.sigma_map_N,
                                   local.offset, local.offset_N});
  }
  return acc;
}

}  // namespace smpc
