#include "smpc/prediction.hpp"

#include <cmath>

#include "smpc/errors.hpp"

namespace smpc {

DecisionVars DecisionVars::zero(int N, int nu, int ny) {
  return {Vector::Zero(N * nu), Matrix::Zero(N * nu, N * ny)};
}

bool DecisionVars::operator==(const DecisionVars& other) const {
  return c.size() == other.c.size() && L.rows() == other.L.rows() &&
         L.cols() == other.L.cols() && c == other.c && L == other.L;
}

std::pair<int, int> DecisionLayout::l_position(int k) const {
  const int per_block = nu * ny;
  int block = k / per_block;
  const int within = k % per_block;
  int i = 0;
  while (block > i) {
    block -= i + 1;
    ++i;
  }
  const int j = block;
  return {i * nu + within % nu, j * ny + within / nu};
}

Vector DecisionLayout::pack(const DecisionVars& theta) const {
  Vector tau(dim());
  tau.head(n_c()) = theta.c;
  int k = n_c();
  if (policy == PolicyKind::Full) {
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j <= i; ++j) {
        for (int col = 0; col < ny; ++col) {
          for (int row = 0; row < nu; ++row) {
            tau(k++) = theta.L(i * nu + row, j * ny + col);
          }
        }
      }
    }
  }
  return tau;
}

DecisionVars DecisionLayout::unpack(const Eigen::Ref<const Vector>& tau) const {
  if (tau.size() != dim()) throw DimensionError("decision vector has wrong length");
  DecisionVars theta = DecisionVars::zero(N, nu, ny);
  theta.c = tau.head(n_c());
  int k = n_c();
  if (policy == PolicyKind::Full) {
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j <= i; ++j) {
        for (int col = 0; col < ny; ++col) {
          for (int row = 0; row < nu; ++row) {
            theta.L(i * nu + row, j * ny + col) = tau(k++);
          }
        }
      }
    }
  }
  return theta;
}

Stack build_stack(const std::vector<Matrix>& transitions, const Matrix& input) {
  const int N = static_cast<int>(transitions.size());
  const Eigen::Index n = input.rows();
  const Eigen::Index m = input.cols();
  Stack st;
  st.S = Matrix::Zero(N * n, n);
  st.T = Matrix::Zero(N * n, N * m);
  st.TN = Matrix::Zero(n, N * m);

  Matrix prod = Matrix::Identity(n, n);
  for (int i = 0; i < N; ++i) {
    st.S.middleRows(i * n, n) = prod;
    prod = transitions[i] * prod;
  }
  st.SN = prod;

  for (int j = 0; j < N; ++j) {
    Matrix p = input;
    for (int i = j + 1; i < N; ++i) {
      st.T.block(i * n, j * m, n, m) = p;
      p = transitions[i] * p;
    }
    st.TN.middleCols(j * m, m) = p;
  }
  return st;
}

StackedOperators build_operators(const SystemModel& model, const GainPair& gains, int N) {
  if (N < 1) throw ValidationError("N ≥ 1 required");
  StackedOperators ops;
  ops.N = N;
  ops.nx = model.nx();
  ops.nu = model.nu();
  ops.ny = model.ny();
  ops.nw = model.nw();
  ops.Phi = model.A + model.B * gains.K;
  const std::vector<Matrix> phis(N, ops.Phi);
  const Stack sb = build_stack(phis, model.B);
  const Stack sa = build_stack(phis, model.A);
  ops.S_phi = sb.S;
  ops.SN_phi = sb.SN;
  ops.T_phiB = sb.T;
  ops.TN_phiB = sb.TN;
  ops.T_phiA = sa.T;
  ops.TN_phiA = sa.TN;
  const Matrix I = Matrix::Identity(N, N);
  ops.Kbold = linalg::kron(I, gains.K);
  ops.Mbold = linalg::kron(I, gains.M);
  ops.Cbold = linalg::kron(I, model.C);
  return ops;
}

std::vector<GammaPattern> enumerate_gamma_patterns(int N, double lambda) {
  if (N > 20) throw CapacityError("horizon too long: 2^N drop patterns with N > 20");
  if (N < 1) throw ValidationError("N ≥ 1 required");
  const std::size_t count = std::size_t{1} << N;
  std::vector<GammaPattern> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    GammaPattern& p = out[j];
    p.diag.resize(N);
    p.prob = 1.0;
    for (int i = 0; i < N; ++i) {
      p.diag[i] = static_cast<int>((j >> (N - 1 - i)) & 1u);
      p.prob *= p.diag[i] ? lambda : 1.0 - lambda;
    }
  }
  return out;
}

namespace {

// [F; G] and [F_N; G] for one pattern, columns ordered [e_0 | v stack | w stack].
struct PatternMaps {
  Matrix FG;
  Matrix FG_N;
};

PatternMaps pattern_maps(const SystemModel& model, const GainPair& gains,
                         const std::vector<int>& diag) {
  const int N = static_cast<int>(diag.size());
  const int nx = model.nx(), ny = model.ny(), nw = model.nw();
  const Matrix& A = model.A;
  const Matrix AMC = A * gains.M * model.C;
  std::vector<Matrix> psis(N);
  for (int i = 0; i < N; ++i) psis[i] = diag[i] ? Matrix(A - AMC) : A;

  const Stack sa = build_stack(psis, A);
  const Stack sd = build_stack(psis, model.D);

  // -T_(Psi,A) Mbold Gamma: block column j is -T_.,j M gamma_j.
  Matrix Tv = Matrix::Zero(N * nx, N * ny);
  Matrix TvN = Matrix::Zero(nx, N * ny);
  for (int j = 0; j < N; ++j) {
    if (!diag[j]) continue;
    Tv.middleCols(j * ny, ny) = -sa.T.middleCols(j * nx, nx) * gains.M;
    TvN.middleCols(j * ny, ny) = -sa.TN.middleCols(j * nx, nx) * gains.M;
  }

  const int cols = nx + N * ny + N * nw;
  Matrix F(N * nx, cols);
  F << sa.S, Tv, sd.T;
  Matrix FN(nx, cols);
  FN << sa.SN, TvN, sd.TN;

  // G = Gamma Cbold F + [0 Gamma 0].
  Matrix G = Matrix::Zero(N * ny, cols);
  for (int i = 0; i < N; ++i) {
    if (!diag[i]) continue;
    G.middleRows(i * ny, ny) = model.C * F.middleRows(i * nx, nx);
    G.block(i * ny, nx + i * ny, ny, ny) += Matrix::Identity(ny, ny);
  }

  PatternMaps pm;
  pm.FG.resize(N * nx + N * ny, cols);
  pm.FG << F, G;
  pm.FG_N.resize(nx + N * ny, cols);
  pm.FG_N << FN, G;
  return pm;
}

Matrix noise_block(const SystemModel& model, int N) {
  const int ny = model.ny(), nw = model.nw();
  Matrix E = Matrix::Zero(N * ny + N * nw, N * ny + N * nw);
  for (int i = 0; i < N; ++i) {
    E.block(i * ny, i * ny, ny, ny) = model.sigma_v;
    E.block(N * ny + i * nw, N * ny + i * nw, nw, nw) = model.sigma_w;
  }
  return E;
}

InnovationCovariance make_cov(Matrix omega, Matrix omega_N, int nx, int N) {
  InnovationCovariance out;
  out.omega = std::move(omega);
  out.omega_N = std::move(omega_N);
  out.nx = nx;
  out.N = N;
  return out;
}

}  // namespace

OmegaPatternTerm omega_pattern_term(const SystemModel& model, const GainPair& gains,
                                    const GammaPattern& pattern) {
  const int N = static_cast<int>(pattern.diag.size());
  const int nx = model.nx();
  const PatternMaps pm = pattern_maps(model, gains, pattern.diag);
  const Matrix E = noise_block(model, N);
  const Eigen::Index rest = pm.FG.cols() - nx;

  OmegaPatternTerm t;
  const Matrix Fs = pm.FG.leftCols(nx);
  const Matrix FsN = pm.FG_N.leftCols(nx);
  t.sigma_map = pattern.prob * linalg::kron(Fs, Fs);
  t.sigma_map_N = pattern.prob * linalg::kron(FsN, FsN);
  const Matrix Fr = pm.FG.rightCols(rest);
  const Matrix FrN = pm.FG_N.rightCols(rest);
  t.offset = pattern.prob * linalg::vec(Fr * E * Fr.transpose());
  t.offset_N = pattern.prob * linalg::vec(FrN * E * FrN.transpose());
  return t;
}

OmegaOperator build_omega_operator(const SystemModel& model, const GainPair& gains,
                                   const std::vector<GammaPattern>& patterns,
                                   Execution exec) {
  return exec == Execution::Parallel ? reduce_omega_parallel(model, gains, patterns)
                                     : reduce_omega_serial(model, gains, patterns);
}

InnovationCovariance apply_sigma_part(const OmegaOperator& op, const Matrix& delta) {
  const Eigen::Index n = op.N * (op.nx + op.ny);
  const Eigen::Index nN = op.nx + op.N * op.ny;
  const Vector d = linalg::vec(delta);
  return make_cov(linalg::symmetrize(linalg::unvec(op.sigma_map * d, n, n)),
                  linalg::symmetrize(linalg::unvec(op.sigma_map_N * d, nN, nN)),
                  op.nx, op.N);
}

InnovationCovariance assemble_omega(const OmegaOperator& op, const Matrix& sigma_k) {
  const Eigen::Index n = op.N * (op.nx + op.ny);
  const Eigen::Index nN = op.nx + op.N * op.ny;
  const Vector s = linalg::vec(sigma_k);
  Matrix omega = linalg::unvec(op.sigma_map * s + op.offset, n, n);
  Matrix omega_N = linalg::unvec(op.sigma_map_N * s + op.offset_N, nN, nN);
  return make_cov(linalg::enforce_psd(omega), linalg::enforce_psd(omega_N), op.nx, op.N);
}

InnovationCovariance assemble_omega_direct(const SystemModel& model, const GainPair& gains,
                                           const std::vector<GammaPattern>& patterns,
                                           const Matrix& sigma_k) {
  const int N = static_cast<int>(patterns.front().diag.size());
  const int nx = model.nx(), ny = model.ny();
  Matrix E = linalg::block_diag(sigma_k, noise_block(model, N));
  Matrix omega = Matrix::Zero(N * (nx + ny), N * (nx + ny));
  Matrix omega_N = Matrix::Zero(nx + N * ny, nx + N * ny);
  for (const auto& p : patterns) {
    if (p.prob == 0.0) continue;
    const PatternMaps pm = pattern_maps(model, gains, p.diag);
    omega += p.prob * pm.FG * E * pm.FG.transpose();
    omega_N += p.prob * pm.FG_N * E * pm.FG_N.transpose();
  }
  return make_cov(linalg::symmetrize(omega), linalg::symmetrize(omega_N), nx, N);
}

MomentSet predicted_moments(const DecisionVars& theta, const Vector& xhat_k,
                            const StackedOperators& ops,
                            const InnovationCovariance& omega) {
  const int N = ops.N, nx = ops.nx;
  const int n1 = N * nx;
  if (theta.c.size() != N * ops.nu || theta.L.rows() != N * ops.nu ||
      theta.L.cols() != N * ops.ny || xhat_k.size() != nx) {
    throw DimensionError("predicted_moments: decision/estimate sizes do not match operators");
  }
  MomentSet m;
  m.pi = ops.S_phi * xhat_k + ops.T_phiB * theta.c;
  m.Pi = ops.T_phiB * theta.L + ops.T_phiA * ops.Mbold;
  m.pi_N = ops.SN_phi * xhat_k + ops.TN_phiB * theta.c;
  m.Pi_N = ops.TN_phiB * theta.L + ops.TN_phiA * ops.Mbold;

  const Matrix zz = omega.zz();
  m.X.resize(2 * n1, 2 * n1);
  m.X.topLeftCorner(n1, n1) = omega.ee();
  m.X.topRightCorner(n1, n1) = omega.ez() * m.Pi.transpose();
  m.X.bottomLeftCorner(n1, n1) = m.X.topRightCorner(n1, n1).transpose();
  m.X.bottomRightCorner(n1, n1) = m.pi * m.pi.transpose() + m.Pi * zz * m.Pi.transpose();
  m.X = linalg::symmetrize(m.X);

  const Vector mean_u = ops.Kbold * m.pi + theta.c;
  const Matrix gain_u = theta.L + ops.Kbold * m.Pi;
  m.U = linalg::symmetrize(mean_u * mean_u.transpose() + gain_u * zz * gain_u.transpose());

  m.X_N.resize(2 * nx, 2 * nx);
  m.X_N.topLeftCorner(nx, nx) = omega.N_ee();
  m.X_N.topRightCorner(nx, nx) = omega.N_ez() * m.Pi_N.transpose();
  m.X_N.bottomLeftCorner(nx, nx) = m.X_N.topRightCorner(nx, nx).transpose();
  m.X_N.bottomRightCorner(nx, nx) =
      m.pi_N * m.pi_N.transpose() + m.Pi_N * zz * m.Pi_N.transpose();
  m.X_N = linalg::symmetrize(m.X_N);
  return m;
}

}  // namespace smpc
