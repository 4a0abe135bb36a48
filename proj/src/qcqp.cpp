#include "smpc/qcqp.hpp"

#include <cmath>
#include <limits>

#include "smpc/errors.hpp"

namespace smpc {

namespace {

constexpr double kFlatTol = 1e-12;
constexpr int kMaxBisection = 200;

Matrix weighted_blocks(const Matrix& W, double beta, int N) {
  Vector d(N);
  for (int i = 0; i < N; ++i) d(i) = std::pow(beta, i);
  return linalg::kron(d.asDiagonal().toDenseMatrix(), W);
}

double inner(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  return a.cwiseProduct(b).sum();
}

QuadraticForm assemble_one(const FormWeights& w, const FormBuilder& b,
                           const InnovationCovariance& omega, const Vector& xhat) {
  const DecisionLayout& lay = b.layout;
  const int nc = lay.n_c();
  const int d = lay.dim();
  QuadraticForm f;
  f.Hq = Matrix::Zero(d, d);
  f.g = Vector::Zero(d);
  f.Hq.topLeftCorner(nc, nc) = w.Hc;
  f.g.head(nc) = w.Gc * xhat;

  const Matrix zz = omega.zz();
  const Matrix ez = omega.ez();
  const Matrix Nez = omega.N_ez();

  if (lay.n_l() > 0) {
    const int nl = lay.n_l();
    for (int a = 0; a < nl; ++a) {
      const auto [ra, ca] = b.l_positions[a];
      for (int bb = 0; bb <= a; ++bb) {
        const auto [rb, cb] = b.l_positions[bb];
        const double v = zz(ca, cb) * w.Hc(ra, rb);
        f.Hq(nc + a, nc + bb) = v;
        f.Hq(nc + bb, nc + a) = v;
      }
    }
    const Matrix GL = w.WbT * ez + w.BL * zz + w.ZT * Nez;
    for (int a = 0; a < nl; ++a) {
      const auto [ra, ca] = b.l_positions[a];
      f.g(nc + a) = GL(ra, ca);
    }
  }

  f.c0 = xhat.dot(w.Px * xhat) + inner(w.Wb, omega.ee()) + 2.0 * inner(w.WbPi0, ez) +
         inner(w.Pzeta, zz) + w.betaN * inner(w.Z11, omega.N_ee()) +
         2.0 * inner(w.Z21tPi0N, Nez) + w.tail_const;
  return f;
}

// s_i(t) in the diagonal basis; see solve().
double coordinate(double t, double a, double b, double phi, double lam) {
  if (phi == 0.0 && lam == 0.0) return 0.0;
  if (lam == 0.0) return -a / phi;
  if (phi == 0.0) return t > 0.0 ? -((1.0 - t) * a + t * b) / (t * lam) : -b / lam;
  return -((1.0 - t) * a + t * b) / ((1.0 - t) * phi + t * lam);
}

struct Path {
  const Diagonalization* D;
  Vector a, b;
  double cf, cg;

  Vector coords(double t) const {
    Vector s(a.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      s(i) = coordinate(t, a(i), b(i), D->phi(i), D->lam(i));
    }
    return s;
  }
  double g(double t) const {
    const Vector s = coords(t);
    return (D->lam.array() * s.array().square() + 2.0 * b.array() * s.array()).sum() + cg;
  }
};

Diagonalization block_diagonalization(const Diagonalization& top, const Diagonalization& bottom,
                                      Eigen::Index n_top, Eigen::Index n_bottom) {
  Diagonalization out;
  const Eigen::Index r1 = top.V.cols(), r2 = bottom.V.cols();
  out.V = Matrix::Zero(n_top + n_bottom, r1 + r2);
  out.V.topLeftCorner(n_top, r1) = top.V;
  out.V.bottomRightCorner(n_bottom, r2) = bottom.V;
  out.phi.resize(r1 + r2);
  out.phi << top.phi, bottom.phi;
  out.lam.resize(r1 + r2);
  out.lam << top.lam, bottom.lam;
  return out;
}

}  // namespace

double QuadraticForm::operator()(const Eigen::Ref<const Vector>& tau) const {
  return tau.dot(Hq * tau) + 2.0 * g.dot(tau) + c0;
}

Vector QuadraticForm::half_gradient(const Eigen::Ref<const Vector>& tau) const {
  return Hq * tau + g;
}

FormWeights build_form_weights(const StackedOperators& ops, const Matrix& W, const Matrix& R,
                               double beta, const Matrix& Z_tilde, const Resolvent& res) {
  const int N = ops.N, nx = ops.nx, nu = ops.nu;
  FormWeights w;
  w.beta = beta;
  w.betaN = std::pow(beta, N);
  w.Wb = weighted_blocks(W, beta, N);
  w.Rb = weighted_blocks(R, beta, N);
  w.Z11 = Z_tilde.topLeftCorner(nx, nx);
  w.Z21 = Z_tilde.bottomLeftCorner(nx, nx);
  w.Z22 = Z_tilde.bottomRightCorner(nx, nx);
  w.tail_const = inner(Z_tilde, res.W2.transpose());

  const Matrix& TB = ops.T_phiB;
  const Matrix& TN = ops.TN_phiB;
  const Matrix KT = ops.Kbold * TB + Matrix::Identity(N * nu, N * nu);
  const Matrix KS = ops.Kbold * ops.S_phi;
  const Matrix Pi0 = ops.T_phiA * ops.Mbold;
  const Matrix Pi0N = ops.TN_phiA * ops.Mbold;
  const Matrix KPi0 = ops.Kbold * Pi0;

  w.Hc = linalg::symmetrize(TB.transpose() * w.Wb * TB + KT.transpose() * w.Rb * KT +
                            w.betaN * TN.transpose() * w.Z22 * TN);
  w.Gc = TB.transpose() * w.Wb * ops.S_phi + KT.transpose() * w.Rb * KS +
         w.betaN * TN.transpose() * w.Z22 * ops.SN_phi;
  w.Px = linalg::symmetrize(ops.S_phi.transpose() * w.Wb * ops.S_phi +
                            KS.transpose() * w.Rb * KS +
                            w.betaN * ops.SN_phi.transpose() * w.Z22 * ops.SN_phi);
  w.WbT = TB.transpose() * w.Wb;
  w.BL = w.WbT * Pi0 + KT.transpose() * w.Rb * KPi0 + w.betaN * TN.transpose() * w.Z22 * Pi0N;
  w.ZT = w.betaN * TN.transpose() * w.Z21;
  w.WbPi0 = w.Wb * Pi0;
  w.Z21tPi0N = w.betaN * w.Z21.transpose() * Pi0N;
  w.Pzeta = linalg::symmetrize(Pi0.transpose() * w.Wb * Pi0 + KPi0.transpose() * w.Rb * KPi0 +
                               w.betaN * Pi0N.transpose() * w.Z22 * Pi0N);
  return w;
}

FormBuilder build_form_builder(const StackedOperators& ops, const TerminalMaps& maps,
                               const ProblemSpec& spec, PolicyKind policy) {
  FormBuilder b;
  b.layout = DecisionLayout{ops.N, ops.nu, ops.ny, policy};
  b.cost = build_form_weights(ops, spec.Q, spec.R, spec.beta1, maps.Z1_tilde, maps.cost);
  b.constraint = build_form_weights(ops, spec.H.transpose() * spec.H,
                                    Matrix::Zero(ops.nu, ops.nu), spec.beta2,
                                    maps.Z2_tilde, maps.constraint);
  for (int k = 0; k < b.layout.n_l(); ++k) b.l_positions.push_back(b.layout.l_position(k));
  return b;
}

FormPair assemble_forms(const FormBuilder& builder, const InnovationCovariance& omega,
                        const Vector& xhat_k) {
  return {assemble_one(builder.cost, builder, omega, xhat_k),
          assemble_one(builder.constraint, builder, omega, xhat_k)};
}

FormPair assemble_forms(const StackedOperators& ops, const InnovationCovariance& omega,
                        const TerminalMaps& maps, const Vector& xhat_k,
                        const ProblemSpec& spec, PolicyKind policy) {
  return assemble_forms(build_form_builder(ops, maps, spec, policy), omega, xhat_k);
}

DirectValues evaluate_direct(const DecisionVars& theta, const Vector& xhat_k,
                             const StackedOperators& ops, const InnovationCovariance& omega,
                             const TerminalMaps& maps, const ProblemSpec& spec) {
  const int N = ops.N;
  const MomentSet m = predicted_moments(theta, xhat_k, ops, omega);
  const Matrix ones = Matrix::Ones(2, 2);
  const Matrix Qbeta = linalg::kron(ones, weighted_blocks(spec.Q, spec.beta1, N));
  const Matrix Rbeta = weighted_blocks(spec.R, spec.beta1, N);
  const Matrix Hbeta =
      linalg::kron(ones, weighted_blocks(spec.H.transpose() * spec.H, spec.beta2, N));

  const Matrix P1 = solve_discounted_lyapunov(maps.cost, m.X_N, N);
  const Matrix P2 = solve_discounted_lyapunov(maps.constraint, m.X_N, N);
  DirectValues v;
  v.cost = (Qbeta * m.X).trace() + (Rbeta * m.U).trace() + (maps.Z1 * P1).trace();
  v.constraint = (Hbeta * m.X).trace() + (maps.Z2 * P2).trace();
  return v;
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Interior: return "interior";
    case SolveStatus::Active: return "active";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

Diagonalization simultaneous_diagonalization(const Matrix& Hf, const Matrix& Hg) {
  const Eigen::Index n = Hf.rows();
  Diagonalization out;
  if (n == 0) {
    out.V = Matrix::Zero(0, 0);
    out.phi = out.lam = Vector::Zero(0);
    return out;
  }
  const double sf = std::max(Hf.cwiseAbs().maxCoeff(), 1e-300);
  const double sg = std::max(Hg.cwiseAbs().maxCoeff(), 1e-300);
  const Matrix S = linalg::symmetrize(Hf / sf + Hg / sg);
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  const Vector& d = es.eigenvalues();
  const double dmax = std::max(d.maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i) > kFlatTol * dmax) keep.push_back(i);
  }
  Matrix V0(n, keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    V0.col(k) = es.eigenvectors().col(keep[k]) / std::sqrt(d(keep[k]));
  }
  const Matrix F = linalg::symmetrize(V0.transpose() * (Hf / sf) * V0);
  Eigen::SelfAdjointEigenSolver<Matrix> ef(F);
  out.V = V0 * ef.eigenvectors();
  const Vector phi_n = ef.eigenvalues();
  const Vector lam_n = (out.V.transpose() * (Hg / sg) * out.V).diagonal();
  out.phi.resize(phi_n.size());
  out.lam.resize(phi_n.size());
  for (Eigen::Index i = 0; i < phi_n.size(); ++i) {
    out.phi(i) = phi_n(i) > kFlatTol ? sf * phi_n(i) : 0.0;
    out.lam(i) = lam_n(i) > kFlatTol ? sg * lam_n(i) : 0.0;
  }
  return out;
}

SolveResult solve(const QuadraticForm& cost, const QuadraticForm& constraint, double mu,
                  const DecisionLayout& layout, const SolveOptions& options) {
  const Eigen::Index d = cost.Hq.rows();
  if (d != layout.dim() || constraint.Hq.rows() != d) {
    throw DimensionError("solve: form size does not match decision layout");
  }

  Diagonalization D;
  if (options.leading_block && options.block_split == d) {
    D = *options.leading_block;
  } else if (options.block_split > 0 && options.block_split < d) {
    const Eigen::Index n1 = options.block_split, n2 = d - n1;
    const Diagonalization top =
        options.leading_block
            ? *options.leading_block
            : simultaneous_diagonalization(cost.Hq.topLeftCorner(n1, n1),
                                           constraint.Hq.topLeftCorner(n1, n1));
    const Diagonalization bottom = simultaneous_diagonalization(
        cost.Hq.bottomRightCorner(n2, n2), constraint.Hq.bottomRightCorner(n2, n2));
    D = block_diagonalization(top, bottom, n1, n2);
  } else {
    D = simultaneous_diagonalization(cost.Hq, constraint.Hq);
  }

  Path path{&D, D.V.transpose() * cost.g, D.V.transpose() * constraint.g, cost.c0, constraint.c0};
  for (Eigen::Index i = 0; i < D.lam.size(); ++i) {
    if (D.lam(i) == 0.0) path.b(i) = 0.0;
    if (D.phi(i) == 0.0 && D.lam(i) == 0.0) path.a(i) = 0.0;
  }

  SolveResult r;
  const double scale = std::max(1.0, std::isfinite(mu) ? std::abs(mu) : 1.0);
  r.g_min = path.g(1.0);
  double t = 0.0;
  const double g0 = path.g(0.0);
  if (options.trace) options.trace->push_back(g0);

  if (!(g0 > mu)) {
    r.status = SolveStatus::Interior;
  } else if (r.g_min > mu + 1e-7 * scale) {
    r.status = SolveStatus::Infeasible;
    t = 1.0;
  } else if (r.g_min >= mu) {
    r.status = SolveStatus::Active;
    t = 1.0;
  } else {
    r.status = SolveStatus::Active;
    double lo = 0.0, hi = 1.0;
    double g_hi = r.g_min;
    const double tol = 1e-8 * scale;
    int it = 0;
    for (; it < kMaxBisection; ++it) {
      if (mu - g_hi <= tol) break;
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double gm = path.g(mid);
      if (options.trace) options.trace->push_back(gm);
      if (gm > mu) {
        lo = mid;
      } else {
        hi = mid;
        g_hi = gm;
      }
    }
    r.iterations = it;
    t = hi;
  }

  r.t = t;
  r.nu = t < 1.0 ? t / (1.0 - t) : std::numeric_limits<double>::infinity();
  r.tau = D.V * path.coords(t);
  r.theta_star = layout.unpack(r.tau);
  r.J = cost(r.tau);
  r.g_value = constraint(r.tau);

  const Vector gf = cost.half_gradient(r.tau);
  const Vector gg = constraint.half_gradient(r.tau);
  const double w0 = 1.0 - t, w1 = t;
  const double denom = w0 * (cost.g.norm() + cost.Hq.norm() * r.tau.norm()) +
                       w1 * (constraint.g.norm() + constraint.Hq.norm() * r.tau.norm()) + 1e-300;
  r.kkt.stationarity = (w0 * gf + w1 * gg).norm() / denom;
  if (std::isfinite(mu)) {
    r.kkt.primal = std::max(0.0, r.g_value - mu) / scale;
    r.kkt.complementarity = w1 * std::abs(r.g_value - mu) / scale;
  }
  if (r.status == SolveStatus::Infeasible) r.kkt.primal = (r.g_value - mu) / scale;
  return r;
}

ConstraintMinimum minimize_constraint(const QuadraticForm& constraint, const DecisionLayout& layout) {
  ConstraintMinimum m;
  m.tau_f = -linalg::pinv_symmetric(constraint.Hq, 1e-10) * constraint.g;
  m.theta_f = layout.unpack(m.tau_f);
  m.g_min = constraint(m.tau_f);
  return m;
}

Matrix feasible_feedback_gain(const StackedOperators& ops, const TerminalMaps& maps,
                              const ProblemSpec& spec) {
  const int N = ops.N, nx = ops.nx;
  const double bN = std::pow(spec.beta2, N);
  const Matrix Hb = weighted_blocks(spec.H.transpose() * spec.H, spec.beta2, N);
  const Matrix Z22 = maps.Z2_tilde.bottomRightCorner(nx, nx);
  const Matrix& TB = ops.T_phiB;
  const Matrix& TN = ops.TN_phiB;
  const Matrix lhs = TB.transpose() * Hb * TB + bN * TN.transpose() * Z22.transpose() * TN;
  const Matrix rhs = TB.transpose() * Hb * ops.S_phi +
                     0.5 * bN * TN.transpose() * (Z22.transpose() + Z22) * ops.SN_phi;
  return -linalg::pinv_symmetric(lhs, 1e-10) * rhs;
}

bool terminal_weight_full_rank(const ProblemSpec& spec, const GainPair& gains) {
  const Eigen::Index nx = spec.Q.rows(), nu = spec.R.rows();
  const Matrix Qh = linalg::psd_sqrt(spec.Q);
  const Matrix Rh = linalg::psd_sqrt(spec.R);
  Matrix M = Matrix::Zero(2 * nx, nx + nu);
  M.topLeftCorner(nx, nx) = Qh;
  M.bottomLeftCorner(nx, nx) = Qh;
  M.bottomRightCorner(nx, nu) = gains.K.transpose() * Rh;
  Eigen::JacobiSVD<Matrix> svd(M);
  svd.setThreshold(1e-10);
  return svd.rank() == nx + nu;
}

}  // namespace smpc
