#include "smpc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smpc/errors.hpp"

namespace smpc::linalg {

Matrix kron(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Eigen::Ref<const Matrix>& m) {
  Vector v(m.size());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    v.segment(j * m.rows(), m.rows()) = m.col(j);
  }
  return v;
}

Matrix unvec(const Eigen::Ref<const Vector>& v, Eigen::Index rows,
             Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw DimensionError("unvec: vector length does not match rows*cols");
  }
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    m.col(j) = v.segment(j * rows, rows);
  }
  return m;
}

Matrix symmetrize(const Eigen::Ref<const Matrix>& m) {
  return 0.5 * (m + m.transpose());
}

Matrix block_diag(const Eigen::Ref<const Matrix>& a,
                  const Eigen::Ref<const Matrix>& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

double spectral_radius(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

bool is_symmetric(const Eigen::Ref<const Matrix>& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Matrix pinv_symmetric(const Eigen::Ref<const Matrix>& m, double rel_cutoff) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  const Vector& w = es.eigenvalues();
  const double wmax = w.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (std::abs(w(i)) > rel_cutoff * wmax) inv(i) = 1.0 / w(i);
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Matrix psd_sqrt(const Eigen::Ref<const Matrix>& m, double clip) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  Vector w = es.eigenvalues();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) < -clip) {
      std::ostringstream os;
      os << "psd_sqrt: matrix has eigenvalue " << w(i) << " below -" << clip;
      throw NumericalError(os.str());
    }
    w(i) = std::sqrt(std::max(w(i), 0.0));
  }
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

Matrix enforce_psd(const Eigen::Ref<const Matrix>& m, double rel_tol) {
  Matrix s = symmetrize(m);
  if (s.size() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  Vector w = es.eigenvalues();
  if (w.minCoeff() >= 0.0) return s;
  const double floor = -rel_tol * std::max(w.cwiseAbs().maxCoeff(), 1e-300);
  if (w.minCoeff() < floor) {
    std::ostringstream os;
    os << "enforce_psd: eigenvalue " << w.minCoeff() << " below tolerance "
       << floor;
    throw NumericalError(os.str());
  }
  w = w.cwiseMax(0.0);
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

Matrix solve_vectorized(const Eigen::Ref<const Matrix>& op,
                        const Eigen::Ref<const Matrix>& rhs) {
  const Eigen::Index n = rhs.rows();
  if (op.rows() != n * n || op.cols() != n * n || rhs.cols() != n) {
    throw DimensionError("solve_vectorized: operator/rhs size mismatch");
  }
  const Matrix lhs = Matrix::Identity(n * n, n * n) - op;
  Eigen::PartialPivLU<Matrix> lu(lhs);
  return unvec(lu.solve(vec(rhs)), n, n);
}

}  // namespace smpc::linalg
