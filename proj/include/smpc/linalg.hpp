#pragma once

#include <Eigen/Dense>

namespace smpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

Matrix kron(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b);

/// Column-stacking vectorisation.
Vector vec(const Eigen::Ref<const Matrix>& m);

/// Inverse of vec: column-wise reshape into rows x cols.
Matrix unvec(const Eigen::Ref<const Vector>& v, Eigen::Index rows,
             Eigen::Index cols);

Matrix symmetrize(const Eigen::Ref<const Matrix>& m);

Matrix block_diag(const Eigen::Ref<const Matrix>& a,
                  const Eigen::Ref<const Matrix>& b);

/// Largest eigenvalue modulus of a general square matrix.
double spectral_radius(const Eigen::Ref<const Matrix>& m);

/// Smallest eigenvalue of the symmetric part of m.
double min_eigenvalue(const Eigen::Ref<const Matrix>& m);
double max_eigenvalue(const Eigen::Ref<const Matrix>& m);

bool is_symmetric(const Eigen::Ref<const Matrix>& m, double rel_tol = 1e-10);

/// Moore-Penrose inverse of a symmetric matrix. Eigenvalues with magnitude at
/// or below rel_cutoff * max|eig| are treated as zero.
Matrix pinv_symmetric(const Eigen::Ref<const Matrix>& m,
                      double rel_cutoff = 1e-10);

/// Symmetric square root of a PSD matrix. Eigenvalues in [-clip, 0) are set
/// to zero; anything more negative throws NumericalError.
Matrix psd_sqrt(const Eigen::Ref<const Matrix>& m, double clip = 1e-12);

/// Clips eigenvalues in [-rel_tol * ||m||, 0) to zero and re-forms m.
/// Throws NumericalError when an eigenvalue falls below that floor.
Matrix enforce_psd(const Eigen::Ref<const Matrix>& m, double rel_tol = 1e-9);

/// Solves the linear system (I - op) vec(X) = vec(rhs) for square X where op
/// acts on vec(X). Dense LU.
Matrix solve_vectorized(const Eigen::Ref<const Matrix>& op,
                        const Eigen::Ref<const Matrix>& rhs);

}  // namespace linalg
}  // namespace smpc
