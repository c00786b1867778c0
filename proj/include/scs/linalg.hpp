#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace scs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a matrix that must be inverted or log-determined is singular
/// (or indefinite) even after eigenvalue flooring.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace linalg {

/// Relative eigenvalue floor applied before every inversion / determinant.
inline constexpr double kEigenFloor = 1e-10;

/// Symmetric eigendecomposition, eigenvalues descending.
///
/// Each eigenvector is signed so its first nonzero entry is positive. Within
/// groups of exactly equal eigenvalues, vectors are ordered by the index of
/// their first nonzero entry, so signed permutations of the identity come
/// back as the identity.
struct SymmetricEigen {
  Matrix vectors;  // columns
  Vector values;
};
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Flip columns so the first entry with magnitude above `tol` is positive.
/// Returns the applied signs.
Vector fix_column_signs(Matrix& columns, double tol = 1e-12);

/// max |a_ij - a_ji|
double symmetry_residual(const Matrix& a);

/// Orthonormalize the rows of `rows` while preserving their span
/// (Gram-Schmidt order, positive diagonal in the triangular factor).
/// Throws std::invalid_argument when the rows are rank deficient.
Matrix orthonormalize_rows(const Matrix& rows);

/// max |rows * rows^T - I|
double orthonormality_residual(const Matrix& rows);

/// Inverse and log-determinant of a symmetric PSD matrix with eigenvalues
/// floored at `rel_floor * lambda_max`. Negative eigenvalues smaller in
/// magnitude than 1e-8 * lambda_max are treated as round-off; larger ones,
/// a non-positive lambda_max, or non-finite entries raise NumericalError.
struct FlooredSpd {
  Matrix inverse;
  double log_det = 0.0;
};
FlooredSpd floored_spd(const Matrix& s, double rel_floor = kEigenFloor);
double floored_log_det(const Matrix& s, double rel_floor = kEigenFloor);

/// Cosines of the principal angles between the row spaces of two matrices
/// with orthonormal rows, sorted descending.
Vector principal_cosines(const Matrix& a_rows, const Matrix& b_rows);

/// Largest principal angle (radians) between two row spaces of equal rank.
double max_principal_angle(const Matrix& a_rows, const Matrix& b_rows);

}  // namespace linalg
}  // namespace scs
