#pragma once

#include "scs/gmm.hpp"

#include <cstdint>

namespace scs {

/// M x N sensing matrix with orthonormal rows (Phi Phi^T = I_M).
class SensingMatrix {
 public:
  /// Validates M <= N and max|Phi Phi^T - I| <= 1e-8.
  explicit SensingMatrix(Matrix rows, int block_size = 1);

  const Matrix& rows() const { return rows_; }
  int block_size() const { return block_size_; }
  Eigen::Index measurements() const { return rows_.rows(); }
  Eigen::Index dimension() const { return rows_.cols(); }

 private:
  Matrix rows_;
  int block_size_;
};

/// Orthonormalized rows of an M x N standard Gaussian draw.
SensingMatrix random_orthonormal(Eigen::Index m, Eigen::Index n, std::uint64_t seed);

/// First m eigenvectors of the component covariance, as rows.
SensingMatrix eigen_sensing(const GaussianComponent& component, Eigen::Index m);

/// Expected basis E = sum_g p(g) V_g.
Matrix average_basis(const GmmModel& model);

/// Orthogonal Procrustes: argmin_X ||A X - C||_F subject to X X^T = I.
/// With A^T C = U S W^T the minimizer is X = U W^T.
Matrix procrustes(const Matrix& a, const Matrix& c);

/// RIP-AB design: with E = U S W^T (singular values descending, left
/// singular vectors signed so their first nonzero entry is positive) the
/// sensing rows are the first M rows of B = W U^T, the orthogonal matrix
/// closest to making B E the identity.
SensingMatrix rip_ab(const GmmModel& model, Eigen::Index m);

/// ||B E - I||_F, the objective RIP-AB minimizes over orthogonal B.
double rip_objective(const Matrix& b, const Matrix& expected_basis);

}  // namespace scs
