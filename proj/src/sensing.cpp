#include "scs/sensing.hpp"

#include "scs/random.hpp"

#include <sstream>
#include <stdexcept>

namespace scs {

SensingMatrix::SensingMatrix(Matrix rows, int block_size) : rows_(std::move(rows)), block_size_(block_size) {
  if (block_size_ < 1) throw std::invalid_argument("SensingMatrix: block size must be >= 1");
  if (rows_.rows() > rows_.cols()) throw std::invalid_argument("SensingMatrix: more rows than columns");
  const double residual = linalg::orthonormality_residual(rows_);
  if (residual > 1e-8) {
    std::ostringstream msg;
    msg << "SensingMatrix: rows are not orthonormal (residual " << residual << ")";
    throw std::invalid_argument(msg.str());
  }
}

SensingMatrix random_orthonormal(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  if (m < 1 || m > n) throw std::invalid_argument("random_orthonormal: need 1 <= M <= N");
  Rng rng(seed);
  return SensingMatrix(linalg::orthonormalize_rows(rng.gaussian(m, n)));
}

SensingMatrix eigen_sensing(const GaussianComponent& component, Eigen::Index m) {
  if (m < 1 || m > component.dimension()) throw std::invalid_argument("eigen_sensing: need 1 <= m <= N");
  return SensingMatrix(component.basis.leftCols(m).transpose());
}

Matrix average_basis(const GmmModel& model) {
  Matrix e = Matrix::Zero(model.dimension(), model.dimension());
  for (const auto& c : model.components()) e += c.prior * c.basis;
  return e;
}

Matrix procrustes(const Matrix& a, const Matrix& c) {
  if (a.rows() != c.rows()) throw std::invalid_argument("procrustes: A and C row counts differ");
  const Matrix cross = a.transpose() * c;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix u = svd.matrixU();
  Matrix w = svd.matrixV();
  const Vector signs = linalg::fix_column_signs(u);
  w = w * signs.asDiagonal();
  return u * w.transpose();
}

SensingMatrix rip_ab(const GmmModel& model, Eigen::Index m) {
  const auto n = model.dimension();
  if (m < 1 || m > n) throw std::invalid_argument("rip_ab: need 1 <= M <= N");
  const Matrix e = average_basis(model);
  // min ||B E - I|| over orthogonal B is the Procrustes problem
  // min ||E^T B^T - I|| whose solution is B^T = U W^T.
  const Matrix b_transposed = procrustes(e.transpose(), Matrix::Identity(n, n));
  const Matrix b = b_transposed.transpose();
  return SensingMatrix(b.topRows(m));
}

double rip_objective(const Matrix& b, const Matrix& expected_basis) {
  return (b * expected_basis - Matrix::Identity(b.rows(), expected_basis.cols())).norm();
}

}  // namespace scs
