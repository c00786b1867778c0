#include "scs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace scs::linalg {

namespace {

Eigen::Index first_significant(const Eigen::Ref<const Vector>& v, double tol) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol) return i;
  }
  return v.size();
}

}  // namespace

Vector fix_column_signs(Matrix& columns, double tol) {
  Vector signs = Vector::Ones(columns.cols());
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    const auto i = first_significant(columns.col(j), tol);
    if (i < columns.rows() && columns(i, j) < 0.0) {
      columns.col(j) *= -1.0;
      signs(j) = -1.0;
    }
  }
  return signs;
}

double symmetry_residual(const Matrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

SymmetricEigen symmetric_eigen(const Matrix& a) {
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition did not converge");
  }
  const Eigen::Index n = sym.rows();
  // Eigen returns ascending values; reverse.
  Matrix vecs = solver.eigenvectors().rowwise().reverse();
  Vector vals = solver.eigenvalues().reverse();
  fix_column_signs(vecs);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<Eigen::Index> lead(order.size());
  for (Eigen::Index j = 0; j < n; ++j) lead[j] = first_significant(vecs.col(j), 1e-12);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index l, Eigen::Index r) {
    if (vals(l) != vals(r)) return vals(l) > vals(r);
    return lead[l] < lead[r];
  });

  SymmetricEigen out{Matrix(n, n), Vector(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    out.vectors.col(j) = vecs.col(order[j]);
    out.values(j) = vals(order[j]);
  }
  return out;
}

Matrix orthonormalize_rows(const Matrix& rows) {
  const Eigen::Index m = rows.rows();
  const Eigen::Index n = rows.cols();
  if (m > n) throw std::invalid_argument("orthonormalize_rows: more rows than columns");
  if (m == 0) return rows;
  Eigen::HouseholderQR<Matrix> qr(rows.transpose());
  Matrix q = qr.householderQ() * Matrix::Identity(n, m);
  const Matrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const double scale = std::max(rows.cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (std::abs(r(j, j)) <= 1e-12 * scale) {
      throw std::invalid_argument("orthonormalize_rows: rows are linearly dependent");
    }
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q.transpose();
}

double orthonormality_residual(const Matrix& rows) {
  if (rows.rows() == 0) return 0.0;
  const Matrix gram = rows * rows.transpose();
  return (gram - Matrix::Identity(rows.rows(), rows.rows())).cwiseAbs().maxCoeff();
}

FlooredSpd floored_spd(const Matrix& s, double rel_floor) {
  if (s.rows() != s.cols()) throw std::invalid_argument("floored_spd: matrix not square");
  if (s.size() == 0) return {Matrix(0, 0), 0.0};
  if (!s.allFinite()) throw NumericalError("floored_spd: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (s + s.transpose()));
  if (solver.info() != Eigen::Success) throw NumericalError("floored_spd: eigensolver failed");
  Vector vals = solver.eigenvalues();
  const double lmax = vals.maxCoeff();
  if (!(lmax > 0.0)) throw NumericalError("floored_spd: matrix is singular (lambda_max <= 0)");
  if (vals.minCoeff() < -1e-8 * lmax) {
    throw NumericalError("floored_spd: matrix is indefinite (lambda_min = " +
                         std::to_string(vals.minCoeff()) + ")");
  }
  const double floor = rel_floor * lmax;
  vals = vals.cwiseMax(floor);
  const Matrix& v = solver.eigenvectors();
  FlooredSpd out;
  out.inverse = v * vals.cwiseInverse().asDiagonal() * v.transpose();
  out.log_det = vals.array().log().sum();
  return out;
}

double floored_log_det(const Matrix& s, double rel_floor) {
  if (s.size() == 0) return 0.0;
  if (!s.allFinite()) throw NumericalError("floored_log_det: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("floored_log_det: eigensolver failed");
  const Vector& vals = solver.eigenvalues();
  const double lmax = vals.maxCoeff();
  if (!(lmax > 0.0)) throw NumericalError("floored_log_det: matrix is singular (lambda_max <= 0)");
  if (vals.minCoeff() < -1e-8 * lmax) throw NumericalError("floored_log_det: matrix is indefinite");
  return vals.cwiseMax(rel_floor * lmax).array().log().sum();
}

Vector principal_cosines(const Matrix& a_rows, const Matrix& b_rows) {
  const Matrix cross = a_rows * b_rows.transpose();
  Eigen::JacobiSVD<Matrix> svd(cross);
  return svd.singularValues().cwiseMin(1.0);
}

double max_principal_angle(const Matrix& a_rows, const Matrix& b_rows) {
  if (a_rows.rows() != b_rows.rows()) {
    throw std::invalid_argument("max_principal_angle: row spaces of different rank");
  }
  if (a_rows.rows() == 0) return 0.0;
  // sin of the largest angle is the norm of b's component outside span(a);
  // this stays accurate for tiny angles where acos does not.
  const Matrix residual = b_rows - (b_rows * a_rows.transpose()) * a_rows;
  Eigen::JacobiSVD<Matrix> svd(residual);
  return std::asin(std::min(1.0, svd.singularValues()(0)));
}

}  // namespace scs::linalg
