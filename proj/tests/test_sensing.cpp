#include "doctest.h"
#include "test_util.hpp"

#include "scs/inference.hpp"
#include "scs/sensing.hpp"

using namespace scs;
using namespace scs::testing;

TEST_CASE("random_orthonormal examples") {
  const auto sq = random_orthonormal(3, 3, 1);
  CHECK((sq.rows() * sq.rows().transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  const auto wide = random_orthonormal(2, 8, 1);
  CHECK((wide.rows() * wide.rows().transpose() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(random_orthonormal(2, 8, 1).rows() == wide.rows());
  CHECK((random_orthonormal(2, 8, 2).rows() - wide.rows()).norm() > 0.0);
  CHECK_THROWS_AS(random_orthonormal(4, 3, 1), std::invalid_argument);
}

TEST_CASE("SensingMatrix rejects non-orthonormal rows") {
  Matrix m(2, 3);
  m << 1, 0, 0, 1, 1, 0;
  CHECK_THROWS_AS(SensingMatrix{m}, std::invalid_argument);
}

TEST_CASE("eigen_sensing examples") {
  const auto c = GaussianComponent::from_covariance(Vector::Zero(3), diag({4, 2, 1}), 1.0);
  Matrix expected(2, 3);
  expected << 1, 0, 0, 0, 1, 0;
  CHECK(eigen_sensing(c, 2).rows() == expected);
  Rng rng(3);
  const auto r = GaussianComponent::from_covariance(Vector::Zero(6), random_spd(6, rng), 1.0);
  const Matrix phi = eigen_sensing(r, 4).rows();
  Matrix lead = Matrix::Zero(4, 6);
  lead.leftCols(4).setIdentity();
  CHECK((phi * r.basis - lead).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("eigen_sensing: expected noiseless error equals the eigenvalue tail") {
  Rng rng(4);
  const int n = 8, m = 3;
  const auto c = GaussianComponent::from_covariance(Vector::Zero(n), random_spd(n, rng), 1.0);
  const GmmModel model({c});
  const Matrix phi = eigen_sensing(c, m).rows();
  const auto batch = sample_signals(model, 100000, 5);
  const MapReconstructor reconstruct(phi, model, 0.0);
  double err = 0.0;
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    const Vector x = batch.signals.row(i).transpose();
    err += (reconstruct(phi * x).signal_estimate - x).squaredNorm();
  }
  err /= static_cast<double>(batch.size());
  const double tail = c.eigenvalues.tail(n - m).sum();
  CHECK(rel_err(err, tail) <= 0.02);
}

TEST_CASE("eigen_sensing with m = N recovers signals exactly") {
  Rng rng(6);
  const auto c = GaussianComponent::from_covariance(Vector::Zero(5), random_spd(5, rng), 1.0);
  const Matrix phi = eigen_sensing(c, 5).rows();
  const Vector x = c.basis * rng.gaussian(5);
  const Vector xh = map_reconstruct(phi * x, phi, GmmModel({c}), 0.0).signal_estimate;
  CHECK((xh - x).norm() <= 1e-10 * x.norm());
}

TEST_CASE("average_basis examples") {
  Rng rng(7);
  const auto a = GaussianComponent::from_covariance(Vector::Zero(4), random_spd(4, rng), 1.0);
  CHECK(average_basis(GmmModel({a})) == a.basis);
  auto a1 = a, b = GaussianComponent::from_covariance(Vector::Zero(4), random_spd(4, rng), 0.0);
  CHECK(average_basis(GmmModel({a1, b})) == a.basis);
  a1.prior = 0.5;
  b.prior = 0.5;
  const Matrix e = average_basis(GmmModel({a1, b}));
  CHECK((e - 0.5 * (a.basis + b.basis)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("procrustes base case") {
  CHECK((procrustes(Matrix::Identity(4, 4), Matrix::Identity(4, 4)) - Matrix::Identity(4, 4)).norm() < 1e-14);
}

TEST_CASE("rip_ab with one component equals eigen_sensing") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = GaussianComponent::from_covariance(Vector::Zero(6), random_spd(6, rng), 1.0);
    const Matrix a = rip_ab(GmmModel({c}), 3).rows();
    const Matrix b = eigen_sensing(c, 3).rows();
    CHECK(linalg::max_principal_angle(a, b) <= 1e-8);
  }
}

TEST_CASE("rip_ab beats random orthogonal matrices on its objective") {
  Rng rng(9);
  const auto model = random_model(6, 3, rng);
  const Matrix e = average_basis(model);
  const Matrix b = rip_ab(model, 6).rows();
  const double best = rip_objective(b, e);
  for (int i = 0; i < 1000; ++i) {
    const Matrix q = random_orthonormal(6, 6, 1000 + static_cast<std::uint64_t>(i)).rows();
    CHECK(best <= rip_objective(q, e));
  }
}

TEST_CASE("rip_ab is deterministic and invariant to swapping identical components") {
  Rng rng(10);
  const auto a = GaussianComponent::from_covariance(Vector::Zero(5), random_spd(5, rng), 0.25);
  auto b = GaussianComponent::from_covariance(Vector::Zero(5), random_spd(5, rng), 0.5);
  const GmmModel m1({a, b, a}), m2({a, a, b});
  CHECK(rip_ab(m1, 3).rows() == rip_ab(m1, 3).rows());
  const Matrix r1 = rip_ab(m1, 3).rows(), r2 = rip_ab(m2, 3).rows();
  // Summation order differs, so compare to round-off and by subspace.
  CHECK((r1 - r2).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("every design returns orthonormal rows") {
  Rng rng(12);
  const auto model = random_model(7, 2, rng);
  for (const Matrix& m : {random_orthonormal(3, 7, 1).rows(), eigen_sensing(model.component(0), 4).rows(),
                          rip_ab(model, 5).rows()})
    CHECK(linalg::orthonormality_residual(m) <= 1e-8);
}

TEST_CASE("dictionary identities for orthonormal sensing rows") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + trial % 13, g = 1 + trial % 3, m = 1 + trial % n;
    const auto model = random_model(n, g, rng);
    const Matrix d = model.dictionary();
    const Matrix phi = random_orthonormal(m, n, static_cast<std::uint64_t>(trial)).rows();
    const double lhs = (d.transpose() * phi.transpose() * phi * d - Matrix::Identity(g * n, g * n)).squaredNorm();
    const double rhs = (phi * d * d.transpose() * phi.transpose() - Matrix::Identity(m, m)).squaredNorm();
    CHECK(rel_err(lhs - rhs, static_cast<double>(g * n - m)) <= 1e-6);
    const double scaled = (static_cast<double>(g) * phi * phi.transpose() - Matrix::Identity(m, m)).squaredNorm();
    CHECK(std::abs(rhs - scaled) <= 1e-8 * std::max(1.0, scaled));
  }
}
