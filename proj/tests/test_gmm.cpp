#include "doctest.h"
#include "test_util.hpp"

#include "scs/gmm.hpp"

#include <cmath>

using namespace scs;
using namespace scs::testing;

TEST_CASE("spd_eigendecompose: identity keeps the identity basis") {
  const auto e = spd_eigendecompose(Matrix::Identity(3, 3));
  CHECK(e.basis == Matrix::Identity(3, 3));
  CHECK(e.eigenvalues == Vector::Ones(3));
}

TEST_CASE("spd_eigendecompose: diagonal input") {
  const auto e = spd_eigendecompose(diag({4, 1}));
  CHECK((e.basis - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(e.eigenvalues(0) == doctest::Approx(4.0));
  CHECK(e.eigenvalues(1) == doctest::Approx(1.0));
}

TEST_CASE("spd_eigendecompose: random SPD round trip and invariants") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_spd(6, rng);
    const auto e = spd_eigendecompose(a);
    const Matrix back = e.basis * e.eigenvalues.asDiagonal() * e.basis.transpose();
    CHECK((a - back).norm() <= 1e-10 * a.norm());
    CHECK((e.basis.transpose() * e.basis - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-8);
    for (int i = 0; i + 1 < 6; ++i) CHECK(e.eigenvalues(i) >= e.eigenvalues(i + 1));
    for (int j = 0; j < 6; ++j) {
      Eigen::Index first = 0;
      while (std::abs(e.basis(first, j)) <= 1e-12) ++first;
      CHECK(e.basis(first, j) > 0.0);
    }
  }
}

TEST_CASE("spd_eigendecompose: rejections and clamping") {
  Matrix ns = diag({1, 1});
  ns(0, 1) = 0.5;
  CHECK_THROWS_AS(spd_eigendecompose(ns), std::invalid_argument);
  CHECK_THROWS_AS(spd_eigendecompose(diag({1, -0.1})), std::invalid_argument);
  const auto e = spd_eigendecompose(diag({1, -1e-12}));
  CHECK(e.eigenvalues(1) == 0.0);
}

TEST_CASE("component invariant: covariance matches basis and spectrum") {
  Rng rng(3);
  const auto c = GaussianComponent::from_covariance(Vector::Zero(5), random_spd(5, rng), 1.0);
  const Matrix back = c.basis * c.eigenvalues.asDiagonal() * c.basis.transpose();
  CHECK((c.covariance - back).norm() <= 1e-8 * (1.0 + c.covariance.norm()));
}

TEST_CASE("GmmModel validation") {
  const auto a = GaussianComponent::from_covariance(Vector::Zero(2), diag({1, 1}), 0.5);
  auto b = a;
  b.prior = 0.4;
  CHECK_THROWS_AS(GmmModel({a, b}), std::invalid_argument);
  const auto c3 = GaussianComponent::from_covariance(Vector::Zero(3), Matrix::Identity(3, 3), 0.5);
  CHECK_THROWS_AS(GmmModel({a, c3}), std::invalid_argument);
  CHECK_THROWS_AS(GmmModel(std::vector<GaussianComponent>{}), std::invalid_argument);
  auto d = a;
  CHECK(GmmModel({a, d}).size() == 2);
}

TEST_CASE("bhattacharyya_distance examples") {
  const auto i2 = GaussianComponent::from_covariance(Vector::Zero(2), diag({1, 1}), 0.5);
  const auto four = GaussianComponent::from_covariance(Vector::Zero(2), diag({4, 4}), 0.5);
  CHECK(bhattacharyya_distance(i2, i2) == 0.0);
  // Closed form for diagonal covariances: 1/2 sum_i ln(((a_i + b_i) / 2) / sqrt(a_i b_i)).
  const double expected = 0.5 * 2.0 * std::log(2.5 / 2.0);
  CHECK(bhattacharyya_distance(i2, four) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.223144).epsilon(1e-6));
  CHECK(bhattacharyya_distance(i2, four) == bhattacharyya_distance(four, i2));
}

TEST_CASE("bhattacharyya_distance: symmetric, nonnegative, matches direct determinants") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = GaussianComponent::from_covariance(Vector::Zero(5), random_spd(5, rng), 0.5);
    const auto b = GaussianComponent::from_covariance(Vector::Zero(5), random_spd(5, rng), 0.5);
    const double d = bhattacharyya_distance(a, b);
    CHECK(d == bhattacharyya_distance(b, a));
    CHECK(d > 0.0);
    const double direct = 0.5 * (lu_log_det(0.5 * (a.covariance + b.covariance)) -
                                 0.5 * (lu_log_det(a.covariance) + lu_log_det(b.covariance)));
    CHECK(rel_err(d, direct) < 1e-9);
  }
}

TEST_CASE("synth_covariance spectrum example and determinism") {
  const auto c = synth_covariance({4, 1.0, 4.0, 3}, 42);
  CHECK(c.eigenvalues(0) == doctest::Approx(10000.0).epsilon(1e-12));
  CHECK(c.eigenvalues(1) == doctest::Approx(1250.0).epsilon(1e-12));
  CHECK(c.eigenvalues(2) == doctest::Approx(10000.0 / 27.0).epsilon(1e-12));
  CHECK(c.eigenvalues(3) == doctest::Approx(156.25).epsilon(1e-12));
  CHECK(c.mean == Vector::Zero(4));
  const auto again = synth_covariance({4, 1.0, 4.0, 3}, 42);
  CHECK(c.covariance == again.covariance);
  const auto other = synth_covariance({4, 1.0, 4.0, 3}, 43);
  CHECK((c.covariance - other.covariance).norm() > 0.0);
}

TEST_CASE("synth_covariance spectrum formula holds across the parameter ranges") {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    SynthParams p{2 + trial % 15, 1.0 - rng.uniform(), 4.0 + 4.0 * rng.uniform(), trial % 2 ? 3 : 4};
    const auto c = synth_covariance(p, static_cast<std::uint64_t>(trial));
    for (int i = 0; i < p.dimension; ++i) {
      const double expected = p.r * std::pow(10.0, p.beta) * std::pow(i + 1.0, -p.omega);
      CHECK(rel_err(c.eigenvalues(i), expected) <= 1e-12);
    }
    const Matrix back = c.basis * c.eigenvalues.asDiagonal() * c.basis.transpose();
    CHECK((back - c.covariance).norm() <= 1e-8 * (1.0 + c.covariance.norm()));
  }
}

TEST_CASE("synth_covariance rejects out-of-range parameters") {
  CHECK_THROWS_AS(synth_covariance({1, 1.0, 4.0, 3}, 0), std::invalid_argument);
  CHECK_THROWS_AS(synth_covariance({4, 0.0, 4.0, 3}, 0), std::invalid_argument);
  CHECK_THROWS_AS(synth_covariance({4, 1.0, 9.0, 3}, 0), std::invalid_argument);
  CHECK_THROWS_AS(synth_covariance({4, 1.0, 4.0, 5}, 0), std::invalid_argument);
}

TEST_CASE("synth_pair_in_range hits the requested bucket") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto pair = synth_pair_in_range(64, 30.0, 46.0, seed);
    const double bd = bhattacharyya_distance(pair.first, pair.second);
    CHECK(bd >= 30.0);
    CHECK(bd < 46.0);
    CHECK(bd == pair.distance);
  }
  CHECK_THROWS(synth_pair_in_range(8, 1e6, 2e6, 1, 20));
}

TEST_CASE("sample_signals: degenerate distribution gives zeros") {
  const auto c = GaussianComponent::from_covariance(Vector::Zero(3), Matrix::Zero(3, 3), 1.0);
  const auto batch = sample_signals(GmmModel({c}), 20, 1);
  CHECK(batch.signals == Matrix::Zero(20, 3));
  CHECK(batch.labels == std::vector<int>(20, 0));
}

TEST_CASE("sample_signals: Monte-Carlo covariance and label frequencies") {
  const auto c = GaussianComponent::from_covariance(Vector::Zero(2), Matrix::Identity(2, 2), 1.0);
  const auto batch = sample_signals(GmmModel({c}), 50000, 7);
  const Matrix cov = batch.signals.transpose() * batch.signals / 50000.0;
  CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 0.05);

  const auto a = GaussianComponent::from_covariance(Vector::Zero(2), Matrix::Identity(2, 2), 0.3);
  const auto b = GaussianComponent::from_covariance(Vector::Zero(2), Matrix::Identity(2, 2), 0.7);
  const auto mixed = sample_signals(GmmModel({a, b}), 100000, 8);
  const double first = static_cast<double>(std::count(mixed.labels.begin(), mixed.labels.end(), 0)) / 100000.0;
  CHECK(std::abs(first - 0.3) <= 0.01);
}

TEST_CASE("sample_signals is deterministic") {
  Rng rng(1);
  const auto model = random_model(4, 3, rng);
  const auto a = sample_signals(model, 100, 99);
  const auto b = sample_signals(model, 100, 99);
  CHECK(a.signals == b.signals);
  CHECK(a.labels == b.labels);
}

TEST_CASE("m_step_update examples") {
  const auto c = GaussianComponent::from_covariance(Vector::Zero(2), Matrix::Identity(2, 2), 0.5);
  const GmmModel prev({c, c});
  Matrix x(2, 2);
  x << 1, 0, -1, 0;
  std::vector<int> all_first{0, 0};
  const auto m = m_step_update(prev, x, all_first);
  CHECK(m.component(0).mean == Vector::Zero(2));
  CHECK(m.component(0).covariance == diag({1, 0}));
  CHECK(m.component(0).prior == 1.0);
  CHECK(m.component(1).prior == 0.0);
  CHECK(m.component(1).covariance == Matrix::Identity(2, 2));
  CHECK_THROWS_AS(m_step_update(prev, Matrix(0, 2), std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("m_step_update recovers a known covariance and is idempotent") {
  Rng rng(21);
  const auto truth = GaussianComponent::from_covariance(Vector::Zero(4), random_spd(4, rng), 1.0);
  const auto batch = sample_signals(GmmModel({truth}), 20000, 5);
  const auto a = m_step_update(GmmModel({truth}), batch.signals, batch.labels);
  CHECK((a.component(0).covariance - truth.covariance).norm() <= 0.05 * truth.covariance.norm());
  const auto b = m_step_update(a, batch.signals, batch.labels);
  CHECK(a.component(0).covariance == b.component(0).covariance);
  CHECK(a.component(0).mean == b.component(0).mean);
  CHECK(a.component(0).basis == b.component(0).basis);
}
