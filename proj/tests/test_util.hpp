#pragma once

#include "scs/gmm.hpp"
#include "scs/random.hpp"

#include <cmath>
#include <vector>

namespace scs::testing {

inline Matrix random_spd(Eigen::Index n, Rng& rng, double ridge = 0.1) {
  const Matrix a = rng.gaussian(n, n);
  Matrix s = a * a.transpose() / static_cast<double>(n);
  s.diagonal().array() += ridge;
  return 0.5 * (s + s.transpose());
}

/// G random zero-mean components with random priors.
inline GmmModel random_model(Eigen::Index n, int g, Rng& rng, double ridge = 0.1) {
  Vector w(g);
  for (int i = 0; i < g; ++i) w(i) = 0.2 + rng.uniform();
  w /= w.sum();
  std::vector<GaussianComponent> comps;
  for (int i = 0; i < g; ++i)
    comps.push_back(GaussianComponent::from_covariance(Vector::Zero(n), random_spd(n, rng, ridge), w(i)));
  return GmmModel(std::move(comps));
}

inline Matrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

/// log det by LU, independent of the library's eigenvalue path.
inline double lu_log_det(const Matrix& a) { return std::log(a.fullPivLu().determinant()); }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace scs::testing
