#include "scs/gmm.hpp"

#include "scs/parallel.hpp"
#include "scs/random.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace scs {

Eigendecomposition spd_eigendecompose(const Matrix& covariance) {
  if (covariance.rows() == 0 || covariance.rows() != covariance.cols()) {
    throw std::invalid_argument("spd_eigendecompose: expected a non-empty square matrix");
  }
  if (!covariance.allFinite()) throw std::invalid_argument("spd_eigendecompose: non-finite entries");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  const double residual = linalg::symmetry_residual(covariance);
  if (residual > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "spd_eigendecompose: matrix is not symmetric (residual " << residual << ")";
    throw std::invalid_argument(msg.str());
  }
  auto eig = linalg::symmetric_eigen(covariance);
  const double magnitude = eig.values.cwiseAbs().maxCoeff();
  if (eig.values.minCoeff() < -1e-8 * magnitude) {
    std::ostringstream msg;
    msg << "spd_eigendecompose: matrix is not PSD (lambda_min " << eig.values.minCoeff() << ")";
    throw std::invalid_argument(msg.str());
  }
  return {std::move(eig.vectors), eig.values.cwiseMax(0.0)};
}

GaussianComponent GaussianComponent::from_covariance(Vector mean, Matrix covariance, double prior) {
  if (mean.size() != covariance.rows()) {
    throw std::invalid_argument("GaussianComponent: mean / covariance dimension mismatch");
  }
  auto eig = spd_eigendecompose(covariance);
  GaussianComponent c;
  c.mean = std::move(mean);
  c.covariance = 0.5 * (covariance + covariance.transpose());
  c.basis = std::move(eig.basis);
  c.eigenvalues = std::move(eig.eigenvalues);
  c.prior = prior;
  return c;
}

GaussianComponent GaussianComponent::from_spectrum(Vector mean, Matrix basis, Vector eigenvalues,
                                                   double prior) {
  const auto n = mean.size();
  if (basis.rows() != n || basis.cols() != n || eigenvalues.size() != n) {
    throw std::invalid_argument("GaussianComponent: basis / spectrum dimension mismatch");
  }
  GaussianComponent c;
  Matrix cov = basis * eigenvalues.asDiagonal() * basis.transpose();
  c.covariance = 0.5 * (cov + cov.transpose());
  c.mean = std::move(mean);
  c.basis = std::move(basis);
  c.eigenvalues = std::move(eigenvalues);
  c.prior = prior;
  return c;
}

GmmModel::GmmModel(std::vector<GaussianComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("GmmModel: needs at least one component");
  const auto n = components_.front().dimension();
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.dimension() != n || c.covariance.rows() != n || c.basis.rows() != n ||
        c.eigenvalues.size() != n) {
      throw std::invalid_argument("GmmModel: components disagree on dimension");
    }
    if (!(c.prior >= 0.0 && c.prior <= 1.0)) throw std::invalid_argument("GmmModel: prior outside [0, 1]");
    total += c.prior;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("GmmModel: priors sum to " + std::to_string(total));
  }
}

Vector GmmModel::priors() const {
  Vector p(size());
  for (int g = 0; g < size(); ++g) p(g) = components_[static_cast<std::size_t>(g)].prior;
  return p;
}

Matrix GmmModel::dictionary() const {
  const auto n = dimension();
  Matrix d(n, n * size());
  for (int g = 0; g < size(); ++g) d.middleCols(g * n, n) = component(g).basis;
  return d;
}

Matrix GmmModel::average_covariance() const {
  Matrix avg = Matrix::Zero(dimension(), dimension());
  for (const auto& c : components_) avg += c.prior * c.covariance;
  return avg;
}

GmmModel GmmModel::with_priors(const Vector& priors) const {
  if (priors.size() != size()) throw std::invalid_argument("with_priors: wrong length");
  auto comps = components_;
  for (int g = 0; g < size(); ++g) comps[static_cast<std::size_t>(g)].prior = priors(g);
  return GmmModel(std::move(comps));
}

namespace {

double floored_log_det_from_spectrum(const Vector& eigenvalues) {
  const double lmax = eigenvalues.maxCoeff();
  if (!(lmax > 0.0)) throw NumericalError("covariance is singular (lambda_max <= 0)");
  return eigenvalues.cwiseMax(linalg::kEigenFloor * lmax).array().log().sum();
}

}  // namespace

double bhattacharyya_distance(const GaussianComponent& c0, const GaussianComponent& c1) {
  if (c0.dimension() != c1.dimension()) throw std::invalid_argument("bhattacharyya_distance: dimension mismatch");
  const Matrix avg = 0.5 * (c0.covariance + c1.covariance);
  const double ld_avg = linalg::floored_log_det(avg);
  const double ld0 = floored_log_det_from_spectrum(c0.eigenvalues);
  const double ld1 = floored_log_det_from_spectrum(c1.eigenvalues);
  // Both orderings evaluate 0.5*(ld0 + ld1) with the same operands.
  const double d = 0.5 * (ld_avg - 0.5 * (ld0 + ld1));
  return std::max(0.0, d);
}

GaussianComponent synth_covariance(const SynthParams& p, std::uint64_t seed) {
  if (p.dimension < 2) throw std::invalid_argument("synth_covariance: dimension must be >= 2");
  if (!(p.r > 0.0 && p.r <= 1.0)) throw std::invalid_argument("synth_covariance: r outside (0, 1]");
  if (!(p.beta >= 4.0 && p.beta <= 8.0)) throw std::invalid_argument("synth_covariance: beta outside [4, 8]");
  if (p.omega != 3 && p.omega != 4) throw std::invalid_argument("synth_covariance: omega must be 3 or 4");
  const int n = p.dimension;
  Rng rng(seed);
  const Matrix gaussian = rng.gaussian(n, n);
  Eigen::JacobiSVD<Matrix> svd(gaussian, Eigen::ComputeFullU);
  Matrix u = svd.matrixU();
  linalg::fix_column_signs(u);
  Vector spectrum(n);
  const double scale = p.r * std::pow(10.0, p.beta);
  for (int i = 0; i < n; ++i) spectrum(i) = scale * std::pow(static_cast<double>(i + 1), -p.omega);
  return GaussianComponent::from_spectrum(Vector::Zero(n), std::move(u), std::move(spectrum), 1.0);
}

SyntheticPair synth_pair_in_range(int dimension, double bd_min, double bd_max, std::uint64_t seed,
                                  int max_attempts) {
  if (!(bd_min < bd_max)) throw std::invalid_argument("synth_pair_in_range: empty distance range");
  Rng rng(seed);
  auto draw = [&] {
    SynthParams p;
    p.dimension = dimension;
    p.r = 1.0 - rng.uniform();
    p.beta = 4.0 + 4.0 * rng.uniform();
    p.omega = rng.uniform() < 0.5 ? 3 : 4;
    return p;
  };
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    SyntheticPair pair;
    pair.first_params = draw();
    pair.second_params = draw();
    const auto s0 = static_cast<std::uint64_t>(rng.engine()());
    const auto s1 = static_cast<std::uint64_t>(rng.engine()());
    pair.first = synth_covariance(pair.first_params, s0);
    pair.second = synth_covariance(pair.second_params, s1);
    pair.distance = bhattacharyya_distance(pair.first, pair.second);
    if (pair.distance >= bd_min && pair.distance < bd_max) {
      pair.attempts = attempt;
      return pair;
    }
  }
  throw std::runtime_error("synth_pair_in_range: no pair in [" + std::to_string(bd_min) + ", " +
                           std::to_string(bd_max) + ") after " + std::to_string(max_attempts) +
                           " attempts");
}

GmmModel two_class_model(const SyntheticPair& pair) {
  auto a = pair.first;
  auto b = pair.second;
  a.prior = 0.5;
  b.prior = 0.5;
  return GmmModel({std::move(a), std::move(b)});
}

SignalBatch sample_signals(const GmmModel& model, Eigen::Index count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_signals: need at least one signal");
  const auto n = model.dimension();
  const int g_count = model.size();
  std::vector<Matrix> factors;
  factors.reserve(static_cast<std::size_t>(g_count));
  for (const auto& c : model.components()) {
    factors.push_back(c.basis * c.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal());
  }
  Vector cumulative(g_count);
  double acc = 0.0;
  for (int g = 0; g < g_count; ++g) cumulative(g) = (acc += model.component(g).prior);

  SignalBatch batch;
  batch.signals.resize(count, n);
  batch.labels.assign(static_cast<std::size_t>(count), 0);
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const double u = rng.uniform() * acc;
    int g = 0;
    while (g + 1 < g_count && u >= cumulative(g)) ++g;
    const auto& c = model.component(g);
    const Vector z = rng.gaussian(n);
    batch.signals.row(static_cast<Eigen::Index>(i)) = (c.mean + factors[static_cast<std::size_t>(g)] * z).transpose();
    batch.labels[i] = g;
  });
  batch.provenance = {{"generator", "sample_signals"},
                      {"seed", seed},
                      {"count", count},
                      {"components", g_count}};
  return batch;
}

GmmModel m_step_update(const GmmModel& previous, const Matrix& signals, std::span<const int> assignments,
                       const MStepOptions& options) {
  const auto s = signals.rows();
  const auto n = signals.cols();
  if (static_cast<Eigen::Index>(assignments.size()) != s) {
    throw std::invalid_argument("m_step_update: one assignment per signal required");
  }
  if (s == 0) throw std::invalid_argument("m_step_update: empty assignment");
  if (n != previous.dimension()) throw std::invalid_argument("m_step_update: dimension mismatch");
  const int g_count = previous.size();

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(g_count));
  for (Eigen::Index i = 0; i < s; ++i) {
    const int g = assignments[static_cast<std::size_t>(i)];
    if (g < 0 || g >= g_count) throw std::invalid_argument("m_step_update: assignment out of range");
    members[static_cast<std::size_t>(g)].push_back(i);
  }

  std::vector<GaussianComponent> next(static_cast<std::size_t>(g_count));
  parallel_for(static_cast<std::size_t>(g_count), [&](std::size_t g) {
    const auto& idx = members[g];
    const double prior = static_cast<double>(idx.size()) / static_cast<double>(s);
    const auto& prev = previous.component(static_cast<int>(g));
    if (idx.size() < 2) {
      next[g] = prev;
      next[g].prior = prior;
      return;
    }
    Vector mean = Vector::Zero(n);
    for (auto i : idx) mean += signals.row(i).transpose();
    mean /= static_cast<double>(idx.size());
    Matrix centered(static_cast<Eigen::Index>(idx.size()), n);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      centered.row(static_cast<Eigen::Index>(k)) = signals.row(idx[k]) - mean.transpose();
    }
    Matrix cov = (centered.transpose() * centered) / static_cast<double>(idx.size());
    cov = 0.5 * (cov + cov.transpose());
    if (options.ridge > 0.0) cov.diagonal().array() += options.ridge;
    next[g] = GaussianComponent::from_covariance(std::move(mean), std::move(cov), prior);
  });

  // Priors are ratios of integer counts; renormalize away the last-bit drift.
  double total = 0.0;
  for (const auto& c : next) total += c.prior;
  for (auto& c : next) c.prior /= total;
  return GmmModel(std::move(next));
}

}  // namespace scs
