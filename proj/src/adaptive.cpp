#include "scs/adaptive.hpp"

#include "scs/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scs {

AcquisitionState AcquisitionState::start(const GmmModel& model, double sigma2, int block_size, int budget) {
  if (sigma2 < 0.0) throw std::invalid_argument("AcquisitionState: negative noise variance");
  if (block_size < 1) throw std::invalid_argument("AcquisitionState: block size must be >= 1");
  AcquisitionState s;
  s.rows = Matrix(0, model.dimension());
  s.measurements = Vector(0);
  s.sigma2 = sigma2;
  s.block_size = block_size;
  s.budget = budget;
  s.class_log_likelihoods = Vector::Zero(model.size());
  s.class_priors = model.priors();
  return s;
}

void AcquisitionState::append(const Matrix& block, const Vector& y) {
  if (block.cols() != rows.cols()) throw std::invalid_argument("AcquisitionState::append: dimension mismatch");
  if (block.rows() != y.size()) throw std::invalid_argument("AcquisitionState::append: one measurement per row");
  Matrix stacked(rows.rows() + block.rows(), rows.cols());
  stacked << rows, block;
  Vector ys(measurements.size() + y.size());
  ys << measurements, y;
  rows = std::move(stacked);
  measurements = std::move(ys);
}

namespace {

Matrix condition_on_rows(const Matrix& cov, const Matrix& rows, double sigma2) {
  const auto n = cov.rows();
  if (rows.rows() == 0) {
    Matrix p = cov;
    p.diagonal().array() += sigma2;
    return p;
  }
  Matrix inner = rows * cov * rows.transpose();
  inner.diagonal().array() += sigma2;
  const auto inv = linalg::floored_spd(inner);
  const Matrix gain = cov * rows.transpose() * inv.inverse;  // N x r
  const Matrix residual_map = Matrix::Identity(n, n) - gain * rows;
  // Joseph form keeps the result PSD under round-off.
  Matrix p = residual_map * cov * residual_map.transpose();
  if (sigma2 > 0.0) p += sigma2 * gain * gain.transpose();
  p = 0.5 * (p + p.transpose());
  p.diagonal().array() += sigma2;
  return p;
}

void check_block(const Matrix& block, Eigen::Index n) {
  if (block.cols() != n) throw std::invalid_argument("sensing block has wrong dimension");
  if (block.rows() < 1) throw std::invalid_argument("sensing block is empty");
}

double class_log_det(const Matrix& block, const Matrix& p, int g) {
  try {
    return linalg::floored_log_det(block * p * block.transpose());
  } catch (const NumericalError& e) {
    throw NumericalError("projected posterior of class " + std::to_string(g) + " is not PD: " + e.what());
  }
}

Matrix class_inverse_times(const Matrix& block, const Matrix& p, int g) {
  const Matrix proj = block * p;  // b x N
  try {
    const auto inv = linalg::floored_spd(proj * block.transpose());
    return inv.inverse * proj;
  } catch (const NumericalError& e) {
    throw NumericalError("projected posterior of class " + std::to_string(g) + " is not PD: " + e.what());
  }
}

}  // namespace

PosteriorMatrices posterior_matrices(const AcquisitionState& state, const GmmModel& model) {
  if (state.dimension() != model.dimension()) throw std::invalid_argument("posterior_matrices: dimension mismatch");
  if (state.class_priors.size() != model.size()) throw std::invalid_argument("posterior_matrices: prior count mismatch");
  PosteriorMatrices out;
  out.per_class.reserve(static_cast<std::size_t>(model.size()));
  Matrix average_cov = Matrix::Zero(model.dimension(), model.dimension());
  for (int g = 0; g < model.size(); ++g) {
    const auto& c = model.component(g);
    out.per_class.push_back(condition_on_rows(c.covariance, state.rows, state.sigma2));
    average_cov += state.class_priors(g) * c.covariance;
  }
  out.average = condition_on_rows(average_cov, state.rows, state.sigma2);
  return out;
}

Matrix class_posterior(const AcquisitionState& state, const GaussianComponent& component) {
  if (state.dimension() != component.dimension()) throw std::invalid_argument("class_posterior: dimension mismatch");
  return condition_on_rows(component.covariance, state.rows, state.sigma2);
}

double mu_measure(const Matrix& block, const PosteriorMatrices& posterior, const Vector& priors) {
  check_block(block, posterior.average.rows());
  double mu = class_log_det(block, posterior.average, -1);
  for (std::size_t g = 0; g < posterior.per_class.size(); ++g) {
    const double w = priors(static_cast<Eigen::Index>(g));
    if (w == 0.0) continue;
    mu -= w * class_log_det(block, posterior.per_class[g], static_cast<int>(g));
  }
  return 0.5 * mu;
}

double mu_measure(const Matrix& block, const AcquisitionState& state, const GmmModel& model) {
  return mu_measure(block, posterior_matrices(state, model), state.class_priors);
}

Matrix mu_gradient(const Matrix& block, const PosteriorMatrices& posterior, const Vector& priors) {
  check_block(block, posterior.average.rows());
  Matrix grad = class_inverse_times(block, posterior.average, -1);
  for (std::size_t g = 0; g < posterior.per_class.size(); ++g) {
    const double w = priors(static_cast<Eigen::Index>(g));
    if (w == 0.0) continue;
    grad -= w * class_inverse_times(block, posterior.per_class[g], static_cast<int>(g));
  }
  return grad;
}

Matrix mu_gradient(const Matrix& block, const AcquisitionState& state, const GmmModel& model) {
  return mu_gradient(block, posterior_matrices(state, model), state.class_priors);
}

namespace {

BlockDesign ascend(Matrix rows, const PosteriorMatrices& posterior, const Vector& priors, const AscentOptions& options) {
  BlockDesign design;
  design.initial_mu = design.mu = mu_measure(rows, posterior, priors);
  design.rows = std::move(rows);
  double step = options.initial_step;
  for (int it = 0; it < options.max_iterations; ++it) {
    Matrix grad = mu_gradient(design.rows, posterior, priors);
    // Tangent part on the orthonormal-row manifold; its squared norm is the
    // slope used in the sufficient-increase test.
    grad -= 0.5 * (grad * design.rows.transpose() + design.rows * grad.transpose()) * design.rows;
    const double slope = grad.squaredNorm();
    if (!(slope > 0.0)) break;
    bool accepted = false;
    Matrix candidate;
    double candidate_mu = design.mu;
    for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      try {
        candidate = linalg::orthonormalize_rows(design.rows + step * grad);
        candidate_mu = mu_measure(candidate, posterior, priors);
      } catch (const std::exception&) {
        continue;
      }
      if (candidate_mu > design.mu && candidate_mu >= design.mu + options.armijo * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double improvement = (candidate_mu - design.mu) / std::max(std::abs(design.mu), 1e-300);
    design.rows = std::move(candidate);
    design.mu = candidate_mu;
    design.iterations = it + 1;
    if (improvement < options.tolerance) break;
    step *= 2.0;
  }
  return design;
}

}  // namespace

BlockDesign design_classification_block(const AcquisitionState& state, const GmmModel& model, int b,
                                        std::uint64_t seed, const AscentOptions& options) {
  const auto n = model.dimension();
  if (b < 1 || b > n) throw std::invalid_argument("design_classification_block: need 1 <= b <= N");
  if (options.restarts < 1) throw std::invalid_argument("design_classification_block: restarts must be >= 1");
  if (state.remaining() < b) {
    throw std::invalid_argument("design_classification_block: measurement budget exhausted (" +
                                std::to_string(state.remaining()) + " left, block of " + std::to_string(b) + ")");
  }
  const auto posterior = posterior_matrices(state, model);
  BlockDesign best = ascend(random_orthonormal(b, n, seed).rows(), posterior, state.class_priors, options);
  for (int r = 1; r < options.restarts; ++r) {
    const auto start = random_orthonormal(b, n, derive_seed(seed, static_cast<std::uint64_t>(r)));
    auto d = ascend(start.rows(), posterior, state.class_priors, options);
    if (d.mu > best.mu) best = std::move(d);
  }
  return best;
}

SensingMatrix mi_optimal_step2(const AcquisitionState& state, const GmmModel& model, int gamma, Eigen::Index m) {
  if (gamma < 0 || gamma >= model.size()) throw std::invalid_argument("mi_optimal_step2: class index out of range");
  if (m < 1 || m > model.dimension()) throw std::invalid_argument("mi_optimal_step2: need 1 <= m <= N");
  const Matrix p = class_posterior(state, model.component(gamma));
  const auto eig = linalg::symmetric_eigen(p);
  return SensingMatrix(eig.vectors.leftCols(m).transpose());
}

}  // namespace scs
