#include "scs/inference.hpp"

#include "scs/parallel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scs {

namespace {

Vector floored_inverse_spectrum(const Vector& eigenvalues) {
  const double lmax = eigenvalues.maxCoeff();
  if (!(lmax > 0.0)) throw NumericalError("component covariance is zero");
  return eigenvalues.cwiseMax(linalg::kEigenFloor * lmax).cwiseInverse();
}

double floored_log_det(const Vector& eigenvalues) {
  return -floored_inverse_spectrum(eigenvalues).array().log().sum();
}

void check_rows(const Matrix& rows, Eigen::Index n) {
  if (rows.cols() != n) throw std::invalid_argument("sensing rows do not match the signal dimension");
  if (rows.rows() < 1) throw std::invalid_argument("at least one measurement is required");
}

}  // namespace

Matrix wiener_gain(const Matrix& rows, const GaussianComponent& component, double sigma2) {
  check_rows(rows, component.dimension());
  if (sigma2 < 0.0) throw std::invalid_argument("wiener_gain: negative noise variance");
  const Matrix a = rows * component.basis;                       // M x N
  const Matrix a_lambda = a * component.eigenvalues.asDiagonal();  // A Lambda
  Matrix inner = a_lambda * a.transpose();
  inner.diagonal().array() += sigma2;
  const auto inv = linalg::floored_spd(inner);
  return a_lambda.transpose() * inv.inverse;
}

Vector wiener_coefficients(const Vector& y, const Matrix& rows, const GaussianComponent& component, double sigma2) {
  if (y.size() != rows.rows()) throw std::invalid_argument("wiener_coefficients: one measurement per row required");
  return wiener_gain(rows, component, sigma2) * y;
}

MapObjective map_objective(const Vector& y, const Matrix& rows, const GaussianComponent& component, double sigma2,
                           const Vector& alpha) {
  MapObjective out;
  out.residual = (y - rows * component.basis * alpha).squaredNorm();
  out.prior_energy = alpha.cwiseAbs2().dot(floored_inverse_spectrum(component.eigenvalues));
  out.log_det = floored_log_det(component.eigenvalues);
  out.total = sigma2 > 0.0 ? out.residual + sigma2 * (out.prior_energy + out.log_det) : out.residual;
  return out;
}

MapReconstructor::MapReconstructor(Matrix rows, const GmmModel& model, double sigma2)
    : rows_(std::move(rows)), model_(&model), sigma2_(sigma2) {
  check_rows(rows_, model.dimension());
  for (const auto& c : model.components()) {
    gains_.push_back(wiener_gain(rows_, c, sigma2));
    projected_bases_.push_back(rows_ * c.basis);
    projected_means_.push_back(rows_ * c.mean);
    inverse_eigenvalues_.push_back(floored_inverse_spectrum(c.eigenvalues));
    log_dets_.push_back(floored_log_det(c.eigenvalues));
    if (sigma2 == 0.0) {
      auto inv = linalg::floored_spd(rows_ * c.covariance * rows_.transpose());
      measurement_inverses_.push_back(std::move(inv.inverse));
      measurement_log_dets_.push_back(inv.log_det);
    }
  }
}

ReconstructionResult MapReconstructor::operator()(const Vector& y) const {
  if (y.size() != rows_.rows()) throw std::invalid_argument("MapReconstructor: measurement length mismatch");
  const int g_count = model_->size();
  ReconstructionResult out;
  out.objective_values.resize(g_count);
  std::vector<Vector> alphas(static_cast<std::size_t>(g_count));
  Vector residuals(g_count);
  for (int g = 0; g < g_count; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    const Vector centered = y - projected_means_[gi];
    alphas[gi] = gains_[gi] * centered;
    residuals(g) = (centered - projected_bases_[gi] * alphas[gi]).squaredNorm();
    out.objective_values(g) =
        sigma2_ > 0.0 ? residuals(g) + sigma2_ * (alphas[gi].cwiseAbs2().dot(inverse_eigenvalues_[gi]) + log_dets_[gi])
                      : residuals(g);
  }
  int best = 0;
  if (sigma2_ > 0.0) {
    for (int g = 1; g < g_count; ++g)
      if (out.objective_values(g) < out.objective_values(best)) best = g;
  } else {
    const double tie = 1e-9 * std::max(y.squaredNorm(), 1e-300);
    const double floor = residuals.minCoeff() + tie;
    best = -1;
    double best_score = 0.0;
    for (int g = 0; g < g_count; ++g) {
      if (residuals(g) > floor) continue;
      const auto gi = static_cast<std::size_t>(g);
      const Vector centered = y - projected_means_[gi];
      const double score = centered.dot(measurement_inverses_[gi] * centered) + measurement_log_dets_[gi];
      if (best < 0 || score < best_score) {
        best = g;
        best_score = score;
      }
    }
  }
  const auto& c = model_->component(best);
  out.selected_class = best;
  out.coefficients = std::move(alphas[static_cast<std::size_t>(best)]);
  out.signal_estimate = c.basis * out.coefficients + c.mean;
  return out;
}

ReconstructionResult map_reconstruct(const Vector& y, const Matrix& rows, const GmmModel& model, double sigma2) {
  return MapReconstructor(rows, model, sigma2)(y);
}

Vector class_log_likelihoods(const Matrix& rows, const Vector& y, const GmmModel& model, double sigma2) {
  check_rows(rows, model.dimension());
  if (y.size() != rows.rows()) throw std::invalid_argument("class_log_likelihoods: one measurement per row required");
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  Vector ll(model.size());
  for (int g = 0; g < model.size(); ++g) {
    const auto& c = model.component(g);
    Matrix cov = rows * c.covariance * rows.transpose();
    cov.diagonal().array() += sigma2;
    linalg::FlooredSpd inv;
    try {
      inv = linalg::floored_spd(cov);
    } catch (const NumericalError& e) {
      throw NumericalError("measurement covariance of class " + std::to_string(g) + " is singular: " + e.what());
    }
    const Vector centered = y - rows * c.mean;
    ll(g) = -0.5 * (centered.dot(inv.inverse * centered) + inv.log_det + static_cast<double>(y.size()) * log_two_pi);
  }
  return ll;
}

int map_classify(const Matrix& rows, const Vector& y, const GmmModel& model, double sigma2) {
  const Vector ll = class_log_likelihoods(rows, y, model, sigma2);
  int best = 0;
  for (int g = 1; g < ll.size(); ++g)
    if (ll(g) > ll(best)) best = g;
  return best;
}

int map_classify(const AcquisitionState& state, const GmmModel& model) {
  return map_classify(state.rows, state.measurements, model, state.sigma2);
}

MapEmResult map_em(const Matrix& measurements, const Matrix& rows, const GmmModel& init, double sigma2, int kappa,
                   const MStepOptions& options) {
  if (kappa < 0) throw std::invalid_argument("map_em: kappa must be >= 0");
  if (measurements.cols() != rows.rows()) throw std::invalid_argument("map_em: measurement width must equal row count");
  MapEmResult result{init, {}, {}};
  const auto s = static_cast<std::size_t>(measurements.rows());
  if (kappa == 0) return result;

  auto e_step = [&](const GmmModel& model, Matrix& estimates, std::vector<int>& labels, std::vector<double>& objective) {
    const MapReconstructor reconstruct(rows, model, sigma2);
    parallel_for(s, [&](std::size_t i) {
      const auto idx = static_cast<Eigen::Index>(i);
      auto r = reconstruct(measurements.row(idx).transpose());
      estimates.row(idx) = r.signal_estimate.transpose();
      labels[i] = r.selected_class;
      objective[i] = r.objective_values(r.selected_class);
    });
    double total = 0.0;
    for (double v : objective) total += v;  // fixed order
    return total;
  };

  Matrix estimates(measurements.rows(), init.dimension());
  std::vector<int> labels(s);
  std::vector<double> objective(s);
  for (int it = 0; it < kappa; ++it) {
    result.objective_trace.push_back(e_step(result.model, estimates, labels, objective));
    result.model = m_step_update(result.model, estimates, labels, options);
  }
  result.objective_trace.push_back(e_step(result.model, estimates, labels, objective));
  result.assignments = labels;
  return result;
}

}  // namespace scs
