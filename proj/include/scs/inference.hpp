#pragma once

#include "scs/adaptive.hpp"
#include "scs/gmm.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace scs {

/// Wiener gain W with alpha = W y,
///   W = Lambda A^T (A Lambda A^T + s2 I)^-1,  A = Phi V,
/// the closed-form minimizer of ||y - A alpha||^2 + s2 alpha^T Lambda^-1 alpha.
/// The inner inverse uses eigenvalue flooring (needed when s2 = 0).
/// `rows` may be any stack of sensing rows; orthonormality is not required.
Matrix wiener_gain(const Matrix& rows, const GaussianComponent& component, double sigma2);

/// Coefficients in the component basis for zero-mean measurements y.
Vector wiener_coefficients(const Vector& y, const Matrix& rows, const GaussianComponent& component, double sigma2);

/// Terms of the joint MAP objective over (alpha, g) at coefficients alpha,
/// i.e. -2 s2 log p(y, alpha | g) up to a constant. log|Lambda| does not
/// change the Wiener solution but does matter when comparing classes.
/// Eigenvalues are floored at 1e-10 * lambda_max.
struct MapObjective {
  double residual = 0.0;      // ||y - Phi V alpha||^2
  double prior_energy = 0.0;  // alpha^T Lambda^-1 alpha
  double log_det = 0.0;       // log|Lambda|
  double total = 0.0;         // residual + s2 * (prior_energy + log_det); residual alone at s2 = 0
};
MapObjective map_objective(const Vector& y, const Matrix& rows, const GaussianComponent& component, double sigma2,
                           const Vector& alpha);

struct ReconstructionResult {
  int selected_class = 0;
  Vector coefficients;
  Vector signal_estimate;
  Vector objective_values;  // per class, MapObjective::total
};

/// MAP model selection and reconstruction for a fixed stack of rows.
/// Builds one Wiener gain per class up front so it can be applied to many
/// signals. Selection takes the smallest MapObjective::total, lowest index
/// on ties.
/// With s2 = 0 every class usually reproduces y (residual ~ 0), so residuals
/// within 1e-9 * ||y||^2 of the best are treated as tied and the tie goes to
/// the smallest y^T Sigma_{y|g}^-1 y + log|Sigma_{y|g}| (the map_classify
/// score), then the lowest index.
class MapReconstructor {
 public:
  MapReconstructor(Matrix rows, const GmmModel& model, double sigma2);

  ReconstructionResult operator()(const Vector& y) const;
  const Matrix& rows() const { return rows_; }

 private:
  Matrix rows_;
  const GmmModel* model_;
  double sigma2_;
  std::vector<Matrix> gains_;
  std::vector<Matrix> projected_bases_;  // Phi V_g
  std::vector<Vector> projected_means_;  // Phi mu_g
  std::vector<Vector> inverse_eigenvalues_;
  std::vector<double> log_dets_;
  std::vector<Matrix> measurement_inverses_;  // only for s2 = 0
  std::vector<double> measurement_log_dets_;
};

ReconstructionResult map_reconstruct(const Vector& y, const Matrix& rows, const GmmModel& model, double sigma2);

/// log N(y; Phi mu_g, Phi Sigma_g Phi^T + s2 I) for every class.
Vector class_log_likelihoods(const Matrix& rows, const Vector& y, const GmmModel& model, double sigma2);

/// argmin_g  y^T Sigma_{y|g}^-1 y + log|Sigma_{y|g}|  (no prior term),
/// lowest index on ties.
int map_classify(const Matrix& rows, const Vector& y, const GmmModel& model, double sigma2);
int map_classify(const AcquisitionState& state, const GmmModel& model);

struct MapEmResult {
  GmmModel model;
  std::vector<int> assignments;
  /// Total of the selected-class objective over all signals, one entry per
  /// E-step (objective_trace[t] is evaluated with the model after t updates).
  std::vector<double> objective_trace;
};

/// MAP-EM from compressed measurements sharing one stack of rows:
/// `measurements` is S x M (one signal per row). Each iteration runs MAP
/// reconstruction on every signal and refreshes the model from the
/// estimates with m_step_update. kappa = 0 returns the initial model.
MapEmResult map_em(const Matrix& measurements, const Matrix& rows, const GmmModel& init, double sigma2, int kappa,
                   const MStepOptions& options = {});

}  // namespace scs
