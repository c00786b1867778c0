#pragma once

#include "scs/linalg.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace scs {

/// PCA basis of a covariance matrix: columns of `basis` are eigenvectors in
/// descending eigenvalue order, each with its first nonzero entry positive.
struct Eigendecomposition {
  Matrix basis;
  Vector eigenvalues;
};

/// Eigendecomposition of a symmetric PSD matrix.
///
/// Rejects (std::invalid_argument) input whose symmetry residual exceeds
/// 1e-10 relative to its largest entry, and input with an eigenvalue below
/// -1e-8 * max|lambda|. Smaller negative eigenvalues are clamped to zero.
Eigendecomposition spd_eigendecompose(const Matrix& covariance);

/// One Gaussian of the mixture together with its PCA dictionary block.
struct GaussianComponent {
  Vector mean;
  Matrix covariance;
  Matrix basis;
  Vector eigenvalues;
  double prior = 1.0;

  Eigen::Index dimension() const { return mean.size(); }

  /// Builds the component and its basis through spd_eigendecompose.
  static GaussianComponent from_covariance(Vector mean, Matrix covariance, double prior);
  /// Builds the component from a known orthonormal basis and spectrum;
  /// the covariance is assembled as basis * diag(eigenvalues) * basis^T.
  static GaussianComponent from_spectrum(Vector mean, Matrix basis, Vector eigenvalues,
                                         double prior);
};

/// Ordered set of components over a shared dimension; priors sum to one.
class GmmModel {
 public:
  explicit GmmModel(std::vector<GaussianComponent> components);

  const std::vector<GaussianComponent>& components() const { return components_; }
  const GaussianComponent& component(int g) const { return components_.at(static_cast<std::size_t>(g)); }
  int size() const { return static_cast<int>(components_.size()); }
  Eigen::Index dimension() const { return components_.front().dimension(); }
  Vector priors() const;

  /// Structured dictionary D = [V_1 ... V_G] (N x GN).
  Matrix dictionary() const;
  /// Prior-weighted covariance sum_g p(g) Sigma_g.
  Matrix average_covariance() const;
  /// Same components with new priors (validated to sum to one).
  GmmModel with_priors(const Vector& priors) const;

 private:
  std::vector<GaussianComponent> components_;
};

/// S x N signals, one per row.
struct SignalBatch {
  Matrix signals;
  std::vector<int> labels;      // component index per signal; empty when unknown
  Vector dc_offsets;            // per-signal mean removed at ingestion; empty when none
  nlohmann::json provenance = nlohmann::json::object();

  Eigen::Index size() const { return signals.rows(); }
  Eigen::Index dimension() const { return signals.cols(); }
  bool labeled() const { return !labels.empty(); }
};

/// Zero-mean Bhattacharyya distance
///   1/2 ln( |(S0 + S1)/2| / sqrt(|S0| |S1|) )
/// with every eigenvalue floored at 1e-10 * lambda_max.
double bhattacharyya_distance(const GaussianComponent& c0, const GaussianComponent& c1);

struct SynthParams {
  int dimension = 0;
  double r = 1.0;      // (0, 1]
  double beta = 4.0;   // [4, 8]
  int omega = 3;       // {3, 4}
};

/// Zero-mean component with spectrum r * 10^beta * i^-omega (i = 1..N) and
/// eigenvectors from the left singular basis of an N x N standard Gaussian
/// matrix drawn from `seed`.
GaussianComponent synth_covariance(const SynthParams& params, std::uint64_t seed);

struct SyntheticPair {
  GaussianComponent first;
  GaussianComponent second;
  SynthParams first_params;
  SynthParams second_params;
  double distance = 0.0;
  int attempts = 0;
};

/// Rejection-samples random (r, beta, omega, seed) pairs until the
/// Bhattacharyya distance lies in [bd_min, bd_max). Throws std::runtime_error
/// after `max_attempts` misses.
SyntheticPair synth_pair_in_range(int dimension, double bd_min, double bd_max, std::uint64_t seed,
                                  int max_attempts = 10000);

/// Two-class model from a synthetic pair with equal priors.
GmmModel two_class_model(const SyntheticPair& pair);

/// Draws S labelled clean signals: component g with probability p(g),
/// then x ~ N(mu_g, Sigma_g). Signal i uses its own derived generator.
SignalBatch sample_signals(const GmmModel& model, Eigen::Index count, std::uint64_t seed);

struct MStepOptions {
  /// Added to every refreshed covariance diagonal. Zero reproduces the plain
  /// empirical update; a small positive value keeps models learned from
  /// projected estimates full rank.
  double ridge = 0.0;
};

/// Empirical mean / covariance (1/|S_g| normalization) per assigned class,
/// priors |S_g| / S. Classes with fewer than two members keep their previous
/// mean and covariance but still receive prior |S_g| / S.
GmmModel m_step_update(const GmmModel& previous, const Matrix& signals,
                       std::span<const int> assignments, const MStepOptions& options = {});

}  // namespace scs
