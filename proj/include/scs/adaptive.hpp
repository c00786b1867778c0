#pragma once

#include "scs/gmm.hpp"
#include "scs/sensing.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace scs {

/// Everything known about one signal's acquisition so far.
///
/// `rows` stacks the sensing blocks used so far. Each block has orthonormal
/// rows, but blocks are not orthogonalized against each other, so the stack
/// as a whole need not be orthonormal.
struct AcquisitionState {
  Matrix rows;
  Vector measurements;
  double sigma2 = 0.0;
  int block_size = 1;
  int budget = std::numeric_limits<int>::max();
  /// Joint log p(y | g) of all measurements so far (zero before any).
  Vector class_log_likelihoods;
  /// Class probabilities used as p(g) by the design criteria; starts at the
  /// model priors and is replaced by Bayes posteriors during sequential tests.
  Vector class_priors;

  /// Empty acquisition for a model of dimension N.
  static AcquisitionState start(const GmmModel& model, double sigma2, int block_size = 1,
                                int budget = std::numeric_limits<int>::max());

  Eigen::Index measurement_count() const { return rows.rows(); }
  Eigen::Index dimension() const { return rows.cols(); }
  int remaining() const { return budget - static_cast<int>(measurement_count()); }
  bool empty() const { return rows.rows() == 0; }

  /// Stacks a block and its measurements. Likelihoods and priors are left to
  /// the caller.
  void append(const Matrix& block, const Vector& y);
};

/// Posterior covariances given the rows so far,
///   P_g  = Sigma_g - Sigma_g Phi^T (Phi Sigma_g Phi^T + s2 I)^-1 Phi Sigma_g + s2 I_N
///   Pbar = the same with Sigma_bar = sum_g p(g) Sigma_g,
/// with p(g) taken from the state's class_priors. Without history these
/// reduce to Sigma_g + s2 I and Sigma_bar + s2 I.
struct PosteriorMatrices {
  std::vector<Matrix> per_class;
  Matrix average;
};
PosteriorMatrices posterior_matrices(const AcquisitionState& state, const GmmModel& model);

/// Posterior covariance for a single class (the step-2 matrix).
Matrix class_posterior(const AcquisitionState& state, const GaussianComponent& component);

/// 1/2 (log|Phi Pbar Phi^T| - sum_g p(g) log|Phi P_g Phi^T|).
/// Classes with zero weight are skipped. Depends only on the row space of
/// `block`; rows need not be normalized, which keeps finite differences valid.
double mu_measure(const Matrix& block, const PosteriorMatrices& posterior, const Vector& priors);
double mu_measure(const Matrix& block, const AcquisitionState& state, const GmmModel& model);

/// d mu / d Phi = (Phi Pbar Phi^T)^-1 Phi Pbar - sum_g p(g) (Phi P_g Phi^T)^-1 Phi P_g.
/// This is the exact derivative of mu_measure (the 1/2 cancels the 2 from
/// differentiating the quadratic form).
Matrix mu_gradient(const Matrix& block, const PosteriorMatrices& posterior, const Vector& priors);
Matrix mu_gradient(const Matrix& block, const AcquisitionState& state, const GmmModel& model);

struct AscentOptions {
  double initial_step = 0.1;
  double tolerance = 1e-6;  // relative improvement of mu
  int max_iterations = 200;
  int max_halvings = 40;
  double armijo = 1e-4;  // sufficient-increase fraction of step * slope
  int restarts = 4;      // independent random starts; the best ascent wins
};

struct BlockDesign {
  Matrix rows;
  double initial_mu = 0.0;
  double mu = 0.0;
  int iterations = 0;
};

/// Steepest ascent on mu from a seeded random orthonormal block, along the
/// gradient projected onto the orthonormal-row tangent space. Each step is
/// halved until mu increases by at least armijo * step * |grad|^2 after
/// re-orthonormalizing; an accepted step is doubled for the next iteration.
/// The returned mu is never below the initial one. Start r > 0 uses
/// derive_seed(seed, r); start 0 uses seed itself.
/// With an empty history this is the non-adaptive design.
/// Throws std::invalid_argument when fewer than b measurements remain.
BlockDesign design_classification_block(const AcquisitionState& state, const GmmModel& model, int b,
                                        std::uint64_t seed, const AscentOptions& options = {});

/// Reconstruction block for a known class: the leading m eigenvectors of the
/// class posterior covariance, as rows.
SensingMatrix mi_optimal_step2(const AcquisitionState& state, const GmmModel& model, int gamma,
                               Eigen::Index m);

}  // namespace scs
