#pragma once

#include "scs/adaptive.hpp"
#include "scs/gmm.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace scs {

/// Returns y = rows * x + noise for the signal under test.
using SignalOracle = std::function<Vector(const Matrix& rows)>;

enum class BlockDesigner {
  aida,          // mu ascent on the current posterior
  ida_repeated,  // empty-history design, fresh seed per block
  random,        // random orthonormal block
};

struct ShtOptions {
  int block_size = 1;
  int budget = 1;                  // total measurements M
  double error_probability = 0.01;  // P_e
  BlockDesigner designer = BlockDesigner::aida;
  std::uint64_t seed = 0;
  AscentOptions ascent{};
  /// Number of blocks acquired before the stopping rule is first applied.
  /// 1 tests after the IDA block; 2 follows the original loop, where the
  /// IDA block only initializes and the first test comes after block 2.
  int first_test_block = 1;
  /// Precomputed first (IDA) block. Lets a batch share one design.
  std::optional<Matrix> first_block;
};

struct ShtStep {
  int measurements = 0;  // after this block
  Vector log_likelihoods;  // joint log p(y | g)
  Vector priors;           // Bayes posterior p(g | y)
  Matrix log_ratios;       // log L_ij; diagonal zero
};

struct ShtOutcome {
  std::optional<int> decided_class;
  int final_class = 0;  // decided class, else map_classify at budget
  int measurements_used = 0;
  Vector final_priors;
  std::vector<ShtStep> trace;
  AcquisitionState state;
};

/// log eta with eta = (1 - P_e) / P_e.
double log_threshold(double error_probability);

/// Sequential test: block 1 is the IDA design, later blocks come from
/// `designer`. After every block the joint class likelihoods are
/// recomputed, and class i is decided once
///   min_{j != i} [log p(y|i) - log p(y|j) + log p0(i) - log p0(j)] > log eta.
/// If the budget runs out first, the class falls back to map_classify.
/// Noiseless runs also stop after N measurements.
/// A budget that is not a multiple of b ends with a shorter block.
ShtOutcome sht_run(const SignalOracle& oracle, const GmmModel& model, double sigma2, const ShtOptions& options);

}  // namespace scs
