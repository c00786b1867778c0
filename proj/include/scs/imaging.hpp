#pragma once

#include "scs/gmm.hpp"

#include <cstdint>
#include <filesystem>

namespace scs {

/// Binary 8-bit PGM (P5). Pixels come back as doubles in [0, 255],
/// rows = image height.
Matrix read_pgm(const std::filesystem::path& path);
/// Rounds and clamps to [0, 255].
void write_pgm(const std::filesystem::path& path, const Matrix& image);

/// Row-major scan of patch x patch blocks, each flattened row-major with
/// its mean removed into dc_offsets. Stride 1 when `overlap`, else the patch
/// size; blocks that would cross the border are dropped. Provenance holds
/// the top-left corner of every patch.
SignalBatch patch_extract(const Matrix& image, int patch, bool overlap);
SignalBatch patch_extract(const Matrix& image, int patch, int stride);

/// Inverse of non-overlapping extraction. `patches` must already include
/// the DC; uncovered border pixels are left at zero.
Matrix patch_assemble(const Matrix& patches, int patch, Eigen::Index height, Eigen::Index width);

struct OrientationInit {
  int bins = 18;               // orientation classes over [0, pi)
  double flat_fraction = 0.1;  // lowest-gradient-energy share sent to the flat class
  double ridge = 1.0;          // added to every covariance diagonal
};

/// Initial G = bins + 1 model for square patches: each patch is assigned to
/// the bin of its dominant gradient orientation (structure tensor), or to
/// the last (flat) class when its gradient energy is in the lowest
/// flat_fraction. Classes with fewer than two patches get the pooled
/// covariance.
GmmModel orientation_gmm(const SignalBatch& patches, int patch, const OrientationInit& options = {});

enum class BatchDesign { random, rip_ab };

struct CoadaptOptions {
  BatchDesign design = BatchDesign::rip_ab;
  int measurements = 8;
  int kappa = 11;
  double sigma2 = 0.0;
  double ridge = 1.0;  // M-step ridge
  std::uint64_t seed = 0;
};

struct CoadaptResult {
  GmmModel model;
  Matrix rows;  // final sensing matrix for the learned model
  std::vector<double> objective;  // MAP-EM objective per iteration
};

/// Learns the model from compressed measurements of `training` (S x N)
/// while adapting the sensing: every iteration senses with the current
/// design (random stays fixed, rip_ab is rebuilt from the current model)
/// and runs one MAP-EM update.
CoadaptResult coadapt_train(const Matrix& training, const GmmModel& init, const CoadaptOptions& options);

/// MAP reconstruction (model selection + Wiener) of every row of `signals`
/// from y = rows * x; returns S x N estimates.
Matrix batch_reconstruct(const Matrix& signals, const Matrix& rows, const GmmModel& model, double sigma2);

}  // namespace scs
