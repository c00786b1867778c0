#pragma once

#include "scs/gmm.hpp"

#include <filesystem>
#include <optional>

namespace scs {

/// Headerless numeric CSV, one vector per line. When `label_column` is set
/// that column is removed from the features and its distinct values,
/// sorted, become class indices 0..G-1 (originals kept in provenance).
SignalBatch read_labeled_csv(const std::filesystem::path& path, std::optional<int> label_column = std::nullopt);

/// Signals from a .csv or .scsm file (S x N, one per row), unlabeled.
SignalBatch read_signals(const std::filesystem::path& path);
/// Writes signals (S x N) and, if present, labels and DC offsets next to them.
void write_signals(const std::filesystem::path& path, const SignalBatch& batch);

/// Model directory: mean_<g>.scsm, cov_<g>.scsm and manifest.json holding
/// N, G, priors and the noise variance used in training.
void save_model(const std::filesystem::path& dir, const GmmModel& model, double sigma2);
GmmModel load_model(const std::filesystem::path& dir, double* sigma2 = nullptr);

}  // namespace scs
