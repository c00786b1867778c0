#include "scs/imaging.hpp"

#include "scs/inference.hpp"
#include "scs/parallel.hpp"
#include "scs/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace scs {

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
    } else {
      tok.push_back(c);
    }
  }
  return tok;
}

}  // namespace

Matrix read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (pgm_token(in) != "P5") throw std::runtime_error(path.string() + ": not a binary PGM (P5)");
  const int width = std::stoi(pgm_token(in));
  const int height = std::stoi(pgm_token(in));
  const int maxval = std::stoi(pgm_token(in));
  if (width < 1 || height < 1 || maxval < 1 || maxval > 255)
    throw std::runtime_error(path.string() + ": only 8-bit PGM is supported");
  std::vector<unsigned char> pixels(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size()))
    throw std::runtime_error(path.string() + ": truncated pixel data");
  Matrix image(height, width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) image(r, c) = pixels[static_cast<std::size_t>(r) * width + c];
  return image;
}

void write_pgm(const std::filesystem::path& path, const Matrix& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c)
      out.put(static_cast<char>(static_cast<unsigned char>(std::clamp(std::round(image(r, c)), 0.0, 255.0))));
}

SignalBatch patch_extract(const Matrix& image, int patch, bool overlap) {
  return patch_extract(image, patch, overlap ? 1 : patch);
}

SignalBatch patch_extract(const Matrix& image, int patch, int stride) {
  if (patch < 1 || stride < 1) throw std::invalid_argument("patch_extract: patch and stride must be >= 1");
  if (patch > std::min(image.rows(), image.cols()))
    throw std::invalid_argument("patch_extract: patch size " + std::to_string(patch) + " exceeds image size " +
                                std::to_string(image.rows()) + "x" + std::to_string(image.cols()));
  const Eigen::Index per_row = (image.cols() - patch) / stride + 1;
  const Eigen::Index per_col = (image.rows() - patch) / stride + 1;
  SignalBatch batch;
  batch.signals.resize(per_row * per_col, patch * patch);
  batch.dc_offsets.resize(per_row * per_col);
  auto corners = nlohmann::json::array();
  Eigen::Index s = 0;
  for (Eigen::Index i = 0; i < per_col; ++i) {
    for (Eigen::Index j = 0; j < per_row; ++j, ++s) {
      const auto r0 = i * stride, c0 = j * stride;
      for (int r = 0; r < patch; ++r)
        for (int c = 0; c < patch; ++c) batch.signals(s, r * patch + c) = image(r0 + r, c0 + c);
      batch.dc_offsets(s) = batch.signals.row(s).mean();
      batch.signals.row(s).array() -= batch.dc_offsets(s);
      corners.push_back({r0, c0});
    }
  }
  batch.provenance = {{"source", "image patches"}, {"patch", patch}, {"stride", stride},
                      {"height", image.rows()}, {"width", image.cols()}, {"corners", corners}};
  return batch;
}

Matrix patch_assemble(const Matrix& patches, int patch, Eigen::Index height, Eigen::Index width) {
  const Eigen::Index per_row = width / patch, per_col = height / patch;
  if (patches.rows() != per_row * per_col || patches.cols() != patch * patch)
    throw std::invalid_argument("patch_assemble: patch count does not match the image size");
  Matrix image = Matrix::Zero(height, width);
  for (Eigen::Index s = 0; s < patches.rows(); ++s) {
    const auto r0 = (s / per_row) * patch, c0 = (s % per_row) * patch;
    for (int r = 0; r < patch; ++r)
      for (int c = 0; c < patch; ++c) image(r0 + r, c0 + c) = patches(s, r * patch + c);
  }
  return image;
}

GmmModel orientation_gmm(const SignalBatch& patches, int patch, const OrientationInit& options) {
  const auto s = patches.size();
  if (patches.dimension() != patch * patch) throw std::invalid_argument("orientation_gmm: patch size mismatch");
  if (options.bins < 1 || s < 2) throw std::invalid_argument("orientation_gmm: need >= 1 bin and >= 2 patches");
  const int g_count = options.bins + 1;

  std::vector<double> energy(static_cast<std::size_t>(s));
  std::vector<int> bin(static_cast<std::size_t>(s));
  for (Eigen::Index k = 0; k < s; ++k) {
    double jxx = 0.0, jyy = 0.0, jxy = 0.0;
    for (int r = 0; r + 1 < patch; ++r) {
      for (int c = 0; c + 1 < patch; ++c) {
        const double v = patches.signals(k, r * patch + c);
        const double gx = patches.signals(k, r * patch + c + 1) - v;
        const double gy = patches.signals(k, (r + 1) * patch + c) - v;
        jxx += gx * gx;
        jyy += gy * gy;
        jxy += gx * gy;
      }
    }
    energy[static_cast<std::size_t>(k)] = jxx + jyy;
    double theta = 0.5 * std::atan2(2.0 * jxy, jxx - jyy);  // gradient direction, (-pi/2, pi/2]
    if (theta < 0.0) theta += std::numbers::pi;
    bin[static_cast<std::size_t>(k)] =
        std::min(options.bins - 1, static_cast<int>(theta / std::numbers::pi * options.bins));
  }
  std::vector<double> sorted = energy;
  const auto cut = static_cast<std::size_t>(options.flat_fraction * static_cast<double>(s));
  double threshold = -1.0;
  if (cut > 0) {
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(cut - 1), sorted.end());
    threshold = sorted[cut - 1];
  }
  std::vector<int> labels(static_cast<std::size_t>(s));
  for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = energy[k] <= threshold ? options.bins : bin[k];

  // Start every class from the pooled moments; m_step_update then refreshes
  // the classes that received at least two patches.
  const Vector mean = patches.signals.colwise().mean().transpose();
  const Matrix centered = patches.signals.rowwise() - mean.transpose();
  Matrix pooled = centered.transpose() * centered / static_cast<double>(s);
  pooled.diagonal().array() += options.ridge;
  std::vector<GaussianComponent> comps;
  for (int g = 0; g < g_count; ++g)
    comps.push_back(GaussianComponent::from_covariance(mean, pooled, 1.0 / g_count));
  return m_step_update(GmmModel(std::move(comps)), patches.signals, labels, MStepOptions{options.ridge});
}

CoadaptResult coadapt_train(const Matrix& training, const GmmModel& init, const CoadaptOptions& options) {
  if (training.cols() != init.dimension()) throw std::invalid_argument("coadapt_train: dimension mismatch");
  if (options.kappa < 0) throw std::invalid_argument("coadapt_train: kappa must be >= 0");
  const auto m = options.measurements;
  auto design = [&](const GmmModel& model) {
    return options.design == BatchDesign::random ? random_orthonormal(m, init.dimension(), options.seed).rows()
                                                 : rip_ab(model, m).rows();
  };
  CoadaptResult result{init, design(init), {}};
  const auto s = static_cast<std::size_t>(training.rows());
  Matrix estimates(training.rows(), training.cols());
  std::vector<int> labels(s);
  std::vector<double> objective(s);
  for (int it = 0; it < options.kappa; ++it) {
    const MapReconstructor reconstruct(result.rows, result.model, options.sigma2);
    parallel_for(s, [&](std::size_t i) {
      const auto idx = static_cast<Eigen::Index>(i);
      auto r = reconstruct(result.rows * training.row(idx).transpose());
      estimates.row(idx) = r.signal_estimate.transpose();
      labels[i] = r.selected_class;
      objective[i] = r.objective_values(r.selected_class);
    });
    double total = 0.0;
    for (double v : objective) total += v;
    result.objective.push_back(total);
    result.model = m_step_update(result.model, estimates, labels, MStepOptions{options.ridge});
    result.rows = design(result.model);
  }
  return result;
}

Matrix batch_reconstruct(const Matrix& signals, const Matrix& rows, const GmmModel& model, double sigma2) {
  const MapReconstructor reconstruct(rows, model, sigma2);
  Matrix estimates(signals.rows(), signals.cols());
  parallel_for(static_cast<std::size_t>(signals.rows()), [&](std::size_t i) {
    const auto idx = static_cast<Eigen::Index>(i);
    const Vector y = rows * signals.row(idx).transpose();
    estimates.row(idx) = reconstruct(y).signal_estimate.transpose();
  });
  return estimates;
}

}  // namespace scs
