#include "scs/datasets.hpp"

#include "scs/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace fs = std::filesystem;

namespace scs {

SignalBatch read_labeled_csv(const fs::path& path, std::optional<int> label_column) {
  const Matrix raw = io::read_csv(path);
  SignalBatch batch;
  batch.provenance = {{"source", path.string()}};
  if (!label_column) {
    batch.signals = raw;
    return batch;
  }
  const int lc = *label_column;
  if (lc < 0 || lc >= raw.cols())
    throw std::invalid_argument("label column " + std::to_string(lc) + " outside 0.." + std::to_string(raw.cols() - 1));
  if (raw.cols() < 2) throw std::invalid_argument("labeled CSV needs at least one feature column");
  batch.signals.resize(raw.rows(), raw.cols() - 1);
  std::map<double, int> classes;
  for (Eigen::Index i = 0; i < raw.rows(); ++i) classes.emplace(raw(i, lc), 0);
  int next = 0;
  auto originals = nlohmann::json::array();
  for (auto& [value, index] : classes) {
    index = next++;
    originals.push_back(value);
  }
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    Eigen::Index out = 0;
    for (Eigen::Index j = 0; j < raw.cols(); ++j)
      if (j != lc) batch.signals(i, out++) = raw(i, j);
    batch.labels.push_back(classes.at(raw(i, lc)));
  }
  batch.provenance["label_column"] = lc;
  batch.provenance["label_values"] = originals;
  return batch;
}

SignalBatch read_signals(const fs::path& path) {
  SignalBatch batch;
  if (path.extension() == ".scsm") {
    batch.signals = io::read_scsm(path);
  } else {
    batch.signals = io::read_csv(path);
  }
  batch.provenance = {{"source", path.string()}};
  const auto labels = fs::path(path).replace_extension(".labels.csv");
  if (fs::exists(labels)) {
    const Matrix l = io::read_csv(labels);
    for (Eigen::Index i = 0; i < l.rows(); ++i) batch.labels.push_back(static_cast<int>(l(i, 0)));
  }
  return batch;
}

void write_signals(const fs::path& path, const SignalBatch& batch) {
  if (path.extension() == ".scsm") {
    io::write_scsm(path, batch.signals);
  } else {
    io::write_csv(path, batch.signals);
  }
  if (batch.labeled()) {
    Matrix l(static_cast<Eigen::Index>(batch.labels.size()), 1);
    for (std::size_t i = 0; i < batch.labels.size(); ++i) l(static_cast<Eigen::Index>(i), 0) = batch.labels[i];
    io::write_csv(fs::path(path).replace_extension(".labels.csv"), l);
  }
  if (batch.dc_offsets.size() > 0) io::write_csv(fs::path(path).replace_extension(".dc.csv"), batch.dc_offsets);
}

void save_model(const fs::path& dir, const GmmModel& model, double sigma2) {
  fs::create_directories(dir);
  nlohmann::json manifest = {{"N", model.dimension()}, {"G", model.size()}, {"sigma2", sigma2}};
  auto priors = nlohmann::json::array();
  for (int g = 0; g < model.size(); ++g) {
    const auto& c = model.component(g);
    priors.push_back(c.prior);
    io::write_scsm(dir / ("mean_" + std::to_string(g) + ".scsm"), c.mean);
    io::write_scsm(dir / ("cov_" + std::to_string(g) + ".scsm"), c.covariance);
  }
  manifest["priors"] = priors;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

GmmModel load_model(const fs::path& dir, double* sigma2) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("missing " + (dir / "manifest.json").string());
  const auto manifest = nlohmann::json::parse(in);
  const int g_count = manifest.at("G").get<int>();
  const auto n = manifest.at("N").get<Eigen::Index>();
  const auto priors = manifest.at("priors").get<std::vector<double>>();
  if (static_cast<int>(priors.size()) != g_count) throw std::runtime_error("manifest prior count does not match G");
  std::vector<GaussianComponent> comps;
  for (int g = 0; g < g_count; ++g) {
    Matrix mean = io::read_scsm(dir / ("mean_" + std::to_string(g) + ".scsm"));
    Matrix cov = io::read_scsm(dir / ("cov_" + std::to_string(g) + ".scsm"));
    if (mean.size() != n || cov.rows() != n || cov.cols() != n)
      throw std::runtime_error("component " + std::to_string(g) + " does not match N = " + std::to_string(n));
    comps.push_back(GaussianComponent::from_covariance(Eigen::Map<Vector>(mean.data(), n), cov,
                                                       priors[static_cast<std::size_t>(g)]));
  }
  if (sigma2) *sigma2 = manifest.value("sigma2", 0.0);
  return GmmModel(std::move(comps));
}

}  // namespace scs
