#include "scs/protocol.hpp"

#include "scs/inference.hpp"
#include "scs/parallel.hpp"
#include "scs/random.hpp"
#include "scs/sensing.hpp"
#include "scs/sht.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace scs {

namespace {

constexpr std::uint64_t kDesignStream = 0;
constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kShtStream = 2;

struct PairName {
  Step1Design step1;
  Step2Design step2;
};
constexpr PairName kStandardPairs[] = {
    {Step1Design::random, Step2Design::eigen_mse}, {Step1Design::rip_ab, Step2Design::eigen_mse},
    {Step1Design::ida, Step2Design::eigen_mse},    {Step1Design::ida, Step2Design::mi_adaptive},
    {Step1Design::aida_sht, Step2Design::mi_adaptive},
};

/// y = rows * x + sigma * n, with n drawn from the signal's own stream.
class NoisySensor {
 public:
  NoisySensor(Vector x, double sigma2, std::uint64_t seed) : x_(std::move(x)), sigma_(std::sqrt(sigma2)), rng_(seed) {}
  Vector operator()(const Matrix& rows) {
    Vector y = rows * x_;
    if (sigma_ > 0.0)
      for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sigma_ * rng_.normal();
    return y;
  }
  const Vector& signal() const { return x_; }

 private:
  Vector x_;
  double sigma_;
  Rng rng_;
};

Vector wiener_estimate(const Matrix& gain, const Matrix& rows, const Vector& y, const GaussianComponent& c) {
  const Vector alpha = gain * (y - rows * c.mean);
  return c.basis * alpha + c.mean;
}

void finish_report(ExperimentReport& report, const SignalBatch& batch, std::chrono::steady_clock::time_point start) {
  const auto s = report.signals.size();
  double mse = 0.0, k = 0.0;
  int correct = 0;
  for (const auto& r : report.signals) {
    mse += r.mse;
    k += r.step1_measurements;
    if (r.true_label >= 0 && r.true_label == r.selected_class) ++correct;
  }
  report.mean_mse = mse / static_cast<double>(s);
  report.mean_k = k / static_cast<double>(s);
  report.psnr = psnr(report.mean_mse, report.config.i_max);
  if (batch.labeled()) report.accuracy = static_cast<double>(correct) / static_cast<double>(s);
  if (batch.dc_offsets.size() == batch.size()) report.estimates.colwise() += batch.dc_offsets;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentReport empty_report(const ProtocolConfig& config, const SignalBatch& batch, const std::string& name) {
  if (batch.size() < 1) throw std::invalid_argument("signal batch is empty");
  ExperimentReport report;
  report.protocol = name;
  report.config = config;
  report.signals.resize(static_cast<std::size_t>(batch.size()));
  report.estimates.resize(batch.size(), batch.dimension());
  return report;
}

}  // namespace

std::string to_string(Step1Design d) {
  switch (d) {
    case Step1Design::random: return "random";
    case Step1Design::rip_ab: return "rip_ab";
    case Step1Design::ida: return "ida";
    case Step1Design::aida_sht: return "aida_sht";
  }
  return "?";
}

std::string to_string(Step2Design d) { return d == Step2Design::eigen_mse ? "eigen_mse" : "mi_adaptive"; }

Step1Design parse_step1(const std::string& name) {
  for (auto d : {Step1Design::random, Step1Design::rip_ab, Step1Design::ida, Step1Design::aida_sht})
    if (to_string(d) == name) return d;
  throw std::invalid_argument("unknown step-1 design '" + name + "' (random, rip_ab, ida, aida_sht)");
}

Step2Design parse_step2(const std::string& name) {
  for (auto d : {Step2Design::eigen_mse, Step2Design::mi_adaptive})
    if (to_string(d) == name) return d;
  throw std::invalid_argument("unknown step-2 design '" + name + "' (eigen_mse, mi_adaptive)");
}

nlohmann::json to_json(const ProtocolConfig& c) {
  return {{"step1", to_string(c.step1)},
          {"step2", to_string(c.step2)},
          {"M", c.M},
          {"K", c.K},
          {"b", c.b},
          {"P_e", c.error_probability},
          {"sht_first_test_block", c.sht_first_test_block},
          {"sigma2", c.sigma2},
          {"ascent",
           {{"alpha0", c.ascent.initial_step},
            {"tol", c.ascent.tolerance},
            {"chi", c.ascent.max_iterations},
            {"max_halvings", c.ascent.max_halvings},
            {"armijo", c.ascent.armijo},
            {"restarts", c.ascent.restarts}}},
          {"seed", c.seed},
          {"allow_other_pairs", c.allow_other_pairs},
          {"i_max", c.i_max}};
}

ProtocolConfig config_from_json(const nlohmann::json& j) {
  ProtocolConfig c;
  if (j.contains("step1")) c.step1 = parse_step1(j.at("step1").get<std::string>());
  if (j.contains("step2")) c.step2 = parse_step2(j.at("step2").get<std::string>());
  c.M = j.value("M", c.M);
  c.K = j.value("K", c.K);
  c.b = j.value("b", c.b);
  c.error_probability = j.value("P_e", c.error_probability);
  c.sht_first_test_block = j.value("sht_first_test_block", c.sht_first_test_block);
  c.sigma2 = j.value("sigma2", c.sigma2);
  if (j.contains("ascent")) {
    const auto& a = j.at("ascent");
    c.ascent.initial_step = a.value("alpha0", c.ascent.initial_step);
    c.ascent.tolerance = a.value("tol", c.ascent.tolerance);
    c.ascent.max_iterations = a.value("chi", c.ascent.max_iterations);
    c.ascent.max_halvings = a.value("max_halvings", c.ascent.max_halvings);
    c.ascent.armijo = a.value("armijo", c.ascent.armijo);
    c.ascent.restarts = a.value("restarts", c.ascent.restarts);
  }
  c.seed = j.value("seed", c.seed);
  c.allow_other_pairs = j.value("allow_other_pairs", c.allow_other_pairs);
  c.i_max = j.value("i_max", c.i_max);
  return c;
}

void validate(const ProtocolConfig& c, Eigen::Index dimension) {
  const auto n = static_cast<int>(dimension);
  if (c.M < 1 || c.M > n)
    throw std::invalid_argument("M = " + std::to_string(c.M) + " must lie in [1, N = " + std::to_string(n) + "]");
  if (c.step1 != Step1Design::aida_sht && (c.K < 1 || c.K > c.M))
    throw std::invalid_argument("K = " + std::to_string(c.K) + " must lie in [1, M = " + std::to_string(c.M) + "]");
  if (c.b < 1 || c.b > c.M) throw std::invalid_argument("block size b must lie in [1, M]");
  if (c.sigma2 < 0.0) throw std::invalid_argument("sigma2 must be >= 0");
  if (c.step1 == Step1Design::aida_sht && !(c.error_probability > 0.0 && c.error_probability < 0.5))
    throw std::invalid_argument("P_e must lie in (0, 0.5)");
  if (c.ascent.initial_step <= 0.0 || c.ascent.restarts < 1 || c.ascent.max_iterations < 0 || c.ascent.tolerance < 0.0)
    throw std::invalid_argument("invalid ascent options");
  if (c.allow_other_pairs) return;
  for (const auto& p : kStandardPairs)
    if (p.step1 == c.step1 && p.step2 == c.step2) return;
  std::string valid;
  for (const auto& p : kStandardPairs) valid += " " + to_string(p.step1) + "+" + to_string(p.step2);
  throw std::invalid_argument("configuration " + to_string(c.step1) + "+" + to_string(c.step2) +
                              " is not a standard pair; valid pairs:" + valid +
                              " (set allow_other_pairs to override)");
}

Matrix step1_rows(const ProtocolConfig& config, const GmmModel& model, int rows) {
  const std::uint64_t seed = derive_seed(config.seed, kDesignStream);
  switch (config.step1) {
    case Step1Design::random: return random_orthonormal(rows, model.dimension(), seed).rows();
    case Step1Design::rip_ab: return rip_ab(model, rows).rows();
    case Step1Design::ida:
    case Step1Design::aida_sht: {
      const auto empty = AcquisitionState::start(model, config.sigma2, rows, rows);
      return design_classification_block(empty, model, rows, seed, config.ascent).rows;
    }
  }
  throw std::logic_error("unhandled step-1 design");
}

ExperimentReport run_two_step(const ProtocolConfig& config, const SignalBatch& batch, const GmmModel& model) {
  const auto start = std::chrono::steady_clock::now();
  if (batch.dimension() != model.dimension()) throw std::invalid_argument("batch and model dimensions differ");
  validate(config, model.dimension());
  auto report = empty_report(config, batch, to_string(config.step1) + "+" + to_string(config.step2));

  const bool sequential = config.step1 == Step1Design::aida_sht;
  const Matrix shared = step1_rows(config, model, sequential ? config.b : config.K);
  const std::uint64_t noise_base = derive_seed(config.seed, kNoiseStream);
  const std::uint64_t sht_base = derive_seed(config.seed, kShtStream);

  parallel_for(static_cast<std::size_t>(batch.size()), [&](std::size_t i) {
    const auto idx = static_cast<Eigen::Index>(i);
    NoisySensor sensor(batch.signals.row(idx).transpose(), config.sigma2, derive_seed(noise_base, i));
    SignalResult& r = report.signals[i];
    if (batch.labeled()) r.true_label = batch.labels[i];

    AcquisitionState state;
    int gamma = 0;
    if (sequential) {
      ShtOptions o;
      o.block_size = config.b;
      o.budget = config.M;
      o.error_probability = config.error_probability;
      o.designer = BlockDesigner::aida;
      o.seed = derive_seed(sht_base, i);
      o.ascent = config.ascent;
      o.first_test_block = config.sht_first_test_block;
      o.first_block = shared;
      auto out = sht_run([&](const Matrix& rows) { return sensor(rows); }, model, config.sigma2, o);
      gamma = out.final_class;
      r.decided = out.decided_class.has_value();
      state = std::move(out.state);
    } else {
      state = AcquisitionState::start(model, config.sigma2, config.b, config.M);
      state.append(shared, sensor(shared));
      gamma = map_classify(state, model);
    }
    r.selected_class = gamma;
    r.step1_measurements = static_cast<int>(state.measurement_count());

    const int m2 = config.M - r.step1_measurements;
    if (m2 > 0) {
      const Matrix rows2 = config.step2 == Step2Design::eigen_mse
                               ? eigen_sensing(model.component(gamma), m2).rows()
                               : mi_optimal_step2(state, model, gamma, m2).rows();
      state.append(rows2, sensor(rows2));
    }
    r.total_measurements = static_cast<int>(state.measurement_count());

    const auto& c = model.component(gamma);
    const Vector x_hat = wiener_estimate(wiener_gain(state.rows, c, config.sigma2), state.rows, state.measurements, c);
    report.estimates.row(idx) = x_hat.transpose();
    r.mse = (sensor.signal() - x_hat).squaredNorm() / static_cast<double>(x_hat.size());
  });

  finish_report(report, batch, start);
  return report;
}

ExperimentReport run_single_step(const ProtocolConfig& config, const SignalBatch& batch, const GmmModel& model) {
  const auto start = std::chrono::steady_clock::now();
  if (batch.dimension() != model.dimension()) throw std::invalid_argument("batch and model dimensions differ");
  if (config.step1 == Step1Design::aida_sht) throw std::invalid_argument("aida_sht has no batch mode");
  ProtocolConfig batch_config = config;
  batch_config.K = config.M;
  validate(batch_config, model.dimension());
  auto report = empty_report(batch_config, batch, to_string(config.step1) + " batch");

  const Matrix rows = step1_rows(batch_config, model, config.M);
  std::vector<Matrix> gains;
  for (const auto& c : model.components()) gains.push_back(wiener_gain(rows, c, config.sigma2));
  const std::uint64_t noise_base = derive_seed(config.seed, kNoiseStream);

  parallel_for(static_cast<std::size_t>(batch.size()), [&](std::size_t i) {
    const auto idx = static_cast<Eigen::Index>(i);
    NoisySensor sensor(batch.signals.row(idx).transpose(), config.sigma2, derive_seed(noise_base, i));
    SignalResult& r = report.signals[i];
    if (batch.labeled()) r.true_label = batch.labels[i];
    const Vector y = sensor(rows);
    const int gamma = map_classify(rows, y, model, config.sigma2);
    const Vector x_hat = wiener_estimate(gains[static_cast<std::size_t>(gamma)], rows, y, model.component(gamma));
    r.selected_class = gamma;
    r.step1_measurements = r.total_measurements = config.M;
    report.estimates.row(idx) = x_hat.transpose();
    r.mse = (sensor.signal() - x_hat).squaredNorm() / static_cast<double>(x_hat.size());
  });

  finish_report(report, batch, start);
  return report;
}

nlohmann::json ExperimentReport::to_json(bool detail) const {
  auto number = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  nlohmann::json j = {{"protocol", protocol},
                      {"config", scs::to_json(config)},
                      {"signals", signals.size()},
                      {"accuracy", number(accuracy)},
                      {"mean_mse", mean_mse},
                      {"psnr", number(psnr)},
                      {"mean_k", mean_k},
                      {"wall_seconds", wall_seconds}};
  if (detail) {
    auto rows = nlohmann::json::array();
    for (const auto& r : signals)
      rows.push_back({{"label", r.true_label},
                      {"class", r.selected_class},
                      {"k", r.step1_measurements},
                      {"m", r.total_measurements},
                      {"decided", r.decided},
                      {"mse", r.mse}});
    j["per_signal"] = rows;
  }
  return j;
}

double psnr(double mse, double i_max) {
  if (mse < 0.0) throw std::invalid_argument("psnr: negative MSE");
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(i_max * i_max / mse);
}

double psnr(const Matrix& original, const Matrix& reconstructed, double i_max) {
  if (original.rows() != reconstructed.rows() || original.cols() != reconstructed.cols())
    throw std::invalid_argument("psnr: shape mismatch");
  return psnr((original - reconstructed).squaredNorm() / static_cast<double>(original.size()), i_max);
}

double avg_measurements(double signals, double M, double K, double p_gamma) {
  if (p_gamma < 0.0 || p_gamma > 1.0) throw std::invalid_argument("avg_measurements: p must lie in [0, 1]");
  if (K > M) throw std::invalid_argument("avg_measurements: K must not exceed M");
  return signals * (K * (1.0 - p_gamma) + M * p_gamma);
}

double noise_variance_for_snr(const Matrix& signals, double snr_db) {
  if (signals.size() == 0) throw std::invalid_argument("noise_variance_for_snr: no signals");
  const double energy = signals.squaredNorm() / static_cast<double>(signals.rows());
  return energy / static_cast<double>(signals.cols()) * std::pow(10.0, -snr_db / 10.0);
}

}  // namespace scs
