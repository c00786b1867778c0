#pragma once

#include "scs/adaptive.hpp"
#include "scs/gmm.hpp"

#include "json.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace scs {

enum class Step1Design { random, rip_ab, ida, aida_sht };
enum class Step2Design { eigen_mse, mi_adaptive };

std::string to_string(Step1Design d);
std::string to_string(Step2Design d);
Step1Design parse_step1(const std::string& name);
Step2Design parse_step2(const std::string& name);

struct ProtocolConfig {
  Step1Design step1 = Step1Design::random;
  Step2Design step2 = Step2Design::eigen_mse;
  int M = 1;  // total measurements per signal
  int K = 1;  // step-1 measurements (ignored by aida_sht)
  int b = 1;  // SHT block size
  double error_probability = 0.01;
  int sht_first_test_block = 1;  // see ShtOptions::first_test_block
  double sigma2 = 0.0;
  AscentOptions ascent{};
  std::uint64_t seed = 0;
  /// Accept step pairs outside the five standard configurations.
  bool allow_other_pairs = false;
  double i_max = 255.0;
};

nlohmann::json to_json(const ProtocolConfig& c);
ProtocolConfig config_from_json(const nlohmann::json& j);

/// Checks 1 <= K <= M <= N, b <= M, noise and P_e ranges, and that the pair
/// is one of random+eigen_mse, rip_ab+eigen_mse, ida+eigen_mse,
/// ida+mi_adaptive, aida_sht+mi_adaptive (unless allow_other_pairs).
/// Throws std::invalid_argument naming the problem.
void validate(const ProtocolConfig& config, Eigen::Index dimension);

struct SignalResult {
  int true_label = -1;
  int selected_class = 0;
  int step1_measurements = 0;
  int total_measurements = 0;
  bool decided = true;  // false when SHT hit the budget
  double mse = 0.0;     // ||x - x_hat||^2 / N
};

struct ExperimentReport {
  std::string protocol;
  ProtocolConfig config;
  std::vector<SignalResult> signals;
  Matrix estimates;  // S x N, DC re-added when the batch carries offsets
  double accuracy = std::numeric_limits<double>::quiet_NaN();  // NaN when unlabeled
  double mean_mse = 0.0;
  double psnr = 0.0;  // from mean_mse and config.i_max
  double mean_k = 0.0;
  double wall_seconds = 0.0;

  /// Summary without per-signal rows unless `detail` is set.
  nlohmann::json to_json(bool detail = false) const;
};

/// Two-step acquisition and reconstruction of every signal in the batch.
/// Step-1 designs for random / rip_ab / ida are built once and shared;
/// aida_sht runs a sequential test per signal. Noise for signal i comes
/// from its own derived generator, step-1 draws first.
ExperimentReport run_two_step(const ProtocolConfig& config, const SignalBatch& batch, const GmmModel& model);

/// Batch sensing with the step-1 design alone using all M rows (no step 2):
/// map_classify on the M measurements, then Wiener with that class.
ExperimentReport run_single_step(const ProtocolConfig& config, const SignalBatch& batch, const GmmModel& model);

/// The shared step-1 rows used by run_two_step / run_single_step for
/// non-sequential designs.
Matrix step1_rows(const ProtocolConfig& config, const GmmModel& model, int rows);

/// 10 log10(i_max^2 / mse); +inf when mse == 0.
double psnr(double mse, double i_max);
double psnr(const Matrix& original, const Matrix& reconstructed, double i_max);

/// S (K (1 - p) + M p): expected measurement count when only a class of
/// interest (probability p) proceeds to step 2.
double avg_measurements(double signals, double M, double K, double p_gamma);

/// sigma^2 = (mean ||x||^2 / N) * 10^(-snr_db / 10).
double noise_variance_for_snr(const Matrix& signals, double snr_db);

}  // namespace scs
