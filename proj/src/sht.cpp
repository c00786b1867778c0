#include "scs/sht.hpp"

#include "scs/inference.hpp"
#include "scs/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace scs {

double log_threshold(double error_probability) {
  if (!(error_probability > 0.0 && error_probability < 0.5))
    throw std::invalid_argument("SHT error probability must lie in (0, 0.5)");
  return std::log((1.0 - error_probability) / error_probability);
}

namespace {

Vector bayes_posterior(const Vector& log_likelihoods, const Vector& log_priors) {
  Vector w = log_likelihoods + log_priors;
  const double top = w.maxCoeff();
  w = (w.array() - top).exp();
  return w / w.sum();
}

}  // namespace

ShtOutcome sht_run(const SignalOracle& oracle, const GmmModel& model, double sigma2, const ShtOptions& options) {
  const double log_eta = log_threshold(options.error_probability);
  const int b = options.block_size;
  if (b < 1) throw std::invalid_argument("sht_run: block size must be >= 1");
  if (options.budget < b)
    throw std::invalid_argument("sht_run: budget " + std::to_string(options.budget) + " is smaller than block size " +
                                std::to_string(b));
  const int g_count = model.size();
  const auto n = model.dimension();
  const Vector log_p0 = model.priors().array().log();

  ShtOutcome out;
  out.state = AcquisitionState::start(model, sigma2, b, options.budget);
  auto& state = out.state;

  // Without noise, nothing is left to learn once N independent rows are in.
  auto exhausted = [&] { return state.remaining() == 0 || (sigma2 == 0.0 && state.measurement_count() >= n); };
  for (int k = 0; !exhausted(); ++k) {
    const int bk = std::min(b, state.remaining());
    const std::uint64_t block_seed = derive_seed(options.seed, static_cast<std::uint64_t>(k));
    Matrix block;
    if (k == 0 && options.first_block && options.first_block->rows() == bk) {
      block = *options.first_block;
    } else if (k == 0 || options.designer == BlockDesigner::ida_repeated) {
      const auto fresh = AcquisitionState::start(model, sigma2, bk, bk);
      block = design_classification_block(fresh, model, bk, block_seed, options.ascent).rows;
    } else if (options.designer == BlockDesigner::aida) {
      block = design_classification_block(state, model, bk, block_seed, options.ascent).rows;
    } else {
      block = random_orthonormal(bk, n, block_seed).rows();
    }

    state.append(block, oracle(block));
    state.class_log_likelihoods = class_log_likelihoods(state.rows, state.measurements, model, sigma2);
    state.class_priors = bayes_posterior(state.class_log_likelihoods, log_p0);

    ShtStep step;
    step.measurements = static_cast<int>(state.measurement_count());
    step.log_likelihoods = state.class_log_likelihoods;
    step.priors = state.class_priors;
    step.log_ratios = Matrix::Zero(g_count, g_count);
    const Vector score = state.class_log_likelihoods + log_p0;
    for (int i = 0; i < g_count; ++i)
      for (int j = 0; j < g_count; ++j)
        if (i != j) step.log_ratios(i, j) = score(i) - score(j);
    out.trace.push_back(step);

    for (int i = 0; i < g_count && !out.decided_class && k + 1 >= options.first_test_block; ++i) {
      double worst = std::numeric_limits<double>::infinity();
      for (int j = 0; j < g_count; ++j)
        if (j != i) worst = std::min(worst, step.log_ratios(i, j));
      if (worst > log_eta) out.decided_class = i;
    }
    if (out.decided_class) break;
  }

  out.measurements_used = static_cast<int>(state.measurement_count());
  out.final_priors = state.class_priors;
  out.final_class = out.decided_class ? *out.decided_class : map_classify(state, model);
  return out;
}

}  // namespace scs
