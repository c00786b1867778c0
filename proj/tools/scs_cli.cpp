// scs_cli: synthetic data, GMM training, sensing design and two-step protocol runs.

#include "CLI11.hpp"

#include "scs/datasets.hpp"
#include "scs/imaging.hpp"
#include "scs/inference.hpp"
#include "scs/matrix_io.hpp"
#include "scs/protocol.hpp"
#include "scs/random.hpp"
#include "scs/sensing.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace scs;

namespace {

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  if (path.extension() == ".csv")
    io::write_csv(path, m);
  else
    io::write_scsm(path, m);
}

SignalBatch load_images(const std::vector<std::string>& paths, int patch, int stride) {
  SignalBatch all;
  all.signals.resize(0, patch * patch);
  auto sources = nlohmann::json::array();
  for (const auto& p : paths) {
    auto b = patch_extract(read_pgm(p), patch, stride);
    Matrix signals(all.size() + b.size(), b.dimension());
    signals << all.signals, b.signals;
    Vector dc(all.size() + b.size());
    dc << all.dc_offsets, b.dc_offsets;
    all.signals = std::move(signals);
    all.dc_offsets = std::move(dc);
    sources.push_back({{"image", p}, {"patches", b.size()}});
  }
  all.provenance = {{"source", "image patches"}, {"patch", patch}, {"stride", stride}, {"images", sources}};
  return all;
}

struct SignalSource {
  std::string signals;
  std::optional<int> label_column;
  std::vector<std::string> images;
  int patch = 8;
  int stride = 0;  // 0: non-overlapping

  void add(CLI::App* app) {
    app->add_option("--signals", signals, "Signals file (.scsm or .csv, one signal per row)");
    app->add_option("--label-column", label_column, "CSV column holding class labels (0-based)");
    app->add_option("--images", images, "8-bit PGM images to cut into patches");
    app->add_option("--patch", patch, "Patch side length")->check(CLI::PositiveNumber);
    app->add_option("--stride", stride, "Patch stride (default: patch size)")->check(CLI::NonNegativeNumber);
  }

  SignalBatch load() const {
    if (!images.empty()) return load_images(images, patch, stride > 0 ? stride : patch);
    if (signals.empty()) throw std::invalid_argument("give --signals or --images");
    if (label_column) return read_labeled_csv(signals, label_column);
    return read_signals(signals);
  }
};

int gen_synthetic(int n, double bd_min, double bd_max, int count, std::uint64_t seed, const std::string& model_dir,
                  const std::string& signals_out) {
  const auto pair = synth_pair_in_range(n, bd_min, bd_max, seed);
  const auto model = two_class_model(pair);
  save_model(model_dir, model, 0.0);
  auto batch = sample_signals(model, count, derive_seed(seed, 1));
  batch.provenance = {{"source", "synthetic pair"},
                      {"bhattacharyya", pair.distance},
                      {"seed", seed},
                      {"first", {{"r", pair.first_params.r}, {"beta", pair.first_params.beta}, {"omega", pair.first_params.omega}}},
                      {"second", {{"r", pair.second_params.r}, {"beta", pair.second_params.beta}, {"omega", pair.second_params.omega}}}};
  if (!signals_out.empty()) write_signals(signals_out, batch);
  std::cout << batch.provenance.dump(2) << "\n";
  return 0;
}

int main_impl(int argc, char** argv) {
  CLI::App app{"Statistical compressive sensing with Gaussian mixture models"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Master seed")->capture_default_str();

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "Draw a two-class synthetic model and labeled signals");
  int gen_n = 64, gen_count = 1000;
  double bd_min = 30, bd_max = 46;
  std::string gen_model, gen_signals;
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--dimension,-N", gen_n, "Signal dimension")->capture_default_str();
  gen->add_option("--bd-min", bd_min, "Lower Bhattacharyya distance bound")->capture_default_str();
  gen->add_option("--bd-max", bd_max, "Upper Bhattacharyya distance bound (exclusive)")->capture_default_str();
  gen->add_option("--count,-S", gen_count, "Number of signals")->capture_default_str();
  gen->add_option("--model-out", gen_model, "Model directory")->required();
  gen->add_option("--signals-out", gen_signals, "Signals file (.scsm or .csv)");

  // train-gmm
  auto* train = app.add_subcommand("train-gmm", "Learn a GMM with MAP-EM, optionally co-adapting the sensing");
  SignalSource train_src;
  train_src.add(train);
  std::string init_kind = "orientation", train_out, design_kind = "identity", rows_out;
  int kappa = 2, bins = 18, train_m = 0;
  double ridge = 1.0, flat = 0.1, train_sigma2 = 0.0;
  train->add_option("--seed", seed, "Seed");
  train->add_option("--init", init_kind, "Initial model: orientation (square patches) or labels")
      ->check(CLI::IsMember({"orientation", "labels"}))
      ->capture_default_str();
  train->add_option("--bins", bins, "Orientation bins (plus one flat class)")->capture_default_str();
  train->add_option("--flat-fraction", flat, "Share of lowest-gradient patches in the flat class")->capture_default_str();
  train->add_option("--kappa", kappa, "MAP-EM iterations")->capture_default_str();
  train->add_option("--ridge", ridge, "Covariance diagonal ridge")->capture_default_str();
  train->add_option("--sigma2", train_sigma2, "Measurement noise variance")->capture_default_str();
  train->add_option("--sensing", design_kind, "identity, random or rip_ab (co-adapted)")
      ->check(CLI::IsMember({"identity", "random", "rip_ab"}))
      ->capture_default_str();
  train->add_option("--measurements,-M", train_m, "Rows for random / rip_ab sensing");
  train->add_option("--out", train_out, "Model directory")->required();
  train->add_option("--rows-out", rows_out, "Write the final sensing rows here");

  // design
  auto* design = app.add_subcommand("design", "Build a sensing matrix for a model");
  std::string design_model, design_method = "rip_ab", design_out;
  int design_m = 8, design_class = 0;
  AscentOptions ascent;
  design->add_option("--seed", seed, "Seed");
  design->add_option("--model", design_model, "Model directory")->required();
  design->add_option("--method", design_method, "random, eigen, rip_ab or ida")
      ->check(CLI::IsMember({"random", "eigen", "rip_ab", "ida"}))
      ->capture_default_str();
  design->add_option("--rows,-M", design_m, "Number of rows")->capture_default_str();
  design->add_option("--class", design_class, "Class for eigen (0-based)")->capture_default_str();
  design->add_option("--restarts", ascent.restarts, "Ascent restarts for ida")->capture_default_str();
  design->add_option("--out", design_out, "Output file (.scsm or .csv)")->required();

  // run-protocol
  auto* run = app.add_subcommand("run-protocol", "Run a two-step (or single-step) protocol over a batch");
  SignalSource run_src;
  run_src.add(run);
  std::string run_model, config_path, report_out, estimates_out, step1, step2;
  std::optional<int> opt_m, opt_k, opt_b, opt_first;
  std::optional<double> opt_pe, opt_sigma2, opt_snr;
  bool allow_other = false, single = false, detail = false;
  run->add_option("--seed", seed, "Seed");
  run->add_option("--model", run_model, "Model directory")->required();
  run->add_option("--config", config_path, "Protocol configuration JSON");
  run->add_option("--step1", step1, "random, rip_ab, ida or aida_sht");
  run->add_option("--step2", step2, "eigen_mse or mi_adaptive");
  run->add_option("-M", opt_m, "Total measurements");
  run->add_option("-K", opt_k, "Step-1 measurements");
  run->add_option("-b", opt_b, "SHT block size");
  run->add_option("--pe", opt_pe, "SHT error probability");
  run->add_option("--sht-first-test", opt_first, "Blocks acquired before the SHT stopping rule is first applied");
  run->add_option("--sigma2", opt_sigma2, "Noise variance");
  run->add_option("--snr", opt_snr, "Noise level in dB relative to mean signal energy (overrides --sigma2)");
  run->add_flag("--allow-other-pairs", allow_other, "Accept step pairs outside the standard five");
  run->add_flag("--single-step", single, "Batch mode: step-1 design with all M rows");
  run->add_flag("--detail", detail, "Include per-signal rows in the report");
  run->add_option("--report", report_out, "Write the JSON report here (default: stdout)");
  run->add_option("--estimates-out", estimates_out, "Write reconstructed signals (.scsm or .csv)");

  // report
  auto* report = app.add_subcommand("report", "Tabulate JSON reports as CSV");
  std::vector<std::string> report_files;
  std::string table_out;
  report->add_option("--seed", seed, "Unused; accepted for uniformity");
  report->add_option("reports", report_files, "Report JSON files")->required();
  report->add_option("--out", table_out, "CSV output (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  if (*gen) return gen_synthetic(gen_n, bd_min, bd_max, gen_count, seed, gen_model, gen_signals);

  if (*train) {
    const auto batch = train_src.load();
    GmmModel init = [&] {
      if (init_kind == "labels") {
        if (!batch.labeled()) throw std::invalid_argument("--init labels needs labeled signals (--label-column)");
        int g = 0;
        for (int l : batch.labels) g = std::max(g, l + 1);
        std::vector<GaussianComponent> comps;
        for (int k = 0; k < g; ++k)
          comps.push_back(GaussianComponent::from_covariance(Vector::Zero(batch.dimension()),
                                                             Matrix::Identity(batch.dimension(), batch.dimension()), 1.0 / g));
        return m_step_update(GmmModel(std::move(comps)), batch.signals, batch.labels, MStepOptions{ridge});
      }
      const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(batch.dimension()))));
      if (side * side != batch.dimension()) throw std::invalid_argument("orientation init needs square patches");
      return orientation_gmm(batch, side, {bins, flat, ridge});
    }();
    Matrix rows;
    GmmModel model = init;
    std::vector<double> trace;
    if (design_kind == "identity") {
      rows = Matrix::Identity(batch.dimension(), batch.dimension());
      auto em = map_em(batch.signals, rows, init, train_sigma2, kappa, MStepOptions{ridge});
      model = std::move(em.model);
      trace = std::move(em.objective_trace);
    } else {
      if (train_m < 1) throw std::invalid_argument("--measurements is required for random / rip_ab sensing");
      CoadaptOptions o;
      o.design = design_kind == "random" ? BatchDesign::random : BatchDesign::rip_ab;
      o.measurements = train_m;
      o.kappa = kappa;
      o.sigma2 = train_sigma2;
      o.ridge = ridge;
      o.seed = seed;
      auto res = coadapt_train(batch.signals, init, o);
      model = std::move(res.model);
      rows = std::move(res.rows);
      trace = std::move(res.objective);
    }
    save_model(train_out, model, train_sigma2);
    if (!rows_out.empty()) write_matrix(rows_out, rows);
    std::cout << nlohmann::json{{"signals", batch.size()}, {"classes", model.size()}, {"objective", trace}}.dump(2) << "\n";
    return 0;
  }

  if (*design) {
    const auto model = load_model(design_model);
    Matrix rows;
    nlohmann::json info = {{"method", design_method}, {"rows", design_m}};
    if (design_method == "random") {
      rows = random_orthonormal(design_m, model.dimension(), seed).rows();
    } else if (design_method == "eigen") {
      if (design_class < 0 || design_class >= model.size()) throw std::invalid_argument("--class out of range");
      rows = eigen_sensing(model.component(design_class), design_m).rows();
    } else if (design_method == "rip_ab") {
      rows = rip_ab(model, design_m).rows();
      info["rip_objective"] = rip_objective(rows.transpose(), average_basis(model));
    } else {
      const auto empty = AcquisitionState::start(model, 0.0, design_m, design_m);
      const auto d = design_classification_block(empty, model, design_m, seed, ascent);
      rows = d.rows;
      info["mu"] = d.mu;
      info["iterations"] = d.iterations;
    }
    write_matrix(design_out, rows);
    std::cout << info.dump(2) << "\n";
    return 0;
  }

  if (*run) {
    double model_sigma2 = 0.0;
    const auto model = load_model(run_model, &model_sigma2);
    const auto batch = run_src.load();
    ProtocolConfig c;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open " + config_path);
      c = config_from_json(nlohmann::json::parse(in));
    }
    if (!step1.empty()) c.step1 = parse_step1(step1);
    if (!step2.empty()) c.step2 = parse_step2(step2);
    if (opt_m) c.M = *opt_m;
    if (opt_k) c.K = *opt_k;
    if (opt_b) c.b = *opt_b;
    if (opt_pe) c.error_probability = *opt_pe;
    if (opt_first) c.sht_first_test_block = *opt_first;
    if (opt_sigma2) c.sigma2 = *opt_sigma2;
    if (opt_snr) c.sigma2 = noise_variance_for_snr(batch.signals, *opt_snr);
    if (allow_other) c.allow_other_pairs = true;
    if (run->count("--seed") || config_path.empty()) c.seed = seed;
    const auto result = single ? run_single_step(c, batch, model) : run_two_step(c, batch, model);
    auto j = result.to_json(detail);
    j["dataset"] = batch.provenance;
    if (!run_src.signals.empty()) j["dataset"]["path"] = run_src.signals;
    if (report_out.empty()) {
      std::cout << j.dump(2) << "\n";
    } else {
      std::ofstream(report_out) << j.dump(2) << "\n";
      std::cerr << result.protocol << ": psnr " << result.psnr << " dB, mse " << result.mean_mse << ", mean K "
                << result.mean_k << "\n";
    }
    if (!estimates_out.empty()) write_matrix(estimates_out, result.estimates);
    return 0;
  }

  if (*report) {
    std::ofstream file;
    if (!table_out.empty()) file.open(table_out);
    std::ostream& out = table_out.empty() ? std::cout : file;
    out << "file,protocol,dataset,M,K_config,b,sigma2,seed,signals,accuracy,mean_mse,psnr,mean_k,wall_seconds\n";
    auto cell = [](const nlohmann::json& v) { return v.is_null() ? std::string() : v.is_string() ? v.get<std::string>() : v.dump(); };
    for (const auto& f : report_files) {
      std::ifstream in(f);
      if (!in) throw std::runtime_error("cannot open " + f);
      const auto j = nlohmann::json::parse(in);
      const auto& cfg = j.at("config");
      std::string dataset = j.contains("dataset") ? cell(j["dataset"].value("path", j["dataset"].value("source", nlohmann::json()))) : "";
      out << f << ',' << cell(j.at("protocol")) << ',' << dataset << ',' << cfg.at("M") << ',' << cfg.at("K") << ','
          << cfg.at("b") << ',' << cfg.at("sigma2") << ',' << cfg.at("seed") << ',' << j.at("signals") << ','
          << cell(j.at("accuracy")) << ',' << cell(j.at("mean_mse")) << ',' << cell(j.at("psnr")) << ','
          << cell(j.at("mean_k")) << ',' << cell(j.at("wall_seconds")) << '\n';
    }
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return main_impl(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
