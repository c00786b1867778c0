#include "doctest.h"
#include "test_util.hpp"

#include "scs/datasets.hpp"
#include "scs/imaging.hpp"
#include "scs/protocol.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace scs;
using namespace scs::testing;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("scs_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

const ProtocolConfig kPairs[] = {
    {.step1 = Step1Design::random, .step2 = Step2Design::eigen_mse},
    {.step1 = Step1Design::rip_ab, .step2 = Step2Design::eigen_mse},
    {.step1 = Step1Design::ida, .step2 = Step2Design::eigen_mse},
    {.step1 = Step1Design::ida, .step2 = Step2Design::mi_adaptive},
    {.step1 = Step1Design::aida_sht, .step2 = Step2Design::mi_adaptive},
};

}  // namespace

TEST_CASE("patch_extract examples") {
  Matrix image(16, 16);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) image(r, c) = r * 16 + c;
  const auto four = patch_extract(image, 8, false);
  CHECK(four.size() == 4);
  CHECK(four.dimension() == 64);
  // Row-major scan, row-major flattening, DC removed.
  CHECK(four.dc_offsets(1) == doctest::Approx(image.block(0, 8, 8, 8).mean()));
  CHECK(four.signals(1, 0) + four.dc_offsets(1) == doctest::Approx(image(0, 8)));
  CHECK(four.signals(2, 9) + four.dc_offsets(2) == doctest::Approx(image(9, 1)));
  CHECK(std::abs(four.signals.row(3).sum()) <= 1e-9);

  const auto flat = patch_extract(Matrix::Constant(16, 16, 7.0), 8, false);
  CHECK(flat.signals.cwiseAbs().maxCoeff() == 0.0);
  CHECK((flat.dc_offsets.array() == 7.0).all());

  CHECK(patch_extract(Matrix::Zero(17, 17), 8, false).size() == 4);
  CHECK(patch_extract(Matrix::Zero(17, 17), 8, true).size() == 100);
  CHECK_THROWS_AS(patch_extract(Matrix::Zero(7, 20), 8, false), std::invalid_argument);
}

TEST_CASE("patch_assemble inverts non-overlapping extraction") {
  Rng rng(1);
  const Matrix image = (rng.gaussian(24, 16).array() * 40 + 128).matrix();
  const auto batch = patch_extract(image, 8, false);
  Matrix with_dc = batch.signals;
  with_dc.colwise() += batch.dc_offsets;
  CHECK((patch_assemble(with_dc, 8, 24, 16) - image).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("psnr examples") {
  CHECK(std::isinf(psnr(0.0, 255.0)));
  CHECK(psnr(255.0 * 255.0, 255.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(psnr(65.025, 255.0) == doctest::Approx(30.0).epsilon(1e-12));
  Rng rng(2);
  const Matrix a = rng.gaussian(5, 4);
  CHECK(std::isinf(psnr(a, a, 255.0)));
  CHECK(psnr(a, a.array() + 2.0, 2.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("avg_measurements examples") {
  CHECK(avg_measurements(100, 16, 4, 1.0) == doctest::Approx(1600));
  CHECK(avg_measurements(100, 16, 4, 0.0) == doctest::Approx(400));
  CHECK(avg_measurements(100, 16, 4, 0.25) == doctest::Approx(700));
}

TEST_CASE("noise_variance_for_snr") {
  Matrix x = Matrix::Constant(10, 8, std::sqrt(2.0));
  CHECK(noise_variance_for_snr(x, 30.0) == doctest::Approx(2e-3).epsilon(1e-12));
}

TEST_CASE("validate: pairs and ranges") {
  ProtocolConfig c{.step1 = Step1Design::random, .step2 = Step2Design::mi_adaptive, .M = 4, .K = 2};
  try {
    validate(c, 8);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("aida_sht+mi_adaptive") != std::string::npos);
    CHECK(msg.find("rip_ab+eigen_mse") != std::string::npos);
  }
  c.allow_other_pairs = true;
  CHECK_NOTHROW(validate(c, 8));
  for (const auto& pair : kPairs) {
    ProtocolConfig p = pair;
    p.M = 4;
    p.K = 2;
    CHECK_NOTHROW(validate(p, 8));
    p.M = 9;
    CHECK_THROWS_AS(validate(p, 8), std::invalid_argument);
  }
  ProtocolConfig k{.M = 3, .K = 4};
  CHECK_THROWS_AS(validate(k, 8), std::invalid_argument);
  k.K = 0;
  CHECK_THROWS_AS(validate(k, 8), std::invalid_argument);
  ProtocolConfig s{.M = 3, .K = 2, .sigma2 = -1.0};
  CHECK_THROWS_AS(validate(s, 8), std::invalid_argument);
  CHECK_THROWS_AS(parse_step1("omp"), std::invalid_argument);
}

TEST_CASE("run_two_step: noiseless full sensing is exact for every pair") {
  Rng rng(3);
  const auto model = random_model(8, 3, rng);
  const auto batch = sample_signals(model, 40, 4);
  for (const auto& pair : kPairs) {
    ProtocolConfig c = pair;
    c.M = 8;
    c.K = 3;
    c.b = 2;
    c.seed = 5;
    const auto report = run_two_step(c, batch, model);
    CAPTURE(report.protocol);
    CHECK(report.mean_mse <= 1e-10);
    CHECK(report.accuracy >= 0.0);
  }
}

TEST_CASE("run_two_step: K = M matches the single-step batch run bitwise") {
  Rng rng(6);
  const auto model = random_model(10, 3, rng);
  const auto batch = sample_signals(model, 60, 7);
  for (auto design : {Step1Design::random, Step1Design::rip_ab, Step1Design::ida}) {
    for (double sigma2 : {0.0, 0.05}) {
      ProtocolConfig c{.step1 = design, .step2 = Step2Design::eigen_mse, .M = 6, .K = 6, .sigma2 = sigma2, .seed = 11};
      const auto two = run_two_step(c, batch, model);
      const auto one = run_single_step(c, batch, model);
      CAPTURE(to_string(design));
      CHECK(two.estimates == one.estimates);
      CHECK(two.mean_mse == one.mean_mse);
      for (std::size_t i = 0; i < two.signals.size(); ++i) CHECK(two.signals[i].selected_class == one.signals[i].selected_class);
    }
  }
}

TEST_CASE("run_two_step: deterministic across runs") {
  Rng rng(8);
  const auto model = random_model(8, 2, rng);
  const auto batch = sample_signals(model, 50, 9);
  for (const auto& pair : kPairs) {
    ProtocolConfig c = pair;
    c.M = 5;
    c.K = 2;
    c.sigma2 = 0.02;
    c.seed = 12;
    const auto a = run_two_step(c, batch, model);
    const auto b = run_two_step(c, batch, model);
    auto strip = [](nlohmann::json j) {
      j.erase("wall_seconds");
      return j.dump();
    };
    CHECK(a.estimates == b.estimates);
    CHECK(strip(a.to_json(true)) == strip(b.to_json(true)));
  }
}

TEST_CASE("run_two_step: report consistency") {
  Rng rng(10);
  const auto model = random_model(8, 3, rng);
  auto batch = sample_signals(model, 80, 11);
  batch.dc_offsets = Vector::LinSpaced(80, -3.0, 3.0);
  for (const auto& pair : kPairs) {
    ProtocolConfig c = pair;
    c.M = 6;
    c.K = 2;
    c.b = 2;
    c.sigma2 = 0.01;
    c.seed = 3;
    const auto report = run_two_step(c, batch, model);
    CAPTURE(report.protocol);
    Matrix truth = batch.signals;
    truth.colwise() += batch.dc_offsets;
    const double recomputed = (truth - report.estimates).squaredNorm() / static_cast<double>(truth.size());
    CHECK(report.mean_mse == doctest::Approx(recomputed).epsilon(1e-10));
    CHECK(report.psnr == doctest::Approx(psnr(truth, report.estimates, c.i_max)).epsilon(1e-10));
    for (const auto& r : report.signals) {
      CHECK(r.total_measurements <= c.M);
      CHECK(r.step1_measurements >= 1);
    }
    if (c.step1 == Step1Design::aida_sht) {
      CHECK(report.mean_k >= c.b);
      CHECK(report.mean_k <= c.M);
    } else {
      CHECK(report.mean_k == c.K);
    }
    int correct = 0;
    for (const auto& r : report.signals) correct += r.selected_class == r.true_label;
    CHECK(report.accuracy == doctest::Approx(correct / 80.0));
  }
}

TEST_CASE("run_single_step rejects the sequential design") {
  Rng rng(12);
  const auto model = random_model(4, 2, rng);
  ProtocolConfig c{.step1 = Step1Design::aida_sht, .step2 = Step2Design::mi_adaptive, .M = 2};
  CHECK_THROWS_AS(run_single_step(c, sample_signals(model, 3, 1), model), std::invalid_argument);
}

TEST_CASE("config JSON round trip") {
  ProtocolConfig c{.step1 = Step1Design::aida_sht, .step2 = Step2Design::mi_adaptive, .M = 12, .K = 3, .b = 2,
                   .error_probability = 0.02, .sht_first_test_block = 2, .sigma2 = 0.5, .seed = 99};
  c.ascent.initial_step = 0.3;
  c.ascent.restarts = 2;
  const auto back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.step1 == Step1Design::aida_sht);
  CHECK(back.ascent.restarts == 2);
  CHECK_THROWS(config_from_json(nlohmann::json{{"step1", "bogus"}}));
}

TEST_CASE("model directory round trip") {
  Rng rng(13);
  std::vector<GaussianComponent> comps;
  for (int g = 0; g < 3; ++g) comps.push_back(GaussianComponent::from_covariance(rng.gaussian(5), random_spd(5, rng), 0.1 + 0.2 * g));
  comps[2].prior = 0.6;
  const GmmModel model(std::move(comps));
  const auto dir = scratch("model");
  save_model(dir, model, 0.25);
  double sigma2 = 0.0;
  const auto back = load_model(dir, &sigma2);
  CHECK(sigma2 == 0.25);
  REQUIRE(back.size() == 3);
  for (int g = 0; g < 3; ++g) {
    CHECK(back.component(g).covariance == model.component(g).covariance);
    CHECK(back.component(g).mean == model.component(g).mean);
    CHECK(back.component(g).prior == model.component(g).prior);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("labeled CSV ingestion") {
  const auto dir = scratch("csv");
  {
    std::ofstream out(dir / "data.csv");
    out << "1.5,9,2\n-1,2,0.25\n3,9,1\n0,5,0\n";
  }
  const auto batch = read_labeled_csv(dir / "data.csv", 1);
  CHECK(batch.size() == 4);
  CHECK(batch.dimension() == 2);
  CHECK(batch.labels == std::vector<int>{2, 0, 2, 1});
  CHECK(batch.signals(1, 1) == 0.25);
  const auto plain = read_labeled_csv(dir / "data.csv");
  CHECK(plain.dimension() == 3);
  CHECK_FALSE(plain.labeled());
  CHECK_THROWS(read_labeled_csv(dir / "data.csv", 3));
  std::filesystem::remove_all(dir);
}

TEST_CASE("signal files round trip with labels and DC") {
  Rng rng(14);
  SignalBatch batch;
  batch.signals = rng.gaussian(6, 4);
  batch.labels = {0, 1, 1, 0, 2, 2};
  batch.dc_offsets = rng.gaussian(6);
  const auto dir = scratch("signals");
  write_signals(dir / "x.scsm", batch);
  const auto back = read_signals(dir / "x.scsm");
  CHECK(back.signals == batch.signals);
  CHECK(back.labels == batch.labels);
  std::filesystem::remove_all(dir);
}

TEST_CASE("PGM round trip") {
  Matrix image(5, 7);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 7; ++c) image(r, c) = (r * 37 + c * 11) % 256;
  const auto dir = scratch("pgm");
  write_pgm(dir / "a.pgm", image);
  CHECK(read_pgm(dir / "a.pgm") == image);
  std::filesystem::remove_all(dir);
}
