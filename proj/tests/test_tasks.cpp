#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include "spe/image_io.hpp"
#include "spe/tasks.hpp"

using namespace spe;
using Catch::Approx;

namespace {

std::filesystem::path tmp_dir() {
  auto p = std::filesystem::temp_directory_path() / "spe_tasks_test";
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("gen_signal_1d: determinism, degenerate mode, partition", "[tasks][gen]") {
  Dataset a = gen_signal_1d(11, 64, 3, 16.0);
  Dataset b = gen_signal_1d(11, 64, 3, 16.0);
  CHECK(a.coords == b.coords);
  CHECK(a.targets == b.targets);
  Dataset c = gen_signal_1d(12, 64, 3, 16.0);
  CHECK(a.targets != c.targets);

  // degenerate max_frequency pins f=1: a pure unit-amplitude sinusoid
  Dataset pure = gen_signal_1d(5, 128, 1, 1.0);
  CHECK(pure.targets.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  CHECK(pure.targets.cwiseAbs().maxCoeff() > 0.5);

  int train = 0, test = 0;
  for (int i = 0; i < a.size(); ++i) {
    if (a.train_mask[static_cast<std::size_t>(i)]) ++train; else ++test;
    CHECK(a.train_mask[static_cast<std::size_t>(i)] == (i % 2 == 0));
  }
  CHECK(train + test == a.size());
  CHECK(train == test);
  CHECK_THROWS_AS(gen_signal_1d(0, 63, 3, 16.0), Error);  // odd sample count
  CHECK_THROWS_AS(gen_signal_1d(0, 2, 3, 16.0), Error);
}

TEST_CASE("gen_signal_1d: spectral content sits at the drawn frequencies", "[tasks][gen]") {
  const std::uint64_t seed = 99;
  const int n = 256, modes = 3;
  const double fmax = 20.0;
  Dataset d = gen_signal_1d(seed, n, modes, fmax);

  // replicate the generator's draw order to recover the mode frequencies
  Rng rng(seed);
  std::vector<double> freq(modes);
  for (auto& f : freq) f = uniform(rng, 1.0, fmax);

  // brute-force DFT of the grid signal
  std::vector<double> power(static_cast<std::size_t>(n / 2), 0.0);
  double total = 0.0;
  for (int k = 1; k < n / 2; ++k) {
    std::complex<double> acc(0, 0);
    for (int i = 0; i < n; ++i)
      acc += d.targets(i, 0) * std::exp(std::complex<double>(0, -2.0 * kPi * k * i / n));
    power[static_cast<std::size_t>(k)] = std::norm(acc);
    total += std::norm(acc);
  }
  // energy concentrates within +-3 bins of each drawn frequency (bin ~ f*n/(n-1))
  double near = 0.0;
  for (int k = 1; k < n / 2; ++k) {
    bool close = false;
    for (double f : freq) {
      const double bin = f * (n - 1.0) / n;
      if (std::abs(k - bin) <= 3.0) close = true;
    }
    if (close) near += power[static_cast<std::size_t>(k)];
  }
  CHECK(near / total >= 0.85);
}

TEST_CASE("image round trips and header parsing", "[tasks][image]") {
  const auto dir = tmp_dir();

  // 2x2 ascii PGM with extreme values
  const auto p2 = dir / "tiny.pgm";
  {
    std::ofstream out(p2);
    out << "P2\n# comment line\n2 2\n255\n0 255\n255 0\n";
  }
  Dataset d = load_image(p2.string(), 2);
  REQUIRE(d.size() == 4);
  CHECK(d.targets(0, 0) == 0.0);
  CHECK(d.targets(1, 0) == 1.0);
  CHECK(d.targets(2, 0) == 1.0);
  CHECK(d.targets(3, 0) == 0.0);
  CHECK(d.coords(0, 0) == Approx(0.25));
  CHECK(d.coords(0, 1) == Approx(0.25));
  CHECK(d.coords(3, 0) == Approx(0.75));

  // binary gray and color round trips are exact for 8-bit-quantised values
  Rng rng(13);
  std::vector<double> gv(64);
  for (auto& v : gv) v = std::floor(uniform(rng, 0, 256)) / 255.0;
  for (auto& v : gv) v = std::min(v, 1.0);
  const ImageBuffer gray(8, 8, 1, gv);
  const auto p5 = dir / "gray.pgm";
  save_pnm(gray, p5.string());
  CHECK(load_pnm(p5.string()).values == gray.values);

  std::vector<double> cv(4 * 3);
  for (auto& v : cv) v = std::floor(uniform(rng, 0, 256)) / 255.0;
  for (auto& v : cv) v = std::min(v, 1.0);
  const ImageBuffer color(2, 2, 3, cv);
  const auto p6 = dir / "color.ppm";
  save_pnm(color, p6.string());
  CHECK(load_pnm(p6.string()).values == color.values);
  const auto p3 = dir / "color_ascii.ppm";
  save_pnm(color, p3.string(), true);
  CHECK(load_pnm(p3.string()).values == color.values);

  // 64x64 gradient fixture loads with mean ~0.5
  std::vector<double> grad(64 * 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      grad[static_cast<std::size_t>(y) * 64 + x] = (x + y) / 126.0;
  const ImageBuffer gimg(64, 64, 1, grad);
  const auto pg = dir / "grad.pgm";
  save_pnm(gimg, pg.string());
  const ImageBuffer back = load_pnm(pg.string());
  double mean = 0;
  for (double v : back.values) mean += v;
  mean /= static_cast<double>(back.values.size());
  CHECK(std::abs(mean - 0.5) <= 1.0 / 255.0);

  // malformed inputs
  const auto bad1 = dir / "bad1.pgm";
  { std::ofstream out(bad1); out << "P9\n2 2\n255\n0 0 0 0\n"; }
  CHECK_THROWS_AS(load_pnm(bad1.string()), Error);
  const auto bad2 = dir / "bad2.pgm";
  { std::ofstream out(bad2); out << "P2\n2 2\n100\n0 0 0 0\n"; }
  CHECK_THROWS_AS(load_pnm(bad2.string()), Error);  // unsupported maxval
  const auto bad3 = dir / "bad3.pgm";
  { std::ofstream out(bad3); out << "P5\n4 4\n255\nxx"; }
  CHECK_THROWS_AS(load_pnm(bad3.string()), Error);  // truncated payload
  CHECK_THROWS_AS(load_pnm((dir / "missing.pgm").string()), Error);
}

TEST_CASE("image_to_dataset: stride split and helpers", "[tasks][image]") {
  const ImageBuffer img = make_test_image(16);
  Dataset d = image_to_dataset(img, 2);
  CHECK(d.size() == 256);
  int train = 0;
  for (int i = 0; i < d.size(); ++i) train += d.train_mask[static_cast<std::size_t>(i)] ? 1 : 0;
  CHECK(train == 64);  // every 2nd pixel per axis

  const ImageBuffer back = dataset_image(d);
  CHECK(back.values == img.values);

  const ImageBuffer tv = train_view_image(d, 2);
  CHECK(tv.width == 8);
  CHECK(tv.height == 8);
  CHECK(tv.at(0, 0) == img.at(0, 0));
  CHECK(tv.at(1, 3) == img.at(2, 6));

  Eigen::MatrixXd pred = Eigen::MatrixXd::Constant(d.size(), 1, 2.0);  // clamps to 1
  const ImageBuffer pi = predictions_as_image(d, pred);
  CHECK(pi.at(5, 5) == 1.0);
}

TEST_CASE("run_experiment: constant image is easy for any encoder", "[tasks][experiment]") {
  const auto dir = tmp_dir();
  const auto cpath = dir / "const.pgm";
  save_pnm(ImageBuffer(16, 16, 1, std::vector<double>(256, 0.25)), cpath.string());

  for (auto kind : {EncoderKind::identity, EncoderKind::pe}) {
    ExperimentSpec spec;
    spec.name = std::string("const_") + to_string(kind);
    spec.dataset.kind = DatasetKind::image2d;
    spec.dataset.image_path = cpath.string();
    spec.dataset.train_stride = 2;
    spec.encoder.kind = kind;
    spec.encoder.octaves = 4;
    spec.model.hidden_widths = {32};
    spec.model.seed = 1;
    spec.optim.iterations = 500;
    spec.optim.eval_every = 100;
    spec.optim.learning_rate = 1e-2;
    spec.wavelet_levels = 2;
    spec.output_dir = (dir / "out").string();
    ExperimentResult res = run_experiment(spec);
    REQUIRE(res.row.at("status") == "ok");
    CHECK(res.row.at("test_psnr").get<double>() >= 40.0);
    validate_report_row(res.row);
  }
}

TEST_CASE("run_experiment: deterministic reports and artifact files", "[tasks][experiment]") {
  const auto dir = tmp_dir();
  ExperimentSpec spec;
  spec.name = "det";
  spec.dataset.kind = DatasetKind::signal1d;
  spec.dataset.seed = 4;
  spec.dataset.n_samples = 64;
  spec.dataset.n_modes = 4;
  spec.dataset.max_frequency = 8.0;
  spec.encoder.kind = EncoderKind::spe;
  spec.encoder.octaves = 4;
  spec.model.hidden_widths = {32, 32};
  spec.model.seed = 2;
  spec.optim.iterations = 100;
  spec.optim.eval_every = 20;
  spec.output_dir = (dir / "det_out").string();

  ExperimentResult a = run_experiment(spec);
  ExperimentResult b = run_experiment(spec);
  CHECK(a.row.dump() == b.row.dump());
  CHECK(std::filesystem::exists(spec.output_dir + "/det_record.csv"));
  CHECK(std::filesystem::exists(spec.output_dir + "/det_checkpoint.json"));
  CHECK(std::filesystem::exists(spec.output_dir + "/det_report.json"));
  CHECK(std::filesystem::exists(spec.output_dir + "/det_fit.csv"));

  // spectrum present exactly for adaptive frequency encoders
  CHECK(a.row.contains("spectrum_top"));
  validate_report_row(a.row);

  spec.encoder.kind = EncoderKind::pe;
  spec.name = "det_pe";
  ExperimentResult c = run_experiment(spec);
  CHECK_FALSE(c.row.contains("spectrum_top"));
  validate_report_row(c.row);

  // checkpoint round trip reproduces the learned spectrum
  Checkpoint ck = load_checkpoint(spec.output_dir + "/det_checkpoint.json");
  auto spec_entries = checkpoint_spectrum(ck);
  CHECK(spec_entries.size() > 0);
}

TEST_CASE("compare_encodings: single cell equals run_experiment", "[tasks][compare]") {
  ExperimentSpec base;
  base.name = "cmp";
  base.dataset.kind = DatasetKind::signal1d;
  base.dataset.n_samples = 64;
  base.dataset.n_modes = 4;
  base.dataset.max_frequency = 8.0;
  base.encoder.octaves = 4;
  base.model.hidden_widths = {16};
  base.optim.iterations = 60;
  base.optim.eval_every = 20;

  EncoderSpec pe;
  pe.kind = EncoderKind::pe;
  pe.octaves = 4;
  ComparisonReport rep = compare_encodings(base, {pe}, {3}, 1, false);
  validate_report(rep.json);
  REQUIRE(rep.json.at("rows").size() == 1);
  const auto& row = rep.json.at("rows")[0];

  ExperimentSpec inst = sweep_instance(base, pe, 3);
  ExperimentResult single = run_experiment(inst, false);
  for (const char* key : {"final_train_loss", "final_test_loss", "encoder", "status"})
    CHECK(row.at(key) == single.row.at(key));

  // stable across re-runs
  ComparisonReport rep2 = compare_encodings(base, {pe}, {3}, 1, false);
  CHECK(rep.json.dump() == rep2.json.dump());
}

TEST_CASE("compare_encodings: failed runs keep the sweep alive", "[tasks][compare]") {
  ExperimentSpec base;
  base.dataset.kind = DatasetKind::signal1d;
  base.dataset.n_samples = 64;
  base.dataset.n_modes = 2;
  base.dataset.max_frequency = 4.0;
  base.model.hidden_widths = {8};
  base.optim.iterations = 30;
  base.optim.eval_every = 10;

  EncoderSpec ok;
  ok.kind = EncoderKind::pe;
  ok.octaves = 3;
  EncoderSpec broken;
  broken.kind = EncoderKind::grff;
  broken.grff_sigma = -1.0;  // construction fails

  ComparisonReport rep = compare_encodings(base, {broken, ok}, {1, 2}, 1, false);
  validate_report(rep.json);
  const auto& rows = rep.json.at("rows");
  REQUIRE(rows.size() == 4);
  int failed = 0, succeeded = 0;
  for (const auto& r : rows) (r.at("status") == "failed" ? failed : succeeded)++;
  CHECK(failed == 2);
  CHECK(succeeded == 2);
  // medians exist for the healthy encoder and the threshold annotation landed
  CHECK(rep.json.at("medians").contains("pe"));
  for (const auto& r : rows)
    if (r.at("status") == "ok") CHECK(r.contains("iterations_to_threshold"));
}

TEST_CASE("compare_encodings: parallel workers match sequential", "[tasks][compare]") {
  ExperimentSpec base;
  base.dataset.kind = DatasetKind::signal1d;
  base.dataset.n_samples = 64;
  base.dataset.n_modes = 2;
  base.dataset.max_frequency = 4.0;
  base.model.hidden_widths = {8};
  base.optim.iterations = 30;
  base.optim.eval_every = 10;
  EncoderSpec pe;
  pe.kind = EncoderKind::pe;
  pe.octaves = 3;
  EncoderSpec ape;
  ape.kind = EncoderKind::ape;
  ape.ape_features = 4;
  ComparisonReport seq = compare_encodings(base, {pe, ape}, {1, 2}, 1, false);
  ComparisonReport par = compare_encodings(base, {pe, ape}, {1, 2}, 4, false);
  CHECK(seq.json.dump() == par.json.dump());
}

TEST_CASE("report validation rejects malformed rows", "[tasks][schema]") {
  nlohmann::json bad = {{"encoder", "pe"}, {"status", "ok"}};
  CHECK_THROWS_AS(validate_report_row(bad), Error);
  nlohmann::json nan_row = {{"encoder", "pe"},
                            {"status", "ok"},
                            {"final_train_loss", std::nan("")},
                            {"final_test_loss", 1.0}};
  CHECK_THROWS_AS(validate_report_row(nan_row), Error);
  nlohmann::json wrong_spectrum = {{"encoder", "pe"},
                                   {"status", "ok"},
                                   {"final_train_loss", 1.0},
                                   {"final_test_loss", 1.0},
                                   {"spectrum_top", nlohmann::json::array()}};
  CHECK_THROWS_AS(validate_report_row(wrong_spectrum), Error);
}

TEST_CASE("experiment spec json round trip", "[tasks][schema]") {
  ExperimentSpec spec;
  spec.name = "rt";
  spec.dataset.kind = DatasetKind::image2d;
  spec.dataset.image_size = 32;
  spec.dataset.train_stride = 4;
  spec.encoder.kind = EncoderKind::hash;
  spec.encoder.hash_table_size = 64;
  spec.model.hidden_widths = {64, 64};
  spec.model.first_activation = ActivationKind::sawtooth;
  spec.optim.learning_rate = 0.01;
  spec.optim.iterations = 123;
  nlohmann::json j = spec;
  ExperimentSpec back = j.get<ExperimentSpec>();
  CHECK(nlohmann::json(back).dump() == j.dump());
}
