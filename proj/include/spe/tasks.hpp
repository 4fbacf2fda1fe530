// spe/tasks.hpp
//
// Benchmark definitions and experiment orchestration: seeded 1D signal
// generation, 2D image regression datasets, single-run experiments with
// persisted artifacts, and encoder comparison sweeps.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spe/checkpoint.hpp"
#include "spe/common.hpp"
#include "spe/dataset.hpp"
#include "spe/image_io.hpp"
#include "spe/metrics.hpp"
#include "spe/training.hpp"

namespace spe {

// ---------------------------------------------------------------------------
// Dataset construction

// Sum of random sinusoids with 1/f amplitudes on a uniform grid; even-index
// samples train, odd-index samples test.
inline Dataset gen_signal_1d(std::uint64_t seed, int n_samples, int n_modes,
                             double max_frequency) {
  require(n_samples >= 4 && n_samples % 2 == 0, "gen_signal_1d: n_samples must be even, >= 4");
  require(n_modes >= 1, "gen_signal_1d: n_modes must be >= 1");
  require(max_frequency >= 1.0, "gen_signal_1d: max_frequency must be >= 1");
  Rng rng(seed);
  std::vector<double> freq(static_cast<std::size_t>(n_modes));
  std::vector<double> phase(static_cast<std::size_t>(n_modes));
  for (auto& f : freq) f = uniform(rng, 1.0, max_frequency);
  for (auto& p : phase) p = uniform(rng, 0.0, 2.0 * kPi);

  Dataset d;
  d.kind = DatasetKind::signal1d;
  d.coords.resize(n_samples, 1);
  d.targets.resize(n_samples, 1);
  d.train_mask.resize(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const double x = static_cast<double>(i) / (n_samples - 1);
    double y = 0.0;
    for (int m = 0; m < n_modes; ++m) {
      const std::size_t mi = static_cast<std::size_t>(m);
      y += (1.0 / freq[mi]) * std::sin(2.0 * kPi * freq[mi] * x + phase[mi]);
    }
    d.coords(i, 0) = x;
    d.targets(i, 0) = y;
    d.train_mask[static_cast<std::size_t>(i)] = (i % 2 == 0);
  }
  return d;
}

// Deterministic 64x64-style test image: smooth gradient waves, a disc, and
// higher-frequency texture so encoders separate on detail recovery.
inline ImageBuffer make_test_image(int size = 64) {
  require(size >= 8, "make_test_image: size too small");
  std::vector<double> vals(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double u = (y + 0.5) / size;
      const double v = (x + 0.5) / size;
      double g = 0.45;
      g += 0.25 * std::sin(2.0 * kPi * 3.0 * u) * std::cos(2.0 * kPi * 2.0 * v);
      g += 0.15 * std::sin(2.0 * kPi * 12.0 * (u + 0.5 * v));
      const double r = std::sqrt((u - 0.5) * (u - 0.5) + (v - 0.5) * (v - 0.5));
      g += 0.10 * std::cos(2.0 * kPi * 18.0 * r);
      if ((u - 0.3) * (u - 0.3) + (v - 0.65) * (v - 0.65) < 0.04) g += 0.25;
      vals[static_cast<std::size_t>(y) * size + x] = std::clamp(g, 0.0, 1.0);
    }
  }
  return ImageBuffer(size, size, 1, std::move(vals));
}

// Pixels become targets; coordinates are pixel centres in [0,1]^2. Every
// train_stride-th pixel per axis trains, the rest test.
inline Dataset image_to_dataset(const ImageBuffer& img, int train_stride = 2) {
  require(train_stride >= 1, "image_to_dataset: stride must be >= 1");
  Dataset d;
  d.kind = DatasetKind::image2d;
  d.image_width = img.width;
  d.image_height = img.height;
  d.channels = img.channels;
  const int n = img.width * img.height;
  d.coords.resize(n, 2);
  d.targets.resize(n, img.channels);
  d.train_mask.resize(static_cast<std::size_t>(n));
  int i = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x, ++i) {
      d.coords(i, 0) = (x + 0.5) / img.width;
      d.coords(i, 1) = (y + 0.5) / img.height;
      for (int c = 0; c < img.channels; ++c) d.targets(i, c) = img.at(y, x, c);
      d.train_mask[static_cast<std::size_t>(i)] = (y % train_stride == 0) && (x % train_stride == 0);
    }
  }
  return d;
}

inline Dataset load_image(const std::string& path, int train_stride = 2) {
  return image_to_dataset(load_pnm(path), train_stride);
}

inline ImageBuffer dataset_image(const Dataset& d) {
  require(d.kind == DatasetKind::image2d, "dataset_image: not an image dataset");
  std::vector<double> vals(static_cast<std::size_t>(d.size()) * d.channels);
  for (int i = 0; i < d.size(); ++i)
    for (int c = 0; c < d.channels; ++c)
      vals[static_cast<std::size_t>(i) * d.channels + c] = d.targets(i, c);
  return ImageBuffer(d.image_width, d.image_height, d.channels, std::move(vals));
}

inline ImageBuffer predictions_as_image(const Dataset& d, const Eigen::MatrixXd& pred) {
  require(d.kind == DatasetKind::image2d, "predictions_as_image: not an image dataset");
  require(pred.rows() == d.size() && pred.cols() == d.channels,
          "predictions_as_image: shape mismatch");
  std::vector<double> vals(static_cast<std::size_t>(d.size()) * d.channels);
  for (int i = 0; i < d.size(); ++i)
    for (int c = 0; c < d.channels; ++c)
      vals[static_cast<std::size_t>(i) * d.channels + c] = std::clamp(pred(i, c), 0.0, 1.0);
  return ImageBuffer(d.image_width, d.image_height, d.channels, std::move(vals));
}

// The stride-aligned training pixels form their own (smaller) image.
inline ImageBuffer train_view_image(const Dataset& d, int train_stride) {
  require(d.kind == DatasetKind::image2d, "train_view_image: not an image dataset");
  const int w = (d.image_width + train_stride - 1) / train_stride;
  const int h = (d.image_height + train_stride - 1) / train_stride;
  std::vector<double> vals(static_cast<std::size_t>(w) * h * d.channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int i = (y * train_stride) * d.image_width + (x * train_stride);
      for (int c = 0; c < d.channels; ++c)
        vals[(static_cast<std::size_t>(y) * w + x) * d.channels + c] = d.targets(i, c);
    }
  return ImageBuffer(w, h, d.channels, std::move(vals));
}

// ---------------------------------------------------------------------------
// Experiment specification

struct DatasetSpec {
  DatasetKind kind = DatasetKind::signal1d;
  std::uint64_t seed = 0;
  int n_samples = 256;
  int n_modes = 8;
  double max_frequency = 64.0;
  std::string image_path;  // image2d: empty = deterministic synthetic image
  int image_size = 64;
  int train_stride = 2;
};

inline void to_json(nlohmann::json& j, const DatasetSpec& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)}, {"seed", s.seed}};
  if (s.kind == DatasetKind::signal1d) {
    j["n_samples"] = s.n_samples;
    j["n_modes"] = s.n_modes;
    j["max_frequency"] = s.max_frequency;
  } else {
    j["image_path"] = s.image_path;
    j["image_size"] = s.image_size;
    j["train_stride"] = s.train_stride;
  }
}

inline void from_json(const nlohmann::json& j, DatasetSpec& s) {
  s = DatasetSpec{};
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "signal1d") s.kind = DatasetKind::signal1d;
  else if (kind == "image2d") s.kind = DatasetKind::image2d;
  else throw Error("unknown dataset kind: " + kind);
  s.seed = j.value("seed", std::uint64_t{0});
  s.n_samples = j.value("n_samples", s.n_samples);
  s.n_modes = j.value("n_modes", s.n_modes);
  s.max_frequency = j.value("max_frequency", s.max_frequency);
  s.image_path = j.value("image_path", s.image_path);
  s.image_size = j.value("image_size", s.image_size);
  s.train_stride = j.value("train_stride", s.train_stride);
}

inline Dataset make_dataset(const DatasetSpec& s) {
  if (s.kind == DatasetKind::signal1d)
    return gen_signal_1d(s.seed, s.n_samples, s.n_modes, s.max_frequency);
  const ImageBuffer img =
      s.image_path.empty() ? make_test_image(s.image_size) : load_pnm(s.image_path);
  return image_to_dataset(img, s.train_stride);
}

struct ModelSpec {
  std::vector<int> hidden_widths{256, 256, 256, 256};
  ActivationKind hidden_activation = ActivationKind::relu;
  ActivationKind first_activation = ActivationKind::relu;
  InitScheme init_scheme = InitScheme::he;
  std::uint64_t seed = 0;

  MlpConfig resolve(int input_dim, int output_dim) const {
    MlpConfig cfg;
    cfg.layer_widths.push_back(input_dim);
    for (int w : hidden_widths) cfg.layer_widths.push_back(w);
    cfg.layer_widths.push_back(output_dim);
    cfg.hidden_activation = hidden_activation;
    cfg.first_activation = first_activation;
    cfg.init_scheme = init_scheme;
    cfg.seed = seed;
    return cfg;
  }
};

inline void to_json(nlohmann::json& j, const ModelSpec& s) {
  j = nlohmann::json{{"hidden_widths", s.hidden_widths},
                     {"hidden_activation", to_string(s.hidden_activation)},
                     {"first_activation", to_string(s.first_activation)},
                     {"init_scheme", to_string(s.init_scheme)},
                     {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, ModelSpec& s) {
  s = ModelSpec{};
  if (j.contains("hidden_widths")) s.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  if (j.contains("hidden_activation"))
    s.hidden_activation = activation_from_string(j.at("hidden_activation").get<std::string>());
  if (j.contains("first_activation"))
    s.first_activation = activation_from_string(j.at("first_activation").get<std::string>());
  if (j.contains("init_scheme"))
    s.init_scheme = init_scheme_from_string(j.at("init_scheme").get<std::string>());
  s.seed = j.value("seed", std::uint64_t{0});
}

inline void to_json(nlohmann::json& j, const OptimConfig& c) {
  j = nlohmann::json{{"algorithm", to_string(c.algorithm)},
                     {"learning_rate", c.learning_rate},
                     {"adam_beta1", c.adam_beta1},
                     {"adam_beta2", c.adam_beta2},
                     {"adam_eps", c.adam_eps},
                     {"iterations", c.iterations},
                     {"eval_every", c.eval_every},
                     {"batch_size", c.batch_size},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, OptimConfig& c) {
  c = OptimConfig{};
  if (j.contains("algorithm"))
    c.algorithm = optim_algo_from_string(j.at("algorithm").get<std::string>());
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.iterations = j.value("iterations", c.iterations);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", std::uint64_t{0});
}

struct ExperimentSpec {
  std::string name = "experiment";
  DatasetSpec dataset;
  EncoderSpec encoder;
  ModelSpec model;
  OptimConfig optim;
  int wavelet_levels = 2;  // image tasks: WDPR levels 1..this
  std::string output_dir = ".";
};

inline void to_json(nlohmann::json& j, const ExperimentSpec& s) {
  j = nlohmann::json{{"name", s.name},           {"dataset", s.dataset},
                     {"encoder", s.encoder},     {"model", s.model},
                     {"optim", s.optim},         {"wavelet_levels", s.wavelet_levels},
                     {"output_dir", s.output_dir}};
}

inline void from_json(const nlohmann::json& j, ExperimentSpec& s) {
  s = ExperimentSpec{};
  s.name = j.value("name", s.name);
  if (j.contains("dataset")) s.dataset = j.at("dataset").get<DatasetSpec>();
  if (j.contains("encoder")) s.encoder = j.at("encoder").get<EncoderSpec>();
  if (j.contains("model")) s.model = j.at("model").get<ModelSpec>();
  if (j.contains("optim")) s.optim = j.at("optim").get<OptimConfig>();
  s.wavelet_levels = j.value("wavelet_levels", s.wavelet_levels);
  s.output_dir = j.value("output_dir", s.output_dir);
}

// ---------------------------------------------------------------------------
// Single experiment

struct ExperimentResult {
  nlohmann::json row;       // schema-validated report row
  TrainRecord record;
  Checkpoint checkpoint;
  bool diverged = false;
};

namespace detail {

inline nlohmann::json finite_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline nlohmann::json spectrum_json(const std::vector<SpectrumEntry>& spec, std::size_t top_k) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.size() && i < top_k; ++i)
    arr.push_back({{"component", spec[i].component},
                   {"octave", spec[i].octave},
                   {"omega_star", spec[i].omega_star}});
  return arr;
}

}  // namespace detail

// Effective-frequency spectrum of a trained checkpoint; only adaptive
// frequency encoders (spe, spe_diag, ape) carry one.
inline std::vector<SpectrumEntry> checkpoint_spectrum(const Checkpoint& ck) {
  switch (ck.encoder.kind) {
    case EncoderKind::spe: {
      PeConfig pe{ck.encoder.octaves, ck.encoder.falloff,
                  0};  // input_dim recovered from the weight width
      require(!ck.params.weights.empty(), "spectrum: checkpoint has no layers");
      const auto& w0 = ck.params.weights.front();
      require(w0.cols() % (2 * pe.octaves) == 0, "spectrum: weight width mismatch");
      pe.input_dim = static_cast<int>(w0.cols()) / (2 * pe.octaves);
      return learned_spectrum(w0, pe);
    }
    case EncoderKind::spe_diag: {
      const int f = static_cast<int>(ck.encoder_params.size()) / 2;
      require(f > 0 && f % (2 * ck.encoder.octaves) == 0, "spectrum: encoder params mismatch");
      PeConfig pe{ck.encoder.octaves, ck.encoder.falloff, f / (2 * ck.encoder.octaves)};
      return learned_spectrum(Eigen::VectorXd(ck.encoder_params.head(f)), pe);
    }
    case EncoderKind::ape: {
      // Trained frequencies are already effective frequencies; report each
      // against the band that would host it.
      std::vector<SpectrumEntry> s;
      for (int k = 0; k < ck.encoder_params.size(); ++k) {
        const double w = std::abs(ck.encoder_params[k]);
        int octave = 1;
        if (w > kPi) octave = std::min(24, static_cast<int>(std::floor(std::log2(w / kPi))) + 1);
        s.push_back({k, octave, w});
      }
      std::sort(s.begin(), s.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
        return std::abs(a.omega_star) > std::abs(b.omega_star);
      });
      return s;
    }
    default:
      throw Error("encoder has no learned spectrum");
  }
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec, bool persist = true) {
  const Dataset data = make_dataset(spec.dataset);
  const MlpConfig model_cfg = spec.model.resolve(1, data.target_dim());
  TrainOutcome outcome = train(model_cfg, spec.encoder, data, spec.optim);

  ExperimentResult res;
  res.record = std::move(outcome.record);
  res.diverged = outcome.diverged;
  res.checkpoint.model = outcome.model;
  res.checkpoint.params = outcome.params;
  res.checkpoint.encoder = spec.encoder;
  res.checkpoint.encoder_params = outcome.encoder->trainable_params();

  nlohmann::json row;
  row["name"] = spec.name;
  row["encoder"] = to_string(spec.encoder.kind);
  row["status"] = outcome.diverged ? "failed" : "ok";
  if (outcome.diverged) {
    row["diagnostic"] = outcome.diagnostic;
    res.row = row;
    return res;
  }

  const TrainEval& fin = res.record.final_eval();
  row["iterations"] = fin.iteration;
  row["final_train_loss"] = detail::finite_or_inf(fin.train_loss);
  row["final_test_loss"] = detail::finite_or_inf(fin.test_loss);

  Eigen::MatrixXd full_pred =
      forward(outcome.params, outcome.model, outcome.encoder->encode(data.coords));

  if (data.kind == DatasetKind::image2d) {
    const ImageBuffer truth = dataset_image(data);
    const ImageBuffer pred = predictions_as_image(data, full_pred);
    double mse_test = 0.0;
    int n_test = 0;
    for (int i = 0; i < data.size(); ++i) {
      if (data.train_mask[static_cast<std::size_t>(i)]) continue;
      for (int c = 0; c < data.channels; ++c) {
        const double d = std::clamp(full_pred(i, c), 0.0, 1.0) - data.targets(i, c);
        mse_test += d * d;
        ++n_test;
      }
    }
    mse_test /= std::max(1, n_test);
    row["test_psnr"] = detail::finite_or_inf(
        mse_test == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / mse_test));
    row["test_ssim"] = ssim(truth, pred);
    nlohmann::json wdpr_levels = nlohmann::json::array();
    nlohmann::json ratio_levels = nlohmann::json::array();
    for (int l = 1; l <= spec.wavelet_levels; ++l) {
      try {
        wdpr_levels.push_back(wdpr(truth, pred, l));
        ratio_levels.push_back(wavelet_power_ratio(truth, pred, l));
      } catch (const Error&) {  // zero true-band power (e.g. constant images)
        wdpr_levels.push_back("undefined");
        ratio_levels.push_back("undefined");
      }
    }
    row["wdpr"] = wdpr_levels;
    row["wavelet_power_ratio"] = ratio_levels;
    const ImageBuffer train_img = train_view_image(data, spec.dataset.train_stride);
    try {
      row["rwde"] = rwde(train_img, pred, truth);
    } catch (const Error&) {
      row["rwde"] = "perfect";
    }
    if (persist) {
      std::filesystem::create_directories(spec.output_dir);
      save_pnm(pred, spec.output_dir + "/" + spec.name + "_pred.pnm");
    }
  }

  const bool has_spectrum = spec.encoder.kind == EncoderKind::spe ||
                            spec.encoder.kind == EncoderKind::spe_diag ||
                            spec.encoder.kind == EncoderKind::ape;
  if (has_spectrum)
    row["spectrum_top"] = detail::spectrum_json(checkpoint_spectrum(res.checkpoint), 16);

  if (persist) {
    std::filesystem::create_directories(spec.output_dir);
    write_record_csv(res.record, spec.output_dir + "/" + spec.name + "_record.csv");
    save_checkpoint(res.checkpoint, spec.output_dir + "/" + spec.name + "_checkpoint.json");
    if (data.kind == DatasetKind::signal1d) {
      std::ofstream fit(spec.output_dir + "/" + spec.name + "_fit.csv");
      fit << std::setprecision(17) << "x,target,prediction\n";
      for (int i = 0; i < data.size(); ++i)
        fit << data.coords(i, 0) << ',' << data.targets(i, 0) << ',' << full_pred(i, 0) << '\n';
    }
    std::ofstream rep(spec.output_dir + "/" + spec.name + "_report.json");
    rep << row.dump(2) << '\n';
  }
  res.row = row;
  return res;
}

// ---------------------------------------------------------------------------
// Encoder comparison sweeps

struct ComparisonReport {
  nlohmann::json json;  // rows + per-encoder medians + threshold
};

namespace detail {

inline double median(std::vector<double> v) {
  require(!v.empty(), "median: empty");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Derived per-run seeds keep the dataset draw, encoder init, and network init
// decorrelated while staying reproducible from one sweep seed.
inline ExperimentSpec sweep_instance(const ExperimentSpec& base, const EncoderSpec& enc,
                                     std::uint64_t seed) {
  ExperimentSpec s = base;
  s.encoder = enc;
  s.dataset.seed = seed;
  s.encoder.seed = seed + 500;
  s.model.seed = seed + 1000;
  s.optim.seed = seed;
  s.name = base.name + "_" + to_string(enc.kind) + "_s" + std::to_string(seed);
  return s;
}

inline ComparisonReport compare_encodings(const ExperimentSpec& base,
                                          const std::vector<EncoderSpec>& encoders,
                                          const std::vector<std::uint64_t>& seeds,
                                          int workers = 1, bool persist = true) {
  require(!encoders.empty(), "compare_encodings: encoder list empty");
  require(!seeds.empty(), "compare_encodings: need at least one seed");
  std::vector<std::uint64_t> sorted_seeds = seeds;
  std::sort(sorted_seeds.begin(), sorted_seeds.end());

  struct Cell {
    nlohmann::json row;
    TrainRecord record;
    bool ok = false;
  };
  std::vector<Cell> cells(encoders.size() * sorted_seeds.size());
  auto run_cell = [&](std::size_t e, std::size_t s) {
    Cell cell;
    try {
      ExperimentSpec inst = sweep_instance(base, encoders[e], sorted_seeds[s]);
      ExperimentResult r = run_experiment(inst, persist);
      cell.row = r.row;
      cell.record = r.record;
      cell.ok = !r.diverged;
    } catch (const std::exception& ex) {
      cell.row = {{"encoder", to_string(encoders[e].kind)}, {"status", "failed"},
                  {"diagnostic", ex.what()}};
      cell.ok = false;
    }
    cell.row["seed"] = sorted_seeds[s];
    return cell;
  };

  if (workers <= 1) {
    for (std::size_t e = 0; e < encoders.size(); ++e)
      for (std::size_t s = 0; s < sorted_seeds.size(); ++s)
        cells[e * sorted_seeds.size() + s] = run_cell(e, s);
  } else {
    std::vector<std::future<Cell>> futs;
    futs.reserve(cells.size());
    for (std::size_t e = 0; e < encoders.size(); ++e)
      for (std::size_t s = 0; s < sorted_seeds.size(); ++s)
        futs.push_back(std::async(std::launch::async, run_cell, e, s));
    // Throttle is unnecessary at desk scale; collect in order.
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = futs[i].get();
  }

  // Per-encoder medians and the weakest final train loss as threshold.
  nlohmann::json medians = nlohmann::json::object();
  double weakest = 0.0;
  bool any = false;
  for (std::size_t e = 0; e < encoders.size(); ++e) {
    std::vector<double> tr, te, ps;
    for (std::size_t s = 0; s < sorted_seeds.size(); ++s) {
      const Cell& c = cells[e * sorted_seeds.size() + s];
      if (!c.ok) continue;
      tr.push_back(c.row.at("final_train_loss").get<double>());
      te.push_back(c.row.at("final_test_loss").get<double>());
      if (c.row.contains("test_psnr") && c.row.at("test_psnr").is_number())
        ps.push_back(c.row.at("test_psnr").get<double>());
    }
    nlohmann::json m = nlohmann::json::object();
    if (!tr.empty()) {
      m["final_train_loss"] = detail::median(tr);
      m["final_test_loss"] = detail::median(te);
      if (!ps.empty()) m["test_psnr"] = detail::median(ps);
      weakest = any ? std::max(weakest, detail::median(tr)) : detail::median(tr);
      any = true;
    }
    medians[to_string(encoders[e].kind)] = m;
  }

  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t e = 0; e < encoders.size(); ++e) {
    for (std::size_t s = 0; s < sorted_seeds.size(); ++s) {
      Cell& c = cells[e * sorted_seeds.size() + s];
      if (c.ok && any && weakest > 0.0) {
        const auto reach = iterations_to_threshold(c.record, weakest);
        c.row["iterations_to_threshold"] = reach ? nlohmann::json(*reach) : nlohmann::json("none");
      }
      rows.push_back(c.row);
    }
  }

  ComparisonReport report;
  report.json = {{"rows", rows},
                 {"medians", medians},
                 {"threshold_train_loss", any ? nlohmann::json(weakest) : nlohmann::json("none")},
                 {"seeds", sorted_seeds}};
  return report;
}

// Structural validation for report rows: required keys present, numeric
// fields finite numbers or the explicit strings "inf"/"-inf"/"failed".
inline void validate_report_row(const nlohmann::json& row) {
  require(row.contains("encoder") && row.at("encoder").is_string(), "report row: missing encoder");
  require(row.contains("status") && row.at("status").is_string(), "report row: missing status");
  const std::string status = row.at("status").get<std::string>();
  require(status == "ok" || status == "failed", "report row: bad status");
  if (status == "failed") return;
  for (const char* key : {"final_train_loss", "final_test_loss"}) {
    require(row.contains(key), std::string("report row: missing ") + key);
    const auto& v = row.at(key);
    if (v.is_number()) {
      require(std::isfinite(v.get<double>()), std::string("report row: non-finite ") + key);
    } else {
      const std::string s = v.get<std::string>();
      require(s == "inf" || s == "-inf", std::string("report row: bad ") + key);
    }
  }
  const bool spectral = row.contains("spectrum_top");
  const std::string enc = row.at("encoder").get<std::string>();
  const bool adaptive_freq = (enc == "spe" || enc == "spe_diag" || enc == "ape");
  require(spectral == adaptive_freq, "report row: spectrum presence does not match encoder kind");
}

inline void validate_report(const nlohmann::json& report) {
  require(report.contains("rows") && report.at("rows").is_array(), "report: missing rows");
  for (const auto& row : report.at("rows")) validate_report_row(row);
  require(report.contains("medians"), "report: missing medians");
}

}  // namespace spe
