// spe/encoders.hpp
//
// Input-encoding families for coordinate networks: fixed sinusoidal bands
// (pe_encode), Gaussian random Fourier features (grff_encode), directly
// trainable frequencies (ape_encode), the sinusoidal positional-encoding
// layer sin(W*PE(x)+phase) (spe_apply), and a multi-level hashed feature
// grid (hash_encode). Also the encoding-level analysis helpers: distance
// to the nearest hardcoded band, effective-frequency spectra of trained
// weights, the gated approximation error of the sine layer, and the
// corrective term that periodic-linear activations would require.
//
// Feature layout everywhere: per input dimension, then per octave
// ascending, then (sin, cos).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spe/common.hpp"

namespace spe {

// ---------------------------------------------------------------------------
// Configurations

struct PeConfig {
  int octaves = 10;      // number of frequency-doubling bands
  double falloff = 0.0;  // amplitude exponent: band l scaled by (l+1)^-falloff
  int input_dim = 1;

  int output_dim() const { return 2 * octaves * input_dim; }
  void validate() const {
    require(octaves >= 1, "PeConfig: octaves must be >= 1");
    require(falloff >= 0.0, "PeConfig: falloff must be >= 0");
    require(input_dim >= 1, "PeConfig: input_dim must be >= 1");
  }
  double amplitude(int octave) const { return std::pow(octave + 1.0, -falloff); }
};

struct GrffConfig {
  int num_features = 16;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  int input_dim = 1;
  Eigen::MatrixXd weight;  // num_features x input_dim, frozen after construction

  GrffConfig() = default;
  GrffConfig(int num_features_, double sigma_, std::uint64_t seed_, int input_dim_)
      : num_features(num_features_), sigma(sigma_), seed(seed_), input_dim(input_dim_) {
    require(num_features >= 1, "GrffConfig: num_features must be >= 1");
    require(sigma > 0.0, "GrffConfig: sigma must be > 0");
    require(input_dim >= 1, "GrffConfig: input_dim must be >= 1");
    weight.resize(num_features, input_dim);
    Rng rng(seed);
    for (int r = 0; r < num_features; ++r)
      for (int c = 0; c < input_dim; ++c) weight(r, c) = gaussian(rng, 0.0, sigma);
  }

  int output_dim() const { return 2 * num_features; }
};

struct ApeParams {
  Eigen::VectorXd frequencies;  // trainable
  int input_dim = 1;

  int output_dim() const { return 2 * static_cast<int>(frequencies.size()) * input_dim; }
  void validate() const {
    require(frequencies.size() >= 1, "ApeParams: need at least one frequency");
    require(input_dim >= 1, "ApeParams: input_dim must be >= 1");
  }
};

struct SpeLayerParams {
  enum class Mode { diagonal, dense };

  Mode mode = Mode::diagonal;
  Eigen::MatrixXd weights;  // dense: rows x (2*L*d); diagonal: (2*L*d) x 1
  Eigen::VectorXd phase;    // one entry per output component
  PeConfig inner_pe;

  int output_dim() const {
    return mode == Mode::diagonal ? static_cast<int>(weights.rows())
                                  : static_cast<int>(weights.rows());
  }
  void validate() const {
    inner_pe.validate();
    const int f = inner_pe.output_dim();
    if (mode == Mode::diagonal) {
      require(weights.cols() == 1 && weights.rows() == f,
              "SpeLayerParams: diagonal weights must be one entry per feature");
    } else {
      require(weights.cols() == f, "SpeLayerParams: dense weight width must match features");
    }
    require(phase.size() == weights.rows(), "SpeLayerParams: phase length mismatch");
  }
};

struct HashGridConfig {
  int levels = 8;
  int table_size = 1024;
  int features_per_entry = 2;
  int base_resolution = 4;
  double growth_factor = 2.0;
  int input_dim = 2;
  std::array<std::uint64_t, 3> primes{1ull, 2654435761ull, 805459861ull};
  std::vector<Eigen::MatrixXd> tables;  // per level: table_size x features_per_entry, trainable

  int output_dim() const { return levels * features_per_entry; }
  int resolution(int level) const {
    return static_cast<int>(std::floor(base_resolution * std::pow(growth_factor, level)));
  }
  void validate() const {
    require(levels >= 1, "HashGridConfig: levels must be >= 1");
    require(table_size >= 1, "HashGridConfig: table_size must be >= 1");
    require(features_per_entry >= 1, "HashGridConfig: features_per_entry must be >= 1");
    require(base_resolution >= 1, "HashGridConfig: base_resolution must be >= 1");
    require(growth_factor > 1.0, "HashGridConfig: growth_factor must be > 1");
    require(input_dim >= 1 && input_dim <= 3, "HashGridConfig: input_dim must be in [1,3]");
    require(primes[0] == 1, "HashGridConfig: primes[0] must be 1");
  }
  void init_tables(std::uint64_t seed) {
    validate();
    tables.assign(levels, Eigen::MatrixXd(table_size, features_per_entry));
    Rng rng(seed);
    for (auto& t : tables)
      for (int r = 0; r < t.rows(); ++r)
        for (int c = 0; c < t.cols(); ++c) t(r, c) = uniform(rng, -1e-4, 1e-4);
  }
};

struct EncodedFeatures {
  Eigen::VectorXd values;
  bool clamped = false;  // set when an input had to be clamped into the domain
};

// ---------------------------------------------------------------------------
// Encoding operations (single coordinate vector in, feature vector out)

inline EncodedFeatures pe_encode(const Eigen::VectorXd& x, const PeConfig& cfg) {
  cfg.validate();
  require(x.size() == cfg.input_dim, "pe_encode: input dimension mismatch");
  require_finite(x, "pe_encode input");
  EncodedFeatures out;
  out.values.resize(cfg.output_dim());
  int k = 0;
  for (int i = 0; i < cfg.input_dim; ++i) {
    for (int l = 0; l < cfg.octaves; ++l) {
      const double a = cfg.amplitude(l);
      const double arg = std::ldexp(1.0, l) * kPi * x[i];
      out.values[k++] = a * std::sin(arg);
      out.values[k++] = a * std::cos(arg);
    }
  }
  return out;
}

inline EncodedFeatures grff_encode(const Eigen::VectorXd& x, const GrffConfig& cfg) {
  require(x.size() == cfg.weight.cols(), "grff_encode: input dimension mismatch");
  require_finite(x, "grff_encode input");
  const Eigen::VectorXd proj = cfg.weight * x;
  EncodedFeatures out;
  out.values.resize(2 * proj.size());
  out.values.head(proj.size()) = proj.array().sin();
  out.values.tail(proj.size()) = proj.array().cos();
  return out;
}

inline EncodedFeatures ape_encode(const Eigen::VectorXd& x, const ApeParams& params) {
  params.validate();
  require(x.size() == params.input_dim, "ape_encode: input dimension mismatch");
  require_finite(x, "ape_encode input");
  const int K = static_cast<int>(params.frequencies.size());
  EncodedFeatures out;
  out.values.resize(2 * K * params.input_dim);
  int j = 0;
  for (int i = 0; i < params.input_dim; ++i) {
    for (int k = 0; k < K; ++k) {
      const double arg = params.frequencies[k] * x[i];
      out.values[j++] = std::sin(arg);
      out.values[j++] = std::cos(arg);
    }
  }
  return out;
}

inline Eigen::VectorXd spe_apply(const EncodedFeatures& features, const SpeLayerParams& params) {
  params.validate();
  const Eigen::VectorXd& f = features.values;
  require(f.size() == params.inner_pe.output_dim(), "spe_apply: feature length mismatch");
  if (params.mode == SpeLayerParams::Mode::diagonal) {
    return (params.weights.col(0).array() * f.array() + params.phase.array()).sin();
  }
  return ((params.weights * f + params.phase).array()).sin();
}

// Corner hash: XOR of prime-multiplied integer coordinates, modulo table size.
inline std::uint64_t hash_corner_index(const std::int64_t* corner, int dim,
                                       const std::array<std::uint64_t, 3>& primes,
                                       int table_size) {
  std::uint64_t h = 0;
  for (int i = 0; i < dim; ++i)
    h ^= static_cast<std::uint64_t>(corner[i]) * primes[static_cast<std::size_t>(i)];
  return h % static_cast<std::uint64_t>(table_size);
}

namespace detail {

// Shared corner walk for hash_encode and its table gradient.
template <typename Visit>
inline bool hash_grid_visit(const Eigen::VectorXd& x, const HashGridConfig& cfg, Visit&& visit) {
  const int d = cfg.input_dim;
  bool clamped = false;
  Eigen::VectorXd xc = x;
  for (int i = 0; i < d; ++i) {
    if (xc[i] < 0.0 || xc[i] > 1.0) {
      xc[i] = std::clamp(xc[i], 0.0, 1.0);
      clamped = true;
    }
  }
  std::array<std::int64_t, 3> base{};
  std::array<double, 3> frac{};
  for (int level = 0; level < cfg.levels; ++level) {
    const int res = cfg.resolution(level);
    for (int i = 0; i < d; ++i) {
      const double pos = xc[i] * res;
      std::int64_t c0 = static_cast<std::int64_t>(std::floor(pos));
      c0 = std::clamp<std::int64_t>(c0, 0, res - 1);
      base[static_cast<std::size_t>(i)] = c0;
      frac[static_cast<std::size_t>(i)] = pos - static_cast<double>(c0);
    }
    const int corners = 1 << d;
    for (int mask = 0; mask < corners; ++mask) {
      std::array<std::int64_t, 3> corner{};
      double w = 1.0;
      for (int i = 0; i < d; ++i) {
        const bool hi = (mask >> i) & 1;
        corner[static_cast<std::size_t>(i)] = base[static_cast<std::size_t>(i)] + (hi ? 1 : 0);
        w *= hi ? frac[static_cast<std::size_t>(i)] : 1.0 - frac[static_cast<std::size_t>(i)];
      }
      const std::uint64_t idx = hash_corner_index(corner.data(), d, cfg.primes, cfg.table_size);
      visit(level, static_cast<int>(idx), w);
    }
  }
  return clamped;
}

}  // namespace detail

inline EncodedFeatures hash_encode(const Eigen::VectorXd& x, const HashGridConfig& cfg) {
  cfg.validate();
  require(static_cast<int>(cfg.tables.size()) == cfg.levels,
          "hash_encode: tables not initialised");
  require(x.size() == cfg.input_dim, "hash_encode: input dimension mismatch");
  require_finite(x, "hash_encode input");
  const int F = cfg.features_per_entry;
  EncodedFeatures out;
  out.values = Eigen::VectorXd::Zero(cfg.output_dim());
  out.clamped = detail::hash_grid_visit(x, cfg, [&](int level, int idx, double w) {
    out.values.segment(level * F, F) += w * cfg.tables[static_cast<std::size_t>(level)].row(idx).transpose();
  });
  return out;
}

// Accumulates dL/d(table entries) given dL/d(features) for one input.
inline void hash_encode_table_gradient(const Eigen::VectorXd& x, const HashGridConfig& cfg,
                                       const Eigen::VectorXd& feature_grad,
                                       std::vector<Eigen::MatrixXd>& table_grads) {
  const int F = cfg.features_per_entry;
  require(feature_grad.size() == cfg.output_dim(), "hash gradient: feature length mismatch");
  detail::hash_grid_visit(x, cfg, [&](int level, int idx, double w) {
    table_grads[static_cast<std::size_t>(level)].row(idx) +=
        w * feature_grad.segment(level * F, F).transpose();
  });
}

// ---------------------------------------------------------------------------
// Encoding-level analysis

// Distance from a target frequency to the nearest hardcoded band in
// {pi, 2*pi, ..., 2^(L-1)*pi} using the two-branch closed form.
inline double pe_feature_distance(double omega_a, int octaves) {
  require(omega_a > 0.0, "pe_feature_distance: omega must be > 0");
  require(octaves >= 1, "pe_feature_distance: octaves must be >= 1");
  const double top = std::ldexp(1.0, octaves - 1) * kPi;
  if (omega_a >= top) return omega_a - top;
  const double r = std::log2(omega_a / kPi);
  auto clamp_band = [&](double b) {
    return std::clamp(static_cast<int>(b), 0, octaves - 1);
  };
  const int b_lo = clamp_band(std::floor(r));
  const int b_hi = clamp_band(std::ceil(r));
  const double d_lo = std::abs(omega_a - std::ldexp(1.0, b_lo) * kPi);
  const double d_hi = std::abs(std::ldexp(1.0, b_hi) * kPi - omega_a);
  return std::min(d_lo, d_hi);
}

struct SpectrumEntry {
  int component = 0;   // row (dense) or feature index (diagonal)
  int octave = 1;      // 1-based band index
  double omega_star = 0.0;  // |weight| * 2^(octave-1)
};

namespace detail {

inline int octave_of_column(int col, const PeConfig& cfg) {
  const int per_dim = 2 * cfg.octaves;
  return (col % per_dim) / 2;  // 0-based
}

inline std::vector<SpectrumEntry> sort_spectrum(std::vector<SpectrumEntry> s) {
  std::sort(s.begin(), s.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
    return std::abs(a.omega_star) > std::abs(b.omega_star);
  });
  return s;
}

}  // namespace detail

// Effective frequencies of trained first-layer weights, sorted by magnitude.
// Diagonal form: one entry per feature. Dense form: each row is attributed
// to its max-magnitude column.
inline std::vector<SpectrumEntry> learned_spectrum(const Eigen::VectorXd& w,
                                                   const PeConfig& cfg) {
  cfg.validate();
  require(w.size() == cfg.output_dim(), "learned_spectrum: weight length mismatch");
  std::vector<SpectrumEntry> s;
  s.reserve(static_cast<std::size_t>(w.size()));
  for (int j = 0; j < w.size(); ++j) {
    const int l0 = detail::octave_of_column(j, cfg);
    s.push_back({j, l0 + 1, std::abs(w[j]) * std::ldexp(1.0, l0)});
  }
  return detail::sort_spectrum(std::move(s));
}

inline std::vector<SpectrumEntry> learned_spectrum(const Eigen::MatrixXd& w,
                                                   const PeConfig& cfg) {
  cfg.validate();
  require(w.cols() == cfg.output_dim(), "learned_spectrum: weight width mismatch");
  std::vector<SpectrumEntry> s;
  s.reserve(static_cast<std::size_t>(w.rows()));
  for (int r = 0; r < w.rows(); ++r) {
    int best = 0;
    w.row(r).cwiseAbs().maxCoeff(&best);
    const int l0 = detail::octave_of_column(best, cfg);
    s.push_back({r, l0 + 1, std::abs(w(r, best)) * std::ldexp(1.0, l0)});
  }
  return detail::sort_spectrum(std::move(s));
}

// Anchor gates. The sine component of the top band approximates the tuned
// sinusoid near t = n*pi; the cosine component does so near t = (n+1/2)*pi
// with a quarter-period argument shift.
inline bool near_sin_anchor(double t, double tol) {
  const double n = std::round(t / kPi);
  return std::abs(t - n * kPi) <= tol;
}

inline bool near_cos_anchor(double t, double tol) {
  const double n = std::round(t / kPi - 0.5);
  return std::abs(t - (n + 0.5) * kPi) <= tol;
}

// Worst-case gated deviation between the sine layer applied to the top PE
// band and the ideal tuned sinusoid of frequency omega * 2^(L-1) * pi.
// Grid points within 2^-(L+2) of a dyadic anchor n/2^L participate; even
// anchors gate the sine component against sin(omega*t), odd anchors gate the
// cosine component against the quarter-period-shifted target.
inline double spe_approx_error(double omega, const Eigen::VectorXd& x_grid, int octaves) {
  require(octaves >= 1, "spe_approx_error: octaves must be >= 1");
  const double eps = std::ldexp(1.0, -(octaves + 2));
  const double scale = std::ldexp(1.0, octaves - 1) * kPi;  // t = scale * x
  double worst = 0.0;
  for (int i = 0; i < x_grid.size(); ++i) {
    const double x = x_grid[i];
    const double n = std::round(std::ldexp(x, octaves));
    const double dx = x - std::ldexp(n, -octaves);
    if (std::abs(dx) > eps) continue;
    const double dt = scale * dx;
    const auto ni = static_cast<long long>(n);
    double branch, target;
    if (ni % 2 == 0) {
      // t near m*pi: sin(t) reduces to (-1)^m * sin(dt)
      const long long m = ni / 2;
      const double sin_t = (m % 2 == 0 ? 1.0 : -1.0) * std::sin(dt);
      branch = std::sin(omega * sin_t);
      target = std::sin(omega * (static_cast<double>(m) * kPi + dt));
    } else {
      // t near (m+1/2)*pi: cos(t) reduces to -(-1)^m * sin(dt)
      const long long m = (ni - 1) / 2;
      const double cos_t = (m % 2 == 0 ? -1.0 : 1.0) * std::sin(dt);
      branch = std::sin(omega * cos_t);
      target = std::sin(omega * (static_cast<double>(m + 1) * kPi + dt));
    }
    worst = std::max(worst, std::abs(branch - target));
  }
  return worst;
}

// Corrective function a periodic-linear activation would force onto the rest
// of the network: sin(omega*t) / (sqrt(omega^2 - (2n*pi)^2) mod 2*pi).
// Exists to demonstrate that it varies with omega; the sine-layer gates do not.
inline double sawtooth_correction(double omega, int n, double t) {
  const double k = 2.0 * n * kPi;
  require(omega * omega > k * k, "sawtooth_correction: omega^2 must exceed (2n*pi)^2");
  const double core = std::sqrt(omega * omega - k * k);
  const double denom = std::fmod(core, 2.0 * kPi);
  const double wrap = std::min(denom, 2.0 * kPi - denom);
  require(wrap > 1e-9, "sawtooth_correction: denominator vanishes (mod 2*pi)");
  return std::sin(omega * t) / denom;
}

}  // namespace spe
