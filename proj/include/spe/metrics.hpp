// spe/metrics.hpp
//
// Fidelity and frequency-analysis metrics: PSNR, windowed SSIM, orthonormal
// Haar wavelet pyramids with per-level detail-band power, exact 1D
// Wasserstein distance on histograms, and the relative Wasserstein distance
// error between train/synthesis/truth intensity distributions.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "spe/common.hpp"

namespace spe {

struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> values;  // row-major (y, x, channel), clamped to [0,1]

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, std::vector<double> vals)
      : width(w), height(h), channels(c), values(std::move(vals)) {
    require(channels == 1 || channels == 3, "ImageBuffer: channels must be 1 or 3");
    require(width > 0 && height > 0, "ImageBuffer: empty");
    require(values.size() == static_cast<std::size_t>(width) * height * channels,
            "ImageBuffer: value count mismatch");
    for (double& v : values) {
      require(std::isfinite(v), "ImageBuffer: non-finite value");
      v = std::clamp(v, 0.0, 1.0);
    }
  }

  static ImageBuffer zeros(int w, int h, int c = 1) {
    return ImageBuffer(w, h, c, std::vector<double>(static_cast<std::size_t>(w) * h * c, 0.0));
  }

  double at(int y, int x, int c = 0) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double& at(int y, int x, int c = 0) {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  Eigen::MatrixXd channel(int c) const {
    Eigen::MatrixXd m(height, width);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) m(y, x) = at(y, x, c);
    return m;
  }
  bool same_shape(const ImageBuffer& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

inline void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* op) {
  require(a.same_shape(b), std::string(op) + ": image dimension mismatch");
}

// Peak signal-to-noise ratio in dB on the [0,1] range; +inf for equal images.
inline double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "psnr");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.values.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

// Mean local SSIM over sliding windows (stride 1, uniform weighting),
// standard constants on the [0,1] range, channels averaged.
inline double ssim(const ImageBuffer& a, const ImageBuffer& b, int window = 8) {
  require_same_shape(a, b, "ssim");
  require(window >= 1 && window <= std::min(a.width, a.height),
          "ssim: window must fit inside the image");
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  const double n = static_cast<double>(window) * window;
  double total = 0.0;
  long count = 0;
  for (int c = 0; c < a.channels; ++c) {
    const Eigen::MatrixXd ma = a.channel(c);
    const Eigen::MatrixXd mb = b.channel(c);
    for (int y = 0; y + window <= a.height; ++y) {
      for (int x = 0; x + window <= a.width; ++x) {
        const auto wa = ma.block(y, x, window, window);
        const auto wb = mb.block(y, x, window, window);
        const double mu_a = wa.mean();
        const double mu_b = wb.mean();
        const double var_a = wa.array().square().sum() / n - mu_a * mu_a;
        const double var_b = wb.array().square().sum() / n - mu_b * mu_b;
        const double cov = (wa.array() * wb.array()).sum() / n - mu_a * mu_b;
        total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                 ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Orthonormal 2D Haar analysis

struct WaveletPyramid {
  struct Level {
    Eigen::MatrixXd lh;  // detail in y, approximation in x
    Eigen::MatrixXd hl;  // detail in x, approximation in y
    Eigen::MatrixXd hh;  // detail in both
  };
  std::vector<Level> levels;  // levels[0] is the first (finest) decomposition
  Eigen::MatrixXd approx;

  double detail_power(int level) const {
    require(level >= 1 && level <= static_cast<int>(levels.size()),
            "WaveletPyramid: level out of range");
    const Level& l = levels[static_cast<std::size_t>(level - 1)];
    return l.lh.squaredNorm() + l.hl.squaredNorm() + l.hh.squaredNorm();
  }
  double total_energy() const {
    double e = approx.squaredNorm();
    for (const auto& l : levels)
      e += l.lh.squaredNorm() + l.hl.squaredNorm() + l.hh.squaredNorm();
    return e;
  }
};

inline WaveletPyramid haar_decompose(const Eigen::MatrixXd& img, int levels) {
  require(levels >= 1, "haar_decompose: levels must be >= 1");
  const long div = 1L << levels;
  require(img.rows() % div == 0 && img.cols() % div == 0,
          "haar_decompose: dimensions must be divisible by 2^levels");
  WaveletPyramid pyr;
  Eigen::MatrixXd a = img;
  for (int l = 0; l < levels; ++l) {
    const long h = a.rows() / 2;
    const long w = a.cols() / 2;
    WaveletPyramid::Level lev{Eigen::MatrixXd(h, w), Eigen::MatrixXd(h, w),
                              Eigen::MatrixXd(h, w)};
    Eigen::MatrixXd next(h, w);
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        const double p00 = a(2 * y, 2 * x);
        const double p01 = a(2 * y, 2 * x + 1);
        const double p10 = a(2 * y + 1, 2 * x);
        const double p11 = a(2 * y + 1, 2 * x + 1);
        next(y, x) = 0.5 * (p00 + p01 + p10 + p11);
        lev.hl(y, x) = 0.5 * (p00 - p01 + p10 - p11);
        lev.lh(y, x) = 0.5 * (p00 + p01 - p10 - p11);
        lev.hh(y, x) = 0.5 * (p00 - p01 - p10 + p11);
      }
    }
    pyr.levels.push_back(std::move(lev));
    a = std::move(next);
  }
  pyr.approx = std::move(a);
  return pyr;
}

inline WaveletPyramid haar_decompose(const ImageBuffer& img, int levels) {
  require(img.channels == 1, "haar_decompose: single-channel images only");
  return haar_decompose(img.channel(0), levels);
}

inline Eigen::MatrixXd haar_reconstruct(const WaveletPyramid& pyr) {
  Eigen::MatrixXd a = pyr.approx;
  for (auto it = pyr.levels.rbegin(); it != pyr.levels.rend(); ++it) {
    const long h = a.rows();
    const long w = a.cols();
    Eigen::MatrixXd up(2 * h, 2 * w);
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        const double ll = a(y, x);
        const double hl = it->hl(y, x);
        const double lh = it->lh(y, x);
        const double hh = it->hh(y, x);
        up(2 * y, 2 * x) = 0.5 * (ll + hl + lh + hh);
        up(2 * y, 2 * x + 1) = 0.5 * (ll - hl + lh - hh);
        up(2 * y + 1, 2 * x) = 0.5 * (ll + hl - lh - hh);
        up(2 * y + 1, 2 * x + 1) = 0.5 * (ll - hl - lh + hh);
      }
    }
    a = std::move(up);
  }
  return a;
}

namespace detail {

// Sum of level detail-band powers across channels.
inline double band_power(const ImageBuffer& img, int level) {
  double p = 0.0;
  for (int c = 0; c < img.channels; ++c)
    p += haar_decompose(img.channel(c), level).detail_power(level);
  return p;
}

}  // namespace detail

// Relative power error of the level detail bands: |P_true - P_syn| / P_true.
inline double wdpr(const ImageBuffer& y_true, const ImageBuffer& y_syn, int level) {
  require_same_shape(y_true, y_syn, "wdpr");
  const double pt = detail::band_power(y_true, level);
  const double ps = detail::band_power(y_syn, level);
  require(pt > 0.0, "wdpr: ground-truth band power is zero");
  return std::abs(pt - ps) / pt;
}

// Complementary diagnostic: P_syn / P_true for the same bands.
inline double wavelet_power_ratio(const ImageBuffer& y_true, const ImageBuffer& y_syn,
                                  int level) {
  require_same_shape(y_true, y_syn, "wavelet_power_ratio");
  const double pt = detail::band_power(y_true, level);
  require(pt > 0.0, "wavelet_power_ratio: ground-truth band power is zero");
  return detail::band_power(y_syn, level) / pt;
}

// Exact 1D optimal transport between two histograms: L1 distance between the
// normalised CDFs times the bin width.
inline double wasserstein_1d(const Eigen::VectorXd& hist_a, const Eigen::VectorXd& hist_b,
                             double bin_width = 1.0) {
  require(hist_a.size() == hist_b.size(), "wasserstein_1d: length mismatch");
  require(hist_a.size() > 0, "wasserstein_1d: empty histograms");
  require((hist_a.array() >= 0.0).all() && (hist_b.array() >= 0.0).all(),
          "wasserstein_1d: histograms must be nonnegative");
  const double sa = hist_a.sum();
  const double sb = hist_b.sum();
  require(sa > 0.0 && sb > 0.0, "wasserstein_1d: zero-mass histogram");
  double ca = 0.0, cb = 0.0, dist = 0.0;
  for (int i = 0; i < hist_a.size(); ++i) {
    ca += hist_a[i] / sa;
    cb += hist_b[i] / sb;
    dist += std::abs(ca - cb);
  }
  return dist * bin_width;
}

inline Eigen::VectorXd intensity_histogram(const ImageBuffer& img, int channel, int bins = 256) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(bins);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const int b = std::min(bins - 1, static_cast<int>(img.at(y, x, channel) * bins));
      h[b] += 1.0;
    }
  return h;
}

// Wasserstein distance between two images' 256-bin intensity histograms,
// averaged over channels. Image sizes may differ; channel counts must match.
inline double image_wasserstein(const ImageBuffer& a, const ImageBuffer& b) {
  require(a.channels == b.channels, "image_wasserstein: channel mismatch");
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c)
    total += wasserstein_1d(intensity_histogram(a, c), intensity_histogram(b, c), 1.0 / 256.0);
  return total / a.channels;
}

// RWDE = WD(train, syn) / WD(true, syn). Values below 1 flag synthesis that
// tracks the training distribution more closely than the ground truth.
inline double rwde(const ImageBuffer& y_train, const ImageBuffer& y_syn,
                   const ImageBuffer& y_true) {
  const double denom = image_wasserstein(y_true, y_syn);
  require(denom > 0.0,
          "rwde: synthesis matches the ground-truth distribution exactly (perfect)");
  return image_wasserstein(y_train, y_syn) / denom;
}

}  // namespace spe
