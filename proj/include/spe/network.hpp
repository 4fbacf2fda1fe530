// spe/network.hpp
//
// Small dense feed-forward network with pluggable activations and exact
// reverse-mode gradients. The first hidden activation is the architectural
// switch between a plain encoded-input network (relu) and a sinusoidal
// first layer (sine). The output layer is always a linear regression head.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spe/common.hpp"

namespace spe {

enum class ActivationKind { relu, sine, sawtooth, periodic_relu, identity };

inline const char* to_string(ActivationKind k) {
  switch (k) {
    case ActivationKind::relu: return "relu";
    case ActivationKind::sine: return "sine";
    case ActivationKind::sawtooth: return "sawtooth";
    case ActivationKind::periodic_relu: return "periodic_relu";
    case ActivationKind::identity: return "identity";
  }
  return "?";
}

inline ActivationKind activation_from_string(const std::string& s) {
  if (s == "relu") return ActivationKind::relu;
  if (s == "sine") return ActivationKind::sine;
  if (s == "sawtooth") return ActivationKind::sawtooth;
  if (s == "periodic_relu") return ActivationKind::periodic_relu;
  if (s == "identity") return ActivationKind::identity;
  throw Error("unknown activation: " + s);
}

inline double activate(ActivationKind k, double x) {
  switch (k) {
    case ActivationKind::relu: return x > 0.0 ? x : 0.0;
    case ActivationKind::sine: return std::sin(x);
    case ActivationKind::sawtooth: return x - std::floor(x);
    case ActivationKind::periodic_relu: return (x > 0.0 ? x : 0.0) + std::sin(x);
    case ActivationKind::identity: return x;
  }
  return x;
}

// Derivative almost everywhere; sawtooth uses 1 at integers, relu uses 0 at 0.
inline double activate_grad(ActivationKind k, double x) {
  switch (k) {
    case ActivationKind::relu: return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::sine: return std::cos(x);
    case ActivationKind::sawtooth: return 1.0;
    case ActivationKind::periodic_relu: return (x > 0.0 ? 1.0 : 0.0) + std::cos(x);
    case ActivationKind::identity: return 1.0;
  }
  return 1.0;
}

enum class InitScheme { siren, he };

inline const char* to_string(InitScheme s) { return s == InitScheme::siren ? "siren" : "he"; }

inline InitScheme init_scheme_from_string(const std::string& s) {
  if (s == "siren") return InitScheme::siren;
  if (s == "he") return InitScheme::he;
  throw Error("unknown init scheme: " + s);
}

struct MlpConfig {
  std::vector<int> layer_widths;  // full chain, input width first
  ActivationKind hidden_activation = ActivationKind::relu;
  ActivationKind first_activation = ActivationKind::relu;
  InitScheme init_scheme = InitScheme::he;
  std::uint64_t seed = 0;

  int num_layers() const { return static_cast<int>(layer_widths.size()) - 1; }
  void validate() const {
    require(layer_widths.size() >= 2, "MlpConfig: need at least input and output widths");
    for (int w : layer_widths) require(w >= 1, "MlpConfig: widths must be positive");
  }
  // Activation applied after layer k; the final layer is a linear head.
  ActivationKind activation_after(int k) const {
    if (k == num_layers() - 1) return ActivationKind::identity;
    return k == 0 ? first_activation : hidden_activation;
  }
};

struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;  // layer k: widths[k+1] x widths[k]
  std::vector<Eigen::VectorXd> biases;

  int num_layers() const { return static_cast<int>(weights.size()); }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
    for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
    return n;
  }
};

struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;          // A_k fed into layer k
  std::vector<Eigen::MatrixXd> pre_activations; // Z_k = A_k W_k^T + b_k
};

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

inline MlpGradients zero_gradients(const MlpParams& p) {
  MlpGradients g;
  for (const auto& w : p.weights) g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : p.biases) g.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  return g;
}

inline MlpParams init_params(const MlpConfig& cfg) {
  cfg.validate();
  MlpParams p;
  Rng rng(cfg.seed);
  for (int k = 0; k < cfg.num_layers(); ++k) {
    const int fan_in = cfg.layer_widths[static_cast<std::size_t>(k)];
    const int fan_out = cfg.layer_widths[static_cast<std::size_t>(k) + 1];
    Eigen::MatrixXd w(fan_out, fan_in);
    const ActivationKind act = cfg.activation_after(k);
    const bool siren_first = cfg.init_scheme == InitScheme::siren && k == 0;
    const bool siren_sine = cfg.init_scheme == InitScheme::siren && act == ActivationKind::sine;
    if (siren_first) {
      const double b = 1.0 / fan_in;
      for (int r = 0; r < fan_out; ++r)
        for (int c = 0; c < fan_in; ++c) w(r, c) = uniform(rng, -b, b);
    } else if (siren_sine) {
      const double b = std::sqrt(6.0 / fan_in);
      for (int r = 0; r < fan_out; ++r)
        for (int c = 0; c < fan_in; ++c) w(r, c) = uniform(rng, -b, b);
    } else {
      const double sd = std::sqrt(2.0 / fan_in);
      for (int r = 0; r < fan_out; ++r)
        for (int c = 0; c < fan_in; ++c) w(r, c) = gaussian(rng, 0.0, sd);
    }
    p.weights.push_back(std::move(w));
    p.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return p;
}

// batch: N x widths[0], rows are samples. Returns N x widths.back().
inline Eigen::MatrixXd forward(const MlpParams& params, const MlpConfig& cfg,
                               const Eigen::MatrixXd& batch, ForwardCache* cache = nullptr) {
  cfg.validate();
  require(params.num_layers() == cfg.num_layers(), "forward: params/config layer mismatch");
  require(batch.cols() == cfg.layer_widths.front(), "forward: batch width mismatch");
  require_finite(batch, "forward batch");
  if (cache) {
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  Eigen::MatrixXd a = batch;
  for (int k = 0; k < params.num_layers(); ++k) {
    Eigen::MatrixXd z =
        (a * params.weights[static_cast<std::size_t>(k)].transpose()).rowwise() +
        params.biases[static_cast<std::size_t>(k)].transpose();
    if (!z.allFinite())
      throw Error("forward: non-finite pre-activation at layer " + std::to_string(k));
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre_activations.push_back(z);
    }
    const ActivationKind act = cfg.activation_after(k);
    if (act == ActivationKind::identity) {
      a = std::move(z);
    } else {
      a = z.unaryExpr([act](double v) { return activate(act, v); });
    }
  }
  return a;
}

// Exact gradients of the forward map. output_gradient is dL/d(outputs).
// Also returns dL/d(batch) through input_gradient when non-null.
inline MlpGradients backward(const MlpParams& params, const MlpConfig& cfg,
                             const ForwardCache& cache, const Eigen::MatrixXd& output_gradient,
                             Eigen::MatrixXd* input_gradient = nullptr) {
  const int n = params.num_layers();
  require(static_cast<int>(cache.inputs.size()) == n &&
              static_cast<int>(cache.pre_activations.size()) == n,
          "backward: cache does not match network");
  require(output_gradient.rows() == cache.inputs.front().rows(),
          "backward: gradient batch size does not match cache");
  require(output_gradient.cols() == cfg.layer_widths.back(),
          "backward: gradient width mismatch");
  MlpGradients grads;
  grads.weights.resize(static_cast<std::size_t>(n));
  grads.biases.resize(static_cast<std::size_t>(n));
  Eigen::MatrixXd g = output_gradient;
  for (int k = n - 1; k >= 0; --k) {
    const ActivationKind act = cfg.activation_after(k);
    if (act != ActivationKind::identity) {
      g = g.cwiseProduct(cache.pre_activations[static_cast<std::size_t>(k)].unaryExpr(
          [act](double v) { return activate_grad(act, v); }));
    }
    grads.weights[static_cast<std::size_t>(k)] =
        g.transpose() * cache.inputs[static_cast<std::size_t>(k)];
    grads.biases[static_cast<std::size_t>(k)] = g.colwise().sum().transpose();
    if (k > 0 || input_gradient) g = g * params.weights[static_cast<std::size_t>(k)];
  }
  if (input_gradient) *input_gradient = std::move(g);
  return grads;
}

// Central finite-difference estimate of dL/d(params); test oracle.
inline MlpGradients finite_diff_gradient(
    const MlpParams& params, const MlpConfig& cfg, const Eigen::MatrixXd& batch,
    const std::function<double(const Eigen::MatrixXd&)>& loss_fn, double step) {
  require(step > 0.0, "finite_diff_gradient: step must be > 0");
  MlpParams p = params;
  MlpGradients g = zero_gradients(params);
  auto eval = [&]() { return loss_fn(forward(p, cfg, batch)); };
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    for (int r = 0; r < p.weights[k].rows(); ++r) {
      for (int c = 0; c < p.weights[k].cols(); ++c) {
        const double orig = p.weights[k](r, c);
        p.weights[k](r, c) = orig + step;
        const double hi = eval();
        p.weights[k](r, c) = orig - step;
        const double lo = eval();
        p.weights[k](r, c) = orig;
        g.weights[k](r, c) = (hi - lo) / (2.0 * step);
      }
    }
    for (int r = 0; r < p.biases[k].size(); ++r) {
      const double orig = p.biases[k][r];
      p.biases[k][r] = orig + step;
      const double hi = eval();
      p.biases[k][r] = orig - step;
      const double lo = eval();
      p.biases[k][r] = orig;
      g.biases[k][r] = (hi - lo) / (2.0 * step);
    }
  }
  return g;
}

}  // namespace spe
