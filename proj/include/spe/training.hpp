// spe/training.hpp
//
// Loss, optimizer, and the deterministic training loop. Network weights and
// any adaptive encoder parameters (trainable frequencies, sine-layer
// weights, hash tables) update jointly. Full-batch by default; optional
// mini-batching draws from the optimizer seed.

#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spe/common.hpp"
#include "spe/dataset.hpp"
#include "spe/encoder_spec.hpp"
#include "spe/network.hpp"

namespace spe {

struct OptimConfig {
  enum class Algo { adam, sgd };
  Algo algorithm = Algo::adam;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int iterations = 2000;
  int eval_every = 20;
  int batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;

  void validate() const {
    require(learning_rate > 0.0, "OptimConfig: learning_rate must be > 0");
    require(adam_beta1 > 0.0 && adam_beta1 < 1.0, "OptimConfig: beta1 must be in (0,1)");
    require(adam_beta2 > 0.0 && adam_beta2 < 1.0, "OptimConfig: beta2 must be in (0,1)");
    require(adam_eps > 0.0, "OptimConfig: eps must be > 0");
    require(iterations >= 0, "OptimConfig: iterations must be >= 0");
    require(eval_every >= 1, "OptimConfig: eval_every must be >= 1");
    require(batch_size >= 0, "OptimConfig: batch_size must be >= 0");
  }
};

inline const char* to_string(OptimConfig::Algo a) {
  return a == OptimConfig::Algo::adam ? "adam" : "sgd";
}

inline OptimConfig::Algo optim_algo_from_string(const std::string& s) {
  if (s == "adam") return OptimConfig::Algo::adam;
  if (s == "sgd") return OptimConfig::Algo::sgd;
  throw Error("unknown optimizer: " + s);
}

struct TrainEval {
  int iteration = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double seconds = 0.0;
};

struct TrainRecord {
  std::vector<TrainEval> evals;

  const TrainEval& final_eval() const {
    require(!evals.empty(), "TrainRecord: empty");
    return evals.back();
  }
};

inline void write_record_csv(const TrainRecord& rec, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write record csv: " + path);
  out << "iteration,train_loss,test_loss\n";
  out << std::setprecision(17);
  for (const auto& e : rec.evals)
    out << e.iteration << ',' << e.train_loss << ',' << e.test_loss << '\n';
}

// First recorded iteration whose train loss is at or below the threshold.
inline std::optional<int> iterations_to_threshold(const TrainRecord& rec, double threshold) {
  require(threshold >= 0.0, "iterations_to_threshold: threshold must be nonnegative");
  require(!rec.evals.empty(), "iterations_to_threshold: empty record");
  for (const auto& e : rec.evals)
    if (e.train_loss <= threshold) return e.iteration;
  return std::nullopt;
}

// Mean squared error and its gradient w.r.t. predictions.
inline std::pair<double, Eigen::MatrixXd> mse_loss(const Eigen::MatrixXd& pred,
                                                   const Eigen::MatrixXd& target) {
  require(pred.rows() == target.rows() && pred.cols() == target.cols(),
          "mse_loss: shape mismatch");
  require(pred.size() > 0, "mse_loss: empty batch");
  const Eigen::MatrixXd diff = pred - target;
  const double n = static_cast<double>(diff.size());
  return {diff.squaredNorm() / n, (2.0 / n) * diff};
}

// ---------------------------------------------------------------------------
// Flat parameter vector shared by the network and encoder trainables.

namespace detail {

inline Eigen::VectorXd flatten(const MlpParams& p, const Eigen::VectorXd& enc) {
  Eigen::Index n = static_cast<Eigen::Index>(p.parameter_count()) + enc.size();
  Eigen::VectorXd out(n);
  Eigen::Index k = 0;
  for (const auto& w : p.weights) {
    out.segment(k, w.size()) = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
    k += w.size();
  }
  for (const auto& b : p.biases) {
    out.segment(k, b.size()) = b;
    k += b.size();
  }
  out.tail(enc.size()) = enc;
  return out;
}

inline void unflatten(const Eigen::VectorXd& v, MlpParams& p, Eigen::VectorXd& enc) {
  Eigen::Index k = 0;
  for (auto& w : p.weights) {
    Eigen::Map<Eigen::VectorXd>(w.data(), w.size()) = v.segment(k, w.size());
    k += w.size();
  }
  for (auto& b : p.biases) {
    b = v.segment(k, b.size());
    k += b.size();
  }
  enc = v.tail(v.size() - k);
}

inline Eigen::VectorXd flatten_grads(const MlpGradients& g, const Eigen::VectorXd& enc) {
  MlpParams tmp;
  tmp.weights = g.weights;
  tmp.biases = g.biases;
  return flatten(tmp, enc);
}

}  // namespace detail

class Optimizer {
 public:
  Optimizer(const OptimConfig& cfg, Eigen::Index n)
      : cfg_(cfg), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grads) {
    if (cfg_.algorithm == OptimConfig::Algo::sgd) {
      params -= cfg_.learning_rate * grads;
      return;
    }
    ++t_;
    m_ = cfg_.adam_beta1 * m_ + (1.0 - cfg_.adam_beta1) * grads;
    v_ = cfg_.adam_beta2 * v_.array().matrix() + (1.0 - cfg_.adam_beta2) * grads.array().square().matrix();
    const double c1 = 1.0 - std::pow(cfg_.adam_beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.adam_beta2, t_);
    params.array() -=
        cfg_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.adam_eps);
  }

 private:
  OptimConfig cfg_;
  Eigen::VectorXd m_, v_;
  int t_ = 0;
};

struct TrainOutcome {
  MlpConfig model;       // resolved configuration actually trained
  MlpParams params;
  EncoderPtr encoder;    // holds final trainables
  TrainRecord record;
  bool diverged = false;
  std::string diagnostic;
};

inline constexpr double kDivergenceLossLimit = 1e6;

// Deterministic given (encoder seed, model seed, optimizer seed). An encoder
// of kind "spe" forces a sinusoidal first activation and siren init on the
// network it feeds.
inline TrainOutcome train(const MlpConfig& model_cfg, const EncoderSpec& encoder_spec,
                          const Dataset& data, const OptimConfig& optim_cfg) {
  data.validate();
  optim_cfg.validate();
  require(data.train_count() > 0, "train: no training samples");

  TrainOutcome out;
  out.encoder = make_encoder(encoder_spec, data.input_dim());
  out.model = model_cfg;
  out.model.layer_widths.front() = out.encoder->output_dim();
  out.model.layer_widths.back() = data.target_dim();
  if (out.encoder->sine_first()) {
    out.model.first_activation = ActivationKind::sine;
    out.model.init_scheme = InitScheme::siren;
  }
  out.model.validate();
  out.params = init_params(out.model);

  const Eigen::MatrixXd train_coords = data.train_coords();
  const Eigen::MatrixXd train_targets = data.train_targets();
  const Eigen::MatrixXd test_coords = data.test_coords();
  const Eigen::MatrixXd test_targets = data.test_targets();
  const bool encoder_adapts = out.encoder->trainable_params().size() > 0;

  Eigen::MatrixXd train_features = out.encoder->encode(train_coords);
  Eigen::VectorXd enc_params = out.encoder->trainable_params();
  Eigen::VectorXd flat = detail::flatten(out.params, enc_params);
  Optimizer opt(optim_cfg, flat.size());

  Rng batch_rng(optim_cfg.seed);
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  auto eval_test = [&]() {
    if (test_coords.rows() == 0) return 0.0;
    const Eigen::MatrixXd pred = forward(out.params, out.model, out.encoder->encode(test_coords));
    return mse_loss(pred, test_targets).first;
  };

  for (int it = 0; it <= optim_cfg.iterations; ++it) {
    if (encoder_adapts) train_features = out.encoder->encode(train_coords);
    ForwardCache cache;
    const Eigen::MatrixXd pred = forward(out.params, out.model, train_features, &cache);
    const auto [loss, dpred] = mse_loss(pred, train_targets);

    if (!std::isfinite(loss) || loss > kDivergenceLossLimit) {
      out.diverged = true;
      out.diagnostic = "training diverged at iteration " + std::to_string(it) +
                       " (train loss " + std::to_string(loss) + ")";
      break;
    }
    if (it % optim_cfg.eval_every == 0 || it == optim_cfg.iterations) {
      out.record.evals.push_back({it, loss, eval_test(), elapsed()});
    }
    if (it == optim_cfg.iterations) break;

    MlpGradients grads;
    Eigen::VectorXd enc_grad;
    if (optim_cfg.batch_size > 0 && optim_cfg.batch_size < train_features.rows()) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(train_features.rows()) - 1);
      Eigen::MatrixXd bx(optim_cfg.batch_size, train_features.cols());
      Eigen::MatrixXd bc(optim_cfg.batch_size, train_coords.cols());
      Eigen::MatrixXd bt(optim_cfg.batch_size, train_targets.cols());
      for (int r = 0; r < optim_cfg.batch_size; ++r) {
        const int i = pick(batch_rng);
        bx.row(r) = train_features.row(i);
        bc.row(r) = train_coords.row(i);
        bt.row(r) = train_targets.row(i);
      }
      ForwardCache bcache;
      const Eigen::MatrixXd bpred = forward(out.params, out.model, bx, &bcache);
      const auto [bloss, bdpred] = mse_loss(bpred, bt);
      (void)bloss;
      Eigen::MatrixXd dfeat;
      grads = backward(out.params, out.model, bcache, bdpred, encoder_adapts ? &dfeat : nullptr);
      enc_grad = encoder_adapts ? out.encoder->trainable_gradient(bc, dfeat) : Eigen::VectorXd();
    } else {
      Eigen::MatrixXd dfeat;
      grads = backward(out.params, out.model, cache, dpred, encoder_adapts ? &dfeat : nullptr);
      enc_grad =
          encoder_adapts ? out.encoder->trainable_gradient(train_coords, dfeat) : Eigen::VectorXd();
    }

    Eigen::VectorXd flat_grad = detail::flatten_grads(grads, enc_grad);
    opt.step(flat, flat_grad);
    detail::unflatten(flat, out.params, enc_params);
    if (encoder_adapts) out.encoder->set_trainable_params(enc_params);
  }
  return out;
}

}  // namespace spe
