// spe/checkpoint.hpp
//
// Versioned JSON checkpoints: network configuration and weights plus the
// encoder description and its trainable state. Round-trips are exact
// (doubles are serialised shortest-round-trip).

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spe/common.hpp"
#include "spe/encoder_spec.hpp"
#include "spe/network.hpp"

namespace spe {

inline constexpr int kCheckpointVersion = 1;

inline void to_json(nlohmann::json& j, const MlpConfig& c) {
  j = nlohmann::json{{"layer_widths", c.layer_widths},
                     {"hidden_activation", to_string(c.hidden_activation)},
                     {"first_activation", to_string(c.first_activation)},
                     {"init_scheme", to_string(c.init_scheme)},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, MlpConfig& c) {
  c.layer_widths = j.at("layer_widths").get<std::vector<int>>();
  c.hidden_activation = activation_from_string(j.at("hidden_activation").get<std::string>());
  c.first_activation = activation_from_string(j.at("first_activation").get<std::string>());
  c.init_scheme = init_scheme_from_string(j.at("init_scheme").get<std::string>());
  c.seed = j.value("seed", std::uint64_t{0});
}

namespace detail {

inline std::vector<double> to_flat(const Eigen::MatrixXd& m) {
  std::vector<double> v(static_cast<std::size_t>(m.size()));
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(k++)] = m(r, c);
  return v;
}

inline Eigen::MatrixXd from_flat(const std::vector<double>& v, Eigen::Index rows,
                                 Eigen::Index cols) {
  require(static_cast<Eigen::Index>(v.size()) == rows * cols, "checkpoint: array size mismatch");
  Eigen::MatrixXd m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[static_cast<std::size_t>(k++)];
  return m;
}

}  // namespace detail

struct Checkpoint {
  MlpConfig model;
  MlpParams params;
  EncoderSpec encoder;
  Eigen::VectorXd encoder_params;  // empty for non-adaptive encoders
};

inline nlohmann::json checkpoint_to_json(const Checkpoint& ck) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["model"] = ck.model;
  j["encoder"] = ck.encoder;
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t k = 0; k < ck.params.weights.size(); ++k) {
    layers.push_back({{"weights", detail::to_flat(ck.params.weights[k])},
                      {"bias", detail::to_flat(ck.params.biases[k])}});
  }
  j["layers"] = std::move(layers);
  j["encoder_params"] = detail::to_flat(ck.encoder_params);
  return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  require(j.value("version", 0) == kCheckpointVersion, "checkpoint: unsupported version");
  Checkpoint ck;
  ck.model = j.at("model").get<MlpConfig>();
  ck.encoder = j.at("encoder").get<EncoderSpec>();
  const auto& layers = j.at("layers");
  require(layers.size() + 1 == ck.model.layer_widths.size(), "checkpoint: layer count mismatch");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto rows = static_cast<Eigen::Index>(ck.model.layer_widths[k + 1]);
    const auto cols = static_cast<Eigen::Index>(ck.model.layer_widths[k]);
    ck.params.weights.push_back(
        detail::from_flat(layers[k].at("weights").get<std::vector<double>>(), rows, cols));
    ck.params.biases.push_back(
        detail::from_flat(layers[k].at("bias").get<std::vector<double>>(), rows, 1).col(0));
  }
  const auto ep = j.at("encoder_params").get<std::vector<double>>();
  ck.encoder_params = Eigen::Map<const Eigen::VectorXd>(ep.data(),
                                                        static_cast<Eigen::Index>(ep.size()));
  return ck;
}

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write checkpoint: " + path);
  out << checkpoint_to_json(ck).dump(2) << '\n';
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  return checkpoint_from_json(j);
}

}  // namespace spe
