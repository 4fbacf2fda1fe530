// spe/dataset.hpp
//
// Coordinate/target pairs with a train/test partition. Coordinates are kept
// in [0,1]^d; encoders own any further domain mapping.

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spe/common.hpp"

namespace spe {

enum class DatasetKind { signal1d, image2d };

inline const char* to_string(DatasetKind k) {
  return k == DatasetKind::signal1d ? "signal1d" : "image2d";
}

struct Dataset {
  DatasetKind kind = DatasetKind::signal1d;
  Eigen::MatrixXd coords;   // N x d in [0,1]^d
  Eigen::MatrixXd targets;  // N x c
  std::vector<bool> train_mask;
  int image_width = 0;   // image2d only
  int image_height = 0;
  int channels = 1;

  int size() const { return static_cast<int>(coords.rows()); }
  int input_dim() const { return static_cast<int>(coords.cols()); }
  int target_dim() const { return static_cast<int>(targets.cols()); }

  void validate() const {
    require(coords.rows() == targets.rows(), "Dataset: coords/targets row mismatch");
    require(static_cast<int>(train_mask.size()) == size(), "Dataset: mask size mismatch");
    require(size() > 0, "Dataset: empty");
    require_finite(coords, "Dataset coords");
    require_finite(targets, "Dataset targets");
  }

  int train_count() const {
    int n = 0;
    for (bool b : train_mask) n += b ? 1 : 0;
    return n;
  }

  Eigen::MatrixXd select(const Eigen::MatrixXd& m, bool train) const {
    Eigen::MatrixXd out(train ? train_count() : size() - train_count(), m.cols());
    int r = 0;
    for (int i = 0; i < size(); ++i)
      if (train_mask[static_cast<std::size_t>(i)] == train) out.row(r++) = m.row(i);
    return out;
  }
  Eigen::MatrixXd train_coords() const { return select(coords, true); }
  Eigen::MatrixXd train_targets() const { return select(targets, true); }
  Eigen::MatrixXd test_coords() const { return select(coords, false); }
  Eigen::MatrixXd test_targets() const { return select(targets, false); }
};

}  // namespace spe
