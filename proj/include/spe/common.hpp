// spe/common.hpp
//
// Shared small utilities: constants, error checking, seeded RNG helpers.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spe {

inline constexpr double kPi = 3.14159265358979323846;

using Rng = std::mt19937_64;

// Thrown for violated preconditions and malformed inputs.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

inline void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m,
                           const std::string& what) {
  if (!m.allFinite()) throw Error(what + ": non-finite value");
}

inline double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

inline double gaussian(Rng& rng, double mean, double stddev) {
  std::normal_distribution<double> d(mean, stddev);
  return d(rng);
}

}  // namespace spe
