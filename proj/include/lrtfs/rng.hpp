#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "lrtfs/types.hpp"

namespace lrtfs {

/// Seeded random source with platform-stable output.
///
/// The engine is std::mt19937_64, whose sequence is fully specified by the
/// standard. The uniform and normal mappings are written out here because
/// std::uniform_real_distribution / std::normal_distribution are not
/// bit-stable across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; draws are consumed in pairs.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  VectorXd normal_vector(Index n) {
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  /// Circular complex normal N_c(0, 1): real and imaginary parts N(0, 1/2).
  Complex cnormal() {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

  VectorXcd cnormal_vector(Index n) {
    VectorXcd v(n);
    for (Index i = 0; i < n; ++i) v[i] = cnormal();
    return v;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lrtfs
