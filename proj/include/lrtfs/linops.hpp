#pragma once

#include <cstdint>

#include "lrtfs/rng.hpp"
#include "lrtfs/types.hpp"

namespace lrtfs {

/// Largest eigenvalue of a positive semi-definite operator by power
/// iteration with a seeded start vector. `apply` maps a vector to S v.
/// Stops when the Rayleigh quotient settles to `rel_tol` or after
/// `max_iter` applications. The raw estimate approaches the true value
/// from below; callers that need an upper bound inflate it.
template <class Vec, class ApplyFn>
double power_lambda_max(ApplyFn&& apply, Index dim, double rel_tol = 1e-8, int max_iter = 20000,
                        std::uint64_t seed = 0x5eed) {
  Rng rng(seed);
  Vec v(dim);
  if constexpr (std::is_same_v<typename Vec::Scalar, Complex>) {
    v = rng.cnormal_vector(dim);
  } else {
    v = rng.normal_vector(dim);
  }
  v /= v.norm();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec sv = apply(v);
    const double next = std::real(v.dot(sv));  // Rayleigh quotient, ||v|| = 1
    const double nrm = sv.norm();
    if (nrm == 0.0) return 0.0;
    v = sv / nrm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

}  // namespace lrtfs
