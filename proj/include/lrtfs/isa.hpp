#pragma once

#include <algorithm>
#include <cmath>

#include "lrtfs/gabor.hpp"
#include "lrtfs/types.hpp"

namespace lrtfs {

/// Variance-driven shrinkage z <- v/(v + w lambda / L) o z, the proximal map
/// of sum_m w_m |z_m|^2 / v_m under a 1/L step. `weight_over_v` holds w/v for
/// the safeguard objective.
struct VarianceProx {
  ArrayXd factor;
  ArrayXd weight_over_v;

  static VarianceProx make(const ArrayXd& v, const ArrayXd& weight, double lambda, double inv_l) {
    VarianceProx p;
    p.factor = v / (v + weight * lambda * inv_l);
    p.weight_over_v = weight / v;
    return p;
  }

  void apply(VectorXcd& z) const { z.array() *= factor.cast<Complex>(); }
  double penalty(const VectorXcd& z) const {
    return (z.array().abs2() * weight_over_v).sum();
  }
};

/// Complex soft threshold at tau, magnitude shrunk, phase preserved.
/// `penalty_coef` scales the l1 term of the safeguard objective.
struct SoftThresholdProx {
  double tau = 0.0;
  double penalty_coef = 1.0;

  void apply(VectorXcd& z) const {
    if (tau <= 0.0) return;
    for (Index m = 0; m < z.size(); ++m) {
      const double mag = std::abs(z[m]);
      z[m] = mag > tau ? z[m] * ((mag - tau) / mag) : Complex(0.0, 0.0);
    }
  }
  double penalty(const VectorXcd& z) const { return penalty_coef * z.cwiseAbs().sum(); }
};

struct IsaResult {
  VectorXcd alpha;
  int iterations = 0;
  double objective = 0.0;  ///< data_weight ||x - F alpha||^2 + prox penalty
  bool converged = false;
};

/// Accelerated iterative shrinkage on min data_weight ||x - F(alpha)||^2 +
/// penalty(alpha): descend with step 1/L along F^H of the residual, shrink,
/// then extrapolate with weight j/(j+5). The momentum image F(a) is formed by
/// linearity from cached forwards, so tracking the objective at every shrunk
/// iterate costs no extra operator applications; the best iterate seen is
/// returned, which keeps the enclosing block descent monotone even though the
/// accelerated sequence itself is not.
template <class Model, class Prox>
IsaResult accelerated_isa(const Model& model, const typename Model::DataVec& x, const Prox& prox,
                          double inv_l, double data_weight, VectorXcd z, double tol, int max_iter,
                          bool accel) {
  using DataVec = typename Model::DataVec;

  VectorXcd a = z;
  DataVec fz = model.forward(z);
  DataVec fa = fz;

  IsaResult res;
  res.alpha = z;
  res.objective = data_weight * (x - fz).squaredNorm() + prox.penalty(z);

  for (int j = 0; j < max_iter; ++j) {
    VectorXcd znext = a + inv_l * model.adjoint(x - fa);
    prox.apply(znext);
    DataVec fznext = model.forward(znext);

    const double obj = data_weight * (x - fznext).squaredNorm() + prox.penalty(znext);
    if (obj < res.objective) {
      res.objective = obj;
      res.alpha = znext;
    }

    const double rel = (znext - z).norm() / std::max(z.norm(), 1e-300);
    if (accel) {
      const double beta = static_cast<double>(j) / (j + 5);
      a = znext + beta * (znext - z);
      fa = (1.0 + beta) * fznext - beta * fz;
    } else {
      a = znext;
      fa = fznext;
    }
    z.swap(znext);
    fz.swap(fznext);
    res.iterations = j + 1;
    if (rel < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

/// x = 2 Re[Phi_ alpha] over a real_half dictionary.
struct GaborRealModel {
  using DataVec = VectorXd;
  const GaborDictionary* dict;

  VectorXd forward(const VectorXcd& alpha) const {
    return synthesis_real(*dict, matrixize(alpha, dict->freq_rows(), dict->num_frames));
  }
  VectorXcd adjoint(const VectorXd& r) const { return vectorize(analysis(*dict, r)); }
  double norm_bound_sq() const { return spectral_norm_sq(*dict); }
};

/// x = Phi alpha over a complex_full dictionary.
struct GaborComplexModel {
  using DataVec = VectorXcd;
  const GaborDictionary* dict;

  VectorXcd forward(const VectorXcd& alpha) const {
    return synthesis_complex(*dict, matrixize(alpha, dict->freq_rows(), dict->num_frames));
  }
  VectorXcd adjoint(const VectorXcd& r) const { return vectorize(analysis(*dict, r)); }
  double norm_bound_sq() const { return spectral_norm_sq(*dict); }
};

}  // namespace lrtfs
