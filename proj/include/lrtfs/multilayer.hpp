#pragma once

#include "lrtfs/gabor.hpp"
#include "lrtfs/solver.hpp"
#include "lrtfs/types.hpp"

namespace lrtfs {

enum class LayerPrior { low_rank, sparse };

struct LayerSpec {
  GaborDictionary dict;
  LayerPrior prior = LayerPrior::low_rank;
  Index k = 10;  ///< rank of the variance factorization (low_rank only)
};

struct SLRConfig {
  SolverConfig base;
  double mu = 0.05;  ///< layer balance; the low-rank layer carries weight mu

  void validate() const;
};

/// Two-layer objective: quadratic residual over both layers plus
/// mu-weighted GCM terms for layer a and (1-mu)-weighted free-variance terms
/// for layer b. Real-signal convention (1/(2 lambda) data weight), constants
/// dropped, |alpha|^2 floored inside divergences and logs.
double objective_cslr(const VectorXd& x, const CoefficientGrid& alpha_a,
                      const CoefficientGrid& alpha_b, const NMFModel& model, const MatrixXd& v_b,
                      double lambda, double mu, const GaborDictionary& dict_a,
                      const GaborDictionary& dict_b);

struct LayerGrids {
  CoefficientGrid a;
  CoefficientGrid b;
};

/// One joint descend-and-shrink pass over both layers: the shared residual
/// drives a 1/L step through each dictionary's adjoint, then each layer
/// shrinks with its own factor, v/(v + mu lambda/L) and v/(v + (1-mu)
/// lambda/L). big_l <= 0 uses the default sum of the two frame norms.
LayerGrids joint_isa_step(const VectorXd& x, const LayerGrids& alphas, const MatrixXd& v_a,
                          const MatrixXd& v_b, double lambda, double mu,
                          const GaborDictionary& dict_a, const GaborDictionary& dict_b,
                          double big_l = 0.0);

struct SLRSolution {
  LRTFSSolution layer_a;        ///< low-rank layer (alpha, model, reconstruction x_a)
  CoefficientGrid alpha_b;
  MatrixXd v_b;
  VectorXd reconstruction_b;    ///< x_b
  VectorXd residual;            ///< x - x_a - x_b at exit
  std::vector<TraceRow> trace;  ///< C_SLR per outer iteration
  IterationCounters iterations;
  bool converged = true;
};

/// Alternates {IS-NMF on |alpha_a|^2, v_b = |alpha_b|^2, joint shrinkage}
/// under the lambda schedule with warm restarts. Both layers initialize from
/// their analysis coefficients.
SLRSolution solve_slr(const VectorXd& x, const LayerSpec& spec_a, const LayerSpec& spec_b,
                      const SLRConfig& cfg);

}  // namespace lrtfs
