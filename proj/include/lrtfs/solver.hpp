#pragma once

#include <functional>
#include <vector>

#include "lrtfs/gabor.hpp"
#include "lrtfs/isnmf.hpp"
#include "lrtfs/types.hpp"

namespace lrtfs {

/// count values logarithmically equally spaced from `from` down to `to`.
std::vector<double> log_spaced(double from, double to, int count);

struct SolverConfig {
  Index k = 10;
  double lambda_target = 1e-6;
  std::vector<double> lambda_schedule;  ///< decreasing, ends at lambda_target; {lambda_target} if empty
  double tol_outer = 1e-5;
  double tol_inner_isa = 1e-5;
  double tol_inner_nmf = 1e-5;
  int max_outer = 100;
  int max_inner = 200;
  bool accel = true;
  /// Relative floor (w.r.t. the mean analysis power) on the variance feeding
  /// the shrinkage. Coefficients crushed early in the tempering otherwise
  /// keep variance ~0 forever and cannot re-enter the fit as lambda descends.
  /// Off (0) by default: the floored blocks are no longer exact coordinate
  /// descent, so the objective trace may wiggle at the floor scale.
  double variance_floor_rel = 0.0;

  /// Schedule with the fallback applied.
  std::vector<double> lambdas() const;
  /// Throws std::invalid_argument when a field is out of contract.
  void validate() const;

  /// The protocol used throughout the experiments: K = 10, 30 lambda values
  /// from 1e-1 down to 1e-6, every tolerance at 1e-5.
  static SolverConfig denoising_default();
};

struct TraceRow {
  int outer_index = 0;  ///< running outer-iteration counter across the schedule
  double lambda = 0.0;
  double objective = 0.0;  ///< C_JL excluding constants
  double residual_norm = 0.0;
};

struct IterationCounters {
  int outer = 0;
  int nmf_inner = 0;
  int isa_inner = 0;
};

struct LRTFSSolution {
  CoefficientGrid alpha;
  NMFModel model;
  double lambda_used = 0.0;
  std::vector<TraceRow> trace;
  VectorXd reconstruction;
  IterationCounters iterations;
  bool converged = true;      ///< false when an iteration cap was hit
  double lambda_mle = 0.0;    ///< ||x - rec||^2 / T; diagnostic only, never applied

  std::vector<double> objective_trace() const;
};

/// C_JL without its constant term. |alpha|^2 is floored at kEpsNmf inside the
/// divergence and log terms. The real overload carries the 1/(2 lambda) data
/// weight of the Hermitian-symmetric model.
double objective_cjl(const VectorXcd& x, const CoefficientGrid& alpha, const NMFModel& model,
                     double lambda, const GaborDictionary& dict);
double objective_cjl(const VectorXd& x, const CoefficientGrid& alpha, const NMFModel& model,
                     double lambda, const GaborDictionary& dict);

/// Ridge subproblem solver: minimizes the quadratic data term plus
/// sum |alpha|^2 / v by accelerated iterative shrinkage from alpha0.
CoefficientGrid isa_solve(const VectorXcd& x, const GaborDictionary& dict, const MatrixXd& v,
                          double lambda, const CoefficientGrid& alpha0, const SolverConfig& cfg);
CoefficientGrid isa_solve(const VectorXd& x, const GaborDictionary& dict, const MatrixXd& v,
                          double lambda, const CoefficientGrid& alpha0, const SolverConfig& cfg);

using LambdaCallback = std::function<void(const LRTFSSolution&)>;

/// Full estimation on a real signal: alpha starts at the analysis
/// coefficients, W/H at the SVD magnitudes, then the lambda schedule is run
/// with warm restarts, alternating the IS-NMF block and the shrinkage block at
/// each value. `on_lambda` receives the solution reached at every lambda.
LRTFSSolution solve(const VectorXd& x, const GaborDictionary& dict, const SolverConfig& cfg,
                    const LambdaCallback& on_lambda = nullptr);

/// Latent components c_k = synthesis(mask_k o alpha), ordered by decreasing
/// energy. Their sum is exactly the reconstruction because the masks sum to
/// one.
std::vector<VectorXd> reconstruct_components(const LRTFSSolution& solution,
                                             const GaborDictionary& dict);

}  // namespace lrtfs
