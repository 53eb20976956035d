#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lrtfs/gabor.hpp"
#include "lrtfs/isnmf.hpp"
#include "lrtfs/solver.hpp"
#include "lrtfs/types.hpp"

namespace lrtfs {

/// Random sensing operator with i.i.d. N(0, 1/S) entries, regenerated
/// deterministically from the seed. Entries are drawn row-major, so the dense
/// and matrix-free variants agree entrywise.
struct MeasurementOperator {
  Index rows = 0;  ///< S
  Index cols = 0;  ///< T
  std::uint64_t seed = 0;
  double norm_sq = 0.0;  ///< upper bound on ||A||_2^2
  MatrixXd matrix;       ///< empty in matrix-free form

  static MeasurementOperator gaussian(Index s, Index t, std::uint64_t seed, bool dense = true);
  /// Wraps an explicit matrix (test doubles, identity sensing).
  static MeasurementOperator from_matrix(MatrixXd a);

  bool matrix_free() const { return matrix.size() == 0; }
  VectorXd apply(const VectorXd& x) const;
  VectorXd apply_adjoint(const VectorXd& y) const;
};

/// b = A x + e with e i.i.d. Gaussian of variance noise_var, seeded.
VectorXd sense(const MeasurementOperator& a, const VectorXd& x, double noise_var,
               std::uint64_t noise_seed = 0);

enum class CSMethod { lrtfs, sbl, l1, oracle_variance, oracle_nmf };

std::string method_name(CSMethod m);
CSMethod method_from_name(const std::string& name);

struct CSConfig {
  SolverConfig base;  ///< rank, tolerances, caps; the schedule field is ignored
  /// hyper-parameter schedule, decreased with warm restarts (1e3 down to 1e-2)
  std::vector<double> lambda_schedule = log_spaced(1e3, 1e-2, 11);
  /// relative floor (w.r.t. the mean back-projection energy) on the variance
  /// feeding the shrinkage in the adaptive methods; cold starts cannot
  /// permanently lock a coefficient at zero once lambda descends past it
  double variance_floor_rel = 1e-3;

  CSConfig() {
    base.max_outer = 12;
    base.max_inner = 60;
  }
};

struct CSResult {
  VectorXd x_hat;
  CoefficientGrid alpha_hat;
  CSMethod method = CSMethod::lrtfs;
  double output_snr_db = std::numeric_limits<double>::quiet_NaN();  ///< set by the harness
  double lambda_used = 0.0;
  std::vector<TraceRow> trace;
  bool converged = true;
};

struct CsSnapshot {
  double lambda = 0.0;
  const CoefficientGrid& alpha;
  const VectorXd& x_hat;
};
using CsSnapshotFn = std::function<void(const CsSnapshot&)>;

/// Compressive LRTFS: the single-layer alternation with Phi replaced by
/// A Phi, started from alpha = 0; the factors are initialized from the SVD of
/// the grid produced by the first shrinkage pass.
CSResult cs_lrtfs(const VectorXd& b, const MeasurementOperator& a, const GaborDictionary& dict,
                  const CSConfig& cfg, const CsSnapshotFn& on_lambda = nullptr);

/// Same skeleton, complex soft-thresholding at lambda_l1 / L instead of the
/// variance shrink. lambda_l1 <= 0 selects an automatic target relative to
/// ||M^H b||_inf; the threshold is annealed down to the target.
CSResult cs_l1(const VectorXd& b, const MeasurementOperator& a, const GaborDictionary& dict,
               double lambda_l1, const CSConfig& cfg, const CsSnapshotFn& on_lambda = nullptr);

/// Type-I SBL: every coefficient carries a free variance v_m = |alpha_m|^2,
/// floored; otherwise the same skeleton.
CSResult cs_sbl(const VectorXd& b, const MeasurementOperator& a, const GaborDictionary& dict,
                const CSConfig& cfg, const CsSnapshotFn& on_lambda = nullptr);

/// Oracle 1: variance fixed to the power spectrogram of the uncompressed
/// ground truth; only the shrinkage block runs.
CSResult cs_oracle(const VectorXd& b, const MeasurementOperator& a, const GaborDictionary& dict,
                   const MatrixXd& true_variance, const CSConfig& cfg,
                   const CsSnapshotFn& on_lambda = nullptr);

/// Oracle 2: W, H fixed to an IS-NMF of the ground-truth power spectrogram.
CSResult cs_oracle(const VectorXd& b, const MeasurementOperator& a, const GaborDictionary& dict,
                   const NMFModel& true_model, const CSConfig& cfg,
                   const CsSnapshotFn& on_lambda = nullptr);

struct SweepRow {
  double ratio = 0.0;
  CSMethod method = CSMethod::lrtfs;
  std::uint64_t seed = 0;
  double snr_db = std::numeric_limits<double>::quiet_NaN();
  double runtime_s = 0.0;
  bool ok = false;
  std::string error;
};

struct SweepConfig {
  std::vector<double> ratios = log_spaced(0.1, 0.01, 6);  ///< sorted ascending internally
  std::vector<CSMethod> methods = {CSMethod::lrtfs, CSMethod::sbl, CSMethod::l1};
  std::vector<std::uint64_t> seeds = {1};
  CSConfig cs;
  double noise_var = 0.0;
  int jobs = 1;
  /// when non-empty, the best reconstruction of every row is written here as
  /// row_<ratio>_<method>_<seed>.wav
  std::string artifact_dir;
  double artifact_sample_rate = 11025.0;
};

/// For each (ratio, method, seed): build the operator, sense, recover, score
/// the best-SNR schedule point against the ground truth. Failed rows carry
/// their error message; the sweep continues. Row order is (ratio, method,
/// seed) regardless of the job count.
std::vector<SweepRow> sweep(const VectorXd& x_true, const GaborDictionary& dict,
                            const SweepConfig& cfg);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace lrtfs
