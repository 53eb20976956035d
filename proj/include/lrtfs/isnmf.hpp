#pragma once

#include <vector>

#include "lrtfs/types.hpp"

namespace lrtfs {

/// Nonnegative factors of the variance grid: v = W H, entrywise positive.
/// Entries are kept at or above kEpsNmf; only the product W H and the masks
/// derived from it are meaningful (W, H carry a scale ambiguity).
struct NMFModel {
  MatrixXd W;  ///< freq_rows x K spectral patterns
  MatrixXd H;  ///< K x num_frames activations

  Index rank() const { return W.cols(); }
  MatrixXd variance() const { return (W * H).cwiseMax(kEpsNmf); }
};

/// Itakura-Saito divergence sum_ij a/b - log(a/b) - 1. Entries of A are
/// floored at kEpsNmf inside the log; B must be strictly positive.
double is_divergence(const MatrixXd& a, const MatrixXd& b);

/// One multiplicative majorization-minimization sweep: W update followed by
/// an H update that sees the new W. Never increases is_divergence(S | W H).
NMFModel mm_update(const MatrixXd& s, const NMFModel& model);

struct NmfRunResult {
  NMFModel model;
  int iterations = 0;
  bool converged = false;
};

/// Repeats mm_update until the relative Frobenius change of both factors
/// drops below tol or max_iter sweeps have run.
NmfRunResult nmf_run(const MatrixXd& s, NMFModel model, double tol, int max_iter);

/// Deterministic initialization from the rank-K truncated SVD of the complex
/// grid Y: w_k = |u_k| sqrt(sigma_k), h_k = sqrt(sigma_k) |v_k|^H, floored.
/// The symmetric sqrt split of the singular values is a convention.
NMFModel init_svd(const CoefficientGrid& y, Index k);

/// K nonnegative masks m_k = w_k h_k^T / (W H); they sum to one entrywise.
std::vector<ArrayXXd> wiener_masks(const NMFModel& model);

}  // namespace lrtfs
