#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace lrtfs {

using Index = Eigen::Index;
using Complex = std::complex<double>;

using VectorXd = Eigen::VectorXd;
using VectorXcd = Eigen::VectorXcd;
using MatrixXd = Eigen::MatrixXd;
using MatrixXcd = Eigen::MatrixXcd;
using ArrayXd = Eigen::ArrayXd;
using ArrayXXd = Eigen::ArrayXXd;

/// Strictly positive floor applied to spectrogram values, NMF factors and
/// variance grids; ratios and logs in the Itakura-Saito machinery are
/// undefined at zero.
inline constexpr double kEpsNmf = 1e-12;

/// Synthesis coefficients on a t-f lattice, one row per frequency channel,
/// one column per time frame. The vectorizing mapping is frequency-major
/// within a frame, frames ordered in time, i.e. plain column-major storage.
using CoefficientGrid = Eigen::MatrixXcd;

/// Mapping I: (f, n) -> m = f + F_rows * n. Column-major flattening.
inline VectorXcd vectorize(const CoefficientGrid& grid) {
  return Eigen::Map<const VectorXcd>(grid.data(), grid.size());
}

inline CoefficientGrid matrixize(const VectorXcd& vec, Index freq_rows, Index num_frames) {
  return Eigen::Map<const CoefficientGrid>(vec.data(), freq_rows, num_frames);
}

}  // namespace lrtfs
