#include "lrtfs/gabor.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "lrtfs/linops.hpp"

namespace lrtfs {

namespace {

// exp(-i pi l / F): folds the half-bin frequency offset into a plain DFT.
VectorXcd half_bin_chirp(int num_freqs) {
  VectorXcd chirp(num_freqs);
  for (int l = 0; l < num_freqs; ++l) {
    const double phase = -std::numbers::pi * l / num_freqs;
    chirp[l] = Complex(std::cos(phase), std::sin(phase));
  }
  return chirp;
}

void check_grid_shape(const GaborDictionary& dict, const CoefficientGrid& grid) {
  if (grid.rows() != dict.freq_rows() || grid.cols() != dict.num_frames) {
    throw std::invalid_argument("coefficient grid does not match dictionary lattice");
  }
}

GaborDictionary make_dictionary(const ArrayXd& window, int hop, Index signal_len, GaborMode mode) {
  const int len = static_cast<int>(window.size());
  if (len <= 0 || len % 2 != 0) throw std::invalid_argument("window length must be even and positive");
  if (hop <= 0 || hop > len) throw std::invalid_argument("hop must be in [1, window length]");
  if (signal_len < len) throw std::invalid_argument("signal length must be at least the window length");
  if (!window.isFinite().all()) throw std::invalid_argument("window entries must be finite");

  GaborDictionary dict;
  dict.window = window;
  dict.hop = hop;
  dict.num_freqs = len;
  dict.num_frames = static_cast<int>((signal_len + hop - 1) / hop);
  dict.signal_len = signal_len;
  dict.mode = mode;
  return dict;
}

}  // namespace

ArrayXd hann_window(int len) {
  ArrayXd w(len);
  for (int l = 0; l < len; ++l) {
    w[l] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * l / len);
  }
  return w;
}

GaborDictionary build_tight_gabor(int window_len, double overlap_fraction, Index signal_len,
                                  GaborMode mode) {
  if (!(overlap_fraction > 0.0 && overlap_fraction < 1.0)) {
    throw std::invalid_argument("overlap fraction must lie strictly inside (0, 1)");
  }
  const int hop = static_cast<int>(std::lround(window_len * (1.0 - overlap_fraction)));
  if (hop <= 0) throw std::invalid_argument("overlap fraction leaves no hop");

  ArrayXd win = hann_window(window_len);

  // The painless frame operator is diagonal: (S x)(t) = F sum_n g(t - n a)^2 x(t).
  // Dividing g by sqrt of that diagonal (a-periodic) makes S the identity.
  ArrayXd diag = ArrayXd::Zero(hop);
  for (int l = 0; l < window_len; ++l) diag[l % hop] += win[l] * win[l];
  diag *= static_cast<double>(window_len);
  if ((diag <= 0.0).any()) throw std::invalid_argument("window/hop combination does not cover the lattice");
  for (int l = 0; l < window_len; ++l) win[l] /= std::sqrt(diag[l % hop]);

  GaborDictionary dict = make_dictionary(win, hop, signal_len, mode);
  dict.is_tight = true;
  dict.frame_norm_sq = 1.0;
  return dict;
}

GaborDictionary build_gabor(const ArrayXd& window, int hop, Index signal_len, GaborMode mode) {
  GaborDictionary dict = make_dictionary(window, hop, signal_len, mode);
  dict.is_tight = false;

  GaborDictionary twin = dict;
  twin.mode = GaborMode::complex_full;
  const Index t = dict.signal_len;
  auto frame_op = [&twin](const VectorXcd& v) { return synthesis_complex(twin, analysis(twin, v)); };
  dict.frame_norm_sq = 1.01 * power_lambda_max<VectorXcd>(frame_op, t, 1e-8);
  return dict;
}

CoefficientGrid analysis(const GaborDictionary& dict, const VectorXcd& x) {
  if (x.size() != dict.signal_len) throw std::invalid_argument("signal length does not match dictionary");

  const int f = dict.num_freqs;
  const Index tp = dict.padded_len();
  VectorXcd padded = VectorXcd::Zero(tp);
  padded.head(x.size()) = x;

  const VectorXcd chirp = half_bin_chirp(f);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);

  CoefficientGrid grid(dict.freq_rows(), dict.num_frames);
  std::vector<Complex> seg(f), spec(f);
  for (int n = 0; n < dict.num_frames; ++n) {
    const Index base = static_cast<Index>(n) * dict.hop;
    for (int l = 0; l < f; ++l) {
      seg[l] = padded[(base + l) % tp] * dict.window[l] * chirp[l];
    }
    fft.fwd(spec, seg);
    for (int r = 0; r < grid.rows(); ++r) grid(r, n) = spec[r];
  }
  return grid;
}

CoefficientGrid analysis(const GaborDictionary& dict, const VectorXd& x) {
  return analysis(dict, VectorXcd(x.cast<Complex>()));
}

namespace {

// Shared overlap-add core: spec_fill writes the F-point spectrum for frame n,
// emit folds the de-chirped, windowed segment into the output buffer.
template <class SpecFill, class Emit>
void synthesis_frames(const GaborDictionary& dict, SpecFill&& spec_fill, Emit&& emit) {
  const int f = dict.num_freqs;
  const Index tp = dict.padded_len();
  const VectorXcd chirp = half_bin_chirp(f);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);

  std::vector<Complex> spec(f), seg(f);
  for (int n = 0; n < dict.num_frames; ++n) {
    spec_fill(n, spec);
    fft.inv(seg, spec);  // unscaled: seg(l) = sum_f spec_f exp(+2 pi i f l / F)
    const Index base = static_cast<Index>(n) * dict.hop;
    for (int l = 0; l < f; ++l) {
      // conj(chirp) restores the half-bin offset on the synthesis side
      emit((base + l) % tp, seg[l] * std::conj(chirp[l]) * dict.window[l]);
    }
  }
}

}  // namespace

VectorXcd synthesis_complex(const GaborDictionary& dict, const CoefficientGrid& grid) {
  if (dict.mode != GaborMode::complex_full) {
    throw std::invalid_argument("synthesis_complex requires a complex_full dictionary");
  }
  check_grid_shape(dict, grid);

  VectorXcd out = VectorXcd::Zero(dict.padded_len());
  synthesis_frames(
      dict,
      [&](int n, std::vector<Complex>& spec) {
        for (int r = 0; r < dict.num_freqs; ++r) spec[r] = grid(r, n);
      },
      [&](Index t, Complex v) { out[t] += v; });
  return out.head(dict.signal_len);
}

VectorXd synthesis_real(const GaborDictionary& dict, const CoefficientGrid& grid) {
  if (dict.mode != GaborMode::real_half) {
    throw std::invalid_argument("synthesis_real requires a real_half dictionary");
  }
  check_grid_shape(dict, grid);

  const int rows = dict.freq_rows();
  VectorXd out = VectorXd::Zero(dict.padded_len());
  synthesis_frames(
      dict,
      [&](int n, std::vector<Complex>& spec) {
        for (int r = 0; r < rows; ++r) spec[r] = grid(r, n);
        for (int r = rows; r < dict.num_freqs; ++r) spec[r] = Complex(0.0, 0.0);
      },
      [&](Index t, Complex v) { out[t] += 2.0 * std::real(v); });
  return out.head(dict.signal_len);
}

double spectral_norm_sq(const GaborDictionary& dict) { return dict.frame_norm_sq; }

CoefficientGrid hermitian_extend(const CoefficientGrid& half) {
  const Index rows = half.rows();
  CoefficientGrid full(2 * rows, half.cols());
  full.topRows(rows) = half;
  for (Index r = 0; r < rows; ++r) {
    full.row(2 * rows - 1 - r) = half.row(r).conjugate();
  }
  return full;
}

}  // namespace lrtfs
