#pragma once

#include <cstdint>

#include "lrtfs/types.hpp"

namespace lrtfs {

enum class GaborMode {
  complex_full,  ///< F frequency channels, complex signals
  real_half      ///< F/2 channels, real signals via x = 2 Re[Phi_ alpha_]
};

/// Discrete Gabor dictionary on a periodic lattice.
///
/// Atoms are phi_{f,n}(t) = g(t - n a) exp(2 pi i (f + 1/2)(t - n a) / F),
/// with t taken modulo the padded length N a. Frequencies carry a half-bin
/// offset so that conjugating an atom maps channel f to channel F-1-f: the
/// complex dictionary is then exactly the Hermitian pair [Phi_, Phi_*] of the
/// half dictionary, with no self-conjugate DC/Nyquist channel to special-case.
///
/// Signals shorter than the lattice are zero-padded to N a samples; synthesis
/// truncates back to signal_len.
struct GaborDictionary {
  ArrayXd window;             ///< analysis = synthesis window, length F
  int hop = 0;                ///< a, samples between frames
  int num_freqs = 0;          ///< F, FFT length = window length
  int num_frames = 0;         ///< N
  Index signal_len = 0;       ///< T
  GaborMode mode = GaborMode::real_half;
  bool is_tight = false;
  double frame_norm_sq = 0.0;  ///< ||Phi||_2^2 of the full complex dictionary

  int freq_rows() const { return mode == GaborMode::real_half ? num_freqs / 2 : num_freqs; }
  Index padded_len() const { return static_cast<Index>(num_frames) * hop; }
  Index num_coeffs() const { return static_cast<Index>(freq_rows()) * num_frames; }
};

/// Periodic Hann window, w(l) = 0.5 - 0.5 cos(2 pi l / len).
ArrayXd hann_window(int len);

/// Canonical tight Gabor dictionary on a Hann window. The window is rescaled
/// by the diagonal frame operator so that synthesis(analysis(x)) = x and
/// ||Phi||_2^2 = 1.
GaborDictionary build_tight_gabor(int window_len, double overlap_fraction, Index signal_len,
                                  GaborMode mode);

/// Dictionary from an arbitrary window; frame_norm_sq is estimated by power
/// iteration on Phi Phi^H (relative tolerance 1e-8) and inflated by 1% as a
/// safe upper bound.
GaborDictionary build_gabor(const ArrayXd& window, int hop, Index signal_len, GaborMode mode);

/// Analysis coefficients Phi^H x, restricted to the first F/2 channels in
/// real mode. Output is freq_rows x num_frames.
CoefficientGrid analysis(const GaborDictionary& dict, const VectorXcd& x);
CoefficientGrid analysis(const GaborDictionary& dict, const VectorXd& x);

/// Phi alpha for a complex_full dictionary.
VectorXcd synthesis_complex(const GaborDictionary& dict, const CoefficientGrid& grid);

/// 2 Re[Phi_ alpha_] for a real_half dictionary.
VectorXd synthesis_real(const GaborDictionary& dict, const CoefficientGrid& grid);

/// ||Phi||_2^2 of the full dictionary (the stored bound).
double spectral_norm_sq(const GaborDictionary& dict);

/// Extends a real-mode grid to the paired complex grid: row F-1-f holds the
/// conjugate of row f. synthesis_complex of the result equals synthesis_real
/// of the input.
CoefficientGrid hermitian_extend(const CoefficientGrid& half);

}  // namespace lrtfs
