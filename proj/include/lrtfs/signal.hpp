#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lrtfs/isnmf.hpp"
#include "lrtfs/types.hpp"

namespace lrtfs {

struct SignalBuffer {
  VectorXd samples;
  double sample_rate = 0.0;
  std::string label;
};

enum class SyntheticKind { gabor_atoms, harmonic_notes, rank_r_tf, noise };

struct GaborAtom {
  double freq_hz = 440.0;
  double onset_s = 0.0;
  double duration_s = 0.1;
  double amplitude = 1.0;
};

struct HarmonicNote {
  double f0_hz = 220.0;
  double amplitude = 1.0;
  int num_harmonics = 6;
  /// (onset_s, duration_s) pairs; a note may sound in several measures
  std::vector<std::pair<double, double>> events;
};

/// Deterministic ground-truth generator. Random kinds consume the mandatory
/// seed through the documented generator (see rng.hpp), never the platform
/// default.
struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::noise;
  std::uint64_t seed = 1;

  std::vector<GaborAtom> atoms;       ///< gabor_atoms
  int atom_window = 1024;             ///< lattice window for atom placement

  std::vector<HarmonicNote> notes;    ///< harmonic_notes

  int rank = 2;                       ///< rank_r_tf
  int tf_window = 512;
  MatrixXd w_override;                ///< rank_r_tf: use these factors instead
  MatrixXd h_override;                ///< of seeded random ones when non-empty

  /// peak-normalize the mix (and components) to this level; 0 disables
  double normalize_peak = 0.0;
  /// RMS-normalize instead (applied when positive; takes precedence)
  double normalize_rms = 0.0;

  std::string label;
};

struct SyntheticResult {
  SignalBuffer buffer;
  /// additive ground-truth parts (one per atom / note / latent component)
  std::vector<VectorXd> components;
  /// rank_r_tf only: the variance factors the coefficients were drawn from
  NMFModel true_model;
};

SyntheticResult synthesize(const SyntheticSpec& spec, Index num_samples, double sample_rate);

/// x + n with n scaled so that 10 log10(||x||^2/||n||^2) equals input_snr_db
/// exactly, not just in expectation.
SignalBuffer add_noise(const SignalBuffer& buffer, double input_snr_db, std::uint64_t seed);

/// 10 log10(||x_true||^2 / ||x_true - x_hat||^2), capped at +160 dB when the
/// residual underflows.
double output_snr_db(const VectorXd& x_true, const VectorXd& x_hat);

/// The four-note protocol signal: four non-harmonically-related notes played
/// all together in the first measure, then in every pair combination over
/// seven equal measures spanning duration_s.
SyntheticSpec fournotes_preset(double duration_s = 15.6);

/// Low-rank t-f benchmark: rank-2 GCM draw over a 512-sample-window lattice.
SyntheticSpec rank2_preset(std::uint64_t seed = 1);

struct TonalClickSignal {
  SignalBuffer mix;
  VectorXd tonal;
  VectorXd click;
};

/// Sustained harmonic content plus isolated short transients; the two parts
/// are returned separately as layer ground truth.
TonalClickSignal make_tonal_click(Index num_samples, double sample_rate, std::uint64_t seed = 1);

}  // namespace lrtfs
