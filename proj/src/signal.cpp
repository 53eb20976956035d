#include "lrtfs/signal.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lrtfs/gabor.hpp"
#include "lrtfs/rng.hpp"

namespace lrtfs {

namespace {

void apply_normalization(SyntheticResult& result, double peak, double rms) {
  double gain = 0.0;
  if (rms > 0.0) {
    const double current =
        std::sqrt(result.buffer.samples.squaredNorm() /
                  std::max<double>(1, result.buffer.samples.size()));
    if (current <= 0.0) return;
    gain = rms / current;
  } else if (peak > 0.0) {
    const double max_abs = result.buffer.samples.cwiseAbs().maxCoeff();
    if (max_abs <= 0.0) return;
    gain = peak / max_abs;
  } else {
    return;
  }
  result.buffer.samples *= gain;
  for (auto& c : result.components) c *= gain;
  // the variance of a scaled GCM draw scales quadratically
  if (result.true_model.W.size() > 0) result.true_model.W *= gain * gain;
}

SyntheticResult make_gabor_atoms(const SyntheticSpec& spec, Index t, double sr) {
  GaborDictionary dict = build_tight_gabor(spec.atom_window, 0.5, t, GaborMode::real_half);
  SyntheticResult res;
  res.buffer.samples = VectorXd::Zero(t);
  const double bin_hz = sr / dict.num_freqs;
  for (const GaborAtom& atom : spec.atoms) {
    if (atom.freq_hz <= 0.0 || atom.freq_hz >= sr / 2.0) {
      throw std::invalid_argument("synthesize: atom frequency violates Nyquist");
    }
    // channel f covers (f + 1/2) bin_hz
    const int f = std::clamp<int>(static_cast<int>(std::lround(atom.freq_hz / bin_hz - 0.5)), 0,
                                  dict.freq_rows() - 1);
    const int n0 = std::clamp<int>(static_cast<int>(atom.onset_s * sr) / dict.hop, 0,
                                   dict.num_frames - 1);
    const int n1 = std::clamp<int>(
        static_cast<int>((atom.onset_s + atom.duration_s) * sr) / dict.hop, n0,
        dict.num_frames - 1);
    CoefficientGrid grid = CoefficientGrid::Zero(dict.freq_rows(), dict.num_frames);
    for (int n = n0; n <= n1; ++n) grid(f, n) = atom.amplitude;
    res.components.push_back(synthesis_real(dict, grid));
    res.buffer.samples += res.components.back();
  }
  return res;
}

SyntheticResult make_harmonic_notes(const SyntheticSpec& spec, Index t, double sr) {
  SyntheticResult res;
  res.buffer.samples = VectorXd::Zero(t);
  for (const HarmonicNote& note : spec.notes) {
    if (note.f0_hz * note.num_harmonics >= sr / 2.0) {
      throw std::invalid_argument("synthesize: harmonic above Nyquist");
    }
    VectorXd part = VectorXd::Zero(t);
    for (const auto& [onset_s, duration_s] : note.events) {
      const Index start = static_cast<Index>(onset_s * sr);
      const Index stop = std::min<Index>(t, static_cast<Index>((onset_s + duration_s) * sr));
      const double attack = 0.005 * sr;
      for (Index i = std::max<Index>(start, 0); i < stop; ++i) {
        const double tau = static_cast<double>(i - start) / sr;
        double env = std::exp(-0.5 * tau / duration_s);
        if (i - start < attack) env *= static_cast<double>(i - start) / attack;
        double s = 0.0;
        for (int h = 1; h <= note.num_harmonics; ++h) {
          s += std::sin(2.0 * std::numbers::pi * note.f0_hz * h * tau + 0.37 * h) / h;
        }
        part[i] += note.amplitude * env * s;
      }
    }
    res.components.push_back(part);
    res.buffer.samples += part;
  }
  return res;
}

// Harmonic-comb spectral template with a small broadband floor.
VectorXd comb_template(Rng& rng, int rows, double bin_hz) {
  const double f0 = 80.0 + 320.0 * rng.uniform();
  const double width = 0.6 + 0.5 * rng.uniform();  // bins
  VectorXd w = VectorXd::Constant(rows, 1e-6);
  for (int h = 1; h <= 8; ++h) {
    const double center = f0 * h / bin_hz - 0.5;
    if (center > rows - 1) break;
    const double gain = std::pow(h, -0.7);
    for (int f = 0; f < rows; ++f) {
      const double d = (f - center) / width;
      w[f] += gain * std::exp(-0.5 * d * d);
    }
  }
  return w;
}

// Sum of a few raised-cosine activity bumps over the frames. Bumps are wide:
// the low-rank structure couples many frames per spectral pattern.
VectorXd bump_activation(Rng& rng, int frames) {
  VectorXd h = VectorXd::Constant(frames, 1e-6);
  const int bumps = 2 + static_cast<int>(2.0 * rng.uniform());
  for (int b = 0; b < bumps; ++b) {
    const double center = frames * rng.uniform();
    const double width = frames * (0.15 + 0.22 * rng.uniform());
    const double gain = 0.3 + 0.7 * rng.uniform();
    for (int n = 0; n < frames; ++n) {
      const double d = (n - center) / width;
      if (std::abs(d) < 1.0) h[n] += gain * 0.5 * (1.0 + std::cos(std::numbers::pi * d));
    }
  }
  return h;
}

SyntheticResult make_rank_tf(const SyntheticSpec& spec, Index t, double sr) {
  GaborDictionary dict = build_tight_gabor(spec.tf_window, 0.5, t, GaborMode::real_half);
  const int rows = dict.freq_rows();
  const int frames = dict.num_frames;
  Rng rng(spec.seed);

  NMFModel model;
  if (spec.w_override.size() > 0) {
    if (spec.w_override.rows() != rows || spec.h_override.cols() != frames ||
        spec.w_override.cols() != spec.h_override.rows()) {
      throw std::invalid_argument("synthesize: override factors do not match the lattice");
    }
    model.W = spec.w_override;
    model.H = spec.h_override;
  } else {
    const double bin_hz = sr / dict.num_freqs;
    model.W.resize(rows, spec.rank);
    model.H.resize(spec.rank, frames);
    for (int k = 0; k < spec.rank; ++k) {
      model.W.col(k) = comb_template(rng, rows, bin_hz);
      model.H.row(k) = bump_activation(rng, frames).transpose();
    }
  }

  SyntheticResult res;
  res.true_model = model;
  res.buffer.samples = VectorXd::Zero(t);
  for (Index k = 0; k < model.rank(); ++k) {
    CoefficientGrid alpha_k(rows, frames);
    for (int n = 0; n < frames; ++n) {
      for (int f = 0; f < rows; ++f) {
        alpha_k(f, n) = std::sqrt(model.W(f, k) * model.H(k, n)) * rng.cnormal();
      }
    }
    res.components.push_back(synthesis_real(dict, alpha_k));
    res.buffer.samples += res.components.back();
  }
  return res;
}

SyntheticResult make_noise(const SyntheticSpec& spec, Index t) {
  Rng rng(spec.seed);
  SyntheticResult res;
  res.buffer.samples = rng.normal_vector(t);
  return res;
}

}  // namespace

SyntheticResult synthesize(const SyntheticSpec& spec, Index num_samples, double sample_rate) {
  if (num_samples <= 0 || sample_rate <= 0.0) {
    throw std::invalid_argument("synthesize: positive length and sample rate required");
  }
  SyntheticResult res;
  switch (spec.kind) {
    case SyntheticKind::gabor_atoms:
      res = make_gabor_atoms(spec, num_samples, sample_rate);
      break;
    case SyntheticKind::harmonic_notes:
      res = make_harmonic_notes(spec, num_samples, sample_rate);
      break;
    case SyntheticKind::rank_r_tf:
      res = make_rank_tf(spec, num_samples, sample_rate);
      break;
    case SyntheticKind::noise:
      res = make_noise(spec, num_samples);
      break;
  }
  res.buffer.sample_rate = sample_rate;
  res.buffer.label = spec.label;
  apply_normalization(res, spec.normalize_peak, spec.normalize_rms);
  return res;
}

SignalBuffer add_noise(const SignalBuffer& buffer, double input_snr_db, std::uint64_t seed) {
  const double signal_sq = buffer.samples.squaredNorm();
  if (signal_sq <= 0.0) throw std::invalid_argument("add_noise: SNR undefined for a zero signal");
  Rng rng(seed);
  VectorXd n = rng.normal_vector(buffer.samples.size());
  const double target_sq = signal_sq * std::pow(10.0, -input_snr_db / 10.0);
  n *= std::sqrt(target_sq / n.squaredNorm());
  SignalBuffer out = buffer;
  out.samples += n;
  return out;
}

double output_snr_db(const VectorXd& x_true, const VectorXd& x_hat) {
  if (x_true.size() != x_hat.size()) throw std::invalid_argument("output_snr_db: length mismatch");
  const double ref = x_true.squaredNorm();
  if (ref <= 0.0) throw std::invalid_argument("output_snr_db: zero reference");
  const double err = (x_true - x_hat).squaredNorm();
  if (err <= 0.0) return 160.0;
  return std::min(160.0, 10.0 * std::log10(ref / err));
}

SyntheticSpec fournotes_preset(double duration_s) {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::harmonic_notes;
  spec.label = "fournotes";
  spec.normalize_rms = 1.0;
  // fundamentals chosen to avoid shared harmonics within the first six partials
  const double f0s[4] = {220.0, 311.13, 415.30, 554.37};
  for (double f0 : f0s) {
    HarmonicNote note;
    note.f0_hz = f0;
    note.num_harmonics = 6;
    spec.notes.push_back(note);
  }
  // measure 0: all four notes at once; measures 1-6: every pair
  const std::pair<int, int> pairs[6] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  const double measure = duration_s / 7.0;
  const double hold = 0.92 * measure;
  for (int i = 0; i < 4; ++i) spec.notes[i].events.push_back({0.0, hold});
  for (int m = 0; m < 6; ++m) {
    spec.notes[pairs[m].first].events.push_back({(m + 1) * measure, hold});
    spec.notes[pairs[m].second].events.push_back({(m + 1) * measure, hold});
  }
  return spec;
}

SyntheticSpec rank2_preset(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::rank_r_tf;
  spec.rank = 2;
  spec.tf_window = 512;
  spec.seed = seed;
  spec.normalize_peak = 0.9;
  spec.label = "rank2";
  return spec;
}

TonalClickSignal make_tonal_click(Index num_samples, double sample_rate, std::uint64_t seed) {
  // tonal part: two sustained notes covering most of the signal
  SyntheticSpec tonal;
  tonal.kind = SyntheticKind::harmonic_notes;
  const double dur = static_cast<double>(num_samples) / sample_rate;
  for (double f0 : {196.0, 329.63}) {
    HarmonicNote note;
    note.f0_hz = f0;
    note.num_harmonics = 5;
    note.events.push_back({0.02 * dur, 0.9 * dur});
    tonal.notes.push_back(note);
  }
  SyntheticResult tonal_res = synthesize(tonal, num_samples, sample_rate);
  VectorXd tonal_sig = tonal_res.buffer.samples;
  tonal_sig *= 0.7 / tonal_sig.cwiseAbs().maxCoeff();

  // click part: isolated 128-sample-window atoms spread over the signal
  GaborDictionary short_dict = build_tight_gabor(128, 0.5, num_samples, GaborMode::real_half);
  Rng rng(seed);
  CoefficientGrid clicks = CoefficientGrid::Zero(short_dict.freq_rows(), short_dict.num_frames);
  const int num_clicks = 10;
  for (int c = 0; c < num_clicks; ++c) {
    const int n = static_cast<int>((0.05 + 0.9 * rng.uniform()) * short_dict.num_frames);
    for (int f = 4; f < short_dict.freq_rows() - 2; ++f) {
      clicks(f, n) = 0.35 * rng.cnormal();
    }
  }
  VectorXd click_sig = synthesis_real(short_dict, clicks);
  click_sig *= 0.6 / click_sig.cwiseAbs().maxCoeff();

  TonalClickSignal out;
  out.tonal = tonal_sig;
  out.click = click_sig;
  out.mix.samples = tonal_sig + click_sig;
  out.mix.sample_rate = sample_rate;
  out.mix.label = "tonalclick";
  return out;
}

}  // namespace lrtfs
