// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Scales are desk-sized; every tolerance is pinned here.

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lrtfs/compressive.hpp"
#include "lrtfs/io.hpp"
#include "lrtfs/multilayer.hpp"
#include "lrtfs/rng.hpp"
#include "lrtfs/signal.hpp"
#include "lrtfs/solver.hpp"
#include "lrtfs/wav.hpp"
#include "support/dense_frame.hpp"
#include "support/ridge_oracle.hpp"

using namespace lrtfs;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Frame correctness: tight round trip and adjointness at T = 16384.
void criterion_1() {
  const auto start = Clock::now();
  GaborDictionary dict = build_tight_gabor(1024, 0.5, 16384, GaborMode::real_half);
  GaborDictionary cdict = build_tight_gabor(1024, 0.5, 16384, GaborMode::complex_full);
  Rng rng(101);
  double worst_rt = 0.0, worst_adj = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd x = rng.normal_vector(16384);
    VectorXd back = synthesis_real(dict, analysis(dict, x));
    worst_rt = std::max(worst_rt, (back - x).norm() / x.norm());

    CoefficientGrid y = analysis(cdict, x);
    CoefficientGrid a = matrixize(rng.cnormal_vector(cdict.num_coeffs()), cdict.freq_rows(),
                                  cdict.num_frames);
    const Complex lhs = vectorize(y).dot(vectorize(a));
    const Complex rhs = x.cast<Complex>().dot(synthesis_complex(cdict, a));
    worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / std::abs(rhs));
  }
  const double runtime = seconds_since(start);
  const bool pass = worst_rt < 1e-10 && worst_adj < 1e-10 && runtime < 5.0;
  report(1, "tight-frame round trip and adjointness", pass,
         fmt("max round-trip %.2e, max adjointness %.2e, %.2f s", worst_rt, worst_adj, runtime));
}

// ---------------------------------------------------------------------------
// 2. Ridge-oracle equivalence on T = 64, M = 128 instances, both modes.
void criterion_2() {
  const auto start = Clock::now();
  GaborDictionary rd = build_tight_gabor(16, 0.5, 64, GaborMode::real_half);
  GaborDictionary cd = build_tight_gabor(16, 0.5, 64, GaborMode::complex_full);
  const MatrixXcd phi_half = testing::dense_phi(rd);
  const MatrixXcd phi_full = testing::dense_phi(cd);

  SolverConfig cfg;
  cfg.tol_inner_isa = 1e-12;
  cfg.max_inner = 30000;

  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const double lambda = 0.02 + 0.3 * rng.uniform();
    MatrixXd vr(rd.freq_rows(), rd.num_frames), vc(cd.freq_rows(), cd.num_frames);
    for (Index j = 0; j < vr.cols(); ++j)
      for (Index i = 0; i < vr.rows(); ++i) vr(i, j) = 0.05 + 2.0 * rng.uniform();
    for (Index j = 0; j < vc.cols(); ++j)
      for (Index i = 0; i < vc.rows(); ++i) vc(i, j) = 0.05 + 2.0 * rng.uniform();

    VectorXd xr = rng.normal_vector(64);
    VectorXcd want_r = testing::ridge_closed_form_real(
        phi_half, xr, Eigen::Map<const VectorXd>(vr.data(), vr.size()), lambda);
    CoefficientGrid got_r = isa_solve(xr, rd, vr, lambda, analysis(rd, xr), cfg);
    worst = std::max(worst, (vectorize(got_r) - want_r).norm() / want_r.norm());

    VectorXcd xc = rng.cnormal_vector(64);
    VectorXcd want_c = testing::ridge_closed_form_complex(
        phi_full, xc, Eigen::Map<const VectorXd>(vc.data(), vc.size()), lambda);
    CoefficientGrid got_c = isa_solve(xc, cd, vc, lambda, analysis(cd, xc), cfg);
    worst = std::max(worst, (vectorize(got_c) - want_c).norm() / want_c.norm());
  }
  const double runtime = seconds_since(start);
  const bool pass = worst < 1e-6 && runtime < 30.0;
  report(2, "shrinkage fixed points match closed-form ridge oracles", pass,
         fmt("max relative error %.2e over 10 complex + 10 real instances, %.2f s", worst,
             runtime));
}

// ---------------------------------------------------------------------------
// 3. Paired-dictionary spectrum identity L = 2 L_A on random instances.
void criterion_3() {
  const auto start = Clock::now();
  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Index t = 12 + static_cast<Index>(rng.uniform() * 8);
    const Index m = t + 4 + static_cast<Index>(rng.uniform() * 12);
    MatrixXcd phi_half(t, m);
    for (Index j = 0; j < m; ++j) phi_half.col(j) = rng.cnormal_vector(t);

    MatrixXcd paired(t, 2 * m);
    paired.leftCols(m) = phi_half;
    paired.rightCols(m) = phi_half.conjugate();
    MatrixXd stacked(t, 2 * m);
    stacked.leftCols(m) = phi_half.real();
    stacked.rightCols(m) = -phi_half.imag();

    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig_c(paired.adjoint() * paired);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig_r(stacked.transpose() * stacked);
    const double l = eig_c.eigenvalues().maxCoeff();
    const double l_a = eig_r.eigenvalues().maxCoeff();
    worst = std::max(worst, std::abs(l - 2.0 * l_a) / l);
  }
  const bool pass = worst < 1e-8;
  report(3, "paired-dictionary spectra satisfy L = 2 L_A", pass,
         fmt("max relative deviation %.2e, %.2f s", worst, seconds_since(start)));
}

// ---------------------------------------------------------------------------
// 4. Multiplicative-update monotonicity and exact rank-1 recovery.
void criterion_4() {
  const auto start = Clock::now();
  Rng rng(404);
  bool monotone = true;
  double worst_step = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    MatrixXd s(14, 18);
    for (Index j = 0; j < s.cols(); ++j)
      for (Index i = 0; i < s.rows(); ++i) s(i, j) = 0.05 + 2.0 * rng.uniform();
    NMFModel model;
    model.W = MatrixXd(14, 3);
    model.H = MatrixXd(3, 18);
    for (Index j = 0; j < 3; ++j)
      for (Index i = 0; i < 14; ++i) model.W(i, j) = 0.1 + rng.uniform();
    for (Index j = 0; j < 18; ++j)
      for (Index i = 0; i < 3; ++i) model.H(i, j) = 0.1 + rng.uniform();

    double prev = is_divergence(s, model.variance());
    for (int it = 0; it < 100; ++it) {
      model = mm_update(s, model);
      const double cur = is_divergence(s, model.variance());
      if (cur > prev + 1e-12) {
        monotone = false;
        worst_step = std::max(worst_step, cur - prev);
      }
      prev = cur;
    }
  }

  VectorXd w(11), h(13);
  for (Index i = 0; i < 11; ++i) w[i] = 0.2 + rng.uniform();
  for (Index i = 0; i < 13; ++i) h[i] = 0.2 + rng.uniform();
  MatrixXd s1 = w * h.transpose();
  NMFModel init{MatrixXd::Constant(11, 1, 0.7), MatrixXd::Constant(1, 13, 0.9)};
  init.W.col(0) += 0.3 * VectorXd::Random(11).cwiseAbs();
  init.H.row(0) += 0.3 * VectorXd::Random(13).cwiseAbs().transpose();
  const double rank1_div = is_divergence(s1, nmf_run(s1, init, 0.0, 600).model.variance());

  const bool pass = monotone && rank1_div < 1e-8;
  report(4, "IS-NMF updates are monotone and factor rank-1 exactly", pass,
         fmt("monotone=%s (worst step +%.1e), rank-1 divergence %.2e, %.2f s",
             monotone ? "yes" : "no", worst_step, rank1_div, seconds_since(start)));
}

struct FournotesBench {
  VectorXd clean;
  VectorXd noisy;
  std::vector<VectorXd> notes;
  GaborDictionary dict;
  double sample_rate;
};

FournotesBench make_fournotes(double duration_s, double sample_rate, int window) {
  FournotesBench bench;
  bench.sample_rate = sample_rate;
  const Index t = static_cast<Index>(duration_s * sample_rate);
  SyntheticSpec spec = fournotes_preset(duration_s);
  SyntheticResult res = synthesize(spec, t, sample_rate);
  bench.clean = res.buffer.samples;
  bench.notes = std::move(res.components);
  bench.noisy = add_noise(res.buffer, 20.0, 777).samples;
  bench.dict = build_tight_gabor(window, 0.5, t, GaborMode::real_half);
  return bench;
}

// ---------------------------------------------------------------------------
// 5. Block-descent of both objectives on the four-note preset.
// 6. Mask identity on the same runs.
void criteria_5_6() {
  const auto start = Clock::now();
  FournotesBench bench = make_fournotes(2.8, 11025.0, 512);

  SolverConfig cfg;
  cfg.k = 10;
  cfg.lambda_target = 1e-4;
  cfg.lambda_schedule = log_spaced(1e-1, 1e-4, 7);
  cfg.max_outer = 25;
  LRTFSSolution sol = solve(bench.noisy, bench.dict, cfg);

  double worst_jl = -1e300;
  for (size_t i = 1; i < sol.trace.size(); ++i) {
    if (sol.trace[i].lambda != sol.trace[i - 1].lambda) continue;
    const double slack = 1e-9 * std::abs(sol.trace[i - 1].objective);
    worst_jl = std::max(worst_jl, sol.trace[i].objective - sol.trace[i - 1].objective - slack);
  }

  LayerSpec spec_a{bench.dict, LayerPrior::low_rank, 10};
  LayerSpec spec_b{build_tight_gabor(64, 0.5, bench.noisy.size(), GaborMode::real_half),
                   LayerPrior::sparse};
  SLRConfig slr;
  slr.mu = 0.05;
  slr.base = cfg;
  slr.base.max_outer = 15;
  SLRSolution slr_sol = solve_slr(bench.noisy, spec_a, spec_b, slr);
  double worst_slr = -1e300;
  for (size_t i = 1; i < slr_sol.trace.size(); ++i) {
    if (slr_sol.trace[i].lambda != slr_sol.trace[i - 1].lambda) continue;
    const double slack = 1e-9 * std::abs(slr_sol.trace[i - 1].objective);
    worst_slr =
        std::max(worst_slr, slr_sol.trace[i].objective - slr_sol.trace[i - 1].objective - slack);
  }
  const bool pass5 = worst_jl <= 0.0 && worst_slr <= 0.0;
  report(5, "C_JL and C_SLR traces are non-increasing at fixed lambda", pass5,
         fmt("worst C_JL excess %.2e, worst C_SLR excess %.2e, %.2f s", worst_jl, worst_slr,
             seconds_since(start)));

  // 6: components of every decomposition sum to the reconstruction
  auto comps = reconstruct_components(sol, bench.dict);
  VectorXd total = VectorXd::Zero(bench.noisy.size());
  for (const auto& c : comps) total += c;
  const double mask_err =
      (total - sol.reconstruction).cwiseAbs().maxCoeff() /
      std::max(1.0, sol.reconstruction.cwiseAbs().maxCoeff());
  auto slr_comps = reconstruct_components(slr_sol.layer_a, bench.dict);
  VectorXd slr_total = VectorXd::Zero(bench.noisy.size());
  for (const auto& c : slr_comps) slr_total += c;
  const double mask_err2 =
      (slr_total - slr_sol.layer_a.reconstruction).cwiseAbs().maxCoeff() /
      std::max(1.0, slr_sol.layer_a.reconstruction.cwiseAbs().maxCoeff());
  const bool pass6 = mask_err < 1e-12 && mask_err2 < 1e-12;
  report(6, "masked components sum to the reconstruction", pass6,
         fmt("max relative deviation %.2e / %.2e", mask_err, mask_err2));
}

// ---------------------------------------------------------------------------
// 7. Denoising reproduction on the four-note protocol.
void criterion_7() {
  const auto start = Clock::now();
  FournotesBench bench = make_fournotes(3.2, 11025.0, 512);

  SolverConfig cfg = SolverConfig::denoising_default();  // K=10, 30 lambdas 1e-1..1e-6
  cfg.max_outer = 20;
  cfg.max_inner = 60;

  double best_snr = -1e300;
  LRTFSSolution best;
  solve(bench.noisy, bench.dict, cfg, [&](const LRTFSSolution& snapshot) {
    const double snr = output_snr_db(bench.clean, snapshot.reconstruction);
    if (snr > best_snr) {
      best_snr = snr;
      best = snapshot;
    }
  });

  auto comps = reconstruct_components(best, bench.dict);
  int matched = 0;
  bool unique = true;
  for (size_t k = 0; k < comps.size() && k < 4; ++k) {
    int hits = 0;
    for (const auto& note : bench.notes) {
      const double corr =
          std::abs(comps[k].dot(note)) / (comps[k].norm() * note.norm() + 1e-300);
      if (corr > 0.9) ++hits;
    }
    if (hits == 1) ++matched;
    if (hits > 1) unique = false;
  }
  const double runtime = seconds_since(start);
  const bool pass = best_snr >= 22.0 && matched == 4 && unique && runtime < 300.0;
  report(7, "four-note denoising reaches 22 dB with note-aligned components", pass,
         fmt("best SNR %.2f dB, top-4 matched notes %d/4, %.1f s", best_snr, matched, runtime));
}

// ---------------------------------------------------------------------------
// 8. Two-layer separation of tonal + click content.
void criterion_8() {
  const auto start = Clock::now();
  const double sr = 22050.0;
  const Index t = static_cast<Index>(2.0 * sr);
  TonalClickSignal sig = make_tonal_click(t, sr, 55);

  LayerSpec spec_a{build_tight_gabor(1024, 0.5, t, GaborMode::real_half), LayerPrior::low_rank,
                   10};
  LayerSpec spec_b{build_tight_gabor(128, 0.5, t, GaborMode::real_half), LayerPrior::sparse};
  SLRConfig cfg;
  cfg.mu = 0.05;
  cfg.base.k = 10;
  cfg.base.lambda_target = 1e-5;
  cfg.base.lambda_schedule = log_spaced(1e-1, 1e-5, 9);
  cfg.base.max_outer = 15;

  SLRSolution sol = solve_slr(sig.mix.samples, spec_a, spec_b, cfg);

  const double click_in_b = sol.reconstruction_b.dot(sig.click) / sig.click.squaredNorm();
  const double tonal_in_a =
      sol.layer_a.reconstruction.dot(sig.tonal) / sig.tonal.squaredNorm();
  const double runtime = seconds_since(start);
  const bool pass = click_in_b >= 0.70 && tonal_in_a >= 0.80 && runtime < 300.0;
  report(8, "clicks land in the short-window layer, tones in the long-window layer", pass,
         fmt("click->b %.2f, tonal->a %.2f, %.1f s", click_in_b, tonal_in_a, runtime));
}

struct CSBench {
  VectorXd x;
  GaborDictionary dict;
  MatrixXd true_variance;
  NMFModel oracle_model;
  CSConfig cfg;
};

CSBench make_cs_bench(Index t) {
  CSBench bench;
  bench.dict = build_tight_gabor(512, 0.5, t, GaborMode::real_half);
  SyntheticSpec spec = rank2_preset(1);
  bench.x = synthesize(spec, t, 11025.0).buffer.samples;
  const CoefficientGrid y = analysis(bench.dict, bench.x);
  bench.true_variance = y.cwiseAbs2().cwiseMax(kEpsNmf);
  bench.oracle_model = nmf_run(bench.true_variance, init_svd(y, 10), 1e-5, 100).model;
  bench.cfg.base.k = 10;
  bench.cfg.lambda_schedule = log_spaced(1e3, 1e-2, 9);
  bench.cfg.base.max_outer = 5;
  bench.cfg.base.max_inner = 25;
  return bench;
}

double best_snapshot_snr(const VectorXd& truth, const std::function<void(CsSnapshotFn)>& run) {
  double best = -1e300;
  run([&](const CsSnapshot& snap) { best = std::max(best, output_snr_db(truth, snap.x_hat)); });
  return best;
}

// ---------------------------------------------------------------------------
// 9. CS method ordering over the measurement-ratio sweep.
void criterion_9(const CSBench& bench) {
  const auto start = Clock::now();
  const Index t = bench.x.size();
  std::map<std::string, std::vector<double>> snr;
  double l1_at_top = 0.0, lrtfs_at_top = 0.0;

  const auto ratios = log_spaced(0.1, 0.01, 6);
  for (double ratio : ratios) {
    const Index s = std::max<Index>(1, static_cast<Index>(std::lround(ratio * t)));
    MeasurementOperator a = MeasurementOperator::gaussian(s, t, 900 + static_cast<int>(1e4 * ratio));
    const VectorXd b = sense(a, bench.x, 0.0);

    const double o1 = best_snapshot_snr(bench.x, [&](CsSnapshotFn f) {
      cs_oracle(b, a, bench.dict, bench.true_variance, bench.cfg, f);
    });
    const double o2 = best_snapshot_snr(bench.x, [&](CsSnapshotFn f) {
      cs_oracle(b, a, bench.dict, bench.oracle_model, bench.cfg, f);
    });
    const double lr = best_snapshot_snr(
        bench.x, [&](CsSnapshotFn f) { cs_lrtfs(b, a, bench.dict, bench.cfg, f); });
    const double sb = best_snapshot_snr(
        bench.x, [&](CsSnapshotFn f) { cs_sbl(b, a, bench.dict, bench.cfg, f); });
    const double l1 = best_snapshot_snr(
        bench.x, [&](CsSnapshotFn f) { cs_l1(b, a, bench.dict, 0.0, bench.cfg, f); });

    snr["o1"].push_back(o1);
    snr["o2"].push_back(o2);
    snr["lrtfs"].push_back(lr);
    snr["sbl"].push_back(sb);
    snr["l1"].push_back(l1);
    if (ratio == ratios.front()) {
      lrtfs_at_top = lr;
      l1_at_top = l1;
    }
    std::printf("         ratio %.4f: o1 %.2f, o2 %.2f, lrtfs %.2f, sbl %.2f, l1 %.2f\n", ratio,
                o1, o2, lr, sb, l1);
    std::fflush(stdout);
  }

  auto mean = [&](const char* key) {
    const auto& v = snr[key];
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
  };
  const double m_o1 = mean("o1"), m_o2 = mean("o2"), m_lr = mean("lrtfs"), m_sb = mean("sbl");
  const double gap = lrtfs_at_top - l1_at_top;
  const double runtime = seconds_since(start);
  const bool pass = m_o1 >= m_o2 && m_o2 >= m_lr && m_lr >= m_sb && gap >= 3.0 &&
                    runtime < 1200.0;
  report(9, "CS recovery ordering oracle1 >= oracle2 >= lrtfs >= sbl, lrtfs - l1 >= 3 dB", pass,
         fmt("means %.2f / %.2f / %.2f / %.2f dB, gap at 1/10 %.2f dB, %.0f s", m_o1, m_o2, m_lr,
             m_sb, gap, runtime));
}

// ---------------------------------------------------------------------------
// 10. Robustness of CS recovery to the rank parameter.
void criterion_10(const CSBench& bench) {
  const auto start = Clock::now();
  const Index t = bench.x.size();
  const Index s = t / 20;
  MeasurementOperator a = MeasurementOperator::gaussian(s, t, 1234);
  const VectorXd b = sense(a, bench.x, 0.0);

  double lo = 1e300, hi = -1e300;
  for (Index k : {5, 8, 10, 15, 20, 30}) {
    CSConfig cfg = bench.cfg;
    cfg.base.k = k;
    const double snr = best_snapshot_snr(
        bench.x, [&](CsSnapshotFn f) { cs_lrtfs(b, a, bench.dict, cfg, f); });
    lo = std::min(lo, snr);
    hi = std::max(hi, snr);
  }
  const double spread = hi - lo;
  const bool pass = spread <= 1.5;
  report(10, "recovery SNR is stable across K in {5..30}", pass,
         fmt("spread %.2f dB (%.2f..%.2f), %.0f s", spread, lo, hi, seconds_since(start)));
}

// ---------------------------------------------------------------------------
// 11. Manifest replay is bit-identical.
void criterion_11(const char* cli_path) {
  namespace fs = std::filesystem;
  const auto start = Clock::now();
  const fs::path dir1 = fs::temp_directory_path() / "lrtfs_accept_rep1";
  const fs::path dir2 = fs::temp_directory_path() / "lrtfs_accept_rep2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);

  const std::string run1 = std::string(cli_path) +
                           " decompose --synthetic fournotes --duration 1.4 --sr 8000 --k 3"
                           " --win 128 --lambda-grid 1e-2:1e-4:4 --seed 11 --out " +
                           dir1.string() + " >/dev/null 2>&1";
  bool ok = std::system(run1.c_str()) == 0;
  const std::string run2 = std::string(cli_path) + " replay " +
                           (dir1 / "manifest.json").string() + " --out " + dir2.string() +
                           " >/dev/null 2>&1";
  ok = ok && std::system(run2.c_str()) == 0;

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  bool identical = ok;
  int compared = 0;
  if (ok) {
    for (const char* f : {"alpha.bin", "alpha.json", "nmf.w.bin", "nmf.h.bin",
                          "reconstruction.wav", "trace.csv", "snr_vs_lambda.csv",
                          "analysis_power_db.csv", "alpha_power_db.csv"}) {
      const std::string a = slurp(dir1 / f), b = slurp(dir2 / f);
      identical = identical && !a.empty() && a == b;
      ++compared;
    }
  }
  report(11, "replaying a manifest reproduces outputs bit-identically", identical,
         fmt("%d artifacts compared, %.1f s", compared, seconds_since(start)));
}

}  // namespace

int main(int argc, char** argv) {
  const char* cli_path = argc > 1 ? argv[1] : LRTFS_CLI_PATH;
  const auto start = Clock::now();

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criteria_5_6();
  criterion_7();
  criterion_8();

  CSBench cs_bench = make_cs_bench(16384);
  criterion_9(cs_bench);
  criterion_10(cs_bench);
  criterion_11(cli_path);

  std::printf("%s: %d criterion(s) failed, total %.0f s\n", failures == 0 ? "OK" : "FAILED",
              failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
