#include "lrtfs/compressive.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "gcm_engine.hpp"
#include "lrtfs/linops.hpp"
#include "lrtfs/rng.hpp"
#include "lrtfs/signal.hpp"
#include "lrtfs/wav.hpp"

namespace lrtfs {

namespace {

constexpr Index kRowBlock = 128;  // matrix-free regeneration granularity

// Every row carries its own derived seed so the matrix-free form can
// regenerate any block in O(block size).
std::uint64_t row_seed(std::uint64_t seed, Index row) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(row) + 1);
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// N(0, 1/sqrt(S)) block of rows [row0, row0 + rows).
MatrixXd gaussian_rows(std::uint64_t seed, Index s_total, Index t, Index row0, Index rows) {
  MatrixXd block(rows, t);
  const double scale = 1.0 / std::sqrt(static_cast<double>(s_total));
  for (Index r = 0; r < rows; ++r) {
    Rng rng(row_seed(seed, row0 + r));
    for (Index c = 0; c < t; ++c) block(r, c) = rng.normal() * scale;
  }
  return block;
}

double operator_norm_sq(const MeasurementOperator& a) {
  auto gram = [&a](const VectorXd& v) { return VectorXd(a.apply_adjoint(a.apply(v))); };
  return 1.01 * power_lambda_max<VectorXd>(gram, a.cols, 1e-5, 400);
}

struct SensedModel final : detail::RealModel {
  const MeasurementOperator* a;
  GaborRealModel gabor;
  double l;

  SensedModel(const MeasurementOperator& op, const GaborDictionary& dict)
      : a(&op), gabor{&dict}, l(op.norm_sq * spectral_norm_sq(dict)) {}

  VectorXd forward(const VectorXcd& alpha) const override { return a->apply(gabor.forward(alpha)); }
  VectorXcd adjoint(const VectorXd& r) const override { return gabor.adjoint(a->apply_adjoint(r)); }
  double norm_bound_sq() const override { return l; }
};

void check_cs_args(const VectorXd& b, const MeasurementOperator& a, const GaborDictionary& dict) {
  if (b.size() != a.rows) throw std::invalid_argument("cs: measurement length mismatch");
  if (a.cols != dict.signal_len) throw std::invalid_argument("cs: operator does not match dictionary");
  if (dict.mode != GaborMode::real_half) throw std::invalid_argument("cs: real_half dictionary required");
}

detail::EngineConfig engine_config(const CSConfig& cfg, const GaborDictionary& dict) {
  detail::EngineConfig ecfg;
  ecfg.lambdas = cfg.lambda_schedule;
  ecfg.tol_outer = cfg.base.tol_outer;
  ecfg.tol_isa = cfg.base.tol_inner_isa;
  ecfg.tol_nmf = cfg.base.tol_inner_nmf;
  ecfg.max_outer = cfg.base.max_outer;
  ecfg.max_inner = cfg.base.max_inner;
  ecfg.accel = cfg.base.accel;
  ecfg.k = std::min<Index>(cfg.base.k, std::min<Index>(dict.freq_rows(), dict.num_frames));
  return ecfg;
}

CSResult run_cs(const detail::RealModel& model, const VectorXd& b, const GaborDictionary& dict,
                detail::EngineConfig ecfg, CSMethod method, const CsSnapshotFn& on_lambda,
                NMFModel init_model = NMFModel{}) {
  detail::SnapshotFn on_snap;
  if (on_lambda) {
    on_snap = [&](const detail::EngineSnapshot& snap) {
      const VectorXd x_hat = synthesis_real(dict, snap.alpha);
      on_lambda(CsSnapshot{snap.lambda, snap.alpha, x_hat});
    };
  }
  CoefficientGrid alpha0 = CoefficientGrid::Zero(dict.freq_rows(), dict.num_frames);
  detail::EngineResult er =
      detail::run_tempered(model, b, dict.freq_rows(), dict.num_frames, ecfg, std::move(alpha0),
                           std::move(init_model), on_snap);
  CSResult res;
  res.alpha_hat = std::move(er.alpha);
  res.x_hat = synthesis_real(dict, res.alpha_hat);
  res.method = method;
  res.lambda_used = ecfg.lambdas.back();
  res.trace = std::move(er.trace);
  res.converged = er.converged;
  return res;
}

}  // namespace

MeasurementOperator MeasurementOperator::gaussian(Index s, Index t, std::uint64_t seed,
                                                  bool dense) {
  if (s < 1 || t < 1) throw std::invalid_argument("gaussian operator: positive sizes required");
  MeasurementOperator op;
  op.rows = s;
  op.cols = t;
  op.seed = seed;
  if (dense) op.matrix = gaussian_rows(seed, s, t, 0, s);
  op.norm_sq = operator_norm_sq(op);
  return op;
}

MeasurementOperator MeasurementOperator::from_matrix(MatrixXd a) {
  if (a.size() == 0) throw std::invalid_argument("from_matrix: empty operator");
  MeasurementOperator op;
  op.rows = a.rows();
  op.cols = a.cols();
  op.matrix = std::move(a);
  op.norm_sq = operator_norm_sq(op);
  return op;
}

VectorXd MeasurementOperator::apply(const VectorXd& x) const {
  if (x.size() != cols) throw std::invalid_argument("operator apply: length mismatch");
  if (!matrix_free()) return matrix * x;
  VectorXd y(rows);
  for (Index r0 = 0; r0 < rows; r0 += kRowBlock) {
    const Index n = std::min(kRowBlock, rows - r0);
    y.segment(r0, n) = gaussian_rows(seed, rows, cols, r0, n) * x;
  }
  return y;
}

VectorXd MeasurementOperator::apply_adjoint(const VectorXd& y) const {
  if (y.size() != rows) throw std::invalid_argument("operator adjoint: length mismatch");
  if (!matrix_free()) return matrix.transpose() * y;
  VectorXd x = VectorXd::Zero(cols);
  for (Index r0 = 0; r0 < rows; r0 += kRowBlock) {
    const Index n = std::min(kRowBlock, rows - r0);
    x.noalias() += gaussian_rows(seed, rows, cols, r0, n).transpose() * y.segment(r0, n);
  }
  return x;
}

VectorXd sense(const MeasurementOperator& a, const VectorXd& x, double noise_var,
               std::uint64_t noise_seed) {
  VectorXd b = a.apply(x);
  if (noise_var > 0.0) {
    Rng rng(noise_seed == 0 ? a.seed + 1 : noise_seed);
    b += std::sqrt(noise_var) * rng.normal_vector(b.size());
  }
  return b;
}

std::string method_name(CSMethod m) {
  switch (m) {
    case CSMethod::lrtfs: return "lrtfs";
    case CSMethod::sbl: return "sbl";
    case CSMethod::l1: return "l1";
    case CSMethod::oracle_variance: return "oracle_variance";
    case CSMethod::oracle_nmf: return "oracle_nmf";
  }
  return "unknown";
}

CSMethod method_from_name(const std::string& name) {
  if (name == "lrtfs") return CSMethod::lrtfs;
  if (name == "sbl") return CSMethod::sbl;
  if (name == "l1") return CSMethod::l1;
  if (name == "oracle_variance") return CSMethod::oracle_variance;
  if (name == "oracle_nmf") return CSMethod::oracle_nmf;
  throw std::invalid_argument("unknown CS method: " + name);
}

CSResult cs_lrtfs(const VectorXd& b, const MeasurementOperator& a, const GaborDictionary& dict,
                  const CSConfig& cfg, const CsSnapshotFn& on_lambda) {
  check_cs_args(b, a, dict);
  SensedModel model(a, dict);
  detail::EngineConfig ecfg = engine_config(cfg, dict);
  ecfg.policy = detail::VarPolicy::low_rank;
  ecfg.lambda_scale = 1.0 / static_cast<double>(a.rows);
  ecfg.variance_floor_rel = cfg.variance_floor_rel;
  // the factors start from the SVD of the analysis proxy M^H b; the first
  // shrinkage pass runs on that variance before the first IS-NMF refit
  const CoefficientGrid proxy =
      matrixize(model.adjoint(b), dict.freq_rows(), dict.num_frames);
  NMFModel init = init_svd(proxy, ecfg.k);
  ecfg.initial_variance = init.variance();
  return run_cs(model, b, dict, std::move(ecfg), CSMethod::lrtfs, on_lambda, std::move(init));
}

CSResult cs_l1(const VectorXd& b, const MeasurementOperator& a, const GaborDictionary& dict,
               double lambda_l1, const CSConfig& cfg, const CsSnapshotFn& on_lambda) {
  check_cs_args(b, a, dict);
  SensedModel model(a, dict);
  detail::EngineConfig ecfg = engine_config(cfg, dict);
  ecfg.policy = detail::VarPolicy::l1;

  // anneal the threshold from just below the back-projection peak
  const double tau_max = 0.99 * model.adjoint(b).cwiseAbs().maxCoeff();
  const double tau_min = lambda_l1 > 0.0 ? lambda_l1 : 1e-4 * tau_max;
  if (tau_min >= tau_max) {
    ecfg.lambdas = {tau_min};
  } else {
    ecfg.lambdas = log_spaced(tau_max, tau_min, static_cast<int>(cfg.lambda_schedule.size()));
  }
  return run_cs(model, b, dict, std::move(ecfg), CSMethod::l1, on_lambda);
}

CSResult cs_sbl(const VectorXd& b, const MeasurementOperator& a, const GaborDictionary& dict,
                const CSConfig& cfg, const CsSnapshotFn& on_lambda) {
  check_cs_args(b, a, dict);
  SensedModel model(a, dict);
  detail::EngineConfig ecfg = engine_config(cfg, dict);
  ecfg.policy = detail::VarPolicy::free_variance;
  ecfg.lambda_scale = 1.0 / static_cast<double>(a.rows);
  ecfg.variance_floor_rel = cfg.variance_floor_rel;
  // K-free analogue of the SVD start: the proxy's squared magnitudes
  const CoefficientGrid proxy =
      matrixize(model.adjoint(b), dict.freq_rows(), dict.num_frames);
  ecfg.initial_variance = proxy.cwiseAbs2();
  return run_cs(model, b, dict, std::move(ecfg), CSMethod::sbl, on_lambda);
}

CSResult cs_oracle(const VectorXd& b, const MeasurementOperator& a, const GaborDictionary& dict,
                   const MatrixXd& true_variance, const CSConfig& cfg,
                   const CsSnapshotFn& on_lambda) {
  check_cs_args(b, a, dict);
  SensedModel model(a, dict);
  detail::EngineConfig ecfg = engine_config(cfg, dict);
  ecfg.policy = detail::VarPolicy::fixed;
  ecfg.lambda_scale = 1.0 / static_cast<double>(a.rows);
  ecfg.fixed_v = true_variance;
  CSResult res = run_cs(model, b, dict, std::move(ecfg), CSMethod::oracle_variance, on_lambda);
  return res;
}

CSResult cs_oracle(const VectorXd& b, const MeasurementOperator& a, const GaborDictionary& dict,
                   const NMFModel& true_model, const CSConfig& cfg,
                   const CsSnapshotFn& on_lambda) {
  check_cs_args(b, a, dict);
  SensedModel model(a, dict);
  detail::EngineConfig ecfg = engine_config(cfg, dict);
  ecfg.policy = detail::VarPolicy::fixed;
  ecfg.lambda_scale = 1.0 / static_cast<double>(a.rows);
  ecfg.fixed_v = true_model.variance();
  CSResult res = run_cs(model, b, dict, std::move(ecfg), CSMethod::oracle_nmf, on_lambda);
  return res;
}

std::vector<SweepRow> sweep(const VectorXd& x_true, const GaborDictionary& dict,
                            const SweepConfig& cfg) {
  std::vector<double> ratios = cfg.ratios;
  std::sort(ratios.begin(), ratios.end());
  for (double r : ratios) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("sweep: ratios must lie in (0, 1]");
  }

  // oracle inputs derive from the uncompressed ground truth
  MatrixXd true_variance;
  NMFModel true_model;
  const bool wants_oracle =
      std::any_of(cfg.methods.begin(), cfg.methods.end(), [](CSMethod m) {
        return m == CSMethod::oracle_variance || m == CSMethod::oracle_nmf;
      });
  if (wants_oracle) {
    const CoefficientGrid y = analysis(dict, x_true);
    true_variance = y.cwiseAbs2().cwiseMax(kEpsNmf);
    const Index k = std::min<Index>(cfg.cs.base.k,
                                    std::min<Index>(dict.freq_rows(), dict.num_frames));
    true_model = nmf_run(true_variance, init_svd(y, k), cfg.cs.base.tol_inner_nmf, 200).model;
  }

  struct Task {
    double ratio;
    CSMethod method;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double ratio : ratios)
    for (CSMethod method : cfg.methods)
      for (std::uint64_t seed : cfg.seeds) tasks.push_back({ratio, method, seed});

  std::vector<SweepRow> rows(tasks.size());
  std::atomic<size_t> next{0};

  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      const Task& task = tasks[i];
      SweepRow row;
      row.ratio = task.ratio;
      row.method = task.method;
      row.seed = task.seed;
      const auto start = std::chrono::steady_clock::now();
      try {
        const Index s = std::max<Index>(1, static_cast<Index>(std::lround(
                                               task.ratio * static_cast<double>(x_true.size()))));
        const MeasurementOperator a =
            MeasurementOperator::gaussian(s, x_true.size(), task.seed);
        const VectorXd b = sense(a, x_true, cfg.noise_var);

        double best = -std::numeric_limits<double>::infinity();
        VectorXd best_x;
        auto score = [&](const CsSnapshot& snap) {
          const double snr = output_snr_db(x_true, snap.x_hat);
          if (snr > best) {
            best = snr;
            if (!cfg.artifact_dir.empty()) best_x = snap.x_hat;
          }
        };
        CSResult res;
        switch (task.method) {
          case CSMethod::lrtfs: res = cs_lrtfs(b, a, dict, cfg.cs, score); break;
          case CSMethod::sbl: res = cs_sbl(b, a, dict, cfg.cs, score); break;
          case CSMethod::l1: res = cs_l1(b, a, dict, 0.0, cfg.cs, score); break;
          case CSMethod::oracle_variance:
            res = cs_oracle(b, a, dict, true_variance, cfg.cs, score);
            break;
          case CSMethod::oracle_nmf:
            res = cs_oracle(b, a, dict, true_model, cfg.cs, score);
            break;
        }
        row.snr_db = best;
        row.ok = true;
        if (!cfg.artifact_dir.empty() && best_x.size() > 0) {
          char name[128];
          std::snprintf(name, sizeof(name), "row_%.4f_%s_%llu.wav", task.ratio,
                        method_name(task.method).c_str(),
                        static_cast<unsigned long long>(task.seed));
          write_wav(SignalBuffer{best_x, cfg.artifact_sample_rate, name},
                    cfg.artifact_dir + "/" + name);
        }
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
      row.runtime_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rows[i] = std::move(row);
    }
  };

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "ratio,method,seed,snr_db,runtime_s\n";
  char line[256];
  for (const SweepRow& row : rows) {
    std::snprintf(line, sizeof(line), "%.10g,%s,%llu,%.6f,%.3f\n", row.ratio,
                  method_name(row.method).c_str(),
                  static_cast<unsigned long long>(row.seed),
                  row.ok ? row.snr_db : std::numeric_limits<double>::quiet_NaN(), row.runtime_s);
    out << line;
  }
}

}  // namespace lrtfs
