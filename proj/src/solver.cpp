#include "lrtfs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gcm_engine.hpp"
#include "lrtfs/isa.hpp"

namespace lrtfs {

std::vector<double> log_spaced(double from, double to, int count) {
  if (count < 1 || from <= 0.0 || to <= 0.0) {
    throw std::invalid_argument("log_spaced: count >= 1 and positive endpoints required");
  }
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = to;
    return out;
  }
  const double a = std::log10(from);
  const double b = std::log10(to);
  for (int i = 0; i < count; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * i / (count - 1));
  }
  out.back() = to;
  return out;
}

std::vector<double> SolverConfig::lambdas() const {
  return lambda_schedule.empty() ? std::vector<double>{lambda_target} : lambda_schedule;
}

void SolverConfig::validate() const {
  if (k < 1) throw std::invalid_argument("config: rank must be positive");
  if (lambda_target <= 0.0) throw std::invalid_argument("config: lambda_target must be positive");
  if (tol_outer <= 0.0 || tol_inner_isa <= 0.0 || tol_inner_nmf <= 0.0) {
    throw std::invalid_argument("config: tolerances must be positive");
  }
  if (max_outer < 1 || max_inner < 1) throw std::invalid_argument("config: iteration caps must be >= 1");
  const auto sched = lambdas();
  for (size_t i = 0; i < sched.size(); ++i) {
    if (sched[i] <= 0.0) throw std::invalid_argument("config: lambda schedule must be positive");
    if (i > 0 && sched[i] >= sched[i - 1]) {
      throw std::invalid_argument("config: lambda schedule must be strictly decreasing");
    }
  }
  if (sched.back() != lambda_target) {
    throw std::invalid_argument("config: lambda schedule must end at lambda_target");
  }
}

SolverConfig SolverConfig::denoising_default() {
  SolverConfig cfg;
  cfg.k = 10;
  cfg.lambda_target = 1e-6;
  cfg.lambda_schedule = log_spaced(1e-1, 1e-6, 30);
  return cfg;
}

std::vector<double> LRTFSSolution::objective_trace() const {
  std::vector<double> out;
  out.reserve(trace.size());
  for (const TraceRow& row : trace) out.push_back(row.objective);
  return out;
}

namespace {

double gcm_penalty(const CoefficientGrid& alpha, const MatrixXd& v) {
  const ArrayXXd s = alpha.cwiseAbs2().array().max(kEpsNmf);
  const ArrayXXd ratio = s / v.array();
  return (ratio - ratio.log() - 1.0).sum() + s.log().sum();
}

void check_objective_args(const CoefficientGrid& alpha, const NMFModel& model, double lambda,
                          const GaborDictionary& dict) {
  if (lambda <= 0.0) throw std::invalid_argument("objective_cjl: lambda must be positive");
  if (alpha.rows() != dict.freq_rows() || alpha.cols() != dict.num_frames) {
    throw std::invalid_argument("objective_cjl: grid does not match dictionary");
  }
  if (model.W.rows() != alpha.rows() || model.H.cols() != alpha.cols()) {
    throw std::invalid_argument("objective_cjl: model does not match grid");
  }
}

void check_isa_args(const MatrixXd& v, double lambda, const GaborDictionary& dict,
                    const CoefficientGrid& alpha0) {
  if (lambda <= 0.0) throw std::invalid_argument("isa_solve: lambda must be positive");
  if ((v.array() <= 0.0).any()) throw std::invalid_argument("isa_solve: variance must be positive");
  if (v.rows() != dict.freq_rows() || v.cols() != dict.num_frames ||
      alpha0.rows() != v.rows() || alpha0.cols() != v.cols()) {
    throw std::invalid_argument("isa_solve: shapes do not match dictionary");
  }
}

template <class Model>
CoefficientGrid isa_solve_impl(const Model& model, const typename Model::DataVec& x,
                               const MatrixXd& v, double lambda, const CoefficientGrid& alpha0,
                               const SolverConfig& cfg, double data_weight) {
  const double inv_l = 1.0 / model.norm_bound_sq();
  const ArrayXd v_vec = Eigen::Map<const ArrayXd>(v.data(), v.size());
  const VarianceProx prox = VarianceProx::make(v_vec, ArrayXd::Ones(v.size()), lambda, inv_l);
  IsaResult res = accelerated_isa(model, x, prox, inv_l, data_weight, vectorize(alpha0),
                                  cfg.tol_inner_isa, cfg.max_inner, cfg.accel);
  return matrixize(res.alpha, alpha0.rows(), alpha0.cols());
}

}  // namespace

double objective_cjl(const VectorXcd& x, const CoefficientGrid& alpha, const NMFModel& model,
                     double lambda, const GaborDictionary& dict) {
  check_objective_args(alpha, model, lambda, dict);
  const double resid_sq = (x - synthesis_complex(dict, alpha)).squaredNorm();
  return resid_sq / lambda + gcm_penalty(alpha, model.variance());
}

double objective_cjl(const VectorXd& x, const CoefficientGrid& alpha, const NMFModel& model,
                     double lambda, const GaborDictionary& dict) {
  check_objective_args(alpha, model, lambda, dict);
  const double resid_sq = (x - synthesis_real(dict, alpha)).squaredNorm();
  return resid_sq / (2.0 * lambda) + gcm_penalty(alpha, model.variance());
}

CoefficientGrid isa_solve(const VectorXcd& x, const GaborDictionary& dict, const MatrixXd& v,
                          double lambda, const CoefficientGrid& alpha0, const SolverConfig& cfg) {
  check_isa_args(v, lambda, dict, alpha0);
  return isa_solve_impl(GaborComplexModel{&dict}, x, v, lambda, alpha0, cfg, 1.0 / lambda);
}

CoefficientGrid isa_solve(const VectorXd& x, const GaborDictionary& dict, const MatrixXd& v,
                          double lambda, const CoefficientGrid& alpha0, const SolverConfig& cfg) {
  check_isa_args(v, lambda, dict, alpha0);
  return isa_solve_impl(GaborRealModel{&dict}, x, v, lambda, alpha0, cfg, 0.5 / lambda);
}

LRTFSSolution solve(const VectorXd& x, const GaborDictionary& dict, const SolverConfig& cfg,
                    const LambdaCallback& on_lambda) {
  cfg.validate();
  if (x.size() != dict.signal_len) throw std::invalid_argument("solve: signal length mismatch");
  if (dict.mode != GaborMode::real_half) {
    throw std::invalid_argument("solve: real_half dictionary required");
  }

  detail::GaborModelRef model(dict);
  detail::EngineConfig ecfg;
  ecfg.lambdas = cfg.lambdas();
  ecfg.tol_outer = cfg.tol_outer;
  ecfg.tol_isa = cfg.tol_inner_isa;
  ecfg.tol_nmf = cfg.tol_inner_nmf;
  ecfg.max_outer = cfg.max_outer;
  ecfg.max_inner = cfg.max_inner;
  ecfg.accel = cfg.accel;
  ecfg.k = std::min<Index>(cfg.k, std::min<Index>(dict.freq_rows(), dict.num_frames));
  ecfg.policy = detail::VarPolicy::low_rank;
  ecfg.variance_floor_rel = cfg.variance_floor_rel;

  const CoefficientGrid alpha0 = analysis(dict, x);
  NMFModel init = init_svd(alpha0, ecfg.k);

  detail::SnapshotFn on_snap;
  if (on_lambda) {
    on_snap = [&](const detail::EngineSnapshot& snap) {
      LRTFSSolution sol;
      sol.alpha = snap.alpha;
      sol.model = snap.model;
      sol.lambda_used = snap.lambda;
      sol.reconstruction = synthesis_real(dict, snap.alpha);
      sol.lambda_mle =
          (x - sol.reconstruction).squaredNorm() / static_cast<double>(x.size());
      on_lambda(sol);
    };
  }

  detail::EngineResult er = detail::run_tempered(model, x, dict.freq_rows(), dict.num_frames,
                                                 ecfg, alpha0, std::move(init), on_snap);

  LRTFSSolution sol;
  sol.alpha = std::move(er.alpha);
  sol.model = std::move(er.model);
  sol.lambda_used = ecfg.lambdas.back();
  sol.trace = std::move(er.trace);
  sol.reconstruction = synthesis_real(dict, sol.alpha);
  sol.iterations = er.counters;
  sol.converged = er.converged;
  sol.lambda_mle = (x - sol.reconstruction).squaredNorm() / static_cast<double>(x.size());
  return sol;
}

std::vector<VectorXd> reconstruct_components(const LRTFSSolution& solution,
                                             const GaborDictionary& dict) {
  const auto masks = wiener_masks(solution.model);
  std::vector<VectorXd> components;
  components.reserve(masks.size());
  for (const auto& mask : masks) {
    const CoefficientGrid masked = solution.alpha.array() * mask.cast<Complex>();
    components.push_back(synthesis_real(dict, masked));
  }
  std::vector<size_t> order(components.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return components[a].squaredNorm() > components[b].squaredNorm();
  });
  std::vector<VectorXd> sorted;
  sorted.reserve(components.size());
  for (size_t idx : order) sorted.push_back(std::move(components[idx]));
  return sorted;
}

}  // namespace lrtfs
