#include "gcm_engine.hpp"

#include <cmath>
#include <stdexcept>

namespace lrtfs::detail {

namespace {

double rel_change(const MatrixXcd& next, const MatrixXcd& prev) {
  const double base = prev.norm();
  return base > 0.0 ? (next - prev).norm() / base : (next.norm() > 0.0 ? 1.0 : 0.0);
}

double rel_change(const MatrixXd& next, const MatrixXd& prev) {
  const double base = prev.norm();
  return base > 0.0 ? (next - prev).norm() / base : (next.norm() > 0.0 ? 1.0 : 0.0);
}

// C_JL / C_CS value (constants dropped) used for the trace. For the l1 policy
// this is the thresholding surrogate instead.
double trace_objective(VarPolicy policy, double lambda, double resid_sq,
                       const CoefficientGrid& alpha, const MatrixXd& v) {
  if (policy == VarPolicy::l1) {
    return 0.5 * resid_sq + 2.0 * lambda * alpha.cwiseAbs().sum();
  }
  const ArrayXXd s = alpha.cwiseAbs2().array().max(kEpsNmf);
  const ArrayXXd ratio = s / v.array();
  return resid_sq / (2.0 * lambda) + (ratio - ratio.log() - 1.0).sum() + s.log().sum();
}

}  // namespace

EngineResult run_tempered(const RealModel& model, const VectorXd& x, Index freq_rows,
                          Index num_frames, const EngineConfig& cfg, CoefficientGrid alpha0,
                          NMFModel init_model, const SnapshotFn& on_lambda) {
  if (cfg.lambdas.empty()) throw std::invalid_argument("engine: empty lambda schedule");
  const double big_l = model.norm_bound_sq();
  const double inv_l = 1.0 / big_l;
  const ArrayXd unit_weight = ArrayXd::Ones(freq_rows * num_frames);

  EngineResult res;
  res.alpha = std::move(alpha0);
  res.model = std::move(init_model);
  bool model_ready = res.model.W.size() > 0;

  double variance_floor_abs = kEpsNmf;
  if (cfg.variance_floor_rel > 0.0 &&
      (cfg.policy == VarPolicy::free_variance || cfg.policy == VarPolicy::low_rank)) {
    const VectorXcd bp = model.adjoint(x);
    variance_floor_abs = std::max(
        cfg.variance_floor_rel * bp.squaredNorm() / static_cast<double>(bp.size()), kEpsNmf);
  }

  MatrixXd v;
  if (cfg.policy == VarPolicy::fixed) {
    if (cfg.fixed_v.rows() != freq_rows || cfg.fixed_v.cols() != num_frames) {
      throw std::invalid_argument("engine: fixed variance grid has wrong shape");
    }
    v = cfg.fixed_v.cwiseMax(kEpsNmf);
  } else {
    v = MatrixXd::Ones(freq_rows, num_frames);
  }

  bool first_pass = cfg.initial_variance.size() > 0;
  if (first_pass) {
    if (cfg.initial_variance.rows() != freq_rows || cfg.initial_variance.cols() != num_frames) {
      throw std::invalid_argument("engine: initial variance grid has wrong shape");
    }
    v = cfg.initial_variance.cwiseMax(kEpsNmf);
  }
  int global_outer = 0;

  for (double lambda_nominal : cfg.lambdas) {
    const double lambda = lambda_nominal * cfg.lambda_scale;
    const int outer_budget = cfg.policy == VarPolicy::l1 ? 1 : cfg.max_outer;
    for (int outer = 0; outer < outer_budget; ++outer) {
      const CoefficientGrid alpha_prev = res.alpha;
      const MatrixXd w_prev = res.model.W;
      const MatrixXd h_prev = res.model.H;

      // variance block (skipped on a cold start's first pass, which runs on
      // the caller-provided variance)
      if (!first_pass) {
        switch (cfg.policy) {
          case VarPolicy::low_rank: {
            const MatrixXd s = res.alpha.cwiseAbs2().cwiseMax(kEpsNmf);
            if (!model_ready) {
              res.model = init_svd(res.alpha, cfg.k);
              model_ready = true;
            }
            NmfRunResult nr = nmf_run(s, res.model, cfg.tol_nmf, cfg.max_inner);
            res.model = std::move(nr.model);
            res.counters.nmf_inner += nr.iterations;
            v = res.model.variance().cwiseMax(variance_floor_abs);
            break;
          }
          case VarPolicy::free_variance:
            v = res.alpha.cwiseAbs2().cwiseMax(variance_floor_abs);
            break;
          case VarPolicy::fixed:
          case VarPolicy::l1:
            break;
        }
      }

      // shrinkage block
      IsaResult isa;
      if (cfg.policy == VarPolicy::l1) {
        const SoftThresholdProx prox{lambda * inv_l, 2.0 * lambda};
        isa = accelerated_isa(model, x, prox, inv_l, 0.5, vectorize(res.alpha), cfg.tol_isa,
                              cfg.max_inner, cfg.accel);
      } else {
        const ArrayXd v_vec = Eigen::Map<const ArrayXd>(v.data(), v.size());
        const VarianceProx prox = VarianceProx::make(v_vec, unit_weight, lambda, inv_l);
        isa = accelerated_isa(model, x, prox, inv_l, 0.5 / lambda, vectorize(res.alpha),
                              cfg.tol_isa, cfg.max_inner, cfg.accel);
      }
      res.alpha = matrixize(isa.alpha, freq_rows, num_frames);
      res.counters.isa_inner += isa.iterations;
      first_pass = false;

      const VectorXd resid = x - model.forward(vectorize(res.alpha));
      res.trace.push_back(TraceRow{++global_outer, lambda_nominal,
                                   trace_objective(cfg.policy, lambda, resid.squaredNorm(),
                                                   res.alpha, v),
                                   resid.norm()});
      res.counters.outer = global_outer;

      double rel = rel_change(res.alpha, alpha_prev);
      if (cfg.policy == VarPolicy::low_rank && w_prev.size() == res.model.W.size()) {
        rel = std::max({rel, rel_change(res.model.W, w_prev), rel_change(res.model.H, h_prev)});
      }
      if (rel < cfg.tol_outer) break;
      if (outer == outer_budget - 1 && cfg.policy != VarPolicy::l1) res.converged = false;
    }

    if (on_lambda) on_lambda(EngineSnapshot{lambda_nominal, res.alpha, res.model, v});
  }

  res.variance = std::move(v);
  return res;
}

}  // namespace lrtfs::detail
