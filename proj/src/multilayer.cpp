#include "lrtfs/multilayer.hpp"

#include <cmath>
#include <stdexcept>

#include "lrtfs/isa.hpp"
#include "lrtfs/isnmf.hpp"

namespace lrtfs {

namespace {

double gcm_terms(const CoefficientGrid& alpha, const MatrixXd& v) {
  const ArrayXXd s = alpha.cwiseAbs2().array().max(kEpsNmf);
  const ArrayXXd ratio = s / v.array();
  return (ratio - ratio.log() - 1.0).sum() + s.log().sum();
}

void check_layers(const LayerSpec& spec_a, const LayerSpec& spec_b) {
  if (spec_a.prior != LayerPrior::low_rank || spec_b.prior != LayerPrior::sparse) {
    throw std::invalid_argument("solve_slr: layer a must be low_rank, layer b sparse");
  }
  if (spec_a.dict.signal_len != spec_b.dict.signal_len) {
    throw std::invalid_argument("solve_slr: layers must share the signal length");
  }
  if (spec_a.dict.mode != GaborMode::real_half || spec_b.dict.mode != GaborMode::real_half) {
    throw std::invalid_argument("solve_slr: real_half dictionaries required");
  }
}

/// Stacked two-dictionary model for the shared shrinkage core.
struct JointGaborModel {
  using DataVec = VectorXd;
  const GaborDictionary* da;
  const GaborDictionary* db;

  Index size_a() const { return da->num_coeffs(); }
  Index size_b() const { return db->num_coeffs(); }

  VectorXd forward(const VectorXcd& z) const {
    return synthesis_real(*da, matrixize(z.head(size_a()), da->freq_rows(), da->num_frames)) +
           synthesis_real(*db, matrixize(z.tail(size_b()), db->freq_rows(), db->num_frames));
  }
  VectorXcd adjoint(const VectorXd& r) const {
    VectorXcd out(size_a() + size_b());
    out.head(size_a()) = vectorize(analysis(*da, r));
    out.tail(size_b()) = vectorize(analysis(*db, r));
    return out;
  }
  double norm_bound_sq() const {
    return spectral_norm_sq(*da) + spectral_norm_sq(*db);
  }
};

}  // namespace

void SLRConfig::validate() const {
  base.validate();
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("config: mu must lie in [0, 1]");
}

double objective_cslr(const VectorXd& x, const CoefficientGrid& alpha_a,
                      const CoefficientGrid& alpha_b, const NMFModel& model, const MatrixXd& v_b,
                      double lambda, double mu, const GaborDictionary& dict_a,
                      const GaborDictionary& dict_b) {
  if (lambda <= 0.0) throw std::invalid_argument("objective_cslr: lambda must be positive");
  const VectorXd resid =
      x - synthesis_real(dict_a, alpha_a) - synthesis_real(dict_b, alpha_b);
  return resid.squaredNorm() / (2.0 * lambda) + mu * gcm_terms(alpha_a, model.variance()) +
         (1.0 - mu) * gcm_terms(alpha_b, v_b.cwiseMax(kEpsNmf));
}

LayerGrids joint_isa_step(const VectorXd& x, const LayerGrids& alphas, const MatrixXd& v_a,
                          const MatrixXd& v_b, double lambda, double mu,
                          const GaborDictionary& dict_a, const GaborDictionary& dict_b,
                          double big_l) {
  if (lambda <= 0.0) throw std::invalid_argument("joint_isa_step: lambda must be positive");
  if ((v_a.array() <= 0.0).any() || (v_b.array() <= 0.0).any()) {
    throw std::invalid_argument("joint_isa_step: variances must be positive");
  }
  if (big_l <= 0.0) big_l = spectral_norm_sq(dict_a) + spectral_norm_sq(dict_b);

  const VectorXd resid =
      x - synthesis_real(dict_a, alphas.a) - synthesis_real(dict_b, alphas.b);

  LayerGrids out;
  out.a = alphas.a + analysis(dict_a, resid) / big_l;
  out.b = alphas.b + analysis(dict_b, resid) / big_l;
  out.a.array() *= (v_a.array() / (v_a.array() + mu * lambda / big_l)).cast<Complex>();
  out.b.array() *= (v_b.array() / (v_b.array() + (1.0 - mu) * lambda / big_l)).cast<Complex>();
  return out;
}

SLRSolution solve_slr(const VectorXd& x, const LayerSpec& spec_a, const LayerSpec& spec_b,
                      const SLRConfig& cfg) {
  cfg.validate();
  check_layers(spec_a, spec_b);
  const GaborDictionary& da = spec_a.dict;
  const GaborDictionary& db = spec_b.dict;
  if (x.size() != da.signal_len) throw std::invalid_argument("solve_slr: signal length mismatch");

  const JointGaborModel joint{&da, &db};
  const double big_l = joint.norm_bound_sq();
  const double inv_l = 1.0 / big_l;
  const Index ma = joint.size_a();
  const Index mb = joint.size_b();

  ArrayXd weight(ma + mb);
  weight.head(ma).setConstant(cfg.mu);
  weight.tail(mb).setConstant(1.0 - cfg.mu);

  SLRSolution sol;
  CoefficientGrid alpha_a = analysis(da, x);
  CoefficientGrid alpha_b = analysis(db, x);
  const Index k = std::min<Index>(spec_a.k, std::min<Index>(da.freq_rows(), da.num_frames));
  NMFModel model = init_svd(alpha_a, k);
  MatrixXd v_b = alpha_b.cwiseAbs2().cwiseMax(kEpsNmf);

  int global_outer = 0;
  for (double lambda : cfg.base.lambdas()) {
    for (int outer = 0; outer < cfg.base.max_outer; ++outer) {
      const CoefficientGrid pa = alpha_a, pb = alpha_b;
      const MatrixXd pw = model.W, ph = model.H;

      // low-rank variance block
      NmfRunResult nr = nmf_run(alpha_a.cwiseAbs2().cwiseMax(kEpsNmf), model,
                                cfg.base.tol_inner_nmf, cfg.base.max_inner);
      model = std::move(nr.model);
      sol.iterations.nmf_inner += nr.iterations;
      const MatrixXd v_a = model.variance();

      // free variance block
      v_b = alpha_b.cwiseAbs2().cwiseMax(kEpsNmf);

      // joint shrinkage block
      ArrayXd v_stacked(ma + mb);
      v_stacked.head(ma) = Eigen::Map<const ArrayXd>(v_a.data(), ma);
      v_stacked.tail(mb) = Eigen::Map<const ArrayXd>(v_b.data(), mb);
      const VarianceProx prox = VarianceProx::make(v_stacked, weight, lambda, inv_l);

      VectorXcd z(ma + mb);
      z.head(ma) = vectorize(alpha_a);
      z.tail(mb) = vectorize(alpha_b);
      IsaResult isa = accelerated_isa(joint, x, prox, inv_l, 0.5 / lambda, std::move(z),
                                      cfg.base.tol_inner_isa, cfg.base.max_inner, cfg.base.accel);
      sol.iterations.isa_inner += isa.iterations;
      alpha_a = matrixize(isa.alpha.head(ma), da.freq_rows(), da.num_frames);
      alpha_b = matrixize(isa.alpha.tail(mb), db.freq_rows(), db.num_frames);

      const double obj = objective_cslr(x, alpha_a, alpha_b, model, v_b, lambda, cfg.mu, da, db);
      const VectorXd resid =
          x - synthesis_real(da, alpha_a) - synthesis_real(db, alpha_b);
      sol.trace.push_back(TraceRow{++global_outer, lambda, obj, resid.norm()});
      sol.iterations.outer = global_outer;

      const auto rel = [](const auto& next, const auto& prev) {
        const double base = prev.norm();
        return base > 0.0 ? (next - prev).norm() / base : (next.norm() > 0.0 ? 1.0 : 0.0);
      };
      // alpha change is measured on the stacked coefficient vector; a
      // floored-out layer must not stall the outer test
      const double alpha_change =
          std::sqrt((alpha_a - pa).squaredNorm() + (alpha_b - pb).squaredNorm()) /
          std::max(std::sqrt(pa.squaredNorm() + pb.squaredNorm()), 1e-300);
      const double change = std::max({alpha_change, rel(model.W, pw), rel(model.H, ph)});
      if (change < cfg.base.tol_outer) break;
      if (outer == cfg.base.max_outer - 1) sol.converged = false;
    }
  }

  sol.layer_a.alpha = std::move(alpha_a);
  sol.layer_a.model = std::move(model);
  sol.layer_a.lambda_used = cfg.base.lambdas().back();
  sol.layer_a.reconstruction = synthesis_real(da, sol.layer_a.alpha);
  sol.layer_a.converged = sol.converged;
  sol.alpha_b = std::move(alpha_b);
  sol.v_b = std::move(v_b);
  sol.reconstruction_b = synthesis_real(db, sol.alpha_b);
  sol.residual = x - sol.layer_a.reconstruction - sol.reconstruction_b;
  sol.layer_a.lambda_mle = sol.residual.squaredNorm() / static_cast<double>(x.size());
  return sol;
}

}  // namespace lrtfs
