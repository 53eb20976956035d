#include "lrtfs/isnmf.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace lrtfs {

double is_divergence(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("is_divergence: shape mismatch");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("is_divergence: nonfinite input");
  }
  if ((b.array() <= 0.0).any()) {
    throw std::invalid_argument("is_divergence: second argument must be positive");
  }
  const ArrayXXd ratio = a.array().max(kEpsNmf) / b.array();
  return (a.array() / b.array() - ratio.log() - 1.0).sum();
}

NMFModel mm_update(const MatrixXd& s_in, const NMFModel& model) {
  if (s_in.rows() != model.W.rows() || s_in.cols() != model.H.cols()) {
    throw std::invalid_argument("mm_update: spectrogram shape does not match model");
  }
  const ArrayXXd s = s_in.array().max(kEpsNmf);

  NMFModel out = model;
  ArrayXXd v = (out.W * out.H).array().max(kEpsNmf);
  ArrayXXd sv2 = s / (v * v);
  ArrayXXd vinv = v.inverse();

  out.W = (out.W.array() *
           ((sv2.matrix() * out.H.transpose()).array() /
            (vinv.matrix() * out.H.transpose()).array().max(kEpsNmf)))
              .max(kEpsNmf)
              .matrix();

  v = (out.W * out.H).array().max(kEpsNmf);
  sv2 = s / (v * v);
  vinv = v.inverse();
  out.H = (out.H.array() *
           ((out.W.transpose() * sv2.matrix()).array() /
            (out.W.transpose() * vinv.matrix()).array().max(kEpsNmf)))
              .max(kEpsNmf)
              .matrix();
  return out;
}

NmfRunResult nmf_run(const MatrixXd& s, NMFModel model, double tol, int max_iter) {
  NmfRunResult res;
  for (int it = 0; it < max_iter; ++it) {
    NMFModel next = mm_update(s, model);
    const double dw = (next.W - model.W).norm() / std::max(model.W.norm(), kEpsNmf);
    const double dh = (next.H - model.H).norm() / std::max(model.H.norm(), kEpsNmf);
    model = std::move(next);
    res.iterations = it + 1;
    if (std::max(dw, dh) < tol) {
      res.converged = true;
      break;
    }
  }
  res.model = std::move(model);
  return res;
}

NMFModel init_svd(const CoefficientGrid& y, Index k) {
  const Index f = y.rows();
  const Index n = y.cols();
  if (k < 1 || k > std::min(f, n)) throw std::invalid_argument("init_svd: rank out of range");

  // Truncated SVD through the Gram matrix of the smaller side.
  MatrixXcd u(f, k), vt(k, n);
  VectorXd sigma(k);
  if (f <= n) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(y * y.adjoint());
    for (Index j = 0; j < k; ++j) {
      const Index src = f - 1 - j;  // eigenvalues come out ascending
      const double s2 = std::max(eig.eigenvalues()[src], 0.0);
      sigma[j] = std::sqrt(s2);
      u.col(j) = eig.eigenvectors().col(src);
      if (sigma[j] > 0.0) {
        vt.row(j) = u.col(j).adjoint() * y / sigma[j];
      } else {
        vt.row(j).setZero();
      }
    }
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(y.adjoint() * y);
    for (Index j = 0; j < k; ++j) {
      const Index src = n - 1 - j;
      const double s2 = std::max(eig.eigenvalues()[src], 0.0);
      sigma[j] = std::sqrt(s2);
      VectorXcd v = eig.eigenvectors().col(src);
      vt.row(j) = v.adjoint();
      if (sigma[j] > 0.0) {
        u.col(j) = y * v / sigma[j];
      } else {
        u.col(j).setZero();
      }
    }
  }

  NMFModel model;
  model.W.resize(f, k);
  model.H.resize(k, n);
  for (Index j = 0; j < k; ++j) {
    const double root = std::sqrt(sigma[j]);
    model.W.col(j) = (u.col(j).cwiseAbs() * root).cwiseMax(kEpsNmf);
    model.H.row(j) = (vt.row(j).cwiseAbs() * root).cwiseMax(kEpsNmf);
  }
  return model;
}

std::vector<ArrayXXd> wiener_masks(const NMFModel& model) {
  // Raw product, not the floored variance: the masks then sum to one to
  // rounding precision even where W H is tiny.
  const ArrayXXd v = (model.W * model.H).array();
  std::vector<ArrayXXd> masks;
  masks.reserve(model.rank());
  for (Index k = 0; k < model.rank(); ++k) {
    masks.push_back((model.W.col(k) * model.H.row(k)).array() / v);
  }
  return masks;
}

}  // namespace lrtfs
