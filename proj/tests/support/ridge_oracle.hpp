#pragma once

// Dense closed-form references for the ridge subproblem, built on the dense
// atom matrices from dense_frame.hpp.

#include <Eigen/Dense>

#include "support/dense_frame.hpp"

namespace lrtfs::testing {

/// Complex model: argmin (1/lambda)||x - Phi alpha||^2 + sum |alpha|^2 / v,
/// i.e. alpha = (Phi^H Phi + lambda diag(v)^-1)^-1 Phi^H x.
inline VectorXcd ridge_closed_form_complex(const MatrixXcd& phi, const VectorXcd& x,
                                           const VectorXd& v, double lambda) {
  MatrixXcd lhs = phi.adjoint() * phi;
  lhs += (lambda * v.cwiseInverse()).asDiagonal().toDenseMatrix().cast<Complex>();
  return lhs.ldlt().solve(phi.adjoint() * x);
}

/// Real model via the stacked quadratic problem: with A = 2 [Re Phi_, -Im Phi_],
/// b = [Re alpha; Im alpha] and c = [v; v] / 2,
/// b = (A^T A + lambda diag(c)^-1)^-1 A^T x.
inline VectorXcd ridge_closed_form_real(const MatrixXcd& phi_half, const VectorXd& x,
                                        const VectorXd& v, double lambda) {
  const Index m = phi_half.cols();
  MatrixXd a(phi_half.rows(), 2 * m);
  a.leftCols(m) = 2.0 * phi_half.real();
  a.rightCols(m) = -2.0 * phi_half.imag();
  VectorXd c(2 * m);
  c << 0.5 * v, 0.5 * v;

  MatrixXd lhs = a.transpose() * a;
  lhs += (lambda * c.cwiseInverse()).asDiagonal().toDenseMatrix();
  const VectorXd b = lhs.ldlt().solve(a.transpose() * x);

  VectorXcd alpha(m);
  alpha.real() = b.head(m);
  alpha.imag() = b.tail(m);
  return alpha;
}

}  // namespace lrtfs::testing
