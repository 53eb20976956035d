#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "lrtfs/gabor.hpp"
#include "lrtfs/rng.hpp"
#include "support/dense_frame.hpp"

using namespace lrtfs;

namespace {

GaborDictionary small_real_dict(Index t = 64) {
  return build_tight_gabor(16, 0.5, t, GaborMode::real_half);
}

GaborDictionary small_complex_dict(Index t = 64) {
  return build_tight_gabor(16, 0.5, t, GaborMode::complex_full);
}

}  // namespace

TEST_CASE("lattice bookkeeping follows the construction parameters") {
  const Index t = static_cast<Index>(22050 * 15.6);
  GaborDictionary d = build_tight_gabor(1024, 0.5, t, GaborMode::real_half);
  CHECK(d.hop == 512);
  CHECK(d.num_freqs == 1024);
  CHECK(d.freq_rows() == 512);
  CHECK(d.num_frames * static_cast<Index>(d.hop) >= t);
  CHECK(d.frame_norm_sq == 1.0);
  CHECK(d.is_tight);

  GaborDictionary d2 = build_tight_gabor(512, 0.5, 40000, GaborMode::real_half);
  CHECK(d2.hop == 256);
  CHECK(d2.freq_rows() == 256);
}

TEST_CASE("invalid construction parameters are rejected") {
  CHECK_THROWS_AS(build_tight_gabor(15, 0.5, 1000, GaborMode::real_half), std::invalid_argument);
  CHECK_THROWS_AS(build_tight_gabor(16, 0.0, 1000, GaborMode::real_half), std::invalid_argument);
  CHECK_THROWS_AS(build_tight_gabor(16, 1.0, 1000, GaborMode::real_half), std::invalid_argument);
  CHECK_THROWS_AS(build_tight_gabor(1024, 0.5, 512, GaborMode::real_half), std::invalid_argument);
  GaborDictionary d = small_real_dict();
  CHECK_THROWS_AS(analysis(d, VectorXd(VectorXd::Zero(10))), std::invalid_argument);
  CHECK_THROWS_AS(synthesis_real(d, CoefficientGrid::Zero(3, 3)), std::invalid_argument);
  CHECK_THROWS_AS(synthesis_complex(d, CoefficientGrid::Zero(d.freq_rows(), d.num_frames)),
                  std::invalid_argument);
}

TEST_CASE("analysis of zero is zero and matches the dense adjoint") {
  GaborDictionary d = small_real_dict();
  CHECK(analysis(d, VectorXd(VectorXd::Zero(d.signal_len))).norm() == 0.0);

  MatrixXcd phi = testing::dense_phi(d);
  Rng rng(7);
  VectorXd x = rng.normal_vector(d.signal_len);
  CoefficientGrid grid = analysis(d, x);
  VectorXcd dense = phi.adjoint() * x.cast<Complex>();
  CHECK((vectorize(grid) - dense).norm() <= 1e-12 * dense.norm());
}

TEST_CASE("synthesis matches the dense atom expansion in both modes") {
  Rng rng(11);
  GaborDictionary dr = small_real_dict();
  CoefficientGrid grid = matrixize(rng.cnormal_vector(dr.num_coeffs()), dr.freq_rows(), dr.num_frames);
  VectorXd fast = synthesis_real(dr, grid);
  VectorXcd dense = testing::dense_phi(dr) * vectorize(grid);
  VectorXd dense_real = 2.0 * dense.real();
  CHECK((fast - dense_real).norm() <= 1e-12 * dense_real.norm());

  GaborDictionary dc = small_complex_dict();
  CoefficientGrid gc = matrixize(rng.cnormal_vector(dc.num_coeffs()), dc.freq_rows(), dc.num_frames);
  VectorXcd fastc = synthesis_complex(dc, gc);
  VectorXcd densec = testing::dense_phi(dc) * vectorize(gc);
  CHECK((fastc - densec).norm() <= 1e-12 * densec.norm());
}

TEST_CASE("atom input lights up its own lattice point") {
  GaborDictionary d = small_real_dict();
  MatrixXcd phi = testing::dense_phi(d);
  const int f = 3, n = 2;
  const Index col = f + static_cast<Index>(d.freq_rows()) * n;
  VectorXd x = 2.0 * phi.col(col).real();
  CoefficientGrid grid = analysis(d, x);
  Index max_f = 0, max_n = 0;
  grid.cwiseAbs().maxCoeff(&max_f, &max_n);
  CHECK(max_f == f);
  CHECK(max_n == n);
}

TEST_CASE("tight frame: Parseval, round trip and adjointness") {
  Rng rng(3);
  GaborDictionary dc = build_tight_gabor(32, 0.5, 300, GaborMode::complex_full);
  VectorXcd x = rng.cnormal_vector(dc.signal_len);

  CoefficientGrid y = analysis(dc, x);
  CHECK(std::abs(vectorize(y).norm() - x.norm()) <= 1e-10 * x.norm());

  VectorXcd back = synthesis_complex(dc, y);
  CHECK((back - x).norm() <= 1e-10 * x.norm());

  // <analysis(x), a> == <x, synthesis(a)>
  CoefficientGrid a = matrixize(rng.cnormal_vector(dc.num_coeffs()), dc.freq_rows(), dc.num_frames);
  Complex lhs = vectorize(y).dot(vectorize(a));
  Complex rhs = x.dot(synthesis_complex(dc, a));
  CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
}

TEST_CASE("tight frame round trip holds in real mode") {
  Rng rng(5);
  GaborDictionary d = build_tight_gabor(64, 0.75, 1000, GaborMode::real_half);
  VectorXd x = rng.normal_vector(d.signal_len);
  VectorXd back = synthesis_real(d, analysis(d, x));
  CHECK((back - x).norm() <= 1e-10 * x.norm());

  // real-mode analysis holds half of the signal energy
  const double half_energy = vectorize(analysis(d, x)).squaredNorm();
  CHECK(half_energy == doctest::Approx(0.5 * x.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("Hermitian extension reproduces real synthesis through the complex path") {
  Rng rng(9);
  GaborDictionary dr = small_real_dict();
  GaborDictionary dc = small_complex_dict();
  CoefficientGrid half = matrixize(rng.cnormal_vector(dr.num_coeffs()), dr.freq_rows(), dr.num_frames);
  VectorXd via_real = synthesis_real(dr, half);
  VectorXcd via_complex = synthesis_complex(dc, hermitian_extend(half));
  CHECK(via_complex.imag().norm() <= 1e-12 * via_real.norm());
  CHECK((via_complex.real() - via_real).norm() <= 1e-12 * via_real.norm());
}

TEST_CASE("spectral norm: tight is one, scaling is quadratic, dense oracle agrees") {
  GaborDictionary tight = small_real_dict();
  CHECK(spectral_norm_sq(tight) == 1.0);

  GaborDictionary base = build_gabor(hann_window(8), 4, 32, GaborMode::complex_full);
  GaborDictionary scaled = build_gabor(3.0 * hann_window(8), 4, 32, GaborMode::complex_full);
  CHECK(spectral_norm_sq(scaled) ==
        doctest::Approx(9.0 * spectral_norm_sq(base)).epsilon(1e-6));

  // T = 32, M = 64 dense eigendecomposition oracle
  MatrixXcd phi = testing::dense_phi(base);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(phi.adjoint() * phi);
  const double truth = eig.eigenvalues().maxCoeff();
  const double est = spectral_norm_sq(base);
  CHECK(est >= truth * (1.0 - 1e-6));
  CHECK(est <= truth * 1.0105);
}

TEST_CASE("paired-dictionary spectrum is twice the stacked real spectrum") {
  // L = ||[Phi_, Phi_*]||_2^2 against L_A = ||[Re Phi_, -Im Phi_]||_2^2
  GaborDictionary d = build_tight_gabor(8, 0.5, 24, GaborMode::real_half);
  MatrixXcd half = testing::dense_phi(d);
  MatrixXcd paired = testing::dense_phi_paired(d);
  MatrixXd stacked = testing::dense_stacked_real(half);

  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig_c(paired.adjoint() * paired);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig_r(stacked.transpose() * stacked);
  const double l = eig_c.eigenvalues().maxCoeff();
  const double l_a = eig_r.eigenvalues().maxCoeff();
  CHECK(l == doctest::Approx(2.0 * l_a).epsilon(1e-8));
  CHECK(l == doctest::Approx(1.0).epsilon(1e-8));  // tight
}

TEST_CASE("vectorize and matrixize are inverse bijections") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Index rows = 3 + static_cast<Index>(rng.uniform() * 5);
    const Index cols = 2 + static_cast<Index>(rng.uniform() * 7);
    CoefficientGrid g = matrixize(rng.cnormal_vector(rows * cols), rows, cols);
    CHECK(matrixize(vectorize(g), rows, cols) == g);
    // freq-major: m = f + rows * n
    CHECK(vectorize(g)[1] == g(1, 0));
    CHECK(vectorize(g)[rows] == g(0, 1));
  }
}
