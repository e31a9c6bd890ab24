#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "eigenflow/respoly.hpp"
#include "eigenflow/spectral.hpp"
#include "test_util.hpp"

using namespace eigenflow;
using namespace eigenflow::respoly;
using ef_test::random_matrix;
using ef_test::random_stable_matrix;

namespace {

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// Eigenvalue-route oracle for f = prod_{j != k} (lambda_j - lambda_k),
// independent of the coefficient-ring implementation.
double f_from_eigenvalues(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a);
  CVec lam = es.eigenvalues();
  Complex f(1.0, 0.0);
  for (int j = 0; j < lam.size(); ++j)
    for (int k = 0; k < lam.size(); ++k)
      if (j != k) f *= lam[j] - lam[k];
  return f.real();
}

}  // namespace

TEST_CASE("char_poly examples") {
  auto p = char_poly(diag2(0.5, 0.25));
  REQUIRE(p.coefficients.size() == 3);
  CHECK(p.coefficients[0] == 1.0);
  CHECK(p.coefficients[1] == doctest::Approx(-0.75));
  CHECK(p.coefficients[2] == doctest::Approx(0.125));
  // entries are dyadic rationals, so these are exact
  CHECK(p.exact_coefficients[1] == Rational(-3, 4));
  CHECK(p.exact_coefficients[2] == Rational(1, 8));

  auto q = char_poly(Mat::Identity(2, 2));
  CHECK(q.coefficients[1] == -2.0);
  CHECK(q.coefficients[2] == 1.0);

  Mat rot(2, 2);
  rot << 0, 1, -1, 0;
  auto r = char_poly(rot);
  CHECK(r.coefficients[1] == 0.0);
  CHECK(r.coefficients[2] == 1.0);
}

TEST_CASE("char_poly coefficients satisfy the elementary-symmetric cross-check") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);  // up to 5
    Mat a = random_matrix(n, rng);
    auto p = char_poly(a);
    Eigen::EigenSolver<Mat> es(a);
    CVec lam = es.eigenvalues();
    // e_k via recursive expansion of prod (x - lambda_i)
    std::vector<Complex> coef{Complex(1.0, 0.0)};
    for (int i = 0; i < n; ++i) {
      coef.push_back(Complex(0.0, 0.0));
      for (int j = static_cast<int>(coef.size()) - 1; j > 0; --j)
        coef[static_cast<std::size_t>(j)] =
            coef[static_cast<std::size_t>(j)] - lam[i] * coef[static_cast<std::size_t>(j - 1)];
    }
    for (int k = 0; k <= n; ++k) {
      CHECK(std::abs(Complex(p.coefficients[static_cast<std::size_t>(k)], 0.0) -
                     coef[static_cast<std::size_t>(k)]) < 1e-8 * (1.0 + std::abs(coef[static_cast<std::size_t>(k)])));
    }
  }
}

TEST_CASE("evaluate_F examples") {
  CHECK(evaluate_F(diag2(0.5, 0.25)).value == doctest::Approx(-0.0625));
  CHECK(evaluate_F(diag2(0.5, 0.5)).exact == 0);  // repeated eigenvalue

  Mat rot(2, 2);
  rot << 0, 1, -1, 0;
  CHECK(evaluate_F(rot).value == doctest::Approx(4.0));  // (2i)(-2i)
}

TEST_CASE("evaluate_F is exact in rational arithmetic") {
  auto f = evaluate_F(diag2(0.5, 0.25));
  CHECK(f.exact == Rational(-1, 16));
}

TEST_CASE("coefficient-ring F matches the eigenvalue product to relative 1e-6") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);  // up to 5
    Mat a = random_matrix(n, rng);
    const double oracle = f_from_eigenvalues(a);
    const double exact_route = evaluate_F(a).value;
    const double numeric_route = evaluate_F_numeric(a);
    const double scale = std::max({1e-30, std::abs(oracle)});
    CHECK(std::abs(exact_route - oracle) / scale < 1e-6);
    CHECK(std::abs(numeric_route - oracle) / scale < 1e-6);
  }
}

TEST_CASE("evaluate_G examples") {
  // resonance 0.25 = 0.5^2: the sigma = id factor vanishes
  auto g0 = evaluate_G(diag2(0.5, 0.25), {2, 0});
  CHECK(std::abs(g0.value) < 1e-25);
  CHECK(g0.min_factor < 1e-25);

  // all four factors nonzero by arithmetic
  auto g1 = evaluate_G(diag2(0.5, 0.3), {2, 0});
  CHECK(g1.value.real() == doctest::Approx(0.25 * 0.41 * 0.05 * 0.21).epsilon(1e-10));
  CHECK(g1.imag_error < 1e-20);

  // n = 1: single factor 0.5 - 0.25
  Mat a1(1, 1);
  a1 << 0.5;
  CHECK(evaluate_G(a1, {2}).value.real() == doctest::Approx(0.25));
}

TEST_CASE("evaluate_G input validation and budget") {
  CHECK_THROWS_AS(evaluate_G(diag2(0.5, 0.3), {1, 0}), UsageError);
  std::mt19937_64 rng(31);
  Mat big = random_stable_matrix(7, rng);
  CHECK_THROWS_AS(evaluate_G(big, MultiIndex(7, 1)), PermutationBlowup);  // |m| = 7 >= 2
}

TEST_CASE("evaluate_G is invariant under permutation similarity") {
  std::mt19937_64 rng(37);
  Mat a = random_stable_matrix(3, rng);
  Mat p = Mat::Zero(3, 3);
  p(0, 2) = p(1, 0) = p(2, 1) = 1.0;  // cyclic permutation
  Mat b = p * a * p.transpose();
  for (const MultiIndex& m : {MultiIndex{2, 0, 0}, MultiIndex{1, 1, 1}, MultiIndex{3, 1, 0}}) {
    auto ga = evaluate_G(a, m);
    auto gb = evaluate_G(b, m);
    CHECK(std::abs(ga.value - gb.value) <= 1e-10 * (1.0 + std::abs(ga.value)));
  }
}

TEST_CASE("certify_genericity verdict examples") {
  CHECK(certify_genericity(diag2(0.5, 0.3)).verdict == Verdict::in_N);

  auto resonant = certify_genericity(diag2(0.5, 0.25));
  CHECK(resonant.verdict == Verdict::resonant);
  CHECK(resonant.witness == MultiIndex{2, 0});

  CHECK(certify_genericity(diag2(0.5, 0.5)).verdict == Verdict::degenerate);
}

TEST_CASE("certify_genericity agrees with the eigenvalue route") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    Mat a = random_stable_matrix(n, rng);
    auto cert = certify_genericity(a);
    auto membership = spectral::in_script_N(spectral::SpectralData::decompose(a));
    CHECK((cert.verdict == Verdict::in_N) == membership.member);
  }
}

TEST_CASE("certify_genericity needs a degree bound off the stable set") {
  Mat a = diag2(1.5, 0.5);
  CHECK_THROWS_AS(certify_genericity(a), NotStable);
  CertifyOptions opts;
  opts.K_override = 4;
  CHECK(certify_genericity(a, opts).verdict == Verdict::in_N);
}

TEST_CASE("measure_zero_experiment basics") {
  CHECK_THROWS_AS(measure_zero_experiment(2, 0, 1), UsageError);

  auto r1 = measure_zero_experiment(1, 100, 12345);
  CHECK(r1.fraction == 1.0);

  auto r2 = measure_zero_experiment(2, 500, 20250401);
  CHECK(r2.fraction == 1.0);
  CHECK(r2.failures.empty());

  // determinism: same seed, same verdicts
  auto r3 = measure_zero_experiment(2, 500, 20250401);
  CHECK(r3.fraction == r2.fraction);
}

TEST_CASE("planted resonant matrices are detected") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.15, 0.95);
  for (int trial = 0; trial < 25; ++trial) {
    const double lam = u(rng);
    auto cert = certify_genericity(diag2(lam, lam * lam));
    CHECK(cert.verdict == Verdict::resonant);
  }
}
