#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "eigenflow/dynamics.hpp"
#include "test_util.hpp"

using namespace eigenflow;
using namespace eigenflow::dynamics;

namespace {

Vec vec1(double x) { return Vec::Constant(1, x); }

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

// closed-form flow of the triangular system, by variation of constants
Vec triangular_flow(const Vec& x, double t) {
  Vec out(2);
  out[0] = x[0] * std::exp(-t);
  out[1] = x[1] * std::exp(-2.5 * t) + 2.0 * x[0] * x[0] * (std::exp(-2.0 * t) - std::exp(-2.5 * t));
  return out;
}

}  // namespace

TEST_CASE("flow: scalar exponential decay") {
  auto sys = catalog_system("linear");
  Vec y = flow(sys, vec1(1.0), std::log(2.0));
  CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("flow: zero time is the identity") {
  auto sys = catalog_system("triangular2d");
  Vec x = vec2(0.3, -0.4);
  CHECK((flow(sys, x, 0.0) - x).norm() == 0.0);
}

TEST_CASE("flow: triangular closed form") {
  auto sys = catalog_system("triangular2d");
  for (double t : {0.3, 1.0, 2.7}) {
    Vec y = flow(sys, vec2(1.0, 0.0), t);
    Vec expect = triangular_flow(vec2(1.0, 0.0), t);
    CHECK((y - expect).norm() < 1e-8);
  }
}

TEST_CASE("flow: blow-up detection") {
  // x' = +x^3 leaves every bounded set in finite time from x > 0
  PolynomialComponents comps(1);
  comps[0] = {{1.0, {3}}};
  auto sys = make_polynomial_system(AttractorKind::fixed_point, comps);
  IntegratorOptions opts;
  opts.blowup_norm = 1e3;
  CHECK_THROWS_AS(flow(sys, vec1(1.0), 10.0, opts), BlowUp);
}

TEST_CASE("flow: semigroup property") {
  auto sys = catalog_system("triangular2d");
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u01(0.0, 5.0);
  std::uniform_real_distribution<double> ux(-0.8, 0.8);
  for (int trial = 0; trial < 10; ++trial) {
    Vec x = vec2(ux(rng), ux(rng));
    const double s = u01(rng), t = u01(rng);
    Vec a = flow(sys, flow(sys, x, s), t);
    Vec b = flow(sys, x, s + t);
    CHECK((a - b).norm() <= 1e-6 * (1.0 + x.norm()));
  }
}

TEST_CASE("variational_flow: scalar and linear-system oracles") {
  auto sys = catalog_system("linear");
  Mat d = variational_flow(sys, vec1(0.0), 1.0);
  CHECK(d(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));

  // x' = A x: the variational flow is exp(tA) everywhere
  std::mt19937_64 rng(13);
  Mat a = ef_test::random_matrix(2, rng, 0.6);
  PolynomialComponents comps(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      MultiIndex e(2, 0);
      e[static_cast<std::size_t>(j)] = 1;
      comps[static_cast<std::size_t>(i)].push_back({a(i, j), e});
    }
  auto lin = make_polynomial_system(AttractorKind::fixed_point, comps);
  const double t = 1.7;
  Mat expect = (t * a).exp();
  CHECK((variational_flow(lin, vec2(0.4, -0.2), t) - expect).norm() < 1e-7);
}

TEST_CASE("variational_flow: finite-difference consistency") {
  auto sys = catalog_system("focus2d");
  Vec x = vec2(0.2, -0.1);
  const double t = 1.3, h = 1e-6;
  Mat jac = variational_flow(sys, x, t);
  for (int j = 0; j < 2; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    Vec col = (flow(sys, xp, t) - flow(sys, xm, t)) / (2.0 * h);
    CHECK((jac.col(j) - col).norm() <= 1e-5);
  }
}

TEST_CASE("variational_flow: chain rule") {
  auto sys = catalog_system("triangular2d");
  Vec x = vec2(0.5, 0.2);
  const double s = 0.8, t = 1.4;
  Mat lhs = variational_flow(sys, x, s + t);
  Mat rhs = variational_flow(sys, flow(sys, x, s), t) * variational_flow(sys, x, s);
  CHECK((lhs - rhs).norm() <= 1e-5);
}

TEST_CASE("find_fixed_point examples") {
  auto cubic = catalog_system("cubic1d");
  auto fp = find_fixed_point(cubic, vec1(0.3));
  CHECK(std::abs(fp.x0[0]) < 1e-10);
  CHECK(fp.jacobian(0, 0) == doctest::Approx(-1.0));
  CHECK(fp.hyperbolic_stable);

  // affine system x' = A (x - b)
  Mat a(2, 2);
  a << -1.0, 0.3, 0.1, -2.0;
  Vec b = vec2(0.7, -0.2);
  Vec c = -a * b;
  PolynomialComponents comps(2);
  for (int i = 0; i < 2; ++i) {
    comps[static_cast<std::size_t>(i)].push_back({c[i], {0, 0}});
    for (int j = 0; j < 2; ++j) {
      MultiIndex e(2, 0);
      e[static_cast<std::size_t>(j)] = 1;
      comps[static_cast<std::size_t>(i)].push_back({a(i, j), e});
    }
  }
  auto affine = make_polynomial_system(AttractorKind::fixed_point, comps);
  auto fpa = find_fixed_point(affine, vec2(0.0, 0.0));
  CHECK((fpa.x0 - b).norm() < 1e-9);

  auto tri = find_fixed_point(catalog_system("triangular2d"), vec2(0.3, 0.3));
  CHECK(tri.x0.norm() < 1e-10);
  CHECK(tri.spectral.eigenvalues()[0].real() == doctest::Approx(std::exp(-1.0)));
  CHECK(tri.spectral.eigenvalues()[1].real() == doctest::Approx(std::exp(-2.5)));
}

TEST_CASE("find_fixed_point: non-hyperbolic point is rejected") {
  PolynomialComponents comps(1);
  comps[0] = {{-1.0, {3}}};  // x' = -x^3, Jacobian 0 at the origin
  auto sys = make_polynomial_system(AttractorKind::fixed_point, comps);
  CHECK_THROWS_AS(find_fixed_point(sys, vec1(0.0)), NotHyperbolic);

  // from a nonzero guess the root is only approximate; widen the band
  SolverOptions wide;
  wide.tol_hyp = 1e-6;
  CHECK_THROWS_AS(find_fixed_point(sys, vec1(0.3), wide), NotHyperbolic);
}

TEST_CASE("find_limit_cycle: Stuart-Landau") {
  auto sys = catalog_system("stuart_landau");
  auto lc = find_limit_cycle(sys, sys.initial_guess, sys.period_guess);
  CHECK(lc.tau == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-8));
  CHECK(lc.x0.norm() == doctest::Approx(1.0).epsilon(1e-8));

  // nontrivial multiplier e^{-2 tau}: d/dr (r - r^3) = -2 at r = 1
  REQUIRE(lc.restricted_spectral.size() == 1);
  CHECK(std::abs(lc.restricted_spectral.eigenvalues()[0] - Complex(std::exp(-2.0 * lc.tau))) <
        1e-8);
  CHECK(lc.floquet_exponents[0].real() == doctest::Approx(-2.0).epsilon(1e-7));
  CHECK(std::abs(lc.floquet_exponents[0].imag()) < 1e-9);

  // E^s is the radial line at the base point
  Vec radial = lc.x0 / lc.x0.norm();
  CHECK(std::abs(std::abs(lc.Es_basis.col(0).dot(radial)) - 1.0) < 1e-7);

  // trivial multiplier eigenvector is the flow direction
  CHECK((lc.monodromy * lc.floquet_direction - lc.floquet_direction).norm() <=
        1e-6 * lc.floquet_direction.norm());
}

TEST_CASE("find_limit_cycle: monodromy spectra agree across base points") {
  auto sys = catalog_system("stuart_landau");
  auto lc = find_limit_cycle(sys, sys.initial_guess, sys.period_guess);
  Vec other = flow(sys, lc.x0, lc.tau / 3.0);
  Mat m2 = variational_flow(sys, other, lc.tau);
  CVec s1 = spectral::SpectralData::decompose(lc.monodromy).eigenvalues();
  CVec s2 = spectral::SpectralData::decompose(m2).eigenvalues();
  for (int i = 0; i < s1.size(); ++i) CHECK(std::abs(s1[i] - s2[i]) < 1e-6);
}

TEST_CASE("find_limit_cycle: bad guess fails cleanly") {
  auto sys = catalog_system("stuart_landau");
  CHECK_THROWS_AS(find_limit_cycle(sys, vec2(0.02, 0.0), 1.3), NoConvergence);
}

TEST_CASE("resonant_cycle3d has the arranged Floquet exponents") {
  auto sys = catalog_system("resonant_cycle3d");
  auto lc = find_limit_cycle(sys, sys.initial_guess, sys.period_guess);
  REQUIRE(lc.floquet_exponents.size() == 2);
  std::vector<double> re{lc.floquet_exponents[0].real(), lc.floquet_exponents[1].real()};
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(re[1] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("perturbation_openness_test") {
  auto sys = catalog_system("triangular2d");

  auto zero = perturbation_openness_test(sys, 0.0, 5, 42);
  CHECK(zero.fraction == 1.0);

  auto small = perturbation_openness_test(sys, 1e-4, 20, 42);
  CHECK(small.fraction == 1.0);
  CHECK(small.solver_errors == 0);

  CHECK_THROWS_AS(perturbation_openness_test(catalog_system("resonant2d"), 1e-4, 5, 1),
                  HypothesisViolated);
}
