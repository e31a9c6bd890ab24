#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "eigenflow/lattice.hpp"

using namespace eigenflow;
using namespace eigenflow::classify;
using dynamics::catalog_system;
using eigfn::analyze_fixed_point;
using eigfn::analyze_limit_cycle;
using eigfn::principal_fixed_point;
using eigfn::principal_limit_cycle;

namespace {

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

bool contains_value(const EigenvalueLattice& lattice, Complex v, double tol = 1e-7) {
  for (const auto& e : lattice.entries)
    if (std::abs(e.value - v) <= tol) return true;
  return false;
}

std::vector<Vec> box_samples(const dynamics::SystemSpec& sys, int count) {
  return sample_points(*sys.domain, count, Vec::Zero(sys.dimension));
}

}  // namespace

TEST_CASE("build_lattice: triangular degree 2") {
  auto ctx = analyze_fixed_point(catalog_system("triangular2d"));
  auto lattice = build_lattice(ctx->fp, 2);
  for (double v : {-1.0, -2.5, -2.0, -3.5, -5.0})
    CHECK(contains_value(lattice, Complex(v, 0.0)));
  CHECK(!contains_value(lattice, Complex(-4.5, 0.0)));  // degree 3 value
}

TEST_CASE("build_lattice: one-dimensional lattice") {
  auto ctx = analyze_fixed_point(catalog_system("cubic1d"));
  auto lattice = build_lattice(ctx->fp, 3);
  for (double v : {-1.0, -2.0, -3.0}) CHECK(contains_value(lattice, Complex(v, 0.0)));
  CHECK(!contains_value(lattice, Complex(-4.0, 0.0)));
}

TEST_CASE("build_lattice: Stuart-Landau phase ladder") {
  auto ctx = analyze_limit_cycle(catalog_system("stuart_landau"));
  auto lattice = build_lattice(ctx->lc, 1, 1);
  const double omega = 2.0 * std::numbers::pi / ctx->lc.tau;
  for (Complex v : {Complex(0, 0), Complex(0, omega), Complex(0, -omega), Complex(-2, 0),
                    Complex(-2, omega), Complex(-2, -omega)})
    CHECK(contains_value(lattice, v, 1e-6));
}

TEST_CASE("build_lattice rejects resonant hypotheses") {
  auto ctx = analyze_fixed_point(catalog_system("resonant2d"));
  CHECK_THROWS_AS(build_lattice(ctx->fp, 2), HypothesisViolated);
}

TEST_CASE("match_eigenvalue") {
  auto ctx = analyze_fixed_point(catalog_system("triangular2d"));
  auto lattice = build_lattice(ctx->fp, 5);

  auto hits = match_eigenvalue(lattice, Complex(-4.5, 0.0));
  REQUIRE(!hits.empty());
  bool found = false;
  for (const auto& w : hits) {
    MultiIndex total{w.i[0] + w.ell[0], w.i[1] + w.ell[1]};
    found = found || (total == MultiIndex{2, 1});
  }
  CHECK(found);  // 2 * (-1) + 1 * (-2.5) = -4.5

  CHECK(match_eigenvalue(lattice, Complex(-0.3, 0.0)).empty());

  auto principal_hit = match_eigenvalue(lattice, Complex(-1.0, 0.0));
  REQUIRE(!principal_hit.empty());
  bool has_unit = false;
  for (const auto& w : principal_hit)
    has_unit = has_unit || (w.i == MultiIndex{1, 0} && w.ell == MultiIndex{0, 0});
  CHECK(has_unit);
}

TEST_CASE("product_eigenfunction: triangular psi1 * psi2") {
  auto ctx = analyze_fixed_point(catalog_system("triangular2d"));
  std::vector<eigfn::PrincipalEigenfunction> pes{principal_fixed_point(ctx, 0),
                                                 principal_fixed_point(ctx, 1)};
  auto prod = product_eigenfunction(pes, {1, 1}, {0, 0});
  CHECK(prod.eigenvalue().real() == doctest::Approx(-3.5).epsilon(1e-9));

  // exact closed forms: psi1 = x1, psi2 = x2 - 2 x1^2
  Vec x = vec2(0.4, 0.3);
  const Complex expect = Complex(0.4) * Complex(0.3 - 2.0 * 0.16);
  CHECK(std::abs(prod.evaluate(x) - expect) < 1e-8);

  const double defect = eigfn::eigen_defect(
      ctx->sys, [&](const Vec& p) { return prod.evaluate(p); }, prod.eigenvalue(),
      {vec2(0.4, 0.3), vec2(-0.5, 0.2)}, {0.5, 1.0, 2.0});
  CHECK(defect <= 1e-6);
}

TEST_CASE("product_eigenfunction: empty index is the constant observable") {
  auto ctx = analyze_fixed_point(catalog_system("triangular2d"));
  std::vector<eigfn::PrincipalEigenfunction> pes{principal_fixed_point(ctx, 0),
                                                 principal_fixed_point(ctx, 1)};
  auto one = product_eigenfunction(pes, {0, 0}, {0, 0});
  CHECK(one.eigenvalue() == Complex(0.0, 0.0));
  CHECK(std::abs(one.evaluate(vec2(0.3, -0.2)) - Complex(1.0)) < 1e-12);
}

TEST_CASE("product_eigenfunction: Stuart-Landau with a phase power") {
  auto ctx = analyze_limit_cycle(catalog_system("stuart_landau"));
  std::vector<eigfn::PrincipalEigenfunction> pes{principal_limit_cycle(ctx, 0, 4)};
  auto phase = eigfn::phase_eigenfunction(ctx);
  auto prod = product_eigenfunction(pes, {1}, {0}, 1, phase);
  const double omega = 2.0 * std::numbers::pi / ctx->lc.tau;
  CHECK(std::abs(prod.eigenvalue() - Complex(-2.0, omega)) < 1e-7);

  const double defect = eigfn::eigen_defect(
      ctx->sys, [&](const Vec& p) { return prod.evaluate(p); }, prod.eigenvalue(),
      {vec2(0.7, 0.2), vec2(-0.5, 0.9)}, {0.5, 1.0, 2.0});
  CHECK(defect <= 1e-6);
}

TEST_CASE("construct_eigenfunction accepts exactly the lattice") {
  auto ctx = analyze_fixed_point(catalog_system("triangular2d"));
  auto prod = construct_eigenfunction(ctx, Complex(-4.5, 0.0), 5);
  CHECK(std::abs(prod.eigenvalue() - Complex(-4.5, 0.0)) < 1e-9);
  // psi1^2 psi2 in closed form
  Vec x = vec2(0.5, 0.4);
  const Complex expect = Complex(0.25) * Complex(0.4 - 2.0 * 0.25);
  CHECK(std::abs(prod.evaluate(x) - expect) < 1e-7);

  CHECK_THROWS_AS(construct_eigenfunction(ctx, Complex(-0.77, 0.0), 5), NotAnEigenvalue);
  CHECK_THROWS_AS(construct_eigenfunction(ctx, Complex(-1.0, 0.3), 5), NotAnEigenvalue);
}

TEST_CASE("fit_expansion recovers exact members") {
  auto ctx = analyze_fixed_point(catalog_system("triangular2d"));
  std::vector<eigfn::PrincipalEigenfunction> pes{principal_fixed_point(ctx, 0),
                                                 principal_fixed_point(ctx, 1)};
  auto samples = box_samples(ctx->sys, 80);

  // candidate psi1 * psi2 (closed forms keep the test independent)
  auto candidate = [](const Vec& x) {
    return Complex(x[0]) * Complex(x[1] - 2.0 * x[0] * x[0]);
  };
  auto fit = fit_expansion(candidate, pes, 2, samples);
  CHECK(fit.residual <= 1e-8);
  for (const auto& term : fit.terms) {
    const bool is_target = term.index.i == MultiIndex{1, 1} && term.index.ell == MultiIndex{0, 0};
    if (is_target)
      CHECK(std::abs(term.coefficient - Complex(1.0)) <= 1e-7);
    else
      CHECK(std::abs(term.coefficient) <= 1e-8);
  }

  // candidate 3 psi1^2 - 2 psi2
  auto candidate2 = [](const Vec& x) {
    return Complex(3.0 * x[0] * x[0]) - Complex(2.0 * (x[1] - 2.0 * x[0] * x[0]));
  };
  auto fit2 = fit_expansion(candidate2, pes, 2, samples);
  CHECK(fit2.residual <= 1e-7);
  for (const auto& term : fit2.terms) {
    if (term.index.i == MultiIndex{2, 0} && term.index.ell == MultiIndex{0, 0})
      CHECK(std::abs(term.coefficient - Complex(3.0)) <= 1e-6);
    else if (term.index.i == MultiIndex{0, 1} && term.index.ell == MultiIndex{0, 0})
      CHECK(std::abs(term.coefficient - Complex(-2.0)) <= 1e-6);
    else
      CHECK(std::abs(term.coefficient) <= 1e-6);
  }
}

TEST_CASE("fit_expansion rejects non-eigenfunctions at single eigenvalues") {
  auto ctx = analyze_fixed_point(catalog_system("triangular2d"));
  std::vector<eigfn::PrincipalEigenfunction> pes{principal_fixed_point(ctx, 0),
                                                 principal_fixed_point(ctx, 1)};
  auto samples = box_samples(ctx->sys, 60);
  auto candidate = [](const Vec& x) { return Complex(x.squaredNorm()); };

  auto lattice = build_lattice(ctx->fp, 2);
  for (const auto& entry : lattice.entries) {
    auto fit = fit_expansion(candidate, pes, 2, samples, nullptr, {}, entry.value);
    CHECK(fit.residual > 1e-2);
  }
}

TEST_CASE("fit_expansion flags rank-deficient sample geometry") {
  auto ctx = analyze_fixed_point(catalog_system("triangular2d"));
  std::vector<eigfn::PrincipalEigenfunction> pes{principal_fixed_point(ctx, 0),
                                                 principal_fixed_point(ctx, 1)};
  std::vector<Vec> degenerate(40, vec2(0.4, 0.2));  // one repeated point
  auto candidate = [](const Vec& x) { return Complex(x[0]); };
  CHECK_THROWS_AS(fit_expansion(candidate, pes, 2, degenerate), RankDeficient);
}

TEST_CASE("eigenvalue additivity of product defects") {
  auto ctx = analyze_fixed_point(catalog_system("triangular2d"));
  std::vector<eigfn::PrincipalEigenfunction> pes{principal_fixed_point(ctx, 0),
                                                 principal_fixed_point(ctx, 1)};
  std::vector<Vec> samples{vec2(0.4, 0.3), vec2(-0.3, 0.5)};
  std::vector<double> times{0.5, 1.0, 2.0};

  auto d0 = eigfn::eigen_defect(ctx->sys, [&](const Vec& x) { return pes[0].evaluate(x); },
                                pes[0].mu(), samples, times);
  auto d1 = eigfn::eigen_defect(ctx->sys, [&](const Vec& x) { return pes[1].evaluate(x); },
                                pes[1].mu(), samples, times);
  auto prod = product_eigenfunction(pes, {1, 1}, {0, 0});
  auto dp = eigfn::eigen_defect(ctx->sys, [&](const Vec& x) { return prod.evaluate(x); },
                                prod.eigenvalue(), samples, times);
  CHECK(dp <= 2.0 * (d0 + d1) + 1e-8);
}

TEST_CASE("fitted terms stay on the lattice") {
  auto ctx = analyze_fixed_point(catalog_system("triangular2d"));
  std::vector<eigfn::PrincipalEigenfunction> pes{principal_fixed_point(ctx, 0),
                                                 principal_fixed_point(ctx, 1)};
  auto samples = box_samples(ctx->sys, 80);
  auto candidate = [](const Vec& x) {
    const Complex p1(x[0]);
    const Complex p2(x[1] - 2.0 * x[0] * x[0]);
    return 0.7 * p1 * p1 - 1.1 * p2 + 0.25 * p1 * p2;
  };
  auto fit = fit_expansion(candidate, pes, 2, samples);
  CHECK(fit.residual <= 1e-7);
  auto lattice = build_lattice(ctx->fp, 2);
  for (const auto& term : fit.terms) {
    if (std::abs(term.coefficient) < 1e-6) continue;
    Complex value(0.0, 0.0);
    for (int s = 0; s < 2; ++s) {
      value += static_cast<double>(term.index.i[static_cast<std::size_t>(s)]) * pes[static_cast<std::size_t>(s)].mu();
      value += static_cast<double>(term.index.ell[static_cast<std::size_t>(s)]) *
               std::conj(pes[static_cast<std::size_t>(s)].mu());
    }
    CHECK(!match_eigenvalue(lattice, value).empty());
  }
}

TEST_CASE("conjugating the candidate conjugates and swaps the coefficients") {
  auto ctx = analyze_fixed_point(catalog_system("focus2d"));
  std::vector<eigfn::PrincipalEigenfunction> pes{principal_fixed_point(ctx, 0),
                                                 principal_fixed_point(ctx, 1)};
  // the two principals are complex conjugates of each other
  Vec probe = vec2(0.2, 0.1);
  CHECK(std::abs(pes[0].evaluate(probe) - std::conj(pes[1].evaluate(probe))) < 1e-7);

  auto samples = box_samples(ctx->sys, 90);
  const Complex c(2.0, 1.0);
  auto candidate = [&](const Vec& x) {
    const Complex v = pes[0].evaluate(x);
    return c * v * v;
  };
  auto fit = fit_expansion(candidate, pes, 2, samples);
  auto conj_fit = fit_expansion([&](const Vec& x) { return std::conj(candidate(x)); }, pes, 2,
                                samples);
  CHECK(fit.residual <= 1e-6);
  CHECK(conj_fit.residual <= 1e-6);

  auto coefficient_at = [](const ExpansionFit& f, const MultiIndex& i) {
    for (const auto& term : f.terms)
      if (term.index.i == i && term.index.ell == MultiIndex{0, 0}) return term.coefficient;
    return Complex(0.0, 0.0);
  };
  CHECK(std::abs(coefficient_at(fit, {2, 0}) - c) < 1e-6);
  CHECK(std::abs(coefficient_at(conj_fit, {0, 2}) - std::conj(c)) < 1e-6);
}
