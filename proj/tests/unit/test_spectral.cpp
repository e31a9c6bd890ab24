#include "doctest.h"

#include <cmath>
#include <random>

#include "eigenflow/spectral.hpp"
#include "test_util.hpp"

using namespace eigenflow;
using namespace eigenflow::spectral;
using ef_test::random_matrix;
using ef_test::random_stable_matrix;

namespace {

// Independent oracle: plain nested enumeration of every multi-index with
// 2 <= |m| <= k, no pruning, no shortcuts.
bool brute_force_nonresonant(const CVec& mu, const CVec& lambda, int k, double tol,
                             int pos = 0, MultiIndex* m = nullptr) {
  MultiIndex local;
  if (m == nullptr) {
    local.assign(static_cast<std::size_t>(lambda.size()), 0);
    m = &local;
  }
  if (pos == lambda.size()) {
    const int d = degree(*m);
    if (d < 2 || d > k) return true;
    Complex lm(1.0, 0.0);
    for (int j = 0; j < lambda.size(); ++j)
      for (int e = 0; e < (*m)[static_cast<std::size_t>(j)]; ++e) lm *= lambda[j];
    for (int i = 0; i < mu.size(); ++i)
      if (std::abs(mu[i] - lm) <= tol) return false;
    return true;
  }
  for (int e = 0; degree(*m) + e <= k; ++e) {
    (*m)[static_cast<std::size_t>(pos)] = e;
    if (!brute_force_nonresonant(mu, lambda, k, tol, pos + 1, m)) return false;
  }
  (*m)[static_cast<std::size_t>(pos)] = 0;
  return true;
}

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("decompose: diagonal case") {
  auto sd = SpectralData::decompose(diag2(0.5, 0.25));
  CHECK(std::abs(sd.eigenvalues()[0] - Complex(0.5)) < 1e-12);
  CHECK(std::abs(sd.eigenvalues()[1] - Complex(0.25)) < 1e-12);
  CHECK(sd.distinct());
  CHECK(sd.semisimple());
  CHECK(!sd.ill_conditioned());
}

TEST_CASE("decompose: repeated eigenvalue on the identity") {
  Mat eye = Mat::Identity(2, 2);
  auto sd = SpectralData::decompose(eye);
  CHECK(std::abs(sd.eigenvalues()[0] - Complex(1.0)) < 1e-12);
  CHECK(std::abs(sd.eigenvalues()[1] - Complex(1.0)) < 1e-12);
  CHECK(!sd.distinct());
  CHECK(sd.semisimple());  // trivially diagonalizable
}

TEST_CASE("decompose: rotation gives a conjugate pair") {
  Mat a(2, 2);
  a << 0, 1, -1, 0;
  auto sd = SpectralData::decompose(a);
  // characteristic polynomial lambda^2 + 1 by hand: eigenvalues +-i
  CHECK(std::abs(sd.eigenvalues()[0] - Complex(0, 1)) < 1e-12);
  CHECK(std::abs(sd.eigenvalues()[1] - Complex(0, -1)) < 1e-12);
  CHECK(sd.distinct());
}

TEST_CASE("decompose: defective matrix is flagged non-semisimple") {
  Mat a(2, 2);
  a << 0.5, 1.0, 0.0, 0.5;
  auto sd = SpectralData::decompose(a);
  CHECK(!sd.distinct());
  CHECK(!sd.semisimple());
  CHECK(sd.ill_conditioned());
}

TEST_CASE("decompose invariants on random matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    Mat a = random_matrix(n, rng);
    auto sd = SpectralData::decompose(a);
    const double scale = a.norm();

    // right/left eigenpair residuals
    for (int i = 0; i < n; ++i) {
      CVec v = sd.right_vectors().col(i);
      CHECK((a.cast<Complex>() * v - sd.eigenvalues()[i] * v).norm() <= 1e-8 * scale);
      if (sd.distinct()) {
        CVec w = sd.left_vectors().col(i);
        CHECK((a.cast<Complex>().adjoint() * w - std::conj(sd.eigenvalues()[i]) * w).norm() <=
              1e-6 * scale * w.norm());
      }
    }
    // biorthogonality
    if (sd.distinct()) {
      CMat gram = sd.left_vectors().adjoint() * sd.right_vectors();
      CHECK((gram - CMat::Identity(n, n)).norm() < 1e-8 * gram.norm() + 1e-10);
    }
    // conjugate closure of the spectrum
    for (int i = 0; i < n; ++i) {
      const Complex lam = std::conj(sd.eigenvalues()[i]);
      double best = 1e300;
      for (int j = 0; j < n; ++j) best = std::min(best, std::abs(sd.eigenvalues()[j] - lam));
      CHECK(best < 1e-9 * (1.0 + scale));
    }
  }
}

TEST_CASE("spectral_spread examples") {
  auto e1 = SpectralData::from_eigenvalues((CVec(1) << std::exp(-1.0)).finished());
  auto e12 = SpectralData::from_eigenvalues(
      (CVec(2) << std::exp(-1.0), std::exp(-2.0)).finished());
  CHECK(spectral_spread(e1, e12) == doctest::Approx(1.0));  // max of 1 and 0.5

  auto half = SpectralData::from_eigenvalues((CVec(1) << 0.5).finished());
  CHECK(spectral_spread(half, half) == doctest::Approx(1.0));

  auto quarter = SpectralData::from_eigenvalues((CVec(1) << 0.25).finished());
  CHECK(spectral_spread(quarter, half) == doctest::Approx(2.0));  // ln .25 / ln .5
}

TEST_CASE("spectral_spread error paths") {
  auto stable = SpectralData::from_eigenvalues((CVec(1) << 0.5).finished());
  auto unstable = SpectralData::from_eigenvalues((CVec(1) << 1.5).finished());
  auto singular = SpectralData::from_eigenvalues((CVec(1) << 0.0).finished());
  CHECK_THROWS_AS(spectral_spread(stable, unstable), NotStable);
  CHECK_THROWS_AS(spectral_spread(singular, stable), SingularInput);
}

TEST_CASE("spectral_spread sign and self-spread properties") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    auto x = SpectralData::decompose(random_stable_matrix(n, rng));
    auto y = SpectralData::decompose(random_stable_matrix(n, rng));
    CHECK(spectral_spread(x, y) >= 0.0);
    CHECK(spectral_spread(y, y) >= 1.0 - 1e-12);
  }
}

TEST_CASE("check_k_nonresonance: planted resonance 0.25 = 0.5^2") {
  auto sd = SpectralData::decompose(diag2(0.5, 0.25));
  auto report = check_k_nonresonance(sd, sd, 2);
  REQUIRE(!report.nonresonant);
  REQUIRE(report.witnesses.size() >= 1);
  const auto& w = report.witnesses.front();
  CHECK(w.i == 2);  // 1-based, eigenvalues sorted descending
  CHECK(w.m == MultiIndex{2, 0});
  CHECK(w.gap <= 1e-12);
}

TEST_CASE("check_k_nonresonance: k = 1 holds vacuously") {
  std::mt19937_64 rng(3);
  auto sd = SpectralData::decompose(random_matrix(3, rng));
  auto report = check_k_nonresonance(sd, sd, 1);
  CHECK(report.nonresonant);
  CHECK(report.witnesses.empty());
}

TEST_CASE("check_k_nonresonance agrees with the brute-force oracle") {
  auto sd = SpectralData::decompose(diag2(0.5, 0.3));
  auto report = check_k_nonresonance(sd, sd, 5);
  CHECK(report.nonresonant);
  CHECK(brute_force_nonresonant(sd.eigenvalues(), sd.eigenvalues(), 5, 1e-9));

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    auto a = SpectralData::decompose(random_stable_matrix(n, rng));
    for (int k = 2; k <= 6; ++k) {
      CHECK(check_k_nonresonance(a, a, k).nonresonant ==
            brute_force_nonresonant(a.eigenvalues(), a.eigenvalues(), k, 1e-9));
    }
  }
}

TEST_CASE("witness sets are nested in k") {
  auto sd = SpectralData::decompose(diag2(0.5, 0.25));
  auto r2 = check_k_nonresonance(sd, sd, 2);
  auto r6 = check_k_nonresonance(sd, sd, 6);
  for (const auto& w : r2.witnesses) {
    bool found = false;
    for (const auto& v : r6.witnesses) found = found || (v.i == w.i && v.m == w.m);
    CHECK(found);
  }
  CHECK(r6.witnesses.size() >= r2.witnesses.size());
}

TEST_CASE("check_infinity_nonresonance: finite reduction bound") {
  auto sd = SpectralData::decompose(diag2(0.5, 0.3));
  auto report = check_infinity_nonresonance(sd, sd);
  CHECK(report.infinite);
  CHECK(report.spread == doctest::Approx(std::log(0.3) / std::log(0.5)).epsilon(1e-12));
  CHECK(report.reduction_bound == 1);  // floor(1.7369...)
  CHECK(report.nonresonant);

  auto res = SpectralData::decompose(diag2(0.5, 0.25));
  auto report2 = check_infinity_nonresonance(res, res);
  CHECK(!report2.nonresonant);
  CHECK(report2.witnesses.front().m == MultiIndex{2, 0});
}

TEST_CASE("check_infinity_nonresonance: single eigenvalue is vacuous") {
  Mat a(1, 1);
  a << 0.9;
  auto sd = SpectralData::decompose(a);
  auto report = check_infinity_nonresonance(sd, sd);
  CHECK(report.reduction_bound == 1);
  CHECK(report.nonresonant);
}

TEST_CASE("infinity decision matches brute force k = 2..10 on random stable matrices") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    auto a = SpectralData::decompose(random_stable_matrix(n, rng));
    const bool inf_decision = check_infinity_nonresonance(a, a).nonresonant;
    bool brute = true;
    for (int k = 2; k <= 10; ++k)
      brute = brute && brute_force_nonresonant(a.eigenvalues(), a.eigenvalues(), k, 1e-9);
    CHECK(inf_decision == brute);
  }
}

TEST_CASE("in_script_N examples") {
  CHECK(in_script_N(SpectralData::decompose(diag2(0.5, 0.3))).member);
  CHECK(!in_script_N(SpectralData::decompose(diag2(0.5, 0.5))).member);   // not distinct
  CHECK(!in_script_N(SpectralData::decompose(diag2(0.5, 0.25))).member);  // resonant

  CHECK_THROWS_AS(in_script_N(SpectralData::decompose(diag2(0.5, 0.0))), SingularInput);
  CHECK_THROWS_AS(in_script_N(SpectralData::decompose(diag2(0.5, 1.5))), NotStable);
}

TEST_CASE("in_script_N is invariant under well-conditioned similarity") {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Mat a = random_stable_matrix(2 + static_cast<int>(rng() % 2), rng);
    const int n = static_cast<int>(a.rows());
    Mat p = random_matrix(n, rng) + 3.0 * Mat::Identity(n, n);
    if (std::abs(p.determinant()) < 0.5) continue;
    Mat conj = p * a * p.inverse();
    bool lhs = in_script_N(SpectralData::decompose(a)).member;
    bool rhs = in_script_N(SpectralData::decompose(conj)).member;
    CHECK(lhs == rhs);
    ++checked;
  }
  CHECK(checked > 20);
}
