#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "eigenflow/errors.hpp"
#include "eigenflow/multiindex.hpp"
#include "eigenflow/types.hpp"

namespace eigenflow::respoly {

using Rational = boost::multiprecision::cpp_rational;

// Monic characteristic polynomial, coefficients in descending degree.
// Computed by the Faddeev-LeVerrier recurrence, i.e. as polynomials in the
// matrix entries, never from an eigenvalue solve.  Double entries are dyadic
// rationals, so the rational coefficients are exact.
struct CharPoly {
  int n = 0;
  std::vector<double> coefficients;        // n + 1 values, leading 1
  std::vector<Rational> exact_coefficients;
};

CharPoly char_poly(const Mat& a);

// A real value carried in both exact rational and double form.
struct ExactReal {
  Rational exact;
  double value = 0.0;
};

// f(lambda) = prod_{j != k} (lambda_j - lambda_k) over ordered pairs,
// evaluated in the coefficient ring as Res(p, p') of the monic
// characteristic polynomial (for monic p this resultant equals f).
// Exact for exactly-representable entries.
ExactReal evaluate_F(const Mat& a);

// Double-only path (Sylvester determinant in floating point).
double evaluate_F_numeric(const Mat& a);

struct GOptions {
  int precision_bits = 113;        // 113 = quad; 53 selects the double path
  long long permutation_budget = 720;  // cap on n! (default allows n <= 6)
};

struct GValue {
  Complex value{};        // product over i and all permutations sigma
  double imag_error = 0.0;  // |Im|, should be roundoff for a real matrix
  double min_factor = 0.0;  // smallest |lambda_i - lambda^{m_sigma}| seen
};

// g_m(lambda) = prod_i prod_{sigma in S_n} (lambda_i - lambda^{m_sigma}),
// from high-precision roots of the characteristic polynomial.
GValue evaluate_G(const Mat& a, const MultiIndex& m, const GOptions& opts = {});

enum class Verdict { in_N, resonant, degenerate };

std::string to_string(Verdict v);

struct GenericityCertificate {
  Verdict verdict = Verdict::in_N;
  bool exact = false;       // F computed in rational arithmetic
  double F_value = 0.0;
  Rational F_exact;
  double min_eigen_gap = 0.0;  // smallest |lambda_j - lambda_k|, j != k
  int K = 0;                   // multi-index degree bound actually needed
  double spread = 0.0;
  std::map<MultiIndex, GValue> G_values;  // sorted representatives, 2 <= |m| <= K
  MultiIndex witness;          // resonant multi-index when verdict == resonant
  double tolerance = 0.0;
};

struct CertifyOptions {
  double tol = 1e-9;       // factor-level equality tolerance
  bool exact_F = true;     // rational-arithmetic F (slower, exact)
  int K_override = -1;     // required when the matrix is not stable
  GOptions g;
};

// Decides membership in the generic set via the polynomial certificates:
// degenerate if a repeated eigenvalue (F route), resonant if some g_m
// vanishes, in_N otherwise.  Multi-index enumeration is cut off at
// K = floor(nu(A, A)), beyond which resonance is impossible by modulus.
// Skipped multi-indices are certified nonzero by the same modulus bound.
// Tolerances act on individual factors so the verdict matches the
// eigenvalue-route decision at a matched tolerance.
GenericityCertificate certify_genericity(const Mat& a, const CertifyOptions& opts = {});

struct ExperimentFailure {
  std::uint64_t sample_index = 0;
  Mat matrix;
  Verdict verdict = Verdict::in_N;
  MultiIndex witness;
};

struct ExperimentResult {
  int n = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double fraction = 0.0;  // fraction of sampled stable matrices lying in script-N
  std::vector<ExperimentFailure> failures;
};

// Monte-Carlo probe of the measure-zero claim: samples i.i.d. standard
// normal matrices rescaled into the stable set, tests membership, returns
// the in-N fraction.  Per-sample RNG streams are derived from (seed, index)
// so the result does not depend on scheduling.
ExperimentResult measure_zero_experiment(int n, std::uint64_t samples, std::uint64_t seed,
                                         const CertifyOptions& opts = {});

}  // namespace eigenflow::respoly
