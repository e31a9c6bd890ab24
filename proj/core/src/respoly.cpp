#include "eigenflow/respoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "eigenflow/parallel.hpp"

namespace eigenflow::respoly {

namespace {

using Quad = boost::multiprecision::cpp_bin_float_quad;
using QComplex = boost::multiprecision::cpp_complex_quad;

long long factorial(int n) {
  long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// --- dense rational matrix helpers (n is tiny, nothing fancy needed) -------

using RMat = std::vector<Rational>;  // row-major n x n

RMat rational_matrix(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  RMat m(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(i) * n + j] = Rational(a(i, j));
  return m;
}

RMat mat_mul(const RMat& a, const RMat& b, int n) {
  RMat c(static_cast<std::size_t>(n) * n, Rational(0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const Rational& aik = a[static_cast<std::size_t>(i) * n + k];
      if (aik == 0) continue;
      for (int j = 0; j < n; ++j)
        c[static_cast<std::size_t>(i) * n + j] += aik * b[static_cast<std::size_t>(k) * n + j];
    }
  return c;
}

Rational mat_trace(const RMat& a, int n) {
  Rational t(0);
  for (int i = 0; i < n; ++i) t += a[static_cast<std::size_t>(i) * n + i];
  return t;
}

// Determinant by fraction-preserving Gaussian elimination.
template <typename Scalar>
Scalar determinant(std::vector<Scalar> m, int n, bool pivot_by_magnitude) {
  Scalar det(1);
  int sign = 1;
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    if (pivot_by_magnitude) {
      double best = 0.0;
      for (int r = col; r < n; ++r) {
        double mag = std::abs(static_cast<double>(m[static_cast<std::size_t>(r) * n + col]));
        if (pivot < 0 || mag > best) {
          best = mag;
          pivot = r;
        }
      }
      if (best == 0.0) return Scalar(0);
    } else {
      for (int r = col; r < n; ++r)
        if (m[static_cast<std::size_t>(r) * n + col] != 0) {
          pivot = r;
          break;
        }
      if (pivot < 0) return Scalar(0);
    }
    if (pivot != col) {
      for (int j = 0; j < n; ++j)
        std::swap(m[static_cast<std::size_t>(pivot) * n + j], m[static_cast<std::size_t>(col) * n + j]);
      sign = -sign;
    }
    const Scalar& p = m[static_cast<std::size_t>(col) * n + col];
    det *= p;
    for (int r = col + 1; r < n; ++r) {
      Scalar factor = m[static_cast<std::size_t>(r) * n + col] / p;
      if (factor == Scalar(0)) continue;
      for (int j = col; j < n; ++j)
        m[static_cast<std::size_t>(r) * n + j] -= factor * m[static_cast<std::size_t>(col) * n + j];
    }
  }
  return sign > 0 ? det : -det;
}

// Sylvester matrix of p (degree n, monic) and its derivative; its determinant
// is Res(p, p') = prod_i p'(lambda_i), which for monic p equals the ordered
// pair-difference product f.
template <typename Scalar>
Scalar resultant_p_dp(const std::vector<Scalar>& p, bool pivot_by_magnitude) {
  const int n = static_cast<int>(p.size()) - 1;
  if (n <= 1) return Scalar(1);
  std::vector<Scalar> dp(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) dp[static_cast<std::size_t>(i)] = Scalar(n - i) * p[static_cast<std::size_t>(i)];
  const int size = 2 * n - 1;
  std::vector<Scalar> s(static_cast<std::size_t>(size) * size, Scalar(0));
  for (int r = 0; r < n - 1; ++r)
    for (int j = 0; j <= n; ++j) s[static_cast<std::size_t>(r) * size + r + j] = p[static_cast<std::size_t>(j)];
  for (int r = 0; r < n; ++r)
    for (int j = 0; j <= n - 1; ++j)
      s[static_cast<std::size_t>(n - 1 + r) * size + r + j] = dp[static_cast<std::size_t>(j)];
  return determinant(std::move(s), size, pivot_by_magnitude);
}

// --- high precision roots of the characteristic polynomial -----------------

QComplex horner(const std::vector<QComplex>& coeffs, const QComplex& z) {
  QComplex acc(0);
  for (const auto& c : coeffs) acc = acc * z + c;
  return acc;
}

// Durand-Kerner iteration.  Independent of any eigenvalue solver: works from
// the coefficient ring data alone.
std::vector<QComplex> polynomial_roots(const std::vector<Rational>& exact) {
  const int n = static_cast<int>(exact.size()) - 1;
  std::vector<QComplex> c(exact.size());
  Quad cauchy(0);
  for (std::size_t i = 0; i < exact.size(); ++i) {
    c[i] = QComplex(exact[i].convert_to<Quad>());
    if (i > 0) cauchy = std::max(cauchy, abs(c[i].real()));
  }
  const Quad radius = Quad(1) + cauchy;

  std::vector<QComplex> z(static_cast<std::size_t>(n));
  const QComplex seed(Quad("0.4"), Quad("0.9"));
  QComplex acc(1);
  for (int i = 0; i < n; ++i) {
    acc *= seed;
    z[static_cast<std::size_t>(i)] = acc * radius;
  }

  const Quad tol = Quad("1e-34");
  for (int iter = 0; iter < 400; ++iter) {
    Quad worst(0);
    for (int i = 0; i < n; ++i) {
      QComplex denom(1);
      for (int j = 0; j < n; ++j)
        if (j != i) denom *= z[static_cast<std::size_t>(i)] - z[static_cast<std::size_t>(j)];
      if (abs(denom) == 0) continue;
      QComplex delta = horner(c, z[static_cast<std::size_t>(i)]) / denom;
      z[static_cast<std::size_t>(i)] -= delta;
      worst = std::max(worst, abs(delta) / (Quad(1) + abs(z[static_cast<std::size_t>(i)])));
    }
    if (worst < tol) break;
  }

  std::sort(z.begin(), z.end(), [](const QComplex& a, const QComplex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return z;
}

Complex to_complex(const QComplex& z) {
  return {z.real().convert_to<double>(), z.imag().convert_to<double>()};
}

GValue g_product(const std::vector<QComplex>& roots, const MultiIndex& m) {
  const int n = static_cast<int>(roots.size());
  const int max_e = *std::max_element(m.begin(), m.end());
  // power table: pw[j][e] = lambda_j^e
  std::vector<std::vector<QComplex>> pw(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    pw[static_cast<std::size_t>(j)].resize(static_cast<std::size_t>(max_e) + 1);
    pw[static_cast<std::size_t>(j)][0] = QComplex(1);
    for (int e = 1; e <= max_e; ++e)
      pw[static_cast<std::size_t>(j)][static_cast<std::size_t>(e)] =
          pw[static_cast<std::size_t>(j)][static_cast<std::size_t>(e - 1)] * roots[static_cast<std::size_t>(j)];
  }

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  QComplex g(1);
  Quad min_factor = std::numeric_limits<double>::infinity();
  do {
    QComplex monomial(1);
    for (int j = 0; j < n; ++j)
      monomial *= pw[static_cast<std::size_t>(j)][static_cast<std::size_t>(m[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])])];
    for (int i = 0; i < n; ++i) {
      QComplex factor = roots[static_cast<std::size_t>(i)] - monomial;
      min_factor = std::min(min_factor, abs(factor));
      g *= factor;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  GValue out;
  out.value = to_complex(g);
  out.imag_error = std::abs(g.imag().convert_to<double>());
  out.min_factor = min_factor.convert_to<double>();
  return out;
}

// Same product in plain double precision (precision_bits <= 53 path).
GValue g_product_double(const std::vector<Complex>& roots, const MultiIndex& m) {
  const int n = static_cast<int>(roots.size());
  const int max_e = *std::max_element(m.begin(), m.end());
  std::vector<std::vector<Complex>> pw(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    pw[static_cast<std::size_t>(j)].resize(static_cast<std::size_t>(max_e) + 1);
    pw[static_cast<std::size_t>(j)][0] = Complex(1.0);
    for (int e = 1; e <= max_e; ++e)
      pw[static_cast<std::size_t>(j)][static_cast<std::size_t>(e)] =
          pw[static_cast<std::size_t>(j)][static_cast<std::size_t>(e - 1)] * roots[static_cast<std::size_t>(j)];
  }
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Complex g(1.0);
  double min_factor = std::numeric_limits<double>::infinity();
  do {
    Complex monomial(1.0);
    for (int j = 0; j < n; ++j)
      monomial *= pw[static_cast<std::size_t>(j)][static_cast<std::size_t>(m[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])])];
    for (int i = 0; i < n; ++i) {
      Complex factor = roots[static_cast<std::size_t>(i)] - monomial;
      min_factor = std::min(min_factor, std::abs(factor));
      g *= factor;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  GValue out;
  out.value = g;
  out.imag_error = std::abs(g.imag());
  out.min_factor = min_factor;
  return out;
}

void check_permutation_budget(int n, const GOptions& opts) {
  if (factorial(n) > opts.permutation_budget) {
    std::ostringstream os;
    os << "evaluate_G: " << n << "! permutations exceed budget " << opts.permutation_budget;
    throw PermutationBlowup(os.str());
  }
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::in_N: return "in_N";
    case Verdict::resonant: return "resonant";
    case Verdict::degenerate: return "degenerate";
  }
  return "unknown";
}

CharPoly char_poly(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw UsageError("char_poly: matrix must be square");
  CharPoly p;
  p.n = n;
  p.exact_coefficients.assign(static_cast<std::size_t>(n) + 1, Rational(0));
  p.exact_coefficients[0] = 1;
  if (n > 0) {
    // Faddeev-LeVerrier: M_1 = I, c_k = -tr(A M_k)/k, M_{k+1} = A M_k + c_k I.
    RMat ra = rational_matrix(a);
    RMat mk(static_cast<std::size_t>(n) * n, Rational(0));
    for (int i = 0; i < n; ++i) mk[static_cast<std::size_t>(i) * n + i] = 1;
    for (int k = 1; k <= n; ++k) {
      RMat am = mat_mul(ra, mk, n);
      Rational ck = -mat_trace(am, n) / k;
      p.exact_coefficients[static_cast<std::size_t>(k)] = ck;
      if (k < n) {
        for (int i = 0; i < n; ++i) am[static_cast<std::size_t>(i) * n + i] += ck;
        mk = std::move(am);
      }
    }
  }
  p.coefficients.resize(p.exact_coefficients.size());
  for (std::size_t i = 0; i < p.exact_coefficients.size(); ++i)
    p.coefficients[i] = p.exact_coefficients[i].convert_to<double>();
  return p;
}

ExactReal evaluate_F(const Mat& a) {
  CharPoly p = char_poly(a);
  ExactReal out;
  out.exact = resultant_p_dp(p.exact_coefficients, false);
  out.value = out.exact.convert_to<double>();
  return out;
}

double evaluate_F_numeric(const Mat& a) {
  CharPoly p = char_poly(a);
  return resultant_p_dp(p.coefficients, true);
}

GValue evaluate_G(const Mat& a, const MultiIndex& m, const GOptions& opts) {
  const int n = static_cast<int>(a.rows());
  if (static_cast<int>(m.size()) != n) throw UsageError("evaluate_G: multi-index length mismatch");
  if (degree(m) < 2) throw UsageError("evaluate_G: requires |m| >= 2");
  check_permutation_budget(n, opts);
  CharPoly p = char_poly(a);
  if (opts.precision_bits <= 53) {
    auto roots = polynomial_roots(p.exact_coefficients);
    std::vector<Complex> rd(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) rd[i] = to_complex(roots[i]);
    return g_product_double(rd, m);
  }
  return g_product(polynomial_roots(p.exact_coefficients), m);
}

GenericityCertificate certify_genericity(const Mat& a, const CertifyOptions& opts) {
  const int n = static_cast<int>(a.rows());
  GenericityCertificate cert;
  cert.tolerance = opts.tol;

  CharPoly p = char_poly(a);
  auto roots = polynomial_roots(p.exact_coefficients);

  if (opts.exact_F) {
    cert.F_exact = resultant_p_dp(p.exact_coefficients, false);
    cert.F_value = cert.F_exact.convert_to<double>();
    cert.exact = true;
  } else {
    cert.F_value = resultant_p_dp(p.coefficients, true);
    cert.exact = false;
  }

  std::vector<double> moduli(static_cast<std::size_t>(n));
  double min_abs = std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  for (int i = 0; i < n; ++i) {
    moduli[static_cast<std::size_t>(i)] = abs(roots[static_cast<std::size_t>(i)]).convert_to<double>();
    min_abs = std::min(min_abs, moduli[static_cast<std::size_t>(i)]);
    max_abs = std::max(max_abs, moduli[static_cast<std::size_t>(i)]);
  }
  if (n > 0 && min_abs <= opts.tol)
    throw SingularInput("certify_genericity: matrix has an eigenvalue at zero within tolerance");

  cert.min_eigen_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      cert.min_eigen_gap = std::min(
          cert.min_eigen_gap,
          abs(roots[static_cast<std::size_t>(i)] - roots[static_cast<std::size_t>(j)]).convert_to<double>());
  if (n <= 1) cert.min_eigen_gap = std::numeric_limits<double>::infinity();

  // Degenerate: repeated eigenvalue.  The threshold mirrors the eigenvalue
  // distinctness rule (1e-8 * ||A||) so both certificate routes agree.
  const double sep = 1e-8 * std::max(a.norm(), 1e-300);
  if ((cert.exact && cert.F_exact == 0) || cert.min_eigen_gap <= sep ||
      std::abs(cert.F_value) == 0.0) {
    cert.verdict = Verdict::degenerate;
    return cert;
  }

  // Degree bound: any resonance lambda_i = lambda^m forces |m| <= nu(A, A).
  if (max_abs < 1.0) {
    double nu = 0.0;
    for (double mi : moduli)
      for (double mj : moduli) nu = std::max(nu, std::log(mi) / std::log(mj));
    cert.spread = nu;
    cert.K = static_cast<int>(std::floor(nu + 1e-9));
  } else if (opts.K_override >= 0) {
    cert.K = opts.K_override;
    cert.spread = std::numeric_limits<double>::quiet_NaN();
  } else {
    throw NotStable("certify_genericity: matrix not stable and no degree bound supplied");
  }

  if (cert.K >= 2 && n > 0) {
    check_permutation_budget(n, opts.g);
    // Sorted-exponent representatives only: g_m ranges over all permutations,
    // so orbits of m under S_n are covered once.
    std::vector<double> log_mod_desc(moduli.begin(), moduli.end());
    std::sort(log_mod_desc.begin(), log_mod_desc.end(), std::greater<>());
    for (double& v : log_mod_desc) v = std::log(v);
    const double log_floor = std::log(std::max(min_abs - 10.0 * opts.tol, 1e-300));

    std::vector<Complex> roots_double(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) roots_double[i] = to_complex(roots[i]);

    bool resonant = false;
    for_each_multi_index(n, 2, cert.K, [&](const MultiIndex& m) {
      if (resonant) return;
      if (!std::is_sorted(m.begin(), m.end(), std::greater<>())) return;
      // Best achievable |lambda^{m_sigma}| pairs the large exponents with the
      // large moduli; below the floor no factor can vanish.
      double best = 0.0;
      for (int j = 0; j < n; ++j) best += m[static_cast<std::size_t>(j)] * log_mod_desc[static_cast<std::size_t>(j)];
      if (best < log_floor) return;
      GValue g = opts.g.precision_bits <= 53 ? g_product_double(roots_double, m)
                                             : g_product(roots, m);
      cert.G_values[m] = g;
      if (g.min_factor <= opts.tol) {
        resonant = true;
        cert.witness = m;
      }
    });
    if (resonant) {
      cert.verdict = Verdict::resonant;
      return cert;
    }
  }

  cert.verdict = Verdict::in_N;
  return cert;
}

ExperimentResult measure_zero_experiment(int n, std::uint64_t samples, std::uint64_t seed,
                                         const CertifyOptions& opts) {
  if (n < 1) throw UsageError("measure_zero_experiment: dimension must be >= 1");
  if (samples < 1) throw UsageError("measure_zero_experiment: samples must be >= 1");

  ExperimentResult result;
  result.n = n;
  result.samples = samples;
  result.seed = seed;

  std::vector<std::uint8_t> in_n(samples, 0);
  std::vector<ExperimentFailure> failures_by_index(samples);

  parallel_for_index(samples, [&](std::uint64_t i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat a(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) a(r, c) = normal(rng);
    // Rescale into the stable set: spectral radius + margin.
    const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
    a /= (rho + 0.05);
    GenericityCertificate cert = certify_genericity(a, opts);
    if (cert.verdict == Verdict::in_N) {
      in_n[i] = 1;
    } else {
      failures_by_index[i] = {i, a, cert.verdict, cert.witness};
    }
  });

  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    if (in_n[i]) {
      ++hits;
    } else {
      result.failures.push_back(failures_by_index[i]);
    }
  }
  result.fraction = static_cast<double>(hits) / static_cast<double>(samples);
  return result;
}

}  // namespace eigenflow::respoly
