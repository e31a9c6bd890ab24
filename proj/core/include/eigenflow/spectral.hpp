#pragma once

#include <optional>
#include <vector>

#include "eigenflow/errors.hpp"
#include "eigenflow/multiindex.hpp"
#include "eigenflow/types.hpp"

namespace eigenflow::spectral {

// Eigenstructure of (the complexification of) a square matrix.
//
// Eigenvalues are repeated with algebraic multiplicity and sorted by
// descending real part (ties by descending imaginary part).  Right
// eigenvectors are the columns of right_vectors; left vectors satisfy
// A* w_i = conj(lambda_i) w_i and are biorthogonally normalized against the
// right ones (w_i* v_j = delta_ij) whenever the spectrum is distinct.
class SpectralData {
 public:
  SpectralData() = default;  // empty; fill via decompose / from_eigenvalues

  static SpectralData decompose(const Mat& a, double tol = 1e-9);
  static SpectralData decompose(const CMat& a, double tol = 1e-9);
  // Spectrum-only view (no eigenvectors); enough for spread/nonresonance work.
  static SpectralData from_eigenvalues(CVec eigenvalues);

  int size() const { return static_cast<int>(eigenvalues_.size()); }
  const CMat& matrix() const { return matrix_; }
  const CVec& eigenvalues() const { return eigenvalues_; }
  const CMat& right_vectors() const { return right_; }
  const CMat& left_vectors() const { return left_; }
  bool has_vectors() const { return right_.size() > 0; }

  bool distinct() const { return distinct_; }
  bool semisimple() const { return semisimple_; }
  double condition_estimate() const { return condition_estimate_; }
  bool ill_conditioned() const { return ill_conditioned_; }
  double distinctness_threshold() const { return tol_sep_; }

  double min_abs_eigenvalue() const;
  double max_abs_eigenvalue() const;
  // All eigenvalues strictly inside the unit disk (membership in S_n).
  bool stable() const { return max_abs_eigenvalue() < 1.0; }

 private:
  void classify_spectrum(double tol);

  CMat matrix_;
  CVec eigenvalues_;
  CMat right_, left_;
  bool distinct_ = false;
  bool semisimple_ = false;
  bool ill_conditioned_ = false;
  double condition_estimate_ = 0.0;
  double tol_sep_ = 0.0;
};

// One violation (or near miss) of the nonresonance condition
// mu_i = lambda_1^{m_1} ... lambda_n^{m_n}.
struct ResonanceWitness {
  int i = 0;  // 1-based index into X's eigenvalue list
  MultiIndex m;
  Complex mu{};
  Complex lambda_m{};
  double gap = 0.0;  // |mu - lambda^m|
};

struct NonresonanceReport {
  int k = 0;                // enumeration bound actually used
  bool infinite = false;    // decision covers every k (via the spread reduction)
  bool nonresonant = true;  // no witness within tolerance
  std::vector<ResonanceWitness> witnesses;
  std::vector<ResonanceWitness> near_misses;  // within 10*tol but not tol
  double spread = 0.0;                        // nu(X, Y) when computed, else NaN
  int reduction_bound = 0;                    // K = floor(nu) for the infinite case
  double tolerance = 0.0;
};

// Spectral spread nu(X, Y) = max over eigenvalue pairs of ln|mu| / ln|lambda|.
// Requires Y stable (all |lambda| < 1) and X nonsingular.
double spectral_spread(const SpectralData& x, const SpectralData& y);

// Tests (X, Y) k-nonresonance: no mu_i equals lambda^m for 2 <= |m| <= k
// within absolute tolerance tol.  k = 1 holds vacuously.
NonresonanceReport check_k_nonresonance(const SpectralData& x, const SpectralData& y,
                                        int k, double tol = 1e-9);

// Decides infinity-nonresonance for stable Y: a resonance mu_i = lambda^m
// forces |m| <= nu(X, Y), so enumerating |m| <= K = floor(nu) is exhaustive.
NonresonanceReport check_infinity_nonresonance(const SpectralData& x, const SpectralData& y,
                                               double tol = 1e-9);

struct ScriptNResult {
  bool member = false;
  bool distinct = false;
  NonresonanceReport report;
};

// Membership of A in the set of invertible matrices with distinct eigenvalues
// whose self-pair (A, A) is infinity-nonresonant.  Decided only for stable A,
// where the finite spread reduction applies.
ScriptNResult in_script_N(const SpectralData& a, double tol = 1e-9);

}  // namespace eigenflow::spectral
