#include "eigenflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace eigenflow::spectral {

namespace {

// Canonical eigenvalue order: descending real part, then descending imaginary.
std::vector<int> sort_permutation(const CVec& vals) {
  std::vector<int> p(static_cast<std::size_t>(vals.size()));
  std::iota(p.begin(), p.end(), 0);
  std::sort(p.begin(), p.end(), [&](int a, int b) {
    if (vals[a].real() != vals[b].real()) return vals[a].real() > vals[b].real();
    return vals[a].imag() > vals[b].imag();
  });
  return p;
}

double spectral_condition(const CMat& v) {
  Eigen::JacobiSVD<CMat> svd(v);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

}  // namespace

SpectralData SpectralData::from_eigenvalues(CVec eigenvalues) {
  SpectralData d;
  auto perm = sort_permutation(eigenvalues);
  d.eigenvalues_.resize(eigenvalues.size());
  for (int i = 0; i < eigenvalues.size(); ++i) d.eigenvalues_[i] = eigenvalues[perm[static_cast<std::size_t>(i)]];
  d.classify_spectrum(1e-9);
  d.semisimple_ = d.distinct_;
  d.condition_estimate_ = 1.0;
  return d;
}

SpectralData SpectralData::decompose(const Mat& a, double tol) {
  if (!a.allFinite()) throw DecompositionFailure("decompose: matrix has non-finite entries");
  Eigen::EigenSolver<Mat> es(a);
  if (es.info() != Eigen::Success) throw DecompositionFailure("decompose: eigen solver did not converge");

  SpectralData d;
  d.matrix_ = a.cast<Complex>();
  CVec vals = es.eigenvalues();
  CMat vecs = es.eigenvectors();
  auto perm = sort_permutation(vals);
  const int n = static_cast<int>(vals.size());
  d.eigenvalues_.resize(n);
  d.right_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    d.eigenvalues_[i] = vals[perm[static_cast<std::size_t>(i)]];
    d.right_.col(i) = vecs.col(perm[static_cast<std::size_t>(i)]);
  }
  d.classify_spectrum(tol);

  d.condition_estimate_ = spectral_condition(d.right_);
  d.ill_conditioned_ = !(d.condition_estimate_ < 1.0 / tol);

  if (d.distinct_) {
    // Biorthogonal left vectors: W = (V^{-1})^*, so W^* V = I.
    d.left_ = d.right_.inverse().adjoint();
    d.semisimple_ = true;
  } else {
    // Repeated spectrum: take left vectors from the transposed problem and
    // match by eigenvalue.  Semisimplicity is judged by how well the
    // eigenvector matrix diagonalizes A.
    Eigen::EigenSolver<Mat> est(a.transpose());
    if (est.info() != Eigen::Success) throw DecompositionFailure("decompose: eigen solver did not converge");
    CVec tvals = est.eigenvalues();
    CMat tvecs = est.eigenvectors();
    d.left_.resize(n, n);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
      int best = -1;
      double best_gap = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double gap = std::abs(tvals[j] - d.eigenvalues_[i]);
        if (gap < best_gap) {
          best_gap = gap;
          best = j;
        }
      }
      used[static_cast<std::size_t>(best)] = true;
      // A^T u = lambda u  =>  A* conj(u) = conj(lambda) conj(u)
      d.left_.col(i) = tvecs.col(best).conjugate();
      d.left_.col(i).normalize();
    }
    const double scale = std::max(1.0, a.norm());
    CMat lambda = d.eigenvalues_.asDiagonal();
    double resid = (d.matrix_ * d.right_ - d.right_ * lambda).norm() / scale;
    d.semisimple_ = !d.ill_conditioned_ && resid <= 10.0 * tol;
  }
  return d;
}

SpectralData SpectralData::decompose(const CMat& a, double tol) {
  if (!a.allFinite()) throw DecompositionFailure("decompose: matrix has non-finite entries");
  Eigen::ComplexEigenSolver<CMat> es(a);
  if (es.info() != Eigen::Success) throw DecompositionFailure("decompose: eigen solver did not converge");

  SpectralData d;
  d.matrix_ = a;
  CVec vals = es.eigenvalues();
  CMat vecs = es.eigenvectors();
  auto perm = sort_permutation(vals);
  const int n = static_cast<int>(vals.size());
  d.eigenvalues_.resize(n);
  d.right_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    d.eigenvalues_[i] = vals[perm[static_cast<std::size_t>(i)]];
    d.right_.col(i) = vecs.col(perm[static_cast<std::size_t>(i)]);
  }
  d.classify_spectrum(tol);
  d.condition_estimate_ = spectral_condition(d.right_);
  d.ill_conditioned_ = !(d.condition_estimate_ < 1.0 / tol);
  if (d.distinct_) {
    d.left_ = d.right_.inverse().adjoint();
    d.semisimple_ = true;
  } else {
    d.left_ = CMat();
    CMat lambda = d.eigenvalues_.asDiagonal();
    const double scale = std::max(1.0, a.norm());
    double resid = (d.matrix_ * d.right_ - d.right_ * lambda).norm() / scale;
    d.semisimple_ = !d.ill_conditioned_ && resid <= 10.0 * tol;
  }
  return d;
}

void SpectralData::classify_spectrum(double tol) {
  (void)tol;
  const int n = size();
  const double scale = matrix_.size() > 0 ? matrix_.norm() : 1.0;
  tol_sep_ = 1e-8 * std::max(scale, 1e-300);
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      min_gap = std::min(min_gap, std::abs(eigenvalues_[i] - eigenvalues_[j]));
  distinct_ = (n <= 1) || min_gap > tol_sep_;
}

double SpectralData::min_abs_eigenvalue() const {
  double v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) v = std::min(v, std::abs(eigenvalues_[i]));
  return v;
}

double SpectralData::max_abs_eigenvalue() const {
  double v = 0.0;
  for (int i = 0; i < size(); ++i) v = std::max(v, std::abs(eigenvalues_[i]));
  return v;
}

double spectral_spread(const SpectralData& x, const SpectralData& y) {
  for (int j = 0; j < y.size(); ++j) {
    if (std::abs(y.eigenvalues()[j]) >= 1.0) {
      std::ostringstream os;
      os << "spectral_spread: Y has eigenvalue of modulus " << std::abs(y.eigenvalues()[j])
         << " outside the open unit disk";
      throw NotStable(os.str());
    }
  }
  double nu = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.size(); ++i) {
    const double am = std::abs(x.eigenvalues()[i]);
    if (am == 0.0) throw SingularInput("spectral_spread: X has a zero eigenvalue");
    for (int j = 0; j < y.size(); ++j) {
      const double al = std::abs(y.eigenvalues()[j]);
      // ln|lambda| < 0 by stability; al == 0 contributes ratio 0.
      const double ratio = al == 0.0 ? 0.0 : std::log(am) / std::log(al);
      nu = std::max(nu, ratio);
    }
  }
  return nu;
}

namespace {

// Enumerates lambda^m over 2 <= |m| <= k, pruning branches whose partial
// modulus already falls below every |mu_i| reachable within tolerance.
// Stable Y makes the partial product an upper bound for all completions.
struct ResonanceScan {
  const CVec& mu;
  const CVec& lambda;
  int k;
  double tol;
  double min_mu_abs;
  NonresonanceReport& report;
  MultiIndex m;
  long long nodes = 0;
  static constexpr long long kNodeBudget = 50'000'000;

  void run() {
    m.assign(static_cast<std::size_t>(lambda.size()), 0);
    descend(0, 0, Complex(1.0, 0.0));
  }

  void descend(int pos, int deg, Complex partial) {
    if (++nodes > kNodeBudget)
      throw Error("check_k_nonresonance: enumeration budget exceeded");
    const int n = static_cast<int>(lambda.size());
    if (pos == n) {
      if (deg < 2) return;
      for (int i = 0; i < mu.size(); ++i) {
        const double gap = std::abs(mu[i] - partial);
        if (gap <= tol) {
          report.witnesses.push_back({i + 1, m, mu[i], partial, gap});
        } else if (gap <= 10.0 * tol) {
          report.near_misses.push_back({i + 1, m, mu[i], partial, gap});
        }
      }
      return;
    }
    const double floor_abs = std::max(min_mu_abs - 10.0 * tol, 0.0);
    Complex p = partial;
    for (int e = 0; deg + e <= k; ++e) {
      if (std::abs(p) + 1e-300 < floor_abs) break;  // completions only shrink further
      m[static_cast<std::size_t>(pos)] = e;
      descend(pos + 1, deg + e, p);
      p *= lambda[pos];
    }
    m[static_cast<std::size_t>(pos)] = 0;
  }
};

}  // namespace

NonresonanceReport check_k_nonresonance(const SpectralData& x, const SpectralData& y,
                                        int k, double tol) {
  if (k < 1) throw UsageError("check_k_nonresonance: k must be >= 1");
  NonresonanceReport report;
  report.k = k;
  report.tolerance = tol;
  report.spread = std::numeric_limits<double>::quiet_NaN();
  if (k >= 2 && x.size() > 0 && y.size() > 0) {
    ResonanceScan scan{x.eigenvalues(), y.eigenvalues(), k, tol,
                       x.min_abs_eigenvalue(), report, {}};
    scan.run();
  }
  report.nonresonant = report.witnesses.empty();
  return report;
}

NonresonanceReport check_infinity_nonresonance(const SpectralData& x, const SpectralData& y,
                                               double tol) {
  const double nu = spectral_spread(x, y);  // throws NotStable / SingularInput
  // tiny guard: a resonance at an integer spread must not be floored away
  const int cap = static_cast<int>(std::floor(std::max(nu, 0.0) + 1e-9));
  NonresonanceReport report = check_k_nonresonance(x, y, std::max(cap, 1), tol);
  report.infinite = true;
  report.spread = nu;
  report.reduction_bound = cap;
  return report;
}

ScriptNResult in_script_N(const SpectralData& a, double tol) {
  if (a.min_abs_eigenvalue() <= tol)
    throw SingularInput("in_script_N: matrix has an eigenvalue at zero within tolerance");
  ScriptNResult result;
  result.distinct = a.distinct();
  result.report = check_infinity_nonresonance(a, a, tol);
  result.member = result.distinct && result.report.nonresonant;
  return result;
}

}  // namespace eigenflow::spectral
