#include "eigenflow/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

namespace eigenflow::classify {

namespace {

Complex ipow(Complex z, int e) {
  if (e < 0) return 1.0 / ipow(z, -e);
  Complex rng(1.0, 0.0);
  while (e > 0) {
    if (e & 1) rng *= z;
    z *= z;
    e >>= 1;
  }
  return rng;
}

void require_lattice_hypotheses(const spectral::SpectralData& sd, const char* what) {
  if (!sd.semisimple() || !sd.distinct()) {
    std::ostringstream os;
    os << "build_lattice: " << what << " is not semisimple with distinct eigenvalues";
    throw HypothesisViolated(os.str());
  }
  auto membership = spectral::in_script_N(sd);
  if (!membership.member) {
    std::ostringstream os;
    os << "build_lattice: " << what << " self-pair is not infinity-nonresonant";
    if (!membership.report.witnesses.empty()) {
      const auto& w = membership.report.witnesses.front();
      os << " (|mu - lambda^m| = " << w.gap << ")";
    }
    throw HypothesisViolated(os.str());
  }
}

void insert_entry(EigenvalueLattice& lattice, Complex value, ProductIndex idx) {
  for (auto& entry : lattice.entries) {
    if (std::abs(entry.value - value) <= lattice.dedup_tol) {
      entry.witnesses.push_back(std::move(idx));
      return;
    }
  }
  lattice.entries.push_back({value, {std::move(idx)}});
}

void fill_entries(EigenvalueLattice& lattice, const CVec& lambda, int degree, int j_lo, int j_hi,
                  double omega) {
  const int n = static_cast<int>(lambda.size());
  for_each_multi_index(2 * n, 0, degree, [&](const MultiIndex& pair) {
    ProductIndex idx;
    idx.i.assign(pair.begin(), pair.begin() + n);
    idx.ell.assign(pair.begin() + n, pair.end());
    Complex base(0.0, 0.0);
    for (int s = 0; s < n; ++s) {
      base += static_cast<double>(idx.i[static_cast<std::size_t>(s)]) * lambda[s];
      base += static_cast<double>(idx.ell[static_cast<std::size_t>(s)]) * std::conj(lambda[s]);
    }
    for (int j = j_lo; j <= j_hi; ++j) {
      ProductIndex with_j = idx;
      with_j.j = j;
      insert_entry(lattice, base + Complex(0.0, omega * j), std::move(with_j));
    }
  });
}

bool is_real_function(const eigfn::PrincipalEigenfunction& pe) {
  return std::abs(pe.mu().imag()) < 1e-12 && pe.seed().imag().cwiseAbs().maxCoeff() < 1e-10;
}

}  // namespace

EigenvalueLattice build_lattice(const dynamics::FixedPointAnalysis& fp, int degree) {
  if (degree < 1) throw UsageError("build_lattice: degree must be >= 1");
  require_lattice_hypotheses(fp.spectral, "time-1 linearization");
  EigenvalueLattice lattice;
  const int n = fp.spectral.size();
  lattice.base_exponents.resize(n);
  for (int i = 0; i < n; ++i) lattice.base_exponents[i] = std::log(fp.spectral.eigenvalues()[i]);
  lattice.degree = degree;
  fill_entries(lattice, lattice.base_exponents, degree, 0, 0, 0.0);
  return lattice;
}

EigenvalueLattice build_lattice(const dynamics::LimitCycleAnalysis& lc, int degree,
                                std::optional<int> j_max) {
  if (degree < 1) throw UsageError("build_lattice: degree must be >= 1");
  require_lattice_hypotheses(lc.restricted_spectral, "restricted monodromy");
  EigenvalueLattice lattice;
  lattice.base_exponents = lc.floquet_exponents;
  lattice.tau = lc.tau;
  lattice.degree = degree;
  lattice.j_max = j_max.value_or(degree);
  const double omega = 2.0 * std::numbers::pi / lc.tau;
  fill_entries(lattice, lattice.base_exponents, degree, -lattice.j_max, lattice.j_max, omega);
  return lattice;
}

std::vector<ProductIndex> match_eigenvalue(const EigenvalueLattice& lattice, Complex mu,
                                           double tol) {
  std::vector<ProductIndex> out;
  for (const auto& entry : lattice.entries)
    if (std::abs(entry.value - mu) <= tol)
      out.insert(out.end(), entry.witnesses.begin(), entry.witnesses.end());
  return out;
}

Complex ProductEigenfunction::evaluate(const Vec& x) const {
  std::vector<const eigfn::PrincipalEigenfunction*> ptrs;
  ptrs.reserve(pes_.size());
  for (const auto& pe : pes_) ptrs.push_back(&pe);
  Complex phase_value(1.0, 0.0);
  std::vector<Complex> values = eigfn::evaluate_many_with_phase(
      ptrs, phase_ ? &*phase_ : nullptr, x, &phase_value);
  Complex out(1.0, 0.0);
  for (std::size_t s = 0; s < pes_.size(); ++s) {
    out *= ipow(values[s], index_.i[s]);
    out *= ipow(std::conj(values[s]), index_.ell[s]);
  }
  if (phase_) out *= ipow(phase_value, index_.j);
  return out;
}

ProductEigenfunction product_eigenfunction(std::vector<eigfn::PrincipalEigenfunction> pes,
                                           MultiIndex i, MultiIndex ell, int j,
                                           std::optional<eigfn::PhaseEigenfunction> phase) {
  if (i.size() != pes.size() || ell.size() != pes.size())
    throw UsageError("product_eigenfunction: index length must match the tuple size");
  if (j != 0 && !phase)
    throw UsageError("product_eigenfunction: phase powers need a phase eigenfunction");
  ProductEigenfunction prod;
  prod.index_ = {std::move(i), std::move(ell), j};
  Complex mu(0.0, 0.0);
  for (std::size_t s = 0; s < pes.size(); ++s) {
    mu += static_cast<double>(prod.index_.i[s]) * pes[s].mu();
    mu += static_cast<double>(prod.index_.ell[s]) * std::conj(pes[s].mu());
  }
  if (phase) mu += static_cast<double>(j) * phase->mu();
  prod.eigenvalue_ = mu;
  prod.pes_ = std::move(pes);
  prod.phase_ = std::move(phase);
  return prod;
}

ProductEigenfunction construct_eigenfunction(std::shared_ptr<const eigfn::FixedPointContext> ctx,
                                             Complex mu, int degree, double tol) {
  EigenvalueLattice lattice = build_lattice(ctx->fp, degree);
  auto witnesses = match_eigenvalue(lattice, mu, tol);
  if (witnesses.empty()) {
    std::ostringstream os;
    os << "construct_eigenfunction: mu = " << mu
       << " is not on the eigenvalue lattice at degree " << degree;
    throw NotAnEigenvalue(os.str());
  }
  const ProductIndex& w = witnesses.front();
  std::vector<eigfn::PrincipalEigenfunction> pes;
  const int n = static_cast<int>(lattice.base_exponents.size());
  for (int s = 0; s < n; ++s) pes.push_back(eigfn::principal_fixed_point(ctx, s));
  return product_eigenfunction(std::move(pes), w.i, w.ell, 0, {});
}

ExpansionFit fit_expansion(const std::function<Complex(const Vec&)>& candidate,
                           const std::vector<eigfn::PrincipalEigenfunction>& pes, int degree,
                           const std::vector<Vec>& samples,
                           const eigfn::PhaseEigenfunction* phase, std::optional<int> j_max,
                           std::optional<Complex> eigenvalue_filter, double filter_tol) {
  const int n = static_cast<int>(pes.size());
  if (n == 0) throw UsageError("fit_expansion: empty principal tuple");
  const int jm = phase ? j_max.value_or(degree) : 0;

  // conjugating a real-valued eigenfunction is a no-op: canonicalize ell into i
  std::vector<bool> real_pe(pes.size());
  for (std::size_t s = 0; s < pes.size(); ++s) real_pe[s] = is_real_function(pes[s]);

  std::vector<ProductIndex> basis;
  for_each_multi_index(2 * n, 0, degree, [&](const MultiIndex& pair) {
    ProductIndex idx;
    idx.i.assign(pair.begin(), pair.begin() + n);
    idx.ell.assign(pair.begin() + n, pair.end());
    for (int s = 0; s < n; ++s) {
      if (real_pe[static_cast<std::size_t>(s)] && idx.ell[static_cast<std::size_t>(s)] > 0) {
        idx.i[static_cast<std::size_t>(s)] += idx.ell[static_cast<std::size_t>(s)];
        idx.ell[static_cast<std::size_t>(s)] = 0;
      }
    }
    for (int j = -jm; j <= jm; ++j) {
      ProductIndex with_j = idx;
      with_j.j = j;
      if (eigenvalue_filter) {
        Complex value(0.0, 0.0);
        for (int s = 0; s < n; ++s) {
          value += static_cast<double>(with_j.i[static_cast<std::size_t>(s)]) * pes[static_cast<std::size_t>(s)].mu();
          value += static_cast<double>(with_j.ell[static_cast<std::size_t>(s)]) *
                   std::conj(pes[static_cast<std::size_t>(s)].mu());
        }
        if (phase) value += static_cast<double>(j) * phase->mu();
        if (std::abs(value - *eigenvalue_filter) > filter_tol) continue;
      }
      bool seen = false;
      for (const auto& b : basis)
        if (b.i == with_j.i && b.ell == with_j.ell && b.j == with_j.j) {
          seen = true;
          break;
        }
      if (!seen) basis.push_back(std::move(with_j));
    }
  });

  if (basis.empty()) throw UsageError("fit_expansion: empty basis (filter too strict?)");
  const int terms = static_cast<int>(basis.size());
  const int count = static_cast<int>(samples.size());
  if (count < 3 * terms) {
    std::ostringstream os;
    os << "fit_expansion: need at least " << 3 * terms << " samples for " << terms
       << " basis terms, got " << count;
    throw UsageError(os.str());
  }

  std::vector<const eigfn::PrincipalEigenfunction*> ptrs;
  for (const auto& pe : pes) ptrs.push_back(&pe);

  CMat a(count, terms);
  CVec b(count);
  for (int r = 0; r < count; ++r) {
    Complex phase_value(1.0, 0.0);
    std::vector<Complex> values =
        eigfn::evaluate_many_with_phase(ptrs, phase, samples[static_cast<std::size_t>(r)],
                                        &phase_value);
    for (int c = 0; c < terms; ++c) {
      const ProductIndex& idx = basis[static_cast<std::size_t>(c)];
      Complex v(1.0, 0.0);
      for (int s = 0; s < n; ++s) {
        v *= ipow(values[static_cast<std::size_t>(s)], idx.i[static_cast<std::size_t>(s)]);
        v *= ipow(std::conj(values[static_cast<std::size_t>(s)]), idx.ell[static_cast<std::size_t>(s)]);
      }
      if (phase) v *= ipow(phase_value, idx.j);
      a(r, c) = v;
    }
    b[r] = candidate(samples[static_cast<std::size_t>(r)]);
  }

  Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) < 1e-12 * sv(0))
    throw RankDeficient("fit_expansion: sampled basis Gram matrix is numerically singular");
  CVec coef = svd.solve(b);

  ExpansionFit fit;
  fit.degree = degree;
  fit.sample_count = count;
  fit.basis_size = terms;
  const double bnorm = b.norm();
  fit.residual = (a * coef - b).norm() / std::max(bnorm, 1e-300);
  for (int c = 0; c < terms; ++c)
    fit.terms.push_back({basis[static_cast<std::size_t>(c)], coef[c]});
  std::sort(fit.terms.begin(), fit.terms.end(), [](const ExpansionTerm& l, const ExpansionTerm& r) {
    return std::abs(l.coefficient) > std::abs(r.coefficient);
  });
  return fit;
}

std::vector<Vec> sample_points(const dynamics::Box& box, int count, const Vec& exclude_center,
                               double exclude_radius) {
  const int dim = static_cast<int>(box.lo.size());
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  if (dim > 8) throw UsageError("sample_points: dimension too large for the Halton bases");

  auto halton = [](int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
      f /= base;
      r += f * (index % base);
      index /= base;
    }
    return r;
  };

  std::vector<Vec> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int index = 1; static_cast<int>(points.size()) < count; ++index) {
    if (index > 1000 * count) throw UsageError("sample_points: exclusion radius rejects everything");
    Vec p(dim);
    for (int d = 0; d < dim; ++d)
      p[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * halton(index, primes[d]);
    if ((p - exclude_center).norm() <= exclude_radius) continue;
    points.push_back(std::move(p));
  }
  return points;
}

}  // namespace eigenflow::classify
