#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "eigenflow/eigenfunction.hpp"

namespace eigenflow::classify {

// One product of principal eigenfunctions: psi^[i] * conj(psi)^[ell] * psi_theta^j.
struct ProductIndex {
  MultiIndex i;
  MultiIndex ell;
  int j = 0;
};

struct LatticeEntry {
  Complex value{};
  std::vector<ProductIndex> witnesses;
};

// All eigenvalues realizable by degree-bounded products of the principal
// tuple (and phase powers, for cycles), deduplicated by value.
struct EigenvalueLattice {
  CVec base_exponents;
  std::optional<double> tau;
  int degree = 0;
  int j_max = 0;
  double dedup_tol = 1e-9;
  std::vector<LatticeEntry> entries;
};

// Requires the linearization to be semisimple, with distinct eigenvalues, and
// infinity-nonresonant (throws HypothesisViolated otherwise).
EigenvalueLattice build_lattice(const dynamics::FixedPointAnalysis& fp, int degree);
EigenvalueLattice build_lattice(const dynamics::LimitCycleAnalysis& lc, int degree,
                                std::optional<int> j_max = {});

// Lattice entries matching mu within tol; empty means mu is not a permissible
// eigenvalue at this degree.
std::vector<ProductIndex> match_eigenvalue(const EigenvalueLattice& lattice, Complex mu,
                                           double tol = 1e-8);

// Pointwise product of principal eigenfunction powers; an eigenfunction with
// the summed eigenvalue.
class ProductEigenfunction {
 public:
  Complex eigenvalue() const { return eigenvalue_; }
  const ProductIndex& index() const { return index_; }
  Complex evaluate(const Vec& x) const;

 private:
  friend ProductEigenfunction product_eigenfunction(
      std::vector<eigfn::PrincipalEigenfunction> pes, MultiIndex i, MultiIndex ell, int j,
      std::optional<eigfn::PhaseEigenfunction> phase);
  std::vector<eigfn::PrincipalEigenfunction> pes_;
  std::optional<eigfn::PhaseEigenfunction> phase_;
  ProductIndex index_;
  Complex eigenvalue_{};
};

ProductEigenfunction product_eigenfunction(std::vector<eigfn::PrincipalEigenfunction> pes,
                                           MultiIndex i, MultiIndex ell, int j = 0,
                                           std::optional<eigfn::PhaseEigenfunction> phase = {});

// Builds an eigenfunction for any permissible lattice eigenvalue of a stable
// fixed point: the matching product of principals (a single principal when
// |i| + |ell| = 1).  Throws NotAnEigenvalue when mu is off the lattice.
ProductEigenfunction construct_eigenfunction(std::shared_ptr<const eigfn::FixedPointContext> ctx,
                                             Complex mu, int degree, double tol = 1e-8);

struct ExpansionTerm {
  ProductIndex index;
  Complex coefficient{};
};

struct ExpansionFit {
  int degree = 0;
  std::vector<ExpansionTerm> terms;
  double residual = 0.0;  // relative least-squares residual
  int sample_count = 0;
  int basis_size = 0;
};

// Least-squares expansion of a candidate observable in the product basis
// { psi^[i] conj(psi)^[ell] (psi_theta^j) : |i|+|ell| <= degree }.  When the
// principal tuple is real-valued, conjugate powers collapse onto plain powers
// and the basis is deduplicated accordingly.  An optional eigenvalue filter
// restricts the basis to terms of one lattice eigenvalue.
ExpansionFit fit_expansion(const std::function<Complex(const Vec&)>& candidate,
                           const std::vector<eigfn::PrincipalEigenfunction>& pes, int degree,
                           const std::vector<Vec>& samples,
                           const eigfn::PhaseEigenfunction* phase = nullptr,
                           std::optional<int> j_max = {},
                           std::optional<Complex> eigenvalue_filter = {},
                           double filter_tol = 1e-8);

// Low-discrepancy Halton points inside the box, excluding a ball around the
// attractor (conditioning of the sampled Gram matrix).
std::vector<Vec> sample_points(const dynamics::Box& box, int count, const Vec& exclude_center,
                               double exclude_radius = 1e-3);

}  // namespace eigenflow::classify
