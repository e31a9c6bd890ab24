#pragma once

#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "eigenflow/errors.hpp"
#include "eigenflow/multiindex.hpp"
#include "eigenflow/types.hpp"

namespace eigenflow::jets {

// Shared index bookkeeping for truncated polynomials in n variables with
// total degree <= K: graded-lex multi-index list, rank lookup, and the
// pairwise product table.  Immutable; obtained through the registry.
class JetSpace {
 public:
  JetSpace(int n, int degree_cap);

  int num_vars() const { return n_; }
  int degree_cap() const { return cap_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const MultiIndex& index_at(int rank) const { return indices_[static_cast<std::size_t>(rank)]; }
  int degree_at(int rank) const { return degrees_[static_cast<std::size_t>(rank)]; }
  int rank_of(const MultiIndex& m) const;             // -1 if |m| > K
  int product_rank(int r1, int r2) const {            // -1 if degree overflows
    return products_[static_cast<std::size_t>(r1) * indices_.size() + static_cast<std::size_t>(r2)];
  }

  static std::shared_ptr<const JetSpace> get(int n, int degree_cap);

 private:
  int n_, cap_;
  std::vector<MultiIndex> indices_;
  std::vector<int> degrees_;
  std::unordered_map<MultiIndex, int, MultiIndexHash> ranks_;
  std::vector<int> products_;
};

// Truncated multivariate polynomial (Taylor jet) with complex coefficients.
// All arithmetic truncates above the shared degree cap.
class Jet {
 public:
  Jet() = default;
  explicit Jet(std::shared_ptr<const JetSpace> space);
  static Jet constant(std::shared_ptr<const JetSpace> space, Complex value);
  static Jet variable(std::shared_ptr<const JetSpace> space, int i);

  const std::shared_ptr<const JetSpace>& space() const { return space_; }
  int num_vars() const { return space_->num_vars(); }
  int degree_cap() const { return space_->degree_cap(); }

  Complex coefficient(const MultiIndex& m) const;  // absent means zero
  void set_coefficient(const MultiIndex& m, Complex value);
  const CVec& coefficients() const { return coef_; }
  CVec& coefficients() { return coef_; }

  Complex constant_term() const { return coef_[0]; }
  // Gradient at the expansion point (degree-1 coefficients).
  CVec linear_part() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(Complex s);
  friend Jet operator+(Jet a, const Jet& b) { a += b; return a; }
  friend Jet operator-(Jet a, const Jet& b) { a -= b; return a; }
  friend Jet operator*(Jet a, Complex s) { a *= s; return a; }
  friend Jet operator*(Complex s, Jet a) { a *= s; return a; }
  friend Jet operator*(const Jet& a, const Jet& b);

  // this(b_1, ..., b_n): all b_i share one space and have zero constant term.
  Jet compose(std::span<const Jet> inner) const;

  // P(x) -> P(M x): linear change of coordinates of the arguments.
  Jet linear_substitution(const CMat& m) const;

  Jet derivative(int var) const;
  Jet antiderivative(int var) const;  // truncates at the cap
  // Substitute a jet (over the remaining variables) for the last variable.
  Jet substitute_last(const Jet& value) const;

  // Multiplicative inverse; requires a nonzero constant term.  Exact within
  // the truncation (finite geometric series in the nilpotent part).
  Jet reciprocal() const;

  Jet conjugate_coefficients() const;
  Complex evaluate(const CVec& x) const;

  double max_abs_below_degree(int degree) const;  // max |coef| over |m| < degree
  double max_abs() const;

 private:
  void require_same_space(const Jet& o) const;
  std::shared_ptr<const JetSpace> space_;
  CVec coef_;
};

using JetVec = std::vector<Jet>;  // jet-valued map component list

// Linear part of a centered jet map as a matrix (rows: components).
CMat jet_map_linear_part(const JetVec& map);

// Component-wise composition f(g(.)) for jet maps.
JetVec jet_map_compose(const JetVec& f, const JetVec& g);

// Identity-plus-offset chart: x_i as jets around a point.
JetVec identity_jets(std::shared_ptr<const JetSpace> space);

}  // namespace eigenflow::jets
