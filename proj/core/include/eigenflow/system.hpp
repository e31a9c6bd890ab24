#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eigenflow/jet.hpp"
#include "eigenflow/multiindex.hpp"
#include "eigenflow/types.hpp"

namespace eigenflow::dynamics {

enum class AttractorKind { fixed_point, periodic_orbit };

std::string to_string(AttractorKind k);
AttractorKind attractor_kind_from_string(const std::string& s);

// Autonomous vector field on R^n, evaluable on points and on jet tuples
// (the latter drives Taylor transport of flow maps).
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual int dimension() const = 0;
  virtual void eval(const Vec& x, Vec& out) const = 0;
  virtual Mat jacobian(const Vec& x) const = 0;
  virtual jets::JetVec eval_jet(const jets::JetVec& x) const = 0;
  virtual bool is_polynomial() const { return false; }

  Vec operator()(const Vec& x) const {
    Vec out(dimension());
    eval(x, out);
    return out;
  }
};

struct PolynomialTerm {
  double coeff = 0.0;
  MultiIndex exponents;  // length n
};

using PolynomialComponents = std::vector<std::vector<PolynomialTerm>>;

class PolynomialField : public VectorField {
 public:
  explicit PolynomialField(PolynomialComponents components);
  int dimension() const override { return n_; }
  void eval(const Vec& x, Vec& out) const override;
  Mat jacobian(const Vec& x) const override;
  jets::JetVec eval_jet(const jets::JetVec& x) const override;
  bool is_polynomial() const override { return true; }
  const PolynomialComponents& components() const { return components_; }
  int max_degree() const { return max_degree_; }

 private:
  int n_ = 0;
  int max_degree_ = 0;
  PolynomialComponents components_;
};

struct Box {
  Vec lo, hi;
};

// A system under study: vector field plus declared attractor kind, sampling
// domain, and solver starting data.
struct SystemSpec {
  int dimension = 0;
  AttractorKind kind = AttractorKind::fixed_point;
  std::shared_ptr<const VectorField> field;
  std::optional<Box> domain;
  std::string name = "custom";
  std::map<std::string, double> params;
  Vec initial_guess;
  double period_guess = 0.0;
};

SystemSpec make_polynomial_system(AttractorKind kind, PolynomialComponents components,
                                  std::optional<Box> domain = {});

// Built-in systems: linear, cubic1d, triangular2d, resonant2d, focus2d,
// stuart_landau (omega), radial2d (kappa, omega), resonant_cycle3d (omega).
SystemSpec catalog_system(const std::string& name,
                          const std::map<std::string, double>& params = {});
std::vector<std::string> catalog_names();

}  // namespace eigenflow::dynamics
