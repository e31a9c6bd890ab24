#include "eigenflow/system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eigenflow/errors.hpp"

namespace eigenflow::dynamics {

std::string to_string(AttractorKind k) {
  return k == AttractorKind::fixed_point ? "fixed_point" : "periodic_orbit";
}

AttractorKind attractor_kind_from_string(const std::string& s) {
  if (s == "fixed_point") return AttractorKind::fixed_point;
  if (s == "periodic_orbit") return AttractorKind::periodic_orbit;
  throw UsageError("unknown attractor kind: " + s);
}

PolynomialField::PolynomialField(PolynomialComponents components)
    : components_(std::move(components)) {
  n_ = static_cast<int>(components_.size());
  for (const auto& comp : components_)
    for (const auto& term : comp) {
      if (static_cast<int>(term.exponents.size()) != n_)
        throw UsageError("PolynomialField: exponent multi-index length mismatch");
      if (!std::isfinite(term.coeff)) throw UsageError("PolynomialField: non-finite coefficient");
      max_degree_ = std::max(max_degree_, degree(term.exponents));
    }
}

void PolynomialField::eval(const Vec& x, Vec& out) const {
  out.setZero(n_);
  for (int c = 0; c < n_; ++c) {
    double acc = 0.0;
    for (const auto& term : components_[static_cast<std::size_t>(c)]) {
      double v = term.coeff;
      for (int j = 0; j < n_; ++j) {
        const int e = term.exponents[static_cast<std::size_t>(j)];
        for (int p = 0; p < e; ++p) v *= x[j];
      }
      acc += v;
    }
    out[c] = acc;
  }
}

Mat PolynomialField::jacobian(const Vec& x) const {
  Mat j = Mat::Zero(n_, n_);
  for (int c = 0; c < n_; ++c) {
    for (const auto& term : components_[static_cast<std::size_t>(c)]) {
      for (int v = 0; v < n_; ++v) {
        const int ev = term.exponents[static_cast<std::size_t>(v)];
        if (ev == 0) continue;
        double d = term.coeff * ev;
        for (int k = 0; k < n_; ++k) {
          const int e = term.exponents[static_cast<std::size_t>(k)] - (k == v ? 1 : 0);
          for (int p = 0; p < e; ++p) d *= x[k];
        }
        j(c, v) += d;
      }
    }
  }
  return j;
}

jets::JetVec PolynomialField::eval_jet(const jets::JetVec& x) const {
  if (static_cast<int>(x.size()) != n_) throw UsageError("eval_jet: dimension mismatch");
  auto space = x[0].space();

  // memoize truncated powers of each input jet up to the largest exponent used
  std::vector<int> max_exp(x.size(), 0);
  for (const auto& comp : components_)
    for (const auto& term : comp)
      for (int j = 0; j < n_; ++j)
        max_exp[static_cast<std::size_t>(j)] =
            std::max(max_exp[static_cast<std::size_t>(j)], term.exponents[static_cast<std::size_t>(j)]);
  std::vector<std::vector<jets::Jet>> pw(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    pw[i].push_back(jets::Jet::constant(space, 1.0));
    for (int e = 1; e <= max_exp[i]; ++e) pw[i].push_back(pw[i].back() * x[i]);
  }

  jets::JetVec out;
  out.reserve(static_cast<std::size_t>(n_));
  for (int c = 0; c < n_; ++c) {
    jets::Jet acc(space);
    for (const auto& term : components_[static_cast<std::size_t>(c)]) {
      jets::Jet t = jets::Jet::constant(space, term.coeff);
      for (int j = 0; j < n_; ++j) {
        const int e = term.exponents[static_cast<std::size_t>(j)];
        if (e > 0) t = t * pw[static_cast<std::size_t>(j)][static_cast<std::size_t>(e)];
      }
      acc += t;
    }
    out.push_back(std::move(acc));
  }
  return out;
}

namespace {

MultiIndex exps(std::initializer_list<int> e) { return MultiIndex(e); }

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

Box box1(double lo, double hi) {
  Box b;
  b.lo = Vec::Constant(1, lo);
  b.hi = Vec::Constant(1, hi);
  return b;
}

Box box_n(int n, double lo, double hi) {
  Box b;
  b.lo = Vec::Constant(n, lo);
  b.hi = Vec::Constant(n, hi);
  return b;
}

// Planar field with circular limit cycle r = 1, linear radial normal form:
// with u = x^2 + y^2, the quantity u - 1 decays exactly like e^{-kappa t}
// while the angle advances at rate omega.
class RadialLinearField : public VectorField {
 public:
  RadialLinearField(double kappa, double omega, bool with_z)
      : kappa_(kappa), omega_(omega), with_z_(with_z) {}

  int dimension() const override { return with_z_ ? 3 : 2; }

  void eval(const Vec& x, Vec& out) const override {
    const double u = x[0] * x[0] + x[1] * x[1];
    if (u <= 0.0) throw SingularInput("radial field: evaluation at the origin");
    const double g = -0.5 * kappa_ * (u - 1.0) / u;
    out.resize(dimension());
    out[0] = g * x[0] - omega_ * x[1];
    out[1] = g * x[1] + omega_ * x[0];
    if (with_z_) out[2] = -2.0 * x[2];
  }

  Mat jacobian(const Vec& x) const override {
    const double u = x[0] * x[0] + x[1] * x[1];
    if (u <= 0.0) throw SingularInput("radial field: evaluation at the origin");
    const double s = u - 1.0;
    // d/dxj of g*xi with g = -kappa/2 * s / u
    // dg/du = -kappa/2 * (u - s)/u^2 = -kappa/2 * 1/u^2
    const double dgdu = -0.5 * kappa_ / (u * u);
    const double g = -0.5 * kappa_ * s / u;
    Mat j = Mat::Zero(dimension(), dimension());
    const double du_dx = 2.0 * x[0], du_dy = 2.0 * x[1];
    j(0, 0) = dgdu * du_dx * x[0] + g;
    j(0, 1) = dgdu * du_dy * x[0] - omega_;
    j(1, 0) = dgdu * du_dx * x[1] + omega_;
    j(1, 1) = dgdu * du_dy * x[1] + g;
    if (with_z_) j(2, 2) = -2.0;
    return j;
  }

  jets::JetVec eval_jet(const jets::JetVec& x) const override {
    auto space = x[0].space();
    jets::Jet u = x[0] * x[0] + x[1] * x[1];
    jets::Jet inv_u = u.reciprocal();
    jets::Jet g = (u - jets::Jet::constant(space, 1.0)) * inv_u * Complex(-0.5 * kappa_);
    jets::JetVec out;
    out.push_back(g * x[0] - x[1] * Complex(omega_));
    out.push_back(g * x[1] + x[0] * Complex(omega_));
    if (with_z_) out.push_back(x[2] * Complex(-2.0));
    return out;
  }

 private:
  double kappa_, omega_;
  bool with_z_;
};

}  // namespace

SystemSpec make_polynomial_system(AttractorKind kind, PolynomialComponents components,
                                  std::optional<Box> domain) {
  SystemSpec sys;
  auto field = std::make_shared<PolynomialField>(std::move(components));
  sys.dimension = field->dimension();
  sys.kind = kind;
  sys.field = std::move(field);
  sys.domain = std::move(domain);
  sys.initial_guess = Vec::Constant(sys.dimension, 0.3);
  return sys;
}

std::vector<std::string> catalog_names() {
  return {"linear",  "cubic1d",       "triangular2d",  "resonant2d",
          "focus2d", "stuart_landau", "radial2d",      "resonant_cycle3d"};
}

SystemSpec catalog_system(const std::string& name, const std::map<std::string, double>& params) {
  SystemSpec sys;
  sys.name = name;
  sys.params = params;

  if (name == "linear") {
    // x' = -x
    sys = make_polynomial_system(AttractorKind::fixed_point,
                                 {{{-1.0, exps({1})}}}, box1(-1.0, 1.0));
    sys.initial_guess = Vec::Constant(1, 0.5);
  } else if (name == "cubic1d") {
    // x' = -x + x^3, attracting on |x| < 1
    sys = make_polynomial_system(AttractorKind::fixed_point,
                                 {{{-1.0, exps({1})}, {1.0, exps({3})}}}, box1(-0.8, 0.8));
    sys.initial_guess = Vec::Constant(1, 0.3);
  } else if (name == "triangular2d") {
    // x1' = -x1, x2' = -2.5 x2 + x1^2
    sys = make_polynomial_system(
        AttractorKind::fixed_point,
        {{{-1.0, exps({1, 0})}},
         {{-2.5, exps({0, 1})}, {1.0, exps({2, 0})}}},
        box_n(2, -1.0, 1.0));
    sys.initial_guess = Vec::Constant(2, 0.3);
  } else if (name == "resonant2d") {
    // x1' = -x1, x2' = -2 x2 + x1^2 : eigenvalue -2 = 2 * (-1) resonates
    sys = make_polynomial_system(
        AttractorKind::fixed_point,
        {{{-1.0, exps({1, 0})}},
         {{-2.0, exps({0, 1})}, {1.0, exps({2, 0})}}},
        box_n(2, -1.0, 1.0));
    sys.initial_guess = Vec::Constant(2, 0.3);
  } else if (name == "focus2d") {
    // stable focus, eigenvalues -0.4 +- i (never resonant: real parts add)
    sys = make_polynomial_system(
        AttractorKind::fixed_point,
        {{{-0.4, exps({1, 0})}, {-1.0, exps({0, 1})}},
         {{1.0, exps({1, 0})}, {-0.4, exps({0, 1})}, {0.5, exps({2, 0})}}},
        box_n(2, -0.5, 0.5));
    sys.initial_guess = Vec::Constant(2, 0.2);
  } else if (name == "stuart_landau") {
    const double omega = param_or(params, "omega", 1.0);
    // x' = x - omega y - x (x^2 + y^2), y' = omega x + y - y (x^2 + y^2)
    sys = make_polynomial_system(
        AttractorKind::periodic_orbit,
        {{{1.0, exps({1, 0})}, {-omega, exps({0, 1})}, {-1.0, exps({3, 0})}, {-1.0, exps({1, 2})}},
         {{omega, exps({1, 0})}, {1.0, exps({0, 1})}, {-1.0, exps({2, 1})}, {-1.0, exps({0, 3})}}},
        box_n(2, -1.5, 1.5));
    sys.initial_guess = (Vec(2) << 1.05, 0.0).finished();
    sys.period_guess = 2.0 * std::numbers::pi / omega;
  } else if (name == "radial2d") {
    const double kappa = param_or(params, "kappa", 1.0);
    const double omega = param_or(params, "omega", 1.0);
    sys.dimension = 2;
    sys.kind = AttractorKind::periodic_orbit;
    sys.field = std::make_shared<RadialLinearField>(kappa, omega, false);
    sys.domain = box_n(2, -1.5, 1.5);
    sys.initial_guess = (Vec(2) << 1.02, 0.0).finished();
    sys.period_guess = 2.0 * std::numbers::pi / omega;
  } else if (name == "resonant_cycle3d") {
    const double omega = param_or(params, "omega", 1.0);
    // Floquet exponents -1 and -2 on the stable directions: resonant pair.
    sys.dimension = 3;
    sys.kind = AttractorKind::periodic_orbit;
    sys.field = std::make_shared<RadialLinearField>(1.0, omega, true);
    sys.domain = box_n(3, -1.5, 1.5);
    sys.initial_guess = (Vec(3) << 1.02, 0.0, 0.05).finished();
    sys.period_guess = 2.0 * std::numbers::pi / omega;
  } else {
    throw UsageError("unknown catalog system: " + name);
  }

  sys.name = name;
  sys.params = params;
  return sys;
}

}  // namespace eigenflow::dynamics
