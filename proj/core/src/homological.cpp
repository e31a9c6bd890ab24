#include "eigenflow/homological.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

namespace eigenflow::jets {

namespace {

// flatten/unflatten complex jet maps for the real-vector integrator
Vec flatten(const JetVec& jets) {
  const Eigen::Index s = jets[0].coefficients().size();
  Vec out(2 * static_cast<Eigen::Index>(jets.size()) * s);
  Eigen::Index at = 0;
  for (const Jet& j : jets) {
    out.segment(at, s) = j.coefficients().real();
    out.segment(at + s, s) = j.coefficients().imag();
    at += 2 * s;
  }
  return out;
}

JetVec unflatten(const Vec& v, std::shared_ptr<const JetSpace> space, int count) {
  const Eigen::Index s = space->size();
  JetVec jets;
  jets.reserve(static_cast<std::size_t>(count));
  Eigen::Index at = 0;
  for (int i = 0; i < count; ++i) {
    Jet j(space);
    j.coefficients().real() = v.segment(at, s);
    j.coefficients().imag() = v.segment(at + s, s);
    jets.push_back(std::move(j));
    at += 2 * s;
  }
  return jets;
}

JetVec transport(const dynamics::SystemSpec& sys, const JetVec& initial, double t,
                 const dynamics::IntegratorOptions& opts) {
  auto space = initial[0].space();
  const int n = sys.dimension;
  auto field = sys.field;
  dynamics::Rhs rhs = [field, space, n](double, const Vec& y, Vec& dy) {
    JetVec jets = unflatten(y, space, n);
    dy = flatten(field->eval_jet(jets));
  };
  dynamics::IntegratorOptions topts = opts;
  topts.blowup_norm = std::max(topts.blowup_norm, 1e8);
  Vec final = dynamics::integrate(rhs, flatten(initial), 0.0, t, topts);
  return unflatten(final, space, n);
}

// Core coefficient solve for U o F - multiplier * U = rhs, degree by degree in
// eigencoordinates.  When seed_index >= 0 the degree-1 coefficient on that
// eigendirection is fixed (homogeneous eigenfunction case); otherwise degree 1
// is solved like every other order.
struct ConjugacySolver {
  const JetVec& map;
  Complex multiplier;
  int order;

  CMat v, vinv;
  CVec lambda;
  JetVec map_eigen;  // V^{-1} o F o V
  std::shared_ptr<const JetSpace> space;

  void prepare() {
    space = map[0].space();
    const int n = static_cast<int>(map.size());
    CMat linear = jet_map_linear_part(map);
    auto sd = spectral::SpectralData::decompose(linear);
    if (!sd.distinct())
      throw NotSimple("homological solve: map linear part has repeated eigenvalues");
    lambda = sd.eigenvalues();
    v = sd.right_vectors();
    vinv = v.inverse();
    map_eigen.clear();
    JetVec composed;  // F_j o V
    composed.reserve(map.size());
    for (const Jet& f : map) composed.push_back(f.linear_substitution(v));
    for (int i = 0; i < n; ++i) {
      Jet row(space);
      for (int j = 0; j < n; ++j) row += composed[static_cast<std::size_t>(j)] * vinv(i, j);
      map_eigen.push_back(std::move(row));
    }
  }

  // rhs_eigen must be expressed in eigencoordinates already.
  Jet solve(const Jet& rhs_eigen, const Jet& degree_one_init, double divisor_tol) {
    Jet u = degree_one_init;
    const int top = std::min(order - 1, space->degree_cap());
    for (int d = degree_one_init.max_abs() > 0.0 ? 2 : 1; d <= top; ++d) {
      Jet defect = u.compose(map_eigen) - u * multiplier - rhs_eigen;
      for (int r = 0; r < space->size(); ++r) {
        if (space->degree_at(r) != d) continue;
        const Complex c = defect.coefficients()[r];
        const MultiIndex& m = space->index_at(r);
        Complex lm(1.0, 0.0);
        for (int j = 0; j < space->num_vars(); ++j)
          for (int e = 0; e < m[static_cast<std::size_t>(j)]; ++e) lm *= lambda[j];
        const Complex divisor = lm - multiplier;
        if (std::abs(divisor) <= divisor_tol) {
          if (std::abs(c) <= 1e-11) continue;  // consistent: coefficient stays free, pick 0
          std::ostringstream os;
          os << "homological solve: resonant divisor |lambda^m - mu| = " << std::abs(divisor)
             << " at degree " << d;
          throw ResonantDivisor(os.str());
        }
        u.coefficients()[r] -= c / divisor;
      }
    }
    return u;
  }
};

}  // namespace

JetVec time_map_jet(const dynamics::SystemSpec& sys, const Vec& x0, double t, int degree_cap,
                    const dynamics::IntegratorOptions& opts) {
  if (x0.size() != sys.dimension) throw UsageError("time_map_jet: dimension mismatch");
  auto space = JetSpace::get(sys.dimension, degree_cap);
  JetVec initial = identity_jets(space);
  for (int i = 0; i < sys.dimension; ++i)
    initial[static_cast<std::size_t>(i)].set_coefficient(
        MultiIndex(static_cast<std::size_t>(sys.dimension), 0), x0[i]);
  return transport(sys, initial, t, opts);
}

JetVec time1_jet(const dynamics::SystemSpec& sys, const Vec& x0, int degree_cap,
                 const dynamics::IntegratorOptions& opts) {
  JetVec full = time_map_jet(sys, x0, 1.0, degree_cap, opts);
  const MultiIndex zero(static_cast<std::size_t>(sys.dimension), 0);
  for (int i = 0; i < sys.dimension; ++i) {
    Jet& j = full[static_cast<std::size_t>(i)];
    const Complex drift = j.coefficient(zero) - x0[i];
    if (std::abs(drift) > 1e-7)
      throw UsageError("time1_jet: x0 is not a fixed point of the flow");
    j.set_coefficient(zero, 0.0);
  }
  return full;
}

ApproximateEigenfunction solve_homological(const JetVec& map, Complex multiplier, const CVec& w,
                                           int order) {
  if (map.empty()) throw UsageError("solve_homological: empty map");
  if (order < 2) throw UsageError("solve_homological: order must be >= 2");
  const int n = static_cast<int>(map.size());
  if (w.size() != n) throw UsageError("solve_homological: seed dimension mismatch");

  ConjugacySolver solver{map, multiplier, order, {}, {}, {}, {}, {}};
  solver.prepare();

  // locate the eigendirection of the multiplier
  int s = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double gap = std::abs(solver.lambda[i] - multiplier);
    if (gap < best) {
      best = gap;
      s = i;
    }
  }
  if (best > 1e-8 * (1.0 + std::abs(multiplier))) {
    std::ostringstream os;
    os << "solve_homological: multiplier " << multiplier
       << " is not an eigenvalue of the map linear part (closest gap " << best << ")";
    throw NotAnEigenvalue(os.str());
  }

  // seed in eigencoordinates: q = w^* V, supported on direction s only
  CVec q = (w.adjoint() * solver.v).transpose();
  double off = 0.0;
  for (int j = 0; j < n; ++j)
    if (j != s) off = std::max(off, std::abs(q[j]));
  if (off > 1e-6 * q.norm())
    throw UsageError("solve_homological: seed is not an adjoint eigenvector for the multiplier");

  Jet q_init(solver.space);
  MultiIndex e_s(static_cast<std::size_t>(n), 0);
  e_s[static_cast<std::size_t>(s)] = 1;
  q_init.set_coefficient(e_s, q[s]);

  const double divisor_tol = 1e-10 * (1.0 + std::abs(multiplier));
  Jet u = solver.solve(Jet(solver.space), q_init, divisor_tol);

  ApproximateEigenfunction out;
  out.multiplier = multiplier;
  out.w = w;
  out.P = u.linear_substitution(solver.vinv);  // back to original coordinates
  out.order = order;
  Jet residual = out.P.compose(map) - out.P * multiplier;
  out.residual_norm = residual.max_abs_below_degree(order);
  return out;
}

Jet solve_transfer(const JetVec& map, const Jet& rhs) {
  if (std::abs(rhs.constant_term()) > 1e-9)
    throw UsageError("solve_transfer: rhs must have zero constant term");
  ConjugacySolver solver{map, Complex(1.0, 0.0), map[0].degree_cap() + 1, {}, {}, {}, {}, {}};
  solver.prepare();
  // U - U o F = rhs  <=>  U o F - 1 * U = -rhs
  Jet rhs_eigen = (rhs * Complex(-1.0)).linear_substitution(solver.v);
  Jet u = solver.solve(rhs_eigen, Jet(solver.space), 1e-14);
  return u.linear_substitution(solver.vinv);
}

SectionChart make_section(const dynamics::SystemSpec& sys,
                          const dynamics::LimitCycleAnalysis& lc) {
  const int n = sys.dimension;
  SectionChart chart;
  chart.x0 = lc.x0;
  chart.basis = lc.Es_basis;

  // unit normal to span(basis): last column of the full QR
  Eigen::HouseholderQR<Mat> qr(chart.basis);
  Mat q = qr.householderQ();
  chart.normal = q.col(n - 1);
  Vec f0 = (*sys.field)(lc.x0);
  chart.flow_speed = chart.normal.dot(f0);
  if (std::abs(chart.flow_speed) < 1e-10)
    throw DegenerateMonodromy("make_section: flow is tangent to the section plane");
  if (chart.flow_speed < 0.0) {
    chart.normal = -chart.normal;
    chart.flow_speed = -chart.flow_speed;
  }
  chart.coord_map =
      (chart.basis.transpose() * chart.basis).ldlt().solve(chart.basis.transpose());
  return chart;
}

ReturnMapJet return_map_jet(const dynamics::SystemSpec& sys,
                            const dynamics::LimitCycleAnalysis& lc, int degree_cap,
                            const dynamics::IntegratorOptions& opts) {
  const int n = sys.dimension;
  ReturnMapJet out;
  out.chart = make_section(sys, lc);
  out.tau = lc.tau;

  // Combined ring in (xi_1..xi_{n-1}, delta); transport is delta-independent.
  auto space = JetSpace::get(n, degree_cap);
  JetVec initial;
  initial.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Jet j(space);
    j.set_coefficient(MultiIndex(static_cast<std::size_t>(n), 0), lc.x0[i]);
    MultiIndex e(static_cast<std::size_t>(n), 0);
    for (int c = 0; c < n - 1; ++c) {
      e[static_cast<std::size_t>(c)] = 1;
      j.set_coefficient(e, out.chart.basis(i, c));
      e[static_cast<std::size_t>(c)] = 0;
    }
    initial.push_back(std::move(j));
  }
  JetVec flow_jet = transport(sys, initial, lc.tau, opts);

  // Extend in the time direction: F(xi, delta) = Phi^delta(flow_jet(xi)) by
  // Picard iteration, exact on the truncated ring after degree_cap rounds.
  const int delta_var = n - 1;
  JetVec f_ext = flow_jet;
  for (int round = 0; round <= degree_cap; ++round) {
    JetVec rhs = sys.field->eval_jet(f_ext);
    JetVec next;
    next.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      next.push_back(flow_jet[static_cast<std::size_t>(i)] +
                     rhs[static_cast<std::size_t>(i)].antiderivative(delta_var));
    f_ext = std::move(next);
  }

  // crossing condition g(xi, delta) = <normal, F - x0> = 0
  Jet g(space);
  for (int i = 0; i < n; ++i) g += f_ext[static_cast<std::size_t>(i)] * Complex(out.chart.normal[i]);
  g += Jet::constant(space, -out.chart.normal.dot(lc.x0));
  if (std::abs(g.constant_term()) > 1e-7)
    throw NoConvergence("return_map_jet: orbit does not close on the section");
  g.set_coefficient(MultiIndex(static_cast<std::size_t>(n), 0), 0.0);

  // Newton for delta(xi): g(xi, delta(xi)) = 0
  auto sub_space = JetSpace::get(std::max(n - 1, 1), degree_cap);
  Jet g_delta = g.derivative(delta_var);
  Jet delta(sub_space);
  int newton_rounds = 2;
  for (int c = degree_cap; c > 1; c /= 2) ++newton_rounds;
  for (int it = 0; it < newton_rounds; ++it) {
    Jet num = g.substitute_last(delta);
    Jet den = g_delta.substitute_last(delta);
    delta -= num * den.reciprocal();
  }
  out.time_offset = delta;

  // R(xi) = coord_map * (F(xi, delta(xi)) - x0)
  JetVec at_return;
  at_return.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    at_return.push_back(f_ext[static_cast<std::size_t>(i)].substitute_last(delta));
  out.map.clear();
  for (int c = 0; c < n - 1; ++c) {
    Jet r(sub_space);
    for (int i = 0; i < n; ++i)
      r += (at_return[static_cast<std::size_t>(i)] -
            Jet::constant(sub_space, lc.x0[i])) * Complex(out.chart.coord_map(c, i));
    if (std::abs(r.constant_term()) > 1e-7)
      throw NoConvergence("return_map_jet: return map has a nonzero constant term");
    r.set_coefficient(MultiIndex(static_cast<std::size_t>(std::max(n - 1, 1)), 0), 0.0);
    out.map.push_back(std::move(r));
  }
  return out;
}

}  // namespace eigenflow::jets
