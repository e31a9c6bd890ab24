#pragma once

#include "eigenflow/dynamics.hpp"
#include "eigenflow/jet.hpp"

namespace eigenflow::jets {

// Taylor jet of the time-T flow map around x0: n jets in n variables whose
// constant terms are Phi^T(x0).  Every Taylor coefficient is propagated
// through the coupled variational hierarchy by evaluating the field in jet
// arithmetic along the trajectory.
JetVec time_map_jet(const dynamics::SystemSpec& sys, const Vec& x0, double t, int degree_cap,
                    const dynamics::IntegratorOptions& opts = {1e-12, 1e-11});

// Centered time-1 map jet at a fixed point x0 (constant terms removed).
JetVec time1_jet(const dynamics::SystemSpec& sys, const Vec& x0, int degree_cap,
                 const dynamics::IntegratorOptions& opts = {1e-12, 1e-11});

// Approximate eigenfunction data: P composed with the map reproduces
// multiplier * P up to terms of degree >= order.
struct ApproximateEigenfunction {
  Complex mu{};          // continuous-time eigenvalue (filled by the caller)
  Complex multiplier{};  // eigenvalue of the map's linear part (e^mu, e^{mu tau})
  CVec w;                // seed covector: P's linear part is <w, .>
  Jet P;                 // centered jet in the map's coordinates
  int order = 0;
  double residual_norm = 0.0;  // max |coefficient| of P o F - multiplier P below order
};

// Solves the homological equations for P o F = multiplier * P + O(order) in
// eigencoordinates of F's linear part; each coefficient is a division by
// lambda^m - multiplier, nonzero exactly when the pair is order-nonresonant.
// The seed w must be an adjoint eigenvector of the linear part for the
// multiplier (P's linear part becomes <w, x> = sum_i conj(w_i) x_i).
ApproximateEigenfunction solve_homological(const JetVec& map, Complex multiplier, const CVec& w,
                                           int order);

// Solves U - U o F = rhs for U with zero constant term (stable F, so the
// divisors 1 - lambda^m never vanish).  Used for convergent return-time sums.
Jet solve_transfer(const JetVec& map, const Jet& rhs);

// Poincare section through a limit-cycle point, with the invariant stable
// complement as the section plane.
struct SectionChart {
  Vec x0;
  Mat basis;      // n x (n-1), columns span E^s
  Vec normal;     // unit normal to the plane, oriented along the flow
  Mat coord_map;  // (n-1) x n: xi = coord_map * (y - x0)
  double flow_speed = 0.0;  // <normal, f(x0)>
};

SectionChart make_section(const dynamics::SystemSpec& sys, const dynamics::LimitCycleAnalysis& lc);

// Jet of the first-return map R and of the return time T = tau + delta on the
// section chart, solved from the flow jet by a Newton iteration in jet
// arithmetic on the crossing condition.
struct ReturnMapJet {
  SectionChart chart;
  double tau = 0.0;
  JetVec map;       // R(xi), zero constant term, n-1 variables
  Jet time_offset;  // delta(xi) = T(xi) - tau, zero constant term
};

ReturnMapJet return_map_jet(const dynamics::SystemSpec& sys,
                            const dynamics::LimitCycleAnalysis& lc, int degree_cap,
                            const dynamics::IntegratorOptions& opts = {1e-12, 1e-11});

}  // namespace eigenflow::jets
