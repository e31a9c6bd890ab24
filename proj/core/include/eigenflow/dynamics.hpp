#pragma once

#include <cstdint>

#include "eigenflow/integrate.hpp"
#include "eigenflow/spectral.hpp"
#include "eigenflow/system.hpp"

namespace eigenflow::dynamics {

struct SolverOptions {
  IntegratorOptions integ{};
  double tol_root_scale = 1e-12;  // fixed point: ||f(x0)|| <= scale * (1 + ||x0||)
  double tol_orbit = 1e-10;       // cycle closure ||Phi^tau(x0) - x0||
  double tol_hyp = 1e-8;          // hyperbolicity band on Re(eigenvalue)
  int max_iterations = 200;
};

// State after time t.  Adaptive-step integration; t may be negative (the
// library itself only integrates forward, but short backward runs are allowed
// for testing).
Vec flow(const SystemSpec& sys, const Vec& x, double t, const IntegratorOptions& opts = {});

// Derivative of the time-t map along the trajectory of x (matrix variational
// equation integrated together with the state).
Mat variational_flow(const SystemSpec& sys, const Vec& x, double t,
                     const IntegratorOptions& opts = {});
std::pair<Vec, Mat> flow_with_jacobian(const SystemSpec& sys, const Vec& x, double t,
                                       const IntegratorOptions& opts = {});

struct FixedPointAnalysis {
  Vec x0;
  Mat jacobian;              // Df(x0)
  Mat time1_linearization;   // exp(Df(x0)) = derivative of the time-1 map
  spectral::SpectralData spectral;  // of the time-1 linearization
  bool hyperbolic_stable = false;
};

// Damped Newton from the guess; throws NoConvergence / NotHyperbolic.
FixedPointAnalysis find_fixed_point(const SystemSpec& sys, const Vec& guess,
                                    const SolverOptions& opts = {});

struct LimitCycleAnalysis {
  Vec x0;            // converged point on the orbit
  double tau = 0.0;  // period
  Mat monodromy;     // derivative of the time-tau map at x0
  Vec floquet_direction;          // f(x0), eigenvector for the trivial multiplier
  Mat Es_basis;                   // n x (n-1), spans the invariant complement E^s
  Mat restricted_monodromy;       // monodromy restricted to E^s in that basis
  CVec floquet_exponents;         // log(multipliers) / tau, principal branch
  spectral::SpectralData restricted_spectral;
};

// Single shooting with an orthogonality phase condition; E^s comes from the
// spectral projection complementary to the trivial multiplier.
LimitCycleAnalysis find_limit_cycle(const SystemSpec& sys, const Vec& guess,
                                    double period_guess, const SolverOptions& opts = {});

struct PerturbationTestResult {
  int trials = 0;
  int survived = 0;       // perturbed system still has linearization in script-N
  int failed = 0;         // linearization left script-N
  int solver_errors = 0;  // attractor re-solve failed (not counted as failures)
  double magnitude = 0.0;
  double fraction = 0.0;  // survived / (trials - solver_errors)
};

// Adds random polynomial perturbations of the given coefficient magnitude,
// re-solves the attractor from the unperturbed solution, and retests
// membership of the linearization in script-N.  Requires a polynomial field
// whose unperturbed linearization is in script-N with margin.
PerturbationTestResult perturbation_openness_test(const SystemSpec& sys, double magnitude,
                                                  int trials, std::uint64_t seed,
                                                  const SolverOptions& opts = {});

}  // namespace eigenflow::dynamics
