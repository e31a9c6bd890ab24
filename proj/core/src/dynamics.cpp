#include "eigenflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "eigenflow/parallel.hpp"
#include "eigenflow/respoly.hpp"

namespace eigenflow::dynamics {

namespace {

Rhs make_rhs(const SystemSpec& sys) {
  auto field = sys.field;
  return [field](double, const Vec& y, Vec& dy) { field->eval(y, dy); };
}

// state + variational matrix, flattened column-major after the state
Rhs make_variational_rhs(const SystemSpec& sys) {
  auto field = sys.field;
  const int n = sys.dimension;
  return [field, n](double, const Vec& y, Vec& dy) {
    dy.resize(n + n * n);
    Vec x = y.head(n);
    Vec fx(n);
    field->eval(x, fx);
    dy.head(n) = fx;
    Mat j = field->jacobian(x);
    Eigen::Map<const Mat> m(y.data() + n, n, n);
    Eigen::Map<Mat>(dy.data() + n, n, n) = j * m;
  };
}

}  // namespace

Vec flow(const SystemSpec& sys, const Vec& x, double t, const IntegratorOptions& opts) {
  if (x.size() != sys.dimension) throw UsageError("flow: state dimension mismatch");
  if (!std::isfinite(t)) throw UsageError("flow: non-finite time");
  if (t == 0.0) return x;
  return integrate(make_rhs(sys), x, 0.0, t, opts);
}

std::pair<Vec, Mat> flow_with_jacobian(const SystemSpec& sys, const Vec& x, double t,
                                       const IntegratorOptions& opts) {
  const int n = sys.dimension;
  Vec y0(n + n * n);
  y0.head(n) = x;
  Eigen::Map<Mat>(y0.data() + n, n, n) = Mat::Identity(n, n);
  if (t == 0.0) return {x, Mat::Identity(n, n)};
  Vec y1 = integrate(make_variational_rhs(sys), y0, 0.0, t, opts);
  Mat j = Eigen::Map<const Mat>(y1.data() + n, n, n);
  return {y1.head(n), j};
}

Mat variational_flow(const SystemSpec& sys, const Vec& x, double t,
                     const IntegratorOptions& opts) {
  return flow_with_jacobian(sys, x, t, opts).second;
}

FixedPointAnalysis find_fixed_point(const SystemSpec& sys, const Vec& guess,
                                    const SolverOptions& opts) {
  if (sys.kind != AttractorKind::fixed_point)
    throw UsageError("find_fixed_point: system is not declared as a fixed-point attractor");
  const auto& field = *sys.field;
  Vec x = guess;
  Vec fx = field(x);

  bool converged = false;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double target = opts.tol_root_scale * (1.0 + x.norm());
    if (fx.norm() <= target) {
      converged = true;
      break;
    }
    Mat j = field.jacobian(x);
    Vec step = j.colPivHouseholderQr().solve(-fx);
    if (!step.allFinite()) throw NoConvergence("find_fixed_point: singular Newton step");
    // backtracking on ||f||
    double lambda = 1.0;
    const double base = fx.norm();
    while (lambda > 1e-6) {
      Vec trial = x + lambda * step;
      Vec ftrial = field(trial);
      if (ftrial.norm() < base || ftrial.norm() <= opts.tol_root_scale * (1.0 + trial.norm())) {
        x = trial;
        fx = ftrial;
        break;
      }
      lambda *= 0.5;
    }
    if (lambda <= 1e-6) throw NoConvergence("find_fixed_point: line search stalled");
  }
  if (!converged && fx.norm() > opts.tol_root_scale * (1.0 + x.norm()))
    throw NoConvergence("find_fixed_point: Newton iteration did not converge");

  FixedPointAnalysis out;
  out.x0 = x;
  out.jacobian = field.jacobian(x);
  Eigen::EigenSolver<Mat> es(out.jacobian);
  if (es.info() != Eigen::Success)
    throw DecompositionFailure("find_fixed_point: Jacobian eigen solve failed");
  bool stable = true;
  for (int i = 0; i < sys.dimension; ++i) {
    const double re = es.eigenvalues()[i].real();
    if (std::abs(re) <= opts.tol_hyp) {
      std::ostringstream os;
      os << "find_fixed_point: eigenvalue with real part " << re
         << " inside the hyperbolicity band";
      throw NotHyperbolic(os.str());
    }
    if (re > 0.0) stable = false;
  }
  out.time1_linearization = out.jacobian.exp();
  out.spectral = spectral::SpectralData::decompose(out.time1_linearization);
  out.hyperbolic_stable = stable;
  return out;
}

LimitCycleAnalysis find_limit_cycle(const SystemSpec& sys, const Vec& guess,
                                    double period_guess, const SolverOptions& opts) {
  if (sys.kind != AttractorKind::periodic_orbit)
    throw UsageError("find_limit_cycle: system is not declared as a periodic-orbit attractor");
  if (!(period_guess > 0.0)) throw UsageError("find_limit_cycle: period guess must be positive");
  const int n = sys.dimension;
  const auto& field = *sys.field;

  Vec x = guess;
  double tau = period_guess;
  double resid_norm = std::numeric_limits<double>::infinity();

  try {
    for (int it = 0; it < 60; ++it) {
      auto [xT, m] = flow_with_jacobian(sys, x, tau, opts.integ);
      Vec r = xT - x;
      resid_norm = r.norm();
      if (resid_norm <= opts.tol_orbit) break;

      // Newton on (x, tau) with phase condition <f(x), dx> = 0.
      Vec fx = field(x);
      Vec fT = field(xT);
      Mat a = Mat::Zero(n + 1, n + 1);
      a.topLeftCorner(n, n) = m - Mat::Identity(n, n);
      a.topRightCorner(n, 1) = fT;
      a.bottomLeftCorner(1, n) = fx.transpose();
      Vec rhs = Vec::Zero(n + 1);
      rhs.head(n) = -r;
      Vec delta = a.colPivHouseholderQr().solve(rhs);
      if (!delta.allFinite()) throw NoConvergence("find_limit_cycle: singular shooting step");

      // damped update, keep the period positive
      double lambda = 1.0;
      while (lambda > 1e-4) {
        Vec x_try = x + lambda * delta.head(n);
        double tau_try = tau + lambda * delta[n];
        if (tau_try > 0.1 * period_guess) {
          Vec rT = flow(sys, x_try, tau_try, opts.integ) - x_try;
          if (rT.norm() < resid_norm || rT.norm() <= opts.tol_orbit) {
            x = x_try;
            tau = tau_try;
            break;
          }
        }
        lambda *= 0.5;
      }
      if (lambda <= 1e-4)
        throw NoConvergence("find_limit_cycle: damped shooting step stalled");
    }
  } catch (const BlowUp& e) {
    throw NoConvergence(std::string("find_limit_cycle: trajectory blew up (") + e.what() + ")");
  }
  if (resid_norm > opts.tol_orbit)
    throw NoConvergence("find_limit_cycle: shooting iteration did not converge");
  if (field(x).norm() < 1e-6)
    throw NoConvergence("find_limit_cycle: converged to a stationary point, not a cycle");

  LimitCycleAnalysis out;
  out.x0 = x;
  out.tau = tau;
  out.monodromy = variational_flow(sys, x, tau, opts.integ);
  out.floquet_direction = field(x);

  // The trivial multiplier 1 (eigendirection f(x0)) must be isolated.
  Eigen::EigenSolver<Mat> es(out.monodromy);
  if (es.info() != Eigen::Success)
    throw DecompositionFailure("find_limit_cycle: monodromy eigen solve failed");
  CVec mult = es.eigenvalues();
  int trivial = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double gap = std::abs(mult[i] - Complex(1.0));
    if (gap < best) {
      best = gap;
      trivial = i;
    }
  }
  if (best > 1e-6)
    throw DegenerateMonodromy("find_limit_cycle: no Floquet multiplier near 1");
  for (int i = 0; i < n; ++i) {
    if (i == trivial) continue;
    if (std::abs(mult[i] - Complex(1.0)) < 1e-5)
      throw DegenerateMonodromy("find_limit_cycle: trivial multiplier not isolated");
  }

  // E^s: the span of the non-trivial eigenvectors, realified.
  Mat basis(n, n - 1);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (i == trivial) continue;
    CVec v = es.eigenvectors().col(i);
    if (std::abs(mult[i].imag()) > 1e-12) {
      if (mult[i].imag() < 0.0) continue;  // conjugate partner handled below
      Vec re = v.real(), im = v.imag();
      basis.col(col++) = re / re.norm();
      basis.col(col++) = im / im.norm();
    } else {
      Vec re = v.real();
      basis.col(col++) = re / re.norm();
    }
  }
  if (col != n - 1)
    throw DegenerateMonodromy("find_limit_cycle: could not realify the stable splitting");
  out.Es_basis = basis;

  // restricted monodromy: solve [B f0] * [C; d] = M B; invariance makes d ~ 0
  Mat full(n, n);
  full.leftCols(n - 1) = basis;
  full.col(n - 1) = out.floquet_direction;
  Mat coords = full.colPivHouseholderQr().solve(out.monodromy * basis);
  out.restricted_monodromy = coords.topRows(n - 1);
  out.restricted_spectral = spectral::SpectralData::decompose(out.restricted_monodromy);

  out.floquet_exponents.resize(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    const Complex m = out.restricted_spectral.eigenvalues()[i];
    out.floquet_exponents[i] = Complex(std::log(std::abs(m)), std::arg(m)) / tau;
  }
  return out;
}

PerturbationTestResult perturbation_openness_test(const SystemSpec& sys, double magnitude,
                                                  int trials, std::uint64_t seed,
                                                  const SolverOptions& opts) {
  if (trials < 0) throw UsageError("perturbation_openness_test: negative trial count");
  const auto* poly = dynamic_cast<const PolynomialField*>(sys.field.get());
  if (poly == nullptr)
    throw UsageError("perturbation_openness_test: requires a polynomial vector field");

  // Base system must be in script-N with margin before perturbing.
  Mat base_lin;
  Vec base_x0;
  double base_tau = 0.0;
  if (sys.kind == AttractorKind::fixed_point) {
    auto fp = find_fixed_point(sys, sys.initial_guess, opts);
    base_lin = fp.time1_linearization;
    base_x0 = fp.x0;
  } else {
    auto lc = find_limit_cycle(sys, sys.initial_guess, sys.period_guess, opts);
    base_lin = lc.restricted_monodromy;
    base_x0 = lc.x0;
    base_tau = lc.tau;
  }
  respoly::CertifyOptions copts;
  auto cert = respoly::certify_genericity(base_lin, copts);
  double min_g_factor = std::numeric_limits<double>::infinity();
  for (const auto& [m, g] : cert.G_values) min_g_factor = std::min(min_g_factor, g.min_factor);
  const double sep = 1e-8 * std::max(base_lin.norm(), 1e-300);
  if (cert.verdict != respoly::Verdict::in_N || cert.min_eigen_gap <= 10.0 * sep ||
      min_g_factor <= 10.0 * copts.tol) {
    throw HypothesisViolated(
        "perturbation_openness_test: base linearization is not in script-N with margin (verdict " +
        respoly::to_string(cert.verdict) + ")");
  }

  const int deg = std::max(2, poly->max_degree());
  const auto monomials = all_multi_indices(sys.dimension, 0, deg);

  PerturbationTestResult result;
  result.trials = trials;
  result.magnitude = magnitude;
  std::vector<int> outcome(static_cast<std::size_t>(std::max(trials, 1)), 0);  // 1 ok, -1 fail, 2 err

  parallel_for_index(static_cast<std::uint64_t>(trials), [&](std::uint64_t trial) {
    std::mt19937_64 rng(derive_seed(seed, trial));
    std::uniform_real_distribution<double> u(-magnitude, magnitude);
    PolynomialComponents comps = poly->components();
    for (auto& comp : comps)
      for (const auto& m : monomials) comp.push_back({u(rng), m});
    SystemSpec perturbed = sys;
    perturbed.field = std::make_shared<PolynomialField>(std::move(comps));
    try {
      Mat lin;
      if (sys.kind == AttractorKind::fixed_point) {
        auto fp = find_fixed_point(perturbed, base_x0, opts);
        lin = fp.time1_linearization;
      } else {
        auto lc = find_limit_cycle(perturbed, base_x0, base_tau, opts);
        lin = lc.restricted_monodromy;
      }
      auto membership = spectral::in_script_N(spectral::SpectralData::decompose(lin));
      outcome[trial] = membership.member ? 1 : -1;
    } catch (const Error&) {
      outcome[trial] = 2;
    }
  });

  for (int i = 0; i < trials; ++i) {
    if (outcome[static_cast<std::size_t>(i)] == 1) ++result.survived;
    else if (outcome[static_cast<std::size_t>(i)] == -1) ++result.failed;
    else ++result.solver_errors;
  }
  const int decided = result.trials - result.solver_errors;
  result.fraction = decided > 0 ? static_cast<double>(result.survived) / decided : 1.0;
  return result;
}

}  // namespace eigenflow::dynamics
