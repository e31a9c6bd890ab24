#include "eigenflow/eigenfunction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

namespace eigenflow::eigfn {

namespace {

using dynamics::Rhs;
using dynamics::Trajectory;

Rhs field_rhs(const dynamics::SystemSpec& sys) {
  auto field = sys.field;
  return [field](double, const Vec& y, Vec& dy) { field->eval(y, dy); };
}

void normalize_seed(CVec& w) {
  w /= w.norm();
  for (int i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) > 1e-12) {
      w *= std::conj(w[i]) / std::abs(w[i]);
      break;
    }
  }
}

void require_simple(const spectral::SpectralData& sd, int which) {
  const Complex lam = sd.eigenvalues()[which];
  for (int j = 0; j < sd.size(); ++j) {
    if (j == which) continue;
    if (std::abs(sd.eigenvalues()[j] - lam) <= sd.distinctness_threshold()) {
      std::ostringstream os;
      os << "adjoint_seed: eigenvalue " << lam << " is not algebraically simple";
      throw NotSimple(os.str());
    }
  }
}

// one Laplace mode: continuous eigenvalue + approximate eigenfunction jet
struct Mode {
  Complex mu;
  const jets::Jet* p = nullptr;
};

std::vector<Complex> laplace_fixed(const FixedPointContext& ctx, const std::vector<Mode>& modes,
                                   const Vec& x) {
  const HorizonPolicy& pol = ctx.policy;
  const Vec& x0 = ctx.fp.x0;
  auto values_at = [&](double t, const Vec& y) {
    CVec offset = (y - x0).cast<Complex>();
    std::vector<Complex> v(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i)
      v[i] = std::exp(-modes[i].mu * t) * modes[i].p->evaluate(offset);
    return v;
  };

  Trajectory traj(field_rhs(ctx.sys), x, 0.0, pol.integ);
  std::vector<Complex> prev = values_at(0.0, x);
  for (double t = pol.checkpoint_dt; t <= pol.max_time + 1e-12; t += pol.checkpoint_dt) {
    const Vec& y = traj.advance_to(t);
    std::vector<Complex> cur = values_at(t, y);
    bool settled = true;
    for (std::size_t i = 0; i < cur.size(); ++i)
      settled = settled && std::abs(cur[i] - prev[i]) <= pol.value_tol * (1.0 + std::abs(cur[i]));
    if (settled && (y - x0).norm() <= pol.attractor_radius) return cur;
    prev = std::move(cur);
  }
  std::ostringstream os;
  os << "laplace average did not settle within max_time = " << pol.max_time
     << " (checkpoint tolerance " << pol.value_tol << ")";
  throw NoConvergence(os.str());
}

struct Crossing {
  double t = 0.0;
  Vec y;
};

// Watches dense-output segments for upward crossings of the section plane.
struct CrossingWatch {
  const jets::SectionChart& chart;
  double radius;
  std::vector<Crossing> found;
  double g_prev = 0.0;
  bool have_prev = false;

  double g_of(const Vec& y) const { return chart.normal.dot(y - chart.x0); }

  bool operator()(const dynamics::DenseSegment& seg) {
    const double t0 = seg.t_begin(), t1 = seg.t_end();
    const double g0 = have_prev ? g_prev : g_of(seg.eval(t0));
    const double g1 = g_of(seg.eval(t1));
    g_prev = g1;
    have_prev = true;
    if (g0 < 0.0 && g1 >= 0.0) {
      double lo = t0, hi = t1;
      for (int it = 0; it < 100 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g_of(seg.eval(mid)) < 0.0 ? lo : hi) = mid;
      }
      Vec y = seg.eval(hi);
      if ((y - chart.x0).norm() <= radius) found.push_back({hi, std::move(y)});
    }
    return true;
  }
};

struct CycleEvalRequest {
  std::vector<Mode> modes;           // section jets
  bool want_phase = false;
  const jets::Jet* time_sum = nullptr;
};

struct CycleEvalResult {
  std::vector<Complex> values;
  Complex phase{};
};

CycleEvalResult laplace_cycle(const CycleContext& ctx, const CycleEvalRequest& req, const Vec& x) {
  const HorizonPolicy& pol = ctx.policy;
  const double tau = ctx.lc.tau;
  const double omega = 2.0 * std::numbers::pi / tau;

  dynamics::IntegratorOptions integ = pol.integ;
  integ.max_step = tau / 8.0;  // never step across a whole crossing
  Trajectory traj(field_rhs(ctx.sys), x, 0.0, integ);

  CrossingWatch watch{ctx.chart, pol.section_radius, {}, 0.0, false};
  // departure exactly on the section counts as the first crossing
  {
    const double g0 = watch.g_of(x);
    Vec fx = (*ctx.sys.field)(x);
    if (std::abs(g0) <= 1e-10 * (1.0 + x.norm()) && ctx.chart.normal.dot(fx) > 0.0 &&
        (x - ctx.chart.x0).norm() <= pol.section_radius)
      watch.found.push_back({0.0, x});
  }

  CycleEvalResult result;
  bool values_done = req.modes.empty();
  bool phase_done = !req.want_phase;
  std::vector<Complex> prev;
  bool have_prev = false;
  std::size_t consumed = 0;
  long crossing_index = 0;

  while (traj.time() < pol.max_time && !(values_done && phase_done)) {
    traj.advance_to(std::min(traj.time() + tau, pol.max_time), std::ref(watch));
    for (; consumed < watch.found.size(); ++consumed) {
      const Crossing& c = watch.found[consumed];
      ++crossing_index;
      Vec xi_real = ctx.chart.coord_map * (c.y - ctx.chart.x0);
      CVec xi = xi_real.cast<Complex>();

      if (!values_done) {
        std::vector<Complex> cur(req.modes.size());
        for (std::size_t i = 0; i < req.modes.size(); ++i)
          cur[i] = std::exp(-req.modes[i].mu * c.t) * req.modes[i].p->evaluate(xi);
        if (have_prev) {
          bool settled = true;
          for (std::size_t i = 0; i < cur.size(); ++i)
            settled =
                settled && std::abs(cur[i] - prev[i]) <= pol.value_tol * (1.0 + std::abs(cur[i]));
          if (settled && xi_real.norm() <= pol.attractor_radius) {
            result.values = cur;
            values_done = true;
          }
        }
        prev = std::move(cur);
        have_prev = true;
      }

      if (!phase_done && xi_real.norm() <= pol.phase_radius) {
        // t_infinity = lim_N (t_N - (N-1) tau); the jet-resolved tail sum
        // replaces the remaining crossings.
        const double tail = req.time_sum->evaluate(xi).real();
        const double t_inf = c.t - static_cast<double>(crossing_index - 1) * tau + tail;
        result.phase = std::exp(Complex(0.0, -omega * t_inf));
        phase_done = true;
      }
    }
  }
  if (!(values_done && phase_done))
    throw NoConvergence("cycle laplace average did not settle within max_time");
  return result;
}

int auto_order(double spread) {
  return std::max(2, static_cast<int>(std::ceil(spread)) + 1);
}

// Certify k-nonresonance of (multiplier, linearization) and pick the order.
spectral::NonresonanceReport certify_pair(Complex multiplier,
                                          const spectral::SpectralData& lin,
                                          std::optional<int> k_opt, int& order_out) {
  CVec mu(1);
  mu[0] = multiplier;
  auto x = spectral::SpectralData::from_eigenvalues(mu);
  const double nu = spectral::spectral_spread(x, lin);
  const int order = k_opt.value_or(auto_order(nu));
  if (!(nu < order)) {
    std::ostringstream os;
    os << "order k = " << order << " does not dominate the spectral spread nu = " << nu;
    throw UsageError(os.str());
  }
  auto report = spectral::check_k_nonresonance(x, lin, order);
  report.spread = nu;
  if (!report.nonresonant) {
    const auto& w = report.witnesses.front();
    std::ostringstream os;
    os << "pair is " << order << "-resonant: |mu - lambda^m| = " << w.gap
       << " at m = (";
    for (std::size_t i = 0; i < w.m.size(); ++i) os << (i ? "," : "") << w.m[i];
    os << ")";
    throw ResonantDivisor(os.str());
  }
  order_out = order;
  return report;
}

}  // namespace

AdjointSeed adjoint_seed(const dynamics::FixedPointAnalysis& fp, int which) {
  const auto& sd = fp.spectral;
  if (which < 0 || which >= sd.size()) throw UsageError("adjoint_seed: eigenvalue index out of range");
  require_simple(sd, which);
  AdjointSeed seed;
  seed.index = which;
  seed.multiplier = sd.eigenvalues()[which];
  seed.mu = std::log(seed.multiplier);  // principal branch of the time-1 multiplier
  seed.w = sd.left_vectors().col(which);
  normalize_seed(seed.w);
  return seed;
}

AdjointSeed adjoint_seed(const dynamics::SystemSpec& sys, const dynamics::LimitCycleAnalysis& lc,
                         int which) {
  const auto& sd = lc.restricted_spectral;
  if (which < 0 || which >= sd.size()) throw UsageError("adjoint_seed: eigenvalue index out of range");
  require_simple(sd, which);
  AdjointSeed seed;
  seed.index = which;
  seed.multiplier = sd.eigenvalues()[which];
  seed.mu = Complex(std::log(std::abs(seed.multiplier)), std::arg(seed.multiplier)) / lc.tau;
  seed.w_section = sd.left_vectors().col(which);
  normalize_seed(seed.w_section);

  // extend to a covector on R^n annihilating the flow direction:
  // [B f0]^* w = [w_section; 0]
  const int n = sys.dimension;
  Mat full(n, n);
  full.leftCols(n - 1) = lc.Es_basis;
  full.col(n - 1) = lc.floquet_direction;
  CVec rhs = CVec::Zero(n);
  rhs.head(n - 1) = seed.w_section;
  seed.w = full.transpose().cast<Complex>().colPivHouseholderQr().solve(rhs.conjugate()).conjugate();
  return seed;
}

std::shared_ptr<const FixedPointContext> analyze_fixed_point(const dynamics::SystemSpec& sys,
                                                             const HorizonPolicy& policy) {
  auto ctx = std::make_shared<FixedPointContext>();
  ctx->sys = sys;
  ctx->fp = dynamics::find_fixed_point(sys, sys.initial_guess);
  ctx->policy = policy;
  if (!ctx->fp.hyperbolic_stable)
    throw NotStable("analyze_fixed_point: fixed point is not asymptotically stable");
  return ctx;
}

std::shared_ptr<const CycleContext> analyze_limit_cycle(const dynamics::SystemSpec& sys,
                                                        const HorizonPolicy& policy) {
  auto ctx = std::make_shared<CycleContext>();
  ctx->sys = sys;
  ctx->lc = dynamics::find_limit_cycle(sys, sys.initial_guess, sys.period_guess);
  if (ctx->lc.restricted_spectral.max_abs_eigenvalue() >= 1.0)
    throw NotStable("analyze_limit_cycle: cycle is not asymptotically stable");
  ctx->chart = jets::make_section(sys, ctx->lc);
  ctx->policy = policy;
  return ctx;
}

Complex PrincipalEigenfunction::mu() const { return seed_.mu; }
const CVec& PrincipalEigenfunction::seed() const { return seed_.w; }
const jets::ApproximateEigenfunction& PrincipalEigenfunction::approx() const { return approx_; }
const spectral::NonresonanceReport& PrincipalEigenfunction::certificate() const {
  return certificate_;
}
int PrincipalEigenfunction::order() const { return approx_.order; }
bool PrincipalEigenfunction::on_cycle() const { return cycle_ != nullptr; }
const FixedPointContext* PrincipalEigenfunction::fixed_point() const { return fixed_.get(); }
const CycleContext* PrincipalEigenfunction::limit_cycle() const { return cycle_.get(); }
Vec PrincipalEigenfunction::attractor_point() const {
  return on_cycle() ? cycle_->lc.x0 : fixed_->fp.x0;
}
const dynamics::SystemSpec& PrincipalEigenfunction::system() const {
  return on_cycle() ? cycle_->sys : fixed_->sys;
}
const HorizonPolicy& PrincipalEigenfunction::policy() const {
  return on_cycle() ? cycle_->policy : fixed_->policy;
}

Complex PrincipalEigenfunction::evaluate(const Vec& x) const {
  if (on_cycle()) {
    CycleEvalRequest req;
    req.modes = {{seed_.mu, &approx_.P}};
    return laplace_cycle(*cycle_, req, x).values[0];
  }
  return laplace_fixed(*fixed_, {{seed_.mu, &approx_.P}}, x)[0];
}

PrincipalEigenfunction principal_fixed_point(std::shared_ptr<const FixedPointContext> ctx,
                                             const AdjointSeed& seed, std::optional<int> k) {
  PrincipalEigenfunction pe;
  pe.fixed_ = std::move(ctx);
  pe.seed_ = seed;
  int order = 0;
  pe.certificate_ = certify_pair(seed.multiplier, pe.fixed_->fp.spectral, k, order);
  jets::JetVec map = jets::time1_jet(pe.fixed_->sys, pe.fixed_->fp.x0, order);
  pe.approx_ = jets::solve_homological(map, seed.multiplier, seed.w, order);
  pe.approx_.mu = seed.mu;
  return pe;
}

PrincipalEigenfunction principal_fixed_point(std::shared_ptr<const FixedPointContext> ctx,
                                             int which, std::optional<int> k) {
  AdjointSeed seed = adjoint_seed(ctx->fp, which);
  return principal_fixed_point(std::move(ctx), seed, k);
}

PrincipalEigenfunction principal_fixed_point(std::shared_ptr<const FixedPointContext> ctx,
                                             Complex mu, std::optional<int> k) {
  const auto& sd = ctx->fp.spectral;
  const Complex target = std::exp(mu);
  int which = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sd.size(); ++i) {
    const double gap = std::abs(sd.eigenvalues()[i] - target);
    if (gap < best) {
      best = gap;
      which = i;
    }
  }
  if (best > 1e-8) {
    std::ostringstream os;
    os << "principal_fixed_point: e^mu for mu = " << mu
       << " is not an eigenvalue of the time-1 linearization (closest gap " << best << ")";
    throw NotAnEigenvalue(os.str());
  }
  AdjointSeed seed = adjoint_seed(ctx->fp, which);
  seed.mu = mu;  // honor the caller's branch
  return principal_fixed_point(std::move(ctx), seed, k);
}

PrincipalEigenfunction principal_limit_cycle(std::shared_ptr<const CycleContext> ctx,
                                             const AdjointSeed& seed, std::optional<int> k) {
  PrincipalEigenfunction pe;
  pe.cycle_ = std::move(ctx);
  pe.seed_ = seed;
  int order = 0;
  pe.certificate_ = certify_pair(seed.multiplier, pe.cycle_->lc.restricted_spectral, k, order);
  jets::ReturnMapJet ret = jets::return_map_jet(pe.cycle_->sys, pe.cycle_->lc, order);
  pe.approx_ = jets::solve_homological(ret.map, seed.multiplier, seed.w_section, order);
  pe.approx_.mu = seed.mu;
  pe.approx_.w = seed.w;  // report the extended covector
  return pe;
}

PrincipalEigenfunction principal_limit_cycle(std::shared_ptr<const CycleContext> ctx, int which,
                                             std::optional<int> k) {
  AdjointSeed seed = adjoint_seed(ctx->sys, ctx->lc, which);
  return principal_limit_cycle(std::move(ctx), seed, k);
}

PrincipalEigenfunction principal_limit_cycle(std::shared_ptr<const CycleContext> ctx, Complex mu,
                                             std::optional<int> k) {
  const auto& sd = ctx->lc.restricted_spectral;
  const Complex target = std::exp(mu * ctx->lc.tau);
  int which = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sd.size(); ++i) {
    const double gap = std::abs(sd.eigenvalues()[i] - target);
    if (gap < best) {
      best = gap;
      which = i;
    }
  }
  if (best > 1e-8) {
    std::ostringstream os;
    os << "principal_limit_cycle: e^{mu tau} for mu = " << mu
       << " is not a Floquet multiplier on E^s (closest gap " << best << ")";
    throw NotAnEigenvalue(os.str());
  }
  AdjointSeed seed = adjoint_seed(ctx->sys, ctx->lc, which);
  seed.mu = mu;  // keep the caller's branch: shifts by i 2 pi j / tau twist by phase powers
  return principal_limit_cycle(std::move(ctx), seed, k);
}

PrincipalEigenfunction principal_fixed_point(const dynamics::SystemSpec& sys, int which,
                                             std::optional<int> k, const HorizonPolicy& policy) {
  return principal_fixed_point(analyze_fixed_point(sys, policy), which, k);
}

PrincipalEigenfunction principal_limit_cycle(const dynamics::SystemSpec& sys, int which,
                                             std::optional<int> k, const HorizonPolicy& policy) {
  return principal_limit_cycle(analyze_limit_cycle(sys, policy), which, k);
}

Complex PhaseEigenfunction::mu() const {
  return Complex(0.0, 2.0 * std::numbers::pi / cycle_->lc.tau);
}
double PhaseEigenfunction::tau() const { return cycle_->lc.tau; }

Complex PhaseEigenfunction::evaluate(const Vec& x) const {
  CycleEvalRequest req;
  req.want_phase = true;
  req.time_sum = &time_sum_;
  return laplace_cycle(*cycle_, req, x).phase;
}

PhaseEigenfunction phase_eigenfunction(std::shared_ptr<const CycleContext> ctx, int degree) {
  PhaseEigenfunction ph;
  jets::ReturnMapJet ret = jets::return_map_jet(ctx->sys, ctx->lc, degree);
  ph.time_sum_ = jets::solve_transfer(ret.map, ret.time_offset);
  ph.cycle_ = std::move(ctx);
  return ph;
}

PhaseEigenfunction phase_eigenfunction(const dynamics::SystemSpec& sys, int degree,
                                       const HorizonPolicy& policy) {
  return phase_eigenfunction(analyze_limit_cycle(sys, policy), degree);
}

std::vector<Complex> evaluate_many(const std::vector<const PrincipalEigenfunction*>& pes,
                                   const Vec& x) {
  return evaluate_many_with_phase(pes, nullptr, x, nullptr);
}

std::vector<Complex> evaluate_many_with_phase(const std::vector<const PrincipalEigenfunction*>& pes,
                                              const PhaseEigenfunction* phase, const Vec& x,
                                              Complex* phase_value) {
  std::vector<Complex> out(pes.size());
  if (pes.empty()) {
    if (phase && phase_value) *phase_value = phase->evaluate(x);
    return out;
  }

  // shared-trajectory path: all functions over one attractor context
  const PrincipalEigenfunction* first = pes.front();
  bool shared = true;
  for (const auto* pe : pes)
    shared = shared && pe->fixed_.get() == first->fixed_.get() &&
             pe->cycle_.get() == first->cycle_.get();
  if (phase && first->cycle_.get() != phase->cycle_.get()) shared = false;

  if (!shared) {
    for (std::size_t i = 0; i < pes.size(); ++i) out[i] = pes[i]->evaluate(x);
    if (phase && phase_value) *phase_value = phase->evaluate(x);
    return out;
  }

  if (first->on_cycle()) {
    CycleEvalRequest req;
    for (const auto* pe : pes) req.modes.push_back({pe->seed_.mu, &pe->approx_.P});
    if (phase) {
      req.want_phase = true;
      req.time_sum = &phase->time_sum_;
    }
    CycleEvalResult r = laplace_cycle(*first->cycle_, req, x);
    out = std::move(r.values);
    if (phase && phase_value) *phase_value = r.phase;
    return out;
  }

  std::vector<Mode> modes;
  for (const auto* pe : pes) modes.push_back({pe->seed_.mu, &pe->approx_.P});
  out = laplace_fixed(*first->fixed_, modes, x);
  if (phase && phase_value) *phase_value = phase->evaluate(x);
  return out;
}

double eigen_defect(const dynamics::SystemSpec& sys,
                    const std::function<Complex(const Vec&)>& fn, Complex mu,
                    const std::vector<Vec>& samples, const std::vector<double>& times,
                    const dynamics::IntegratorOptions& opts) {
  double worst = 0.0;
  for (const Vec& x : samples) {
    const Complex base = fn(x);
    for (double t : times) {
      const Vec xt = dynamics::flow(sys, x, t, opts);
      const Complex lhs = fn(xt);
      const Complex rhs = std::exp(mu * t) * base;
      worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(base)));
    }
  }
  return worst;
}

EigenfunctionDefect validate_principal(const PrincipalEigenfunction& pe,
                                       const std::vector<Vec>& samples,
                                       const std::vector<double>& times) {
  EigenfunctionDefect d;
  d.samples = static_cast<int>(samples.size());
  d.times = times;
  d.defect = eigen_defect(pe.system(), [&](const Vec& x) { return pe.evaluate(x); }, pe.mu(),
                          samples, times, pe.policy().integ);
  const Vec x0 = pe.attractor_point();
  d.attractor_value = std::abs(pe.evaluate(x0));

  // finite-difference gradient at the attractor against the seed covector
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < x0.size(); ++i) {
    Vec xp = x0, xm = x0;
    xp[i] += h;
    xm[i] -= h;
    const Complex grad = (pe.evaluate(xp) - pe.evaluate(xm)) / (2.0 * h);
    worst = std::max(worst, std::abs(grad - std::conj(pe.seed()[i])));
  }
  d.gradient_error = worst;
  return d;
}

}  // namespace eigenflow::eigfn
