#pragma once

#include <functional>
#include <limits>

#include "eigenflow/errors.hpp"
#include "eigenflow/types.hpp"

namespace eigenflow::dynamics {

struct IntegratorOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 = choose automatically
  double blowup_norm = 1e6;
  long long max_steps = 50'000'000;
};

using Rhs = std::function<void(double t, const Vec& y, Vec& dydt)>;

// Continuous extension of one accepted Runge-Kutta step (order 4 interpolant).
class DenseSegment {
 public:
  double t_begin() const { return t0_; }
  double t_end() const { return t0_ + h_; }
  Vec eval(double t) const;

 private:
  friend class Trajectory;
  double t0_ = 0.0, h_ = 0.0;
  Vec r1_, r2_, r3_, r4_, r5_;
};

// Return false to stop the integration at the end of this segment.
using StepObserver = std::function<bool(const DenseSegment&)>;

// A forward trajectory of y' = rhs(t, y) that can be advanced incrementally.
// Embedded Dormand-Prince 5(4) with PI-free classical step control and
// dense output for event location.
class Trajectory {
 public:
  Trajectory(Rhs rhs, Vec y0, double t0, IntegratorOptions opts = {});

  // Integrates up to exactly time t (t >= current time).  The observer, when
  // given, sees every accepted step's dense segment and may stop early.
  const Vec& advance_to(double t, const StepObserver& observer = nullptr);

  double time() const { return t_; }
  const Vec& state() const { return y_; }

 private:
  void take_step(double h_target, DenseSegment& seg);
  double guess_initial_step() const;

  Rhs rhs_;
  IntegratorOptions opts_;
  double t_;
  Vec y_;
  Vec k1_;  // FSAL stage
  bool have_k1_ = false;
  double h_ = 0.0;
  long long steps_ = 0;
};

// Convenience wrapper: state after time t starting from (t0, y0).
Vec integrate(const Rhs& rhs, const Vec& y0, double t0, double t1,
              const IntegratorOptions& opts = {});

}  // namespace eigenflow::dynamics
