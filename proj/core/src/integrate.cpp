#include "eigenflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eigenflow::dynamics {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// error coefficients: b - bhat
constexpr double e1 = b1 - 5179.0 / 57600;
constexpr double e3 = b3 - 7571.0 / 16695;
constexpr double e4 = b4 - 393.0 / 640;
constexpr double e5 = b5 + 92097.0 / 339200;
constexpr double e6 = b6 - 187.0 / 2100;
constexpr double e7 = -1.0 / 40;
// dense output coefficients
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

}  // namespace

Vec DenseSegment::eval(double t) const {
  const double theta = h_ != 0.0 ? (t - t0_) / h_ : 0.0;
  const double th1 = 1.0 - theta;
  return r1_ + theta * (r2_ + th1 * (r3_ + theta * (r4_ + th1 * r5_)));
}

Trajectory::Trajectory(Rhs rhs, Vec y0, double t0, IntegratorOptions opts)
    : rhs_(std::move(rhs)), opts_(opts), t_(t0), y_(std::move(y0)) {
  k1_.resize(y_.size());
}

double Trajectory::guess_initial_step() const {
  Vec f(y_.size());
  rhs_(t_, y_, f);
  const double d0 = y_.norm();
  const double d1n = f.norm();
  const double h = (d1n > 1e-12) ? 0.01 * (1.0 + d0) / d1n : 1e-4;
  return std::min(h, opts_.max_step);
}

void Trajectory::take_step(double h_target, DenseSegment& seg) {
  const auto n = y_.size();
  if (!have_k1_) {
    rhs_(t_, y_, k1_);
    have_k1_ = true;
  }
  Vec k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), y1(n);

  double h = h_target;
  for (int attempt = 0;; ++attempt) {
    if (++steps_ > opts_.max_steps)
      throw NoConvergence("integrate: maximum step count exceeded");
    yt = y_ + h * (a21 * k1_);
    rhs_(t_ + h / 5.0, yt, k2);
    yt = y_ + h * (a31 * k1_ + a32 * k2);
    rhs_(t_ + 3.0 * h / 10.0, yt, k3);
    yt = y_ + h * (a41 * k1_ + a42 * k2 + a43 * k3);
    rhs_(t_ + 4.0 * h / 5.0, yt, k4);
    yt = y_ + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4);
    rhs_(t_ + 8.0 * h / 9.0, yt, k5);
    yt = y_ + h * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs_(t_ + h, yt, k6);
    y1 = y_ + h * (b1 * k1_ + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs_(t_ + h, y1, k7);  // FSAL

    double err_sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e =
          h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y_[i]), std::abs(y1[i]));
      err_sq += (e / sc) * (e / sc);
    }
    const double err = std::sqrt(err_sq / static_cast<double>(n));

    if (err <= 1.0 || attempt > 60) {
      // dense output for the accepted step
      Vec dy = y1 - y_;
      seg.t0_ = t_;
      seg.h_ = h;
      seg.r1_ = y_;
      seg.r2_ = dy;
      seg.r3_ = h * k1_ - dy;
      seg.r4_ = dy - h * k7 - seg.r3_;
      seg.r5_ = h * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

      t_ += h;
      y_.swap(y1);
      k1_.swap(k7);  // FSAL

      if (!y_.allFinite() || y_.norm() > opts_.blowup_norm) {
        std::ostringstream os;
        os << "integrate: state norm exceeded " << opts_.blowup_norm << " at t = " << t_;
        throw BlowUp(os.str());
      }

      const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h_ = h * std::clamp(factor, 0.2, 5.0);
      h_ = std::min(h_, opts_.max_step);
      return;
    }

    const double factor = std::max(0.9 * std::pow(err, -0.2), 0.1);
    h *= std::min(factor, 1.0);
    if (!(h > 1e-14 * std::max(1.0, std::abs(t_))))
      throw NoConvergence("integrate: step size underflow");
  }
}

const Vec& Trajectory::advance_to(double t, const StepObserver& observer) {
  if (t < t_) throw UsageError("Trajectory::advance_to: target time is in the past");
  if (h_ == 0.0) h_ = guess_initial_step();
  DenseSegment seg;
  while (t_ < t) {
    const double remaining = t - t_;
    double h = std::min(h_, remaining);
    // avoid a microscopic final step
    if (remaining - h < 1e-14 * std::max(1.0, std::abs(t))) h = remaining;
    take_step(h, seg);
    if (observer && !observer(seg)) break;
  }
  return y_;
}

Vec integrate(const Rhs& rhs, const Vec& y0, double t0, double t1, const IntegratorOptions& opts) {
  if (t1 == t0) return y0;
  if (t1 > t0) {
    Trajectory traj(rhs, y0, t0, opts);
    return traj.advance_to(t1);
  }
  // backward time via reversal
  Rhs reversed = [&rhs](double t, const Vec& y, Vec& dy) {
    rhs(-t, y, dy);
    dy = -dy;
  };
  Trajectory traj(reversed, y0, -t0, opts);
  return traj.advance_to(-t1);
}

}  // namespace eigenflow::dynamics
