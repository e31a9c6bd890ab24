#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "eigenflow/homological.hpp"

namespace eigenflow::eigfn {

// Stopping policy for the infinite-time averages: evaluate at checkpoints and
// stop once successive values agree and the trajectory has entered the region
// where the truncated jet is accurate.
struct HorizonPolicy {
  double checkpoint_dt = 1.0;
  double value_tol = 1e-9;
  double attractor_radius = 0.35;  // jet-accuracy radius around the attractor
  double section_radius = 0.75;    // accept section crossings this close to x0
  double phase_radius = 0.05;      // tail-sum jet radius for asymptotic phase
  double max_time = 400.0;
  dynamics::IntegratorOptions integ{1e-12, 1e-10};
};

struct AdjointSeed {
  Complex mu{};        // continuous-time eigenvalue
  Complex multiplier{};  // e^mu (fixed point) or e^{mu tau} (cycle)
  CVec w;              // covector on R^n; for cycles it annihilates f(x0)
  CVec w_section;      // cycles: components in the E^s basis (empty otherwise)
  int index = 0;       // position in the canonical eigenvalue order
};

// Left (adjoint) eigenvector seed for the selected eigenvalue, normalized to
// unit length with the first nonzero entry rotated positive-real.
AdjointSeed adjoint_seed(const dynamics::FixedPointAnalysis& fp, int which);
AdjointSeed adjoint_seed(const dynamics::SystemSpec& sys, const dynamics::LimitCycleAnalysis& lc,
                         int which);

struct FixedPointContext {
  dynamics::SystemSpec sys;
  dynamics::FixedPointAnalysis fp;
  HorizonPolicy policy;
};

struct CycleContext {
  dynamics::SystemSpec sys;
  dynamics::LimitCycleAnalysis lc;
  jets::SectionChart chart;
  HorizonPolicy policy;
};

std::shared_ptr<const FixedPointContext> analyze_fixed_point(const dynamics::SystemSpec& sys,
                                                             const HorizonPolicy& policy = {});
std::shared_ptr<const CycleContext> analyze_limit_cycle(const dynamics::SystemSpec& sys,
                                                        const HorizonPolicy& policy = {});

// A principal Koopman eigenfunction: vanishes on the attractor, has nonzero
// differential there, and satisfies psi o Phi^t = e^{mu t} psi.  Evaluation
// follows the trajectory and reads off the converged weighted average of the
// approximate eigenfunction jet.
class PrincipalEigenfunction {
 public:
  Complex mu() const;
  const CVec& seed() const;  // gradient covector at the attractor point
  const jets::ApproximateEigenfunction& approx() const;
  const spectral::NonresonanceReport& certificate() const;
  int order() const;

  bool on_cycle() const;
  const FixedPointContext* fixed_point() const;  // null when on_cycle()
  const CycleContext* limit_cycle() const;       // null otherwise
  Vec attractor_point() const;
  const dynamics::SystemSpec& system() const;
  const HorizonPolicy& policy() const;

  Complex evaluate(const Vec& x) const;

 private:
  friend PrincipalEigenfunction principal_fixed_point(
      std::shared_ptr<const FixedPointContext>, const AdjointSeed&, std::optional<int>);
  friend PrincipalEigenfunction principal_limit_cycle(std::shared_ptr<const CycleContext>,
                                                      const AdjointSeed&, std::optional<int>);
  friend std::vector<Complex> evaluate_many(
      const std::vector<const PrincipalEigenfunction*>& pes, const Vec& x);
  friend class PhaseEigenfunction;
  friend std::vector<Complex> evaluate_many_with_phase(
      const std::vector<const PrincipalEigenfunction*>& pes, const class PhaseEigenfunction* phase,
      const Vec& x, Complex* phase_value);

  std::shared_ptr<const FixedPointContext> fixed_;
  std::shared_ptr<const CycleContext> cycle_;
  AdjointSeed seed_;
  jets::ApproximateEigenfunction approx_;
  spectral::NonresonanceReport certificate_;
};

// Construction: selects the eigenvalue (by canonical index or by value within
// 1e-8 of the admissible set), certifies k-nonresonance of the pair, builds
// the order-k approximate eigenfunction, and wires up the evaluator.
// k defaults to max(2, ceil(spread) + 1) so the average converges.
PrincipalEigenfunction principal_fixed_point(std::shared_ptr<const FixedPointContext> ctx,
                                             const AdjointSeed& seed, std::optional<int> k = {});
PrincipalEigenfunction principal_limit_cycle(std::shared_ptr<const CycleContext> ctx,
                                             const AdjointSeed& seed, std::optional<int> k = {});
PrincipalEigenfunction principal_fixed_point(std::shared_ptr<const FixedPointContext> ctx,
                                             int which, std::optional<int> k = {});
PrincipalEigenfunction principal_fixed_point(std::shared_ptr<const FixedPointContext> ctx,
                                             Complex mu, std::optional<int> k = {});
PrincipalEigenfunction principal_limit_cycle(std::shared_ptr<const CycleContext> ctx, int which,
                                             std::optional<int> k = {});
PrincipalEigenfunction principal_limit_cycle(std::shared_ptr<const CycleContext> ctx, Complex mu,
                                             std::optional<int> k = {});

// Convenience single-shot forms.
PrincipalEigenfunction principal_fixed_point(const dynamics::SystemSpec& sys, int which,
                                             std::optional<int> k = {},
                                             const HorizonPolicy& policy = {});
PrincipalEigenfunction principal_limit_cycle(const dynamics::SystemSpec& sys, int which,
                                             std::optional<int> k = {},
                                             const HorizonPolicy& policy = {});

// Unimodular eigenfunction of the asymptotic phase, eigenvalue i 2 pi / tau,
// normalized to 1 at the stored base point.  The phase is recovered from
// section crossing times plus a jet-resolved convergent return-time sum.
class PhaseEigenfunction {
 public:
  Complex mu() const;  // i * 2 pi / tau
  double tau() const;
  const CycleContext& context() const { return *cycle_; }
  Complex evaluate(const Vec& x) const;

 private:
  friend PhaseEigenfunction phase_eigenfunction(std::shared_ptr<const CycleContext>, int);
  friend std::vector<Complex> evaluate_many_with_phase(
      const std::vector<const PrincipalEigenfunction*>& pes, const PhaseEigenfunction* phase,
      const Vec& x, Complex* phase_value);

  std::shared_ptr<const CycleContext> cycle_;
  jets::Jet time_sum_;  // solves S - S o R = T - tau on the section
};

PhaseEigenfunction phase_eigenfunction(std::shared_ptr<const CycleContext> ctx, int degree = 6);
PhaseEigenfunction phase_eigenfunction(const dynamics::SystemSpec& sys, int degree = 6,
                                       const HorizonPolicy& policy = {});

// Shared-trajectory evaluation of several eigenfunctions over one attractor.
std::vector<Complex> evaluate_many(const std::vector<const PrincipalEigenfunction*>& pes,
                                   const Vec& x);
std::vector<Complex> evaluate_many_with_phase(const std::vector<const PrincipalEigenfunction*>& pes,
                                              const PhaseEigenfunction* phase, const Vec& x,
                                              Complex* phase_value);

struct EigenfunctionDefect {
  int samples = 0;
  std::vector<double> times;
  double defect = 0.0;          // max relative eigen-equation defect over the grid
  double attractor_value = 0.0;  // |psi| at the attractor point
  double gradient_error = 0.0;   // finite-difference gradient vs the seed covector
};

// Checks the eigenfunction equation on a sample/time grid plus the defining
// conditions at the attractor (value zero, differential equal to the seed).
EigenfunctionDefect validate_principal(const PrincipalEigenfunction& pe,
                                       const std::vector<Vec>& samples,
                                       const std::vector<double>& times);

// Relative eigen-equation defect for any evaluable observable.
double eigen_defect(const dynamics::SystemSpec& sys,
                    const std::function<Complex(const Vec&)>& fn, Complex mu,
                    const std::vector<Vec>& samples, const std::vector<double>& times,
                    const dynamics::IntegratorOptions& opts = {1e-12, 1e-10});

}  // namespace eigenflow::eigfn
