#pragma once

#include <stdexcept>
#include <string>

namespace eigenflow {

// Base class for all library errors. Each failure mode named by contract
// gets its own type so callers can dispatch on what went wrong.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EIGENFLOW_DEFINE_ERROR(NAME)     \
  class NAME : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

// linear algebra / spectral
EIGENFLOW_DEFINE_ERROR(DecompositionFailure);
EIGENFLOW_DEFINE_ERROR(NotStable);      // some eigenvalue outside the open unit disk
EIGENFLOW_DEFINE_ERROR(SingularInput);  // zero eigenvalue where invertibility is required
EIGENFLOW_DEFINE_ERROR(NotSimple);      // selected eigenvalue not algebraically simple

// resonance polynomials
EIGENFLOW_DEFINE_ERROR(PermutationBlowup);  // n! * multi-index budget exceeded

// dynamics
EIGENFLOW_DEFINE_ERROR(BlowUp);               // trajectory left the numerical domain
EIGENFLOW_DEFINE_ERROR(NoConvergence);        // iteration or averaging horizon exhausted
EIGENFLOW_DEFINE_ERROR(NotHyperbolic);        // eigenvalue real part inside the hyperbolicity band
EIGENFLOW_DEFINE_ERROR(DegenerateMonodromy);  // trivial Floquet multiplier not isolated

// jets / homological solve
EIGENFLOW_DEFINE_ERROR(DegreeMismatch);
EIGENFLOW_DEFINE_ERROR(NonzeroConstantComposition);
EIGENFLOW_DEFINE_ERROR(ResonantDivisor);   // small divisor: k-nonresonance fails at working precision
EIGENFLOW_DEFINE_ERROR(NotAnEigenvalue);   // requested eigenvalue off the admissible set

// classification
EIGENFLOW_DEFINE_ERROR(RankDeficient);       // sampled basis Gram matrix numerically singular
EIGENFLOW_DEFINE_ERROR(HypothesisViolated);  // semisimplicity / nonresonance hypothesis fails

// configuration / CLI
EIGENFLOW_DEFINE_ERROR(UsageError);

#undef EIGENFLOW_DEFINE_ERROR

}  // namespace eigenflow
