#pragma once

#include <stdexcept>
#include <string>

namespace twistray {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TWISTRAY_DEFINE_ERROR(Name)      \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

// flow
TWISTRAY_DEFINE_ERROR(CapReached);
TWISTRAY_DEFINE_ERROR(GlancingRay);
TWISTRAY_DEFINE_ERROR(LeftManifold);
TWISTRAY_DEFINE_ERROR(ExtensionNotConvex);
TWISTRAY_DEFINE_ERROR(ExtensionTrapped);
// geometry / transport
TWISTRAY_DEFINE_ERROR(OffBoundary);
TWISTRAY_DEFINE_ERROR(SingularGauge);
TWISTRAY_DEFINE_ERROR(DimensionMismatch);
TWISTRAY_DEFINE_ERROR(BoundaryNonzero);
// fiber fourier
TWISTRAY_DEFINE_ERROR(AliasingSuspected);
TWISTRAY_DEFINE_ERROR(DegreeViolation);
// loop factorization
TWISTRAY_DEFINE_ERROR(NotPositiveDefinite);
TWISTRAY_DEFINE_ERROR(NoConvergence);
TWISTRAY_DEFINE_ERROR(StepTooLarge);
// configuration
TWISTRAY_DEFINE_ERROR(SchemaError);
TWISTRAY_DEFINE_ERROR(CertificationFailed);

#undef TWISTRAY_DEFINE_ERROR

}  // namespace twistray
