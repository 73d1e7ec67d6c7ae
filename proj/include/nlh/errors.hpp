#pragma once

#include <stdexcept>
#include <string>

namespace nlh {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define NLH_DEFINE_ERROR(Name)        \
  struct Name : Error {               \
    using Error::Error;               \
  }

NLH_DEFINE_ERROR(InvalidExponent);
NLH_DEFINE_ERROR(GridMismatch);
NLH_DEFINE_ERROR(RadiusExceedsBox);
NLH_DEFINE_ERROR(SingularPoint);
NLH_DEFINE_ERROR(ShellUnresolved);
NLH_DEFINE_ERROR(InvalidAbsorption);
NLH_DEFINE_ERROR(ScheduleTooAggressive);
NLH_DEFINE_ERROR(ExpectedRealField);
NLH_DEFINE_ERROR(NonpositiveQuadraticForm);
NLH_DEFINE_ERROR(DegenerateDirection);
NLH_DEFINE_ERROR(RecenterUnavailable);
NLH_DEFINE_ERROR(NotConverged);
NLH_DEFINE_ERROR(WindowTooNarrow);
NLH_DEFINE_ERROR(BadWindow);
NLH_DEFINE_ERROR(BadSpectrum);
NLH_DEFINE_ERROR(ZeroInput);
NLH_DEFINE_ERROR(ChecksumMismatch);
NLH_DEFINE_ERROR(InvalidScenario);
NLH_DEFINE_ERROR(IoError);

#undef NLH_DEFINE_ERROR

}  // namespace nlh
