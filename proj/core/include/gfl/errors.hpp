#pragma once

#include <stdexcept>
#include <string>

namespace gfl {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failures of the numerical machinery itself (the CLI maps these to exit code 3).
class NumericError : public Error {
 public:
  using Error::Error;
};

#define GFL_DEFINE_ERROR(Name, Base)   \
  class Name : public Base {           \
   public:                             \
    using Base::Base;                  \
  }

GFL_DEFINE_ERROR(DimensionMismatch, Error);
GFL_DEFINE_ERROR(DomainError, Error);
GFL_DEFINE_ERROR(ConfigError, Error);
GFL_DEFINE_ERROR(SchemaMismatch, Error);
GFL_DEFINE_ERROR(ArchitectureTooSmall, Error);

GFL_DEFINE_ERROR(BadMagic, Error);
GFL_DEFINE_ERROR(TruncatedPayload, Error);
GFL_DEFINE_ERROR(UnsupportedType, Error);

GFL_DEFINE_ERROR(UnsupportedOrder, NumericError);
GFL_DEFINE_ERROR(NoNonzeroCoefficient, NumericError);
GFL_DEFINE_ERROR(IllConditioned, NumericError);
GFL_DEFINE_ERROR(DegenerateScale, NumericError);
GFL_DEFINE_ERROR(StepSizeUnderflow, NumericError);
GFL_DEFINE_ERROR(NonFiniteState, NumericError);
GFL_DEFINE_ERROR(NonFiniteGradient, NumericError);
GFL_DEFINE_ERROR(ZeroMass, NumericError);
GFL_DEFINE_ERROR(AllZeroReference, NumericError);

#undef GFL_DEFINE_ERROR

}  // namespace gfl
