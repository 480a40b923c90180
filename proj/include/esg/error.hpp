#pragma once

#include <stdexcept>
#include <string>

namespace esg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ESG_DEFINE_ERROR(Name)            \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

ESG_DEFINE_ERROR(DomainError);
ESG_DEFINE_ERROR(NotInvertible);
ESG_DEFINE_ERROR(NoDensity);
ESG_DEFINE_ERROR(DimensionTooLarge);
ESG_DEFINE_ERROR(DimensionMismatch);
ESG_DEFINE_ERROR(TupleError);
ESG_DEFINE_ERROR(ConstructionError);
ESG_DEFINE_ERROR(ScheduleError);
ESG_DEFINE_ERROR(EncodingError);
ESG_DEFINE_ERROR(ConfigError);
ESG_DEFINE_ERROR(IoError);
ESG_DEFINE_ERROR(EmptyInput);

#undef ESG_DEFINE_ERROR

}  // namespace esg
