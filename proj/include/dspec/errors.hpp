#pragma once

#include <stdexcept>
#include <string>

namespace dspec {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrix : Error {
  using Error::Error;
};
struct EmptyPeriod : Error {
  using Error::Error;
};
struct ScheduleGap : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct OutOfHorizon : Error {
  using Error::Error;
};
struct ZeroSubspace : Error {
  using Error::Error;
};
struct RankDeficient : Error {
  using Error::Error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct UnstableDimension : Error {
  using Error::Error;
};
struct DecompositionDefect : Error {
  using Error::Error;
};
struct NoSpectrumStructure : Error {
  using Error::Error;
};
struct NotDichotomous : Error {
  using Error::Error;
};
struct TailEstimateInvalid : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace dspec
