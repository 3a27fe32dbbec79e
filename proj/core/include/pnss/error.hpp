#pragma once

#include <stdexcept>
#include <string>

namespace pnss {

/// Broad failure class; the CLI maps each one to an exit code.
enum class ErrorKind { Validation, Numerical, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define PNSS_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(Kind, what) {}      \
  }

PNSS_DEFINE_ERROR(DimensionError, ErrorKind::Validation);
PNSS_DEFINE_ERROR(RangeError, ErrorKind::Validation);
PNSS_DEFINE_ERROR(DomainError, ErrorKind::Validation);
PNSS_DEFINE_ERROR(DegenerateConfigError, ErrorKind::Validation);
PNSS_DEFINE_ERROR(NotProcrustesAlignedError, ErrorKind::Validation);
PNSS_DEFINE_ERROR(UnderdeterminedError, ErrorKind::Validation);
PNSS_DEFINE_ERROR(ConfigError, ErrorKind::Validation);
PNSS_DEFINE_ERROR(IngestError, ErrorKind::Validation);
PNSS_DEFINE_ERROR(AntipodalError, ErrorKind::Numerical);
PNSS_DEFINE_ERROR(ProjectionUndefined, ErrorKind::Numerical);
PNSS_DEFINE_ERROR(RankError, ErrorKind::Numerical);
PNSS_DEFINE_ERROR(DegenerateVarianceError, ErrorKind::Numerical);
PNSS_DEFINE_ERROR(ConvergenceError, ErrorKind::Numerical);
PNSS_DEFINE_ERROR(NoUniqueEquilibriumError, ErrorKind::Numerical);
PNSS_DEFINE_ERROR(IoError, ErrorKind::Io);

#undef PNSS_DEFINE_ERROR

/// Tied minima of the circular Fréchet function.
class NonUniqueMeanError : public Error {
 public:
  NonUniqueMeanError(double first, double second)
      : Error(ErrorKind::Numerical,
              "circular Frechet mean is not unique (candidates " +
                  std::to_string(first) + " and " + std::to_string(second) + ")"),
        first_(first),
        second_(second) {}
  double first() const noexcept { return first_; }
  double second() const noexcept { return second_; }

 private:
  double first_;
  double second_;
};

/// Exit code convention of the command line tool.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::Numerical: return 3;
    case ErrorKind::Io: return 4;
  }
  return 1;
}

}  // namespace pnss
