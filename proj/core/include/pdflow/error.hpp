#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdflow {

enum class ErrorCode {
  DimensionMismatch,
  NotHurwitz,
  RankDeficientC,
  SingularA,
  NoConvergence,
  Infeasible,
  UnsupportedSet,
  BoundViolated,
  LimitNotSettled,
  UnknownLink,
  QPNoConvergence,
  InfeasibleHorizon,
  MissingCertificate,
  NonpositiveRate,
  GainRatioViolated,
  PzNotPD,
  FailedCertificate,
  ConstantViolated,
  StepTooLarge,
  NonFiniteState,
  NegativeDensity,
  InvalidNetwork,
  InvalidArgument,
  ConfigInvalid,
  IncompatibleScenarios,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-status mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pdflow
