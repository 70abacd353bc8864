#include "pdflow/error.hpp"

namespace pdflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::RankDeficientC: return "RankDeficientC";
    case ErrorCode::SingularA: return "SingularA";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::UnsupportedSet: return "UnsupportedSet";
    case ErrorCode::BoundViolated: return "BoundViolated";
    case ErrorCode::LimitNotSettled: return "LimitNotSettled";
    case ErrorCode::UnknownLink: return "UnknownLink";
    case ErrorCode::QPNoConvergence: return "QPNoConvergence";
    case ErrorCode::InfeasibleHorizon: return "InfeasibleHorizon";
    case ErrorCode::MissingCertificate: return "MissingCertificate";
    case ErrorCode::NonpositiveRate: return "NonpositiveRate";
    case ErrorCode::GainRatioViolated: return "GainRatioViolated";
    case ErrorCode::PzNotPD: return "PzNotPD";
    case ErrorCode::FailedCertificate: return "FailedCertificate";
    case ErrorCode::ConstantViolated: return "ConstantViolated";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::InvalidNetwork: return "InvalidNetwork";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IncompatibleScenarios: return "IncompatibleScenarios";
  }
  return "Unknown";
}

}  // namespace pdflow
