#include "dataagent/error.hpp"

namespace dataagent {

std::string_view label(Errc code) {
  switch (code) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::RaggedRow: return "RaggedRow";
    case Errc::DuplicateHeader: return "DuplicateHeader";
    case Errc::BadHeader: return "BadHeader";
    case Errc::MalformedCsv: return "MalformedCsv";
    case Errc::BadCell: return "BadCell";
    case Errc::BudgetTooSmall: return "BudgetTooSmall";
    case Errc::PlanRejected: return "PlanRejected";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::NonConsecutiveStep: return "NonConsecutiveStep";
    case Errc::ForwardRef: return "ForwardRef";
    case Errc::UnknownOp: return "UnknownOp";
    case Errc::BadArg: return "BadArg";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::DtypeMismatch: return "DtypeMismatch";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::RefTypeMismatch: return "RefTypeMismatch";
    case Errc::EmptyResult: return "EmptyResult";
    case Errc::StepFailure: return "StepFailure";
    case Errc::AuthError: return "AuthError";
    case Errc::RateLimited: return "RateLimited";
    case Errc::Transport: return "Transport";
    case Errc::MalformedResponse: return "MalformedResponse";
    case Errc::MatchFailure: return "MatchFailure";
    case Errc::CassetteMiss: return "CassetteMiss";
    case Errc::CassetteCorrupt: return "CassetteCorrupt";
    case Errc::JudgeDisabled: return "JudgeDisabled";
    case Errc::ManifestError: return "ManifestError";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::MissingDataset: return "MissingDataset";
    case Errc::CardinalityMismatch: return "CardinalityMismatch";
    case Errc::UnknownTemplate: return "UnknownTemplate";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_backend_error(Errc code) {
  switch (code) {
    case Errc::AuthError:
    case Errc::RateLimited:
    case Errc::Transport:
    case Errc::MalformedResponse:
    case Errc::MatchFailure:
    case Errc::CassetteMiss:
    case Errc::CassetteCorrupt:
      return true;
    default:
      return false;
  }
}

static std::string compose(Errc code, const std::string& detail) {
  std::string out(label(code));
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}

Error::Error(Errc code, std::string detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(std::move(detail)) {}

}  // namespace dataagent
