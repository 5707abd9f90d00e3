#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dataagent {

/// Error labels shared by every module. The label string is what surfaces in
/// CLI output, HTTP bodies and benchmark verdict reasons.
enum class Errc {
  // tabular-core
  EmptyInput,
  RaggedRow,
  DuplicateHeader,
  BadHeader,
  MalformedCsv,
  BadCell,
  // profiler / planner
  BudgetTooSmall,
  PlanRejected,
  // plan-dsl
  SyntaxError,
  NonConsecutiveStep,
  ForwardRef,
  UnknownOp,
  BadArg,
  // executor
  UnknownColumn,
  DtypeMismatch,
  InsufficientData,
  ZeroVariance,
  RefTypeMismatch,
  EmptyResult,
  StepFailure,
  // llm-backend
  AuthError,
  RateLimited,
  Transport,
  MalformedResponse,
  MatchFailure,
  CassetteMiss,
  CassetteCorrupt,
  // checker
  JudgeDisabled,
  // benchmark-harness
  ManifestError,
  SizeMismatch,
  MissingDataset,
  CardinalityMismatch,
  UnknownTemplate,
  // generic precondition violation
  InvalidArgument,
};

std::string_view label(Errc code);

/// True for the llm-backend transport/auth family.
bool is_backend_error(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail);

  Errc code() const noexcept { return code_; }
  std::string_view label() const noexcept { return dataagent::label(code_); }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace dataagent
