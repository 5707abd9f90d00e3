#include "dataagent/pipeline.hpp"

#include <fmt/format.h>

namespace dataagent {

std::vector<Value> QueryOutcome::last_results(std::size_t parts) const {
  std::vector<Value> out;
  const auto& records = context.records();
  std::size_t skip = records.size() > parts ? records.size() - parts : 0;
  std::size_t i = 0;
  for (const auto& [index, rec] : records)
    if (i++ >= skip) out.push_back(rec.result);
  return out;
}

QueryFailure classify_failure(const Error& error) {
  std::string_view cls = kExecutionError;
  switch (error.code()) {
    case Errc::PlanRejected: cls = kGenerationError; break;
    case Errc::BudgetTooSmall: cls = kBudgetError; break;
    case Errc::StepFailure: cls = kExecutionError; break;
    default:
      if (is_backend_error(error.code())) cls = kBackendError;
      break;
  }
  return {std::string(cls), std::string(error.label()), error.what()};
}

QueryOutcome run_query(std::string_view question, const Table& table, const LLMBackend& backend,
                       const PlannerConfig& config, const PromptExtras& extras) {
  QueryOutcome out;
  try {
    PlanningResult planned = generate_plan(question, table, backend, config, extras);
    out.attempts = std::move(planned.attempts);
    out.plan = std::move(planned.plan);
  } catch (const PlanRejected& e) {
    out.attempts = e.attempts();
    out.failure = classify_failure(e);
    return out;
  } catch (const Error& e) {
    out.failure = classify_failure(e);
    return out;
  }

  try {
    ExecutionResult result = execute_plan(*out.plan, table);
    out.answer = std::move(result.final);
    out.context = std::move(result.context);
    out.trace = std::move(result.trace);
  } catch (const StepFailure& e) {
    out.context = e.partial();
    out.trace = e.trace();
    out.failure = classify_failure(e);
  }
  return out;
}

std::vector<std::string> trace_lines(const QueryOutcome& outcome) {
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < outcome.attempts.size(); ++i) {
    const PlanAttempt& a = outcome.attempts[i];
    if (a.diagnostics.empty())
      lines.push_back(fmt::format("plan attempt {}: accepted", i + 1));
    else
      lines.push_back(fmt::format("plan attempt {}: rejected: {}", i + 1, fmt::join(a.diagnostics, " | ")));
  }
  for (const StepOutcome& s : outcome.trace)
    lines.push_back(fmt::format("[{}] {} => {}", s.index, s.op_text, s.summary));
  if (outcome.failure) lines.push_back(outcome.failure->reason());
  return lines;
}

}  // namespace dataagent
