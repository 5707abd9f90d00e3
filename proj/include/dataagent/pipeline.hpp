#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dataagent/backend.hpp"
#include "dataagent/executor.hpp"
#include "dataagent/planner.hpp"
#include "dataagent/table.hpp"

namespace dataagent {

inline constexpr std::string_view kGenerationError = "generation-error";
inline constexpr std::string_view kBudgetError = "budget-error";
inline constexpr std::string_view kExecutionError = "execution-error";
inline constexpr std::string_view kBackendError = "backend-error";

struct QueryFailure {
  std::string failure_class;  ///< one of the k*Error labels above
  std::string label;          ///< originating module error label, e.g. "PlanRejected"
  std::string message;        ///< full error text

  std::string reason() const { return failure_class + ": " + message; }
};

/// plan -> execute for one question.
struct QueryOutcome {
  std::vector<PlanAttempt> attempts;
  std::optional<ActionPlan> plan;
  std::vector<StepOutcome> trace;
  std::optional<Value> answer;
  ContextStore context;
  std::optional<QueryFailure> failure;

  /// Results of the last `parts` steps, in step order (for multi-part answers).
  std::vector<Value> last_results(std::size_t parts) const;
};

/// Never throws for domain failures; they land in `failure`.
QueryOutcome run_query(std::string_view question, const Table& table, const LLMBackend& backend,
                       const PlannerConfig& config, const PromptExtras& extras = {});

/// Classifies a module error into a failure class.
QueryFailure classify_failure(const Error& error);

/// Planning attempts and execution steps, one line each.
std::vector<std::string> trace_lines(const QueryOutcome& outcome);

}  // namespace dataagent
