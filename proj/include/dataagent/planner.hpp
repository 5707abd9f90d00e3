#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dataagent/backend.hpp"
#include "dataagent/error.hpp"
#include "dataagent/executor.hpp"
#include "dataagent/plan.hpp"
#include "dataagent/profiler.hpp"
#include "dataagent/tokens.hpp"

namespace dataagent {

// Section headers are stable literals; scripted backends and prompt audits match on them.
inline constexpr std::string_view kSituationHeader = "## SITUATION CONTEXT";
inline constexpr std::string_view kActionHeader = "## DESIRED RESPONSE ACTION";
inline constexpr std::string_view kCapabilitiesHeader = "## DECLARED CAPABILITIES";
inline constexpr std::string_view kNeedsHeader = "## STIPULATED NEEDS";
inline constexpr std::string_view kQuestionMarker = "Question: ";
inline constexpr std::string_view kRetryMarker = "PREVIOUS ATTEMPT REJECTED:";

/// Four-section prompt: situation context, desired response action, declared
/// capabilities, stipulated needs (concatenated in that order).
struct PromptBundle {
  std::string situation_context;
  std::string desired_response_action;
  std::string declared_capabilities;
  std::string stipulated_needs;

  std::string text() const;
  bool operator==(const PromptBundle&) const = default;
};

struct PlannerConfig {
  std::string model_name = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::size_t token_budget = 4096;
  int max_steps = 8;
  int parse_retries = 2;
  TokenEstimator estimator = estimate_tokens;

  CompletionParams completion_params() const { return {model_name, temperature, max_output_tokens}; }
};

struct PromptExtras {
  /// Diagnostics from rejected attempts, appended to stipulated needs.
  std::vector<std::string> feedback;
  /// Prior step outputs (session mode), appended to the situation context.
  std::string prior_context;
};

/// Throws InvalidArgument on an empty query and BudgetTooSmall when even the
/// schema-only background does not fit token_budget.
PromptBundle build_prompt(std::string_view query, const DatasetProfile& profile, const PlannerConfig& config,
                          const PromptExtras& extras = {});

/// Renders stored step results for session-mode context reuse.
std::string render_context(const ContextStore& context);

/// Keeps the `Step N:` / `OP:` lines of a free-text completion: drops code
/// fences, leading prose before the first step and trailing prose after the last OP line.
std::string extract_plan_text(std::string_view completion);

struct PlanAttempt {
  std::string completion;
  std::vector<std::string> diagnostics;  // empty for the accepted attempt
};

struct PlanningResult {
  ActionPlan plan;
  std::vector<PlanAttempt> attempts;
};

class PlanRejected : public Error {
 public:
  explicit PlanRejected(std::vector<PlanAttempt> attempts);
  const std::vector<PlanAttempt>& attempts() const noexcept { return attempts_; }

 private:
  std::vector<PlanAttempt> attempts_;
};

/// Prompts the backend and parses/validates the reply, re-prompting with the
/// diagnostics up to parse_retries times. Throws PlanRejected, BudgetTooSmall,
/// or the backend's error.
PlanningResult generate_plan(std::string_view query, const Table& table, const LLMBackend& backend,
                             const PlannerConfig& config, const PromptExtras& extras = {});

}  // namespace dataagent
