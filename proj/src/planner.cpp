#include "dataagent/planner.hpp"

#include <fmt/format.h>

#include "dataagent/format.hpp"

namespace dataagent {

std::string PromptBundle::text() const {
  return fmt::format("{}\n{}\n\n{}\n{}\n\n{}\n{}\n\n{}\n{}\n", kSituationHeader, situation_context, kActionHeader,
                     desired_response_action, kCapabilitiesHeader, declared_capabilities, kNeedsHeader,
                     stipulated_needs);
}

namespace {

std::string action_section(std::string_view query) {
  return fmt::format(
      "{}{}\n"
      "Write an action plan that answers the question. Break the work into small, explainable steps; each step may "
      "use the result of an earlier step, and the result of the last step is the answer.",
      kQuestionMarker, query);
}

std::string needs_section(const PlannerConfig& config, const PromptExtras& extras) {
  std::string out = fmt::format(
      "Reply with the plan only, no other text. Write each step as two lines:\n"
      "Step N: <one-sentence rationale>\n"
      "OP: <operation> ON TABLE|REF(k)\n"
      "Grammar:\n{}\n"
      "Provide the operations without executing them. Use at most {} steps. Use only columns listed in the "
      "situation context.",
      kPlanGrammar, config.max_steps);
  if (!extras.feedback.empty()) {
    out += fmt::format("\n{}\n", kRetryMarker);
    for (const std::string& d : extras.feedback) out += fmt::format("- {}\n", d);
    out += "Fix these problems in the new plan.";
  }
  return out;
}

}  // namespace

PromptBundle build_prompt(std::string_view query, const DatasetProfile& profile, const PlannerConfig& config,
                          const PromptExtras& extras) {
  if (trim(query).empty()) throw Error(Errc::InvalidArgument, "query is empty");
  PromptBundle b;
  b.desired_response_action = action_section(trim(query));
  b.declared_capabilities = std::string(kOpCatalog);
  b.stipulated_needs = needs_section(config, extras);
  std::string prior = extras.prior_context.empty() ? "" : "\nprior results:\n" + extras.prior_context;

  // Everything except the background counts as fixed overhead.
  b.situation_context = prior;
  const std::size_t overhead = config.estimator(b.text());
  if (overhead >= config.token_budget)
    throw Error(Errc::BudgetTooSmall,
                fmt::format("prompt sections need {} tokens before any background, budget is {}", overhead,
                            config.token_budget));
  b.situation_context = render_background(profile, config.token_budget - overhead, config.estimator) + prior;
  if (std::size_t total = config.estimator(b.text()); total > config.token_budget)
    throw Error(Errc::BudgetTooSmall, fmt::format("prompt needs {} tokens, budget is {}", total, config.token_budget));
  return b;
}

std::string render_context(const ContextStore& context) {
  std::string out;
  for (const auto& [index, rec] : context.records())
    out += fmt::format("[{}] {} => {}\n", index, rec.op_text, summarize(rec.result));
  return out;
}

std::string extract_plan_text(std::string_view completion) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= completion.size()) {
    std::size_t nl = completion.find('\n', pos);
    std::string_view line = completion.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? completion.size() + 1 : nl + 1;
    if (trim(line).substr(0, 3) == "```") continue;
    lines.push_back(line);
  }
  auto is_step = [](std::string_view l) {
    l = trim(l);
    if (l.substr(0, 4) != "Step") return false;
    l = trim(l.substr(4));
    return !l.empty() && l[0] >= '0' && l[0] <= '9';
  };
  std::size_t first = 0;
  while (first < lines.size() && !is_step(lines[first])) ++first;
  if (first == lines.size()) return std::string(completion);
  std::size_t last = lines.size();
  while (last > first && trim(lines[last - 1]).substr(0, 3) != "OP:") --last;
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    out += lines[i];
    out += '\n';
  }
  return out;
}

namespace {

std::string join_attempts(const std::vector<PlanAttempt>& attempts) {
  std::string out;
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    if (i) out += "; ";
    out += fmt::format("attempt {}: {}", i + 1, fmt::join(attempts[i].diagnostics, " | "));
  }
  return out;
}

}  // namespace

PlanRejected::PlanRejected(std::vector<PlanAttempt> attempts)
    : Error(Errc::PlanRejected, join_attempts(attempts)), attempts_(std::move(attempts)) {}

PlanningResult generate_plan(std::string_view query, const Table& table, const LLMBackend& backend,
                             const PlannerConfig& config, const PromptExtras& extras) {
  const DatasetProfile profile = describe(table);
  const std::vector<ColumnSchema> schema = table.schema();
  PromptExtras round = extras;
  std::vector<PlanAttempt> attempts;

  for (int attempt = 0; attempt <= config.parse_retries; ++attempt) {
    PromptBundle bundle = build_prompt(query, profile, config, round);
    PlanAttempt record{backend.complete(bundle.text(), config.completion_params()), {}};

    try {
      ActionPlan plan = parse_plan(extract_plan_text(record.completion));
      for (const Diagnostic& d : validate_plan(plan, schema)) record.diagnostics.push_back(to_string(d));
      if (static_cast<int>(plan.steps.size()) > config.max_steps)
        record.diagnostics.push_back(fmt::format("plan has {} steps; at most {} are allowed", plan.steps.size(),
                                                 config.max_steps));
      if (record.diagnostics.empty()) {
        attempts.push_back(std::move(record));
        return {std::move(plan), std::move(attempts)};
      }
    } catch (const Error& e) {
      record.diagnostics.push_back(e.what());
    }
    round.feedback.insert(round.feedback.end(), record.diagnostics.begin(), record.diagnostics.end());
    attempts.push_back(std::move(record));
  }
  throw PlanRejected(std::move(attempts));
}

}  // namespace dataagent
