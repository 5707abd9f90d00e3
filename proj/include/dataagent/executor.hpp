#pragma once

#include <map>
#include <string>
#include <vector>

#include "dataagent/error.hpp"
#include "dataagent/plan.hpp"
#include "dataagent/table.hpp"
#include "dataagent/value.hpp"

namespace dataagent {

struct StepRecord {
  std::string op_text;
  Value result;

  bool operator==(const StepRecord&) const = default;
};

/// Per-query map of step index -> (operation text, result). Write-once per key.
class ContextStore {
 public:
  /// Throws InvalidArgument if the index is already present.
  void put(int index, StepRecord record);
  const StepRecord* find(int index) const;
  const std::map<int, StepRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  bool operator==(const ContextStore&) const = default;

 private:
  std::map<int, StepRecord> records_;
};

struct StepOutcome {
  int index;
  std::string rationale;
  std::string op_text;
  std::string summary;

  bool operator==(const StepOutcome&) const = default;
};

struct ExecutionResult {
  Value final;
  ContextStore context;
  std::vector<StepOutcome> trace;
};

/// Thrown by execute_plan at the first failing step. The underlying label is
/// kept in cause() and repeated in what().
class StepFailure : public Error {
 public:
  StepFailure(int step, const Error& cause, ContextStore partial, std::vector<StepOutcome> trace);

  int step() const noexcept { return step_; }
  Errc cause() const noexcept { return cause_; }
  const ContextStore& partial() const noexcept { return partial_; }
  const std::vector<StepOutcome>& trace() const noexcept { return trace_; }

 private:
  int step_;
  Errc cause_;
  ContextStore partial_;
  std::vector<StepOutcome> trace_;
};

/// Runs the steps in order, storing each result before the next starts.
ExecutionResult execute_plan(const ActionPlan& plan, const Table& table);

/// Evaluates one expression; TABLE resolves to `table`, REF(k) to ctx[k].
Value eval_op(const OpExpr& expr, const Table& table, const ContextStore& ctx);

Value column_stat(const Table& table, std::string_view column, StatKind kind);
double correlation(const Table& table, std::string_view x, std::string_view y);
Model linreg(const Table& table, std::string_view x, std::string_view y);
double predict(const Model& model, double x0);

/// Row indices where the predicate holds; comparisons against Missing are false.
std::vector<std::size_t> filter_rows(const Table& table, const Predicate& predicate);

/// One line per step: `[index] op text => summary`.
std::string render_trace(const std::vector<StepOutcome>& trace);

}  // namespace dataagent
