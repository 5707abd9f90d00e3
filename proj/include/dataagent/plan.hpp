#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dataagent/error.hpp"
#include "dataagent/table.hpp"

namespace dataagent {

enum class StatKind { Mean, Median, Mode, Std, Var, Min, Max, Sum, Range, NUnique };
enum class AggKind { Mean, Sum, Count, Min, Max };
enum class Extreme { Max, Min };
enum class SortOrder { Asc, Desc };
enum class CmpOp { Eq, Ne, Gt, Ge, Lt, Le };
enum class Connective { And, Or };

std::string_view to_string(StatKind kind);
std::string_view to_string(AggKind kind);
std::string_view to_string(Extreme mode);
std::string_view to_string(SortOrder order);
std::string_view to_string(CmpOp op);

/// mean, median, std, var, sum and range need a Numeric column.
bool requires_numeric(StatKind kind);

using Literal = std::variant<double, std::string>;

struct Comparison {
  std::string column;
  CmpOp op;
  Literal literal;

  bool operator==(const Comparison&) const = default;
};

/// Left-associative chain: ((first c1 t1) c2 t2) ...
/// There is no precedence between AND and OR.
struct Predicate {
  Comparison first;
  std::vector<std::pair<Connective, Comparison>> rest;

  /// Logical complement, still a left-associative chain (De Morgan on each link).
  Predicate negated() const;

  bool operator==(const Predicate&) const = default;
};

namespace op {
struct CountRows { bool operator==(const CountRows&) const = default; };
struct CountCols { bool operator==(const CountCols&) const = default; };
struct Columns { bool operator==(const Columns&) const = default; };
struct Dtypes { bool operator==(const Dtypes&) const = default; };
struct HeadN {
  std::int64_t n;
  bool operator==(const HeadN&) const = default;
};
struct CountMissing {
  std::string column;
  bool operator==(const CountMissing&) const = default;
};
struct CountMissingAll { bool operator==(const CountMissingAll&) const = default; };
struct Stat {
  std::string column;
  StatKind kind;
  bool operator==(const Stat&) const = default;
};
struct ValueCounts {
  std::string column;
  bool operator==(const ValueCounts&) const = default;
};
struct TopValue {
  std::string column;
  bool operator==(const TopValue&) const = default;
};
struct Corr {
  std::string x, y;
  bool operator==(const Corr&) const = default;
};
struct Filter {
  Predicate where;
  bool operator==(const Filter&) const = default;
};
struct GroupAgg {
  std::string by, target;
  AggKind agg;
  bool operator==(const GroupAgg&) const = default;
};
struct SortTop {
  std::string column;
  std::int64_t k;
  SortOrder order;
  std::optional<std::string> return_column;
  bool operator==(const SortTop&) const = default;
};
struct ArgExtreme {
  std::string column;
  Extreme mode;
  std::string return_column;
  bool operator==(const ArgExtreme&) const = default;
};
struct ExtremeKey {
  Extreme mode;
  bool strict_positive;
  bool operator==(const ExtremeKey&) const = default;
};
struct LinRegFit {
  std::string x, y;
  bool operator==(const LinRegFit&) const = default;
};
/// The model is the step's source, which must be REF(k) to a LINREG_FIT step.
struct LinRegPredict {
  double x0;
  bool operator==(const LinRegPredict&) const = default;
};
}  // namespace op

using Operation = std::variant<op::CountRows, op::CountCols, op::Columns, op::Dtypes, op::HeadN, op::CountMissing,
                               op::CountMissingAll, op::Stat, op::ValueCounts, op::TopValue, op::Corr, op::Filter,
                               op::GroupAgg, op::SortTop, op::ArgExtreme, op::ExtremeKey, op::LinRegFit,
                               op::LinRegPredict>;

/// TABLE when ref is empty, otherwise REF(step).
struct Source {
  std::optional<int> ref;

  bool is_table() const { return !ref.has_value(); }
  static Source table() { return {}; }
  static Source step(int index) { return {index}; }
  bool operator==(const Source&) const = default;
};

struct OpExpr {
  Operation op;
  Source source;

  bool operator==(const OpExpr&) const = default;
};

struct PlanStep {
  int index;
  std::string rationale;
  OpExpr expr;

  bool operator==(const PlanStep&) const = default;
};

struct ActionPlan {
  std::vector<PlanStep> steps;

  bool operator==(const ActionPlan&) const = default;
};

/// Upper-snake DSL name of the operation ("COUNT_ROWS").
std::string_view op_name(const Operation& op);

/// Canonical text of one expression: `STAT(col=Temp, kind=mean) ON TABLE`.
std::string render_op(const OpExpr& expr);
std::string render_predicate(const Predicate& predicate);

/// Canonical plan text; parse_plan(render_plan(p)) == p.
std::string render_plan(const ActionPlan& plan);

/// Parses the line-oriented plan format:
///
///   Step 1: <rationale>
///   OP: NAME(key=value, ...) ON TABLE|REF(k)
///
/// Blank lines are ignored. Throws Error with SyntaxError, NonConsecutiveStep,
/// ForwardRef, UnknownOp or BadArg; the detail starts with "line N:".
ActionPlan parse_plan(std::string_view text);

/// Parses a single `NAME(...) ON ...` expression (no step context, so REF
/// indices are not range-checked).
OpExpr parse_op(std::string_view text);

struct Diagnostic {
  int step;
  Errc code;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

std::string to_string(const Diagnostic& d);

/// Static checks against a schema: columns exist, dtypes fit each op, and
/// REF sources produce what the consuming op expects.
std::vector<Diagnostic> validate_plan(const ActionPlan& plan, const std::vector<ColumnSchema>& schema);

/// Grammar and catalog reference text. Both are embedded verbatim in planner prompts.
extern const std::string_view kPlanGrammar;
extern const std::string_view kOpCatalog;

}  // namespace dataagent
