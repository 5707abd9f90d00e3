#include <fmt/format.h>

#include "dataagent/format.hpp"
#include "dataagent/plan.hpp"

namespace dataagent {

std::string_view to_string(StatKind kind) {
  switch (kind) {
    case StatKind::Mean: return "mean";
    case StatKind::Median: return "median";
    case StatKind::Mode: return "mode";
    case StatKind::Std: return "std";
    case StatKind::Var: return "var";
    case StatKind::Min: return "min";
    case StatKind::Max: return "max";
    case StatKind::Sum: return "sum";
    case StatKind::Range: return "range";
    case StatKind::NUnique: return "nunique";
  }
  return "mean";
}

std::string_view to_string(AggKind kind) {
  switch (kind) {
    case AggKind::Mean: return "mean";
    case AggKind::Sum: return "sum";
    case AggKind::Count: return "count";
    case AggKind::Min: return "min";
    case AggKind::Max: return "max";
  }
  return "mean";
}

std::string_view to_string(Extreme mode) { return mode == Extreme::Max ? "max" : "min"; }
std::string_view to_string(SortOrder order) { return order == SortOrder::Asc ? "asc" : "desc"; }

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
  }
  return "==";
}

bool requires_numeric(StatKind kind) {
  switch (kind) {
    case StatKind::Mean:
    case StatKind::Median:
    case StatKind::Std:
    case StatKind::Var:
    case StatKind::Sum:
    case StatKind::Range:
      return true;
    default:
      return false;
  }
}

namespace {

CmpOp complement(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::Ge: return CmpOp::Lt;
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Le: return CmpOp::Gt;
  }
  return op;
}

Comparison negate(Comparison c) {
  c.op = complement(c.op);
  return c;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(s[0])) return false;
  for (char c : s)
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  // Keywords must be quoted to stay unambiguous.
  return s != "AND" && s != "OR" && s != "ON" && s != "TABLE" && s != "REF" && s != "true" && s != "false";
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string name_text(std::string_view column) { return is_identifier(column) ? std::string(column) : quote(column); }

std::string literal_text(const Literal& lit) {
  if (const double* v = std::get_if<double>(&lit)) return format_number(*v);
  return quote(std::get<std::string>(lit));
}

std::string comparison_text(const Comparison& c) {
  return fmt::format("{} {} {}", name_text(c.column), to_string(c.op), literal_text(c.literal));
}

struct ArgsRenderer {
  std::string operator()(const op::CountRows&) const { return ""; }
  std::string operator()(const op::CountCols&) const { return ""; }
  std::string operator()(const op::Columns&) const { return ""; }
  std::string operator()(const op::Dtypes&) const { return ""; }
  std::string operator()(const op::HeadN& o) const { return fmt::format("n={}", o.n); }
  std::string operator()(const op::CountMissing& o) const { return "col=" + name_text(o.column); }
  std::string operator()(const op::CountMissingAll&) const { return ""; }
  std::string operator()(const op::Stat& o) const {
    return fmt::format("col={}, kind={}", name_text(o.column), to_string(o.kind));
  }
  std::string operator()(const op::ValueCounts& o) const { return "col=" + name_text(o.column); }
  std::string operator()(const op::TopValue& o) const { return "col=" + name_text(o.column); }
  std::string operator()(const op::Corr& o) const {
    return fmt::format("x={}, y={}", name_text(o.x), name_text(o.y));
  }
  std::string operator()(const op::Filter& o) const { return "where=" + render_predicate(o.where); }
  std::string operator()(const op::GroupAgg& o) const {
    return fmt::format("by={}, target={}, agg={}", name_text(o.by), name_text(o.target), to_string(o.agg));
  }
  std::string operator()(const op::SortTop& o) const {
    std::string s = fmt::format("col={}, k={}, order={}", name_text(o.column), o.k, to_string(o.order));
    if (o.return_column) s += ", return_col=" + name_text(*o.return_column);
    return s;
  }
  std::string operator()(const op::ArgExtreme& o) const {
    return fmt::format("col={}, mode={}, return_col={}", name_text(o.column), to_string(o.mode),
                       name_text(o.return_column));
  }
  std::string operator()(const op::ExtremeKey& o) const {
    return fmt::format("mode={}, strict_positive={}", to_string(o.mode), o.strict_positive ? "true" : "false");
  }
  std::string operator()(const op::LinRegFit& o) const {
    return fmt::format("x={}, y={}", name_text(o.x), name_text(o.y));
  }
  std::string operator()(const op::LinRegPredict& o) const { return "x0=" + format_number(o.x0); }
};

struct NameOf {
  std::string_view operator()(const op::CountRows&) const { return "COUNT_ROWS"; }
  std::string_view operator()(const op::CountCols&) const { return "COUNT_COLS"; }
  std::string_view operator()(const op::Columns&) const { return "COLUMNS"; }
  std::string_view operator()(const op::Dtypes&) const { return "DTYPES"; }
  std::string_view operator()(const op::HeadN&) const { return "HEAD"; }
  std::string_view operator()(const op::CountMissing&) const { return "COUNT_MISSING"; }
  std::string_view operator()(const op::CountMissingAll&) const { return "COUNT_MISSING_ALL"; }
  std::string_view operator()(const op::Stat&) const { return "STAT"; }
  std::string_view operator()(const op::ValueCounts&) const { return "VALUE_COUNTS"; }
  std::string_view operator()(const op::TopValue&) const { return "TOP_VALUE"; }
  std::string_view operator()(const op::Corr&) const { return "CORR"; }
  std::string_view operator()(const op::Filter&) const { return "FILTER"; }
  std::string_view operator()(const op::GroupAgg&) const { return "GROUP_AGG"; }
  std::string_view operator()(const op::SortTop&) const { return "SORT_TOP"; }
  std::string_view operator()(const op::ArgExtreme&) const { return "ARG_EXTREME"; }
  std::string_view operator()(const op::ExtremeKey&) const { return "EXTREME_KEY"; }
  std::string_view operator()(const op::LinRegFit&) const { return "LINREG_FIT"; }
  std::string_view operator()(const op::LinRegPredict&) const { return "LINREG_PREDICT"; }
};

}  // namespace

Predicate Predicate::negated() const {
  Predicate out{negate(first), {}};
  for (const auto& [conn, cmp] : rest)
    out.rest.emplace_back(conn == Connective::And ? Connective::Or : Connective::And, negate(cmp));
  return out;
}

std::string_view op_name(const Operation& op) { return std::visit(NameOf{}, op); }

std::string render_predicate(const Predicate& p) {
  std::string out = comparison_text(p.first);
  for (const auto& [conn, cmp] : p.rest) {
    out += conn == Connective::And ? " AND " : " OR ";
    out += comparison_text(cmp);
  }
  return out;
}

std::string render_op(const OpExpr& expr) {
  std::string out = fmt::format("{}({}) ON ", op_name(expr.op), std::visit(ArgsRenderer{}, expr.op));
  out += expr.source.is_table() ? std::string("TABLE") : fmt::format("REF({})", *expr.source.ref);
  return out;
}

std::string render_plan(const ActionPlan& plan) {
  std::string out;
  for (const PlanStep& s : plan.steps) {
    out += fmt::format("Step {}: {}\n", s.index, s.rationale);
    out += fmt::format("OP: {}\n", render_op(s.expr));
  }
  return out;
}

std::string to_string(const Diagnostic& d) {
  return fmt::format("step {}: {}: {}", d.step, label(d.code), d.message);
}

const std::string_view kPlanGrammar = R"DSL(plan := step+
step := "Step" INT ":" TEXT NEWLINE "OP:" op NEWLINE
op := NAME "(" [arg ("," arg)*] ")" "ON" ("TABLE" | "REF(" INT ")")
arg := KEY "=" (NUMBER | IDENT | QUOTED | predicate)
predicate := cmp (("AND"|"OR") cmp)*
cmp := IDENT ("=="|"!="|">"|">="|"<"|"<=") (NUMBER | QUOTED)
Notes: AND/OR chain left to right with no precedence. Column names that are
not plain identifiers are written as QUOTED strings. String literals use
double quotes; numbers are bare. REF(k) must name an earlier step.)DSL";

const std::string_view kOpCatalog = R"DSL(Operations (source TABLE, or REF(k) to a FILTER/HEAD result, unless noted):
COUNT_ROWS() -> number of rows
COUNT_COLS() -> number of columns
COLUMNS() -> column names
DTYPES() -> "name:dtype" per column
HEAD(n=INT) -> first n rows (table)
COUNT_MISSING(col=C) -> missing cells in C
COUNT_MISSING_ALL() -> map column -> missing cells
STAT(col=C, kind=mean|median|mode|std|var|min|max|sum|range|nunique) -> statistic of C; mean, median, std, var, sum, range need a numeric column; mode returns every tied value
VALUE_COUNTS(col=C) -> map value -> count
TOP_VALUE(col=C) -> most frequent value (ties: smallest)
CORR(x=C, y=C) -> Pearson correlation over rows where both are present
FILTER(where=PREDICATE) -> rows where PREDICATE holds (missing cells compare false)
GROUP_AGG(by=C, target=C, agg=mean|sum|count|min|max) -> map group -> aggregate
SORT_TOP(col=C, k=INT, order=asc|desc[, return_col=C]) -> top k values of col, or of return_col
ARG_EXTREME(col=C, mode=max|min, return_col=C) -> return_col value on the first row where col is extreme
EXTREME_KEY(mode=max|min, strict_positive=true|false) ON REF(k) -> key(s) of a map result with the extreme value
LINREG_FIT(x=C, y=C) -> least-squares line y = slope*x + intercept
LINREG_PREDICT(x0=NUMBER) ON REF(k) -> prediction from the LINREG_FIT model at step k)DSL";

}  // namespace dataagent
