#include "dataagent/executor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "dataagent/format.hpp"
#include "dataagent/stats.hpp"

namespace dataagent {

void ContextStore::put(int index, StepRecord record) {
  if (!records_.emplace(index, std::move(record)).second)
    throw Error(Errc::InvalidArgument, fmt::format("context already holds step {}", index));
}

const StepRecord* ContextStore::find(int index) const {
  auto it = records_.find(index);
  return it == records_.end() ? nullptr : &it->second;
}

StepFailure::StepFailure(int step, const Error& cause, ContextStore partial, std::vector<StepOutcome> trace)
    : Error(Errc::StepFailure, fmt::format("step {}: {}", step, cause.what())),
      step_(step),
      cause_(cause.code()),
      partial_(std::move(partial)),
      trace_(std::move(trace)) {}

namespace {

[[noreturn]] void fail(Errc code, std::string message) { throw Error(code, std::move(message)); }

const Column& numeric_column(const Table& t, std::string_view name, std::string_view why) {
  const Column& c = t.column(name);
  if (!c.numeric()) fail(Errc::DtypeMismatch, fmt::format("{} needs a numeric column; '{}' is categorical", why, name));
  return c;
}

/// Data-requiring ops on a zero-row table report EmptyResult; otherwise too few
/// present cells is InsufficientData.
[[noreturn]] void insufficient(const Table& t, std::string message) {
  if (t.row_count() == 0) fail(Errc::EmptyResult, "source table has no rows: " + message);
  fail(Errc::InsufficientData, std::move(message));
}

std::string key_text(const Cell& cell) {
  if (const double* v = std::get_if<double>(&cell)) return format_number(*v);
  return std::get<std::string>(cell);
}

bool cell_less(const Cell& a, const Cell& b) {
  if (const double* x = std::get_if<double>(&a)) return *x < std::get<double>(b);
  return std::get<std::string>(a) < std::get<std::string>(b);
}

Value cell_value(const Cell& cell) {
  if (const double* v = std::get_if<double>(&cell)) return *v;
  return std::get<std::string>(cell);
}

struct PairedColumns {
  std::vector<double> xs, ys;
};

PairedColumns pairwise_complete(const Table& t, std::string_view x, std::string_view y, std::string_view why) {
  const Column& cx = numeric_column(t, x, why);
  const Column& cy = numeric_column(t, y, why);
  PairedColumns p;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    auto a = cx.number(r);
    auto b = cy.number(r);
    if (a && b) {
      p.xs.push_back(*a);
      p.ys.push_back(*b);
    }
  }
  if (p.xs.size() < 2)
    insufficient(t, fmt::format("{} needs at least 2 rows where '{}' and '{}' are both present, found {}", why, x, y,
                                p.xs.size()));
  return p;
}

bool constant(const std::vector<double>& xs) {
  return std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); });
}

bool compare(const Cell& cell, const Comparison& c) {
  if (std::holds_alternative<Missing>(cell)) return false;
  if (const double* v = std::get_if<double>(&cell)) {
    const double* lit = std::get_if<double>(&c.literal);
    if (lit == nullptr) fail(Errc::DtypeMismatch, fmt::format("numeric column '{}' compared with a string literal", c.column));
    switch (c.op) {
      case CmpOp::Eq: return *v == *lit;
      case CmpOp::Ne: return *v != *lit;
      case CmpOp::Gt: return *v > *lit;
      case CmpOp::Ge: return *v >= *lit;
      case CmpOp::Lt: return *v < *lit;
      case CmpOp::Le: return *v <= *lit;
    }
  }
  const std::string& s = std::get<std::string>(cell);
  const std::string* lit = std::get_if<std::string>(&c.literal);
  if (lit == nullptr) fail(Errc::DtypeMismatch, fmt::format("categorical column '{}' compared with a number", c.column));
  if (c.op == CmpOp::Eq) return s == *lit;
  if (c.op == CmpOp::Ne) return s != *lit;
  fail(Errc::DtypeMismatch, fmt::format("categorical column '{}' only supports == and !=", c.column));
}

struct Evaluator {
  const Table& table;          // resolved table source (TABLE or a derived table)
  const Value* source_value;   // resolved value source for EXTREME_KEY / LINREG_PREDICT
  const StepRecord* source_record;

  Value operator()(const op::CountRows&) const { return static_cast<double>(table.row_count()); }
  Value operator()(const op::CountCols&) const { return static_cast<double>(table.column_count()); }
  Value operator()(const op::Columns&) const {
    TextList names;
    for (const Column& c : table.columns()) names.push_back(c.name());
    return names;
  }
  Value operator()(const op::Dtypes&) const {
    TextList out;
    for (const Column& c : table.columns()) out.push_back(fmt::format("{}:{}", c.name(), to_string(c.dtype())));
    return out;
  }
  Value operator()(const op::HeadN& o) const {
    return TableRef{std::make_shared<const Table>(table.head(static_cast<std::size_t>(o.n)))};
  }
  Value operator()(const op::CountMissing& o) const {
    return static_cast<double>(table.column(o.column).missing_count());
  }
  Value operator()(const op::CountMissingAll&) const {
    KeyNumberMap out;
    for (const Column& c : table.columns()) out[c.name()] = static_cast<double>(c.missing_count());
    return out;
  }
  Value operator()(const op::Stat& o) const { return column_stat(table, o.column, o.kind); }
  Value operator()(const op::ValueCounts& o) const {
    const Column& c = table.column(o.column);
    KeyNumberMap out;
    for (const Cell& cell : c.cells())
      if (!std::holds_alternative<Missing>(cell)) out[key_text(cell)] += 1.0;
    return out;
  }
  Value operator()(const op::TopValue& o) const {
    const Column& c = table.column(o.column);
    std::vector<Cell> present;
    for (const Cell& cell : c.cells())
      if (!std::holds_alternative<Missing>(cell)) present.push_back(cell);
    if (present.empty()) insufficient(table, fmt::format("TOP_VALUE: column '{}' has no values", o.column));
    std::sort(present.begin(), present.end(), cell_less);
    // Runs of equal values; the first longest run is the smallest top value.
    std::size_t best = 0, best_len = 0;
    for (std::size_t i = 0; i < present.size();) {
      std::size_t j = i;
      while (j < present.size() && present[j] == present[i]) ++j;
      if (j - i > best_len) best = i, best_len = j - i;
      i = j;
    }
    return cell_value(present[best]);
  }
  Value operator()(const op::Corr& o) const { return correlation(table, o.x, o.y); }
  Value operator()(const op::Filter& o) const {
    std::vector<std::size_t> rows = filter_rows(table, o.where);
    return TableRef{std::make_shared<const Table>(table.take_rows(rows))};
  }
  Value operator()(const op::GroupAgg& o) const {
    const Column& by = table.column(o.by);
    const Column& target = o.agg == AggKind::Count ? table.column(o.target)
                                                   : numeric_column(table, o.target, fmt::format("GROUP_AGG agg={}", to_string(o.agg)));
    std::map<std::string, std::vector<double>, std::less<>> groups;
    std::map<std::string, std::size_t, std::less<>> rows;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
      if (by.is_missing(r)) continue;
      std::string key = key_text(by[r]);
      ++rows[key];
      auto& bucket = groups[key];
      if (auto v = target.number(r)) bucket.push_back(*v);
    }
    KeyNumberMap out;
    for (const auto& [key, n] : rows) {
      const std::vector<double>& xs = groups[key];
      switch (o.agg) {
        case AggKind::Count: out[key] = static_cast<double>(n); break;
        case AggKind::Sum: out[key] = stats::sum(xs); break;
        case AggKind::Mean:
          if (!xs.empty()) out[key] = stats::mean(xs);
          break;
        case AggKind::Min:
          if (!xs.empty()) out[key] = *std::min_element(xs.begin(), xs.end());
          break;
        case AggKind::Max:
          if (!xs.empty()) out[key] = *std::max_element(xs.begin(), xs.end());
          break;
      }
    }
    return out;
  }
  Value operator()(const op::SortTop& o) const {
    const Column& key = table.column(o.column);
    const Column& ret = table.column(o.return_column.value_or(o.column));
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < table.row_count(); ++r)
      if (!key.is_missing(r) && !ret.is_missing(r)) rows.push_back(r);
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      return o.order == SortOrder::Asc ? cell_less(key[a], key[b]) : cell_less(key[b], key[a]);
    });
    rows.resize(std::min(rows.size(), static_cast<std::size_t>(o.k)));
    if (ret.numeric()) {
      NumberList out;
      for (std::size_t r : rows) out.push_back(*ret.number(r));
      return out;
    }
    TextList out;
    for (std::size_t r : rows) out.push_back(*ret.text(r));
    return out;
  }
  Value operator()(const op::ArgExtreme& o) const {
    const Column& key = table.column(o.column);
    const Column& ret = table.column(o.return_column);
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
      if (key.is_missing(r)) continue;
      if (!best || (o.mode == Extreme::Max ? cell_less(key[*best], key[r]) : cell_less(key[r], key[*best]))) best = r;
    }
    if (!best) insufficient(table, fmt::format("ARG_EXTREME: column '{}' has no values", o.column));
    if (ret.is_missing(*best))
      return NoneOutcome{fmt::format("'{}' is missing on the row where '{}' is {}", o.return_column, o.column, to_string(o.mode))};
    return cell_value(ret[*best]);
  }
  Value operator()(const op::ExtremeKey& o) const {
    const auto* map = std::get_if<KeyNumberMap>(source_value);
    if (map == nullptr) fail(Errc::RefTypeMismatch, fmt::format("EXTREME_KEY needs a KeyNumberMap, got {}", kind_name(*source_value)));
    std::vector<std::pair<std::string, double>> candidates;
    for (const auto& [k, v] : *map)
      if (!o.strict_positive || v > 0) candidates.emplace_back(k, v);
    if (candidates.empty()) {
      bool missing_counts = source_record && source_record->op_text.rfind("COUNT_MISSING_ALL", 0) == 0;
      if (missing_counts) return NoneOutcome{"no missing values"};
      return NoneOutcome{o.strict_positive ? "no positive values" : "empty map"};
    }
    double extreme = candidates.front().second;
    for (const auto& [k, v] : candidates) extreme = o.mode == Extreme::Max ? std::max(extreme, v) : std::min(extreme, v);
    TextList keys;
    for (const auto& [k, v] : candidates)
      if (v == extreme) keys.push_back(k);
    if (keys.size() == 1) return keys.front();
    return keys;
  }
  Value operator()(const op::LinRegFit& o) const { return linreg(table, o.x, o.y); }
  Value operator()(const op::LinRegPredict& o) const {
    const auto* model = std::get_if<Model>(source_value);
    if (model == nullptr) fail(Errc::RefTypeMismatch, fmt::format("LINREG_PREDICT needs a Model, got {}", kind_name(*source_value)));
    return predict(*model, o.x0);
  }
};

bool reads_value(const Operation& op) {
  return std::holds_alternative<op::ExtremeKey>(op) || std::holds_alternative<op::LinRegPredict>(op);
}

}  // namespace

std::vector<std::size_t> filter_rows(const Table& table, const Predicate& p) {
  auto column_of = [&](const Comparison& c) -> const Column& { return table.column(c.column); };
  const Column& first = column_of(p.first);
  std::vector<const Column*> rest;
  for (const auto& [conn, cmp] : p.rest) rest.push_back(&column_of(cmp));

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    bool acc = compare(first[r], p.first);
    for (std::size_t i = 0; i < p.rest.size(); ++i) {
      bool v = compare((*rest[i])[r], p.rest[i].second);
      acc = p.rest[i].first == Connective::And ? (acc && v) : (acc || v);
    }
    if (acc) rows.push_back(r);
  }
  return rows;
}

Value column_stat(const Table& table, std::string_view name, StatKind kind) {
  const Column& c = table.column(name);
  if (requires_numeric(kind) && !c.numeric())
    fail(Errc::DtypeMismatch, fmt::format("STAT kind={} needs a numeric column; '{}' is categorical", to_string(kind), name));

  if (kind == StatKind::NUnique) {
    std::vector<Cell> present;
    for (const Cell& cell : c.cells())
      if (!std::holds_alternative<Missing>(cell)) present.push_back(cell);
    std::sort(present.begin(), present.end(), cell_less);
    return static_cast<double>(std::unique(present.begin(), present.end()) - present.begin());
  }

  const std::size_t needed = (kind == StatKind::Std || kind == StatKind::Var) ? 2 : 1;
  if (c.present_count() < needed)
    insufficient(table, fmt::format("STAT kind={} needs {} present value(s) in '{}', found {}", to_string(kind), needed,
                                    name, c.present_count()));

  if (!c.numeric()) {
    std::vector<std::string> xs;
    for (std::size_t r = 0; r < c.size(); ++r)
      if (const std::string* t = c.text(r)) xs.push_back(*t);
    std::sort(xs.begin(), xs.end());
    switch (kind) {
      case StatKind::Min: return xs.front();
      case StatKind::Max: return xs.back();
      case StatKind::Mode: {
        std::size_t best = 0;
        TextList modes;
        for (std::size_t i = 0; i < xs.size();) {
          std::size_t j = i;
          while (j < xs.size() && xs[j] == xs[i]) ++j;
          if (j - i > best) best = j - i, modes.clear();
          if (j - i == best) modes.push_back(xs[i]);
          i = j;
        }
        return modes;
      }
      default: break;
    }
    fail(Errc::DtypeMismatch, fmt::format("STAT kind={} is not defined for categorical '{}'", to_string(kind), name));
  }

  std::vector<double> xs = c.numbers();
  switch (kind) {
    case StatKind::Mean: return stats::mean(xs);
    case StatKind::Median: return stats::median(xs);
    case StatKind::Std: return std::sqrt(stats::sample_variance(xs));
    case StatKind::Var: return stats::sample_variance(xs);
    case StatKind::Sum: return stats::sum(xs);
    case StatKind::Min: return *std::min_element(xs.begin(), xs.end());
    case StatKind::Max: return *std::max_element(xs.begin(), xs.end());
    case StatKind::Range: {
      auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
      return *hi - *lo;
    }
    case StatKind::Mode: {
      std::sort(xs.begin(), xs.end());
      std::size_t best = 0;
      NumberList modes;
      for (std::size_t i = 0; i < xs.size();) {
        std::size_t j = i;
        while (j < xs.size() && xs[j] == xs[i]) ++j;
        if (j - i > best) best = j - i, modes.clear();
        if (j - i == best) modes.push_back(xs[i]);
        i = j;
      }
      return modes;
    }
    case StatKind::NUnique: break;
  }
  return 0.0;
}

double correlation(const Table& table, std::string_view x, std::string_view y) {
  PairedColumns p = pairwise_complete(table, x, y, "CORR");
  stats::Bivariate b = stats::centered_moments(p.xs, p.ys);
  if (constant(p.xs) || constant(p.ys))
    fail(Errc::ZeroVariance, fmt::format("CORR: '{}' is constant over the complete rows", constant(p.xs) ? x : y));
  return std::clamp(b.sxy / std::sqrt(b.sxx * b.syy), -1.0, 1.0);
}

Model linreg(const Table& table, std::string_view x, std::string_view y) {
  PairedColumns p = pairwise_complete(table, x, y, "LINREG_FIT");
  stats::Bivariate b = stats::centered_moments(p.xs, p.ys);
  if (constant(p.xs) || constant(p.ys))
    fail(Errc::ZeroVariance, fmt::format("LINREG_FIT: '{}' is constant over the complete rows", constant(p.xs) ? x : y));
  Model m;
  m.slope = b.sxy / b.sxx;
  m.intercept = b.mean_y - m.slope * b.mean_x;
  m.r = std::clamp(b.sxy / std::sqrt(b.sxx * b.syy), -1.0, 1.0);
  m.n = b.n;
  return m;
}

double predict(const Model& model, double x0) { return model.slope * x0 + model.intercept; }

Value eval_op(const OpExpr& expr, const Table& table, const ContextStore& ctx) {
  if (expr.source.is_table()) {
    if (reads_value(expr.op))
      fail(Errc::RefTypeMismatch, fmt::format("{} must read a step result via REF(k)", op_name(expr.op)));
    return std::visit(Evaluator{table, nullptr, nullptr}, expr.op);
  }
  const StepRecord* rec = ctx.find(*expr.source.ref);
  if (rec == nullptr) fail(Errc::ForwardRef, fmt::format("REF({}) has no stored result", *expr.source.ref));
  if (reads_value(expr.op)) return std::visit(Evaluator{table, &rec->result, rec}, expr.op);
  const auto* derived = std::get_if<TableRef>(&rec->result);
  if (derived == nullptr || !derived->table)
    fail(Errc::RefTypeMismatch, fmt::format("{} needs a table but REF({}) holds {}", op_name(expr.op), *expr.source.ref,
                                            kind_name(rec->result)));
  return std::visit(Evaluator{*derived->table, nullptr, nullptr}, expr.op);
}

ExecutionResult execute_plan(const ActionPlan& plan, const Table& table) {
  if (plan.steps.empty()) throw Error(Errc::InvalidArgument, "plan has no steps");
  ExecutionResult result;
  for (const PlanStep& step : plan.steps) {
    std::string text = render_op(step.expr);
    Value v;
    try {
      v = eval_op(step.expr, table, result.context);
    } catch (const Error& e) {
      throw StepFailure(step.index, e, std::move(result.context), std::move(result.trace));
    }
    result.trace.push_back({step.index, step.rationale, text, summarize(v)});
    result.context.put(step.index, {std::move(text), std::move(v)});
  }
  result.final = result.context.records().rbegin()->second.result;
  return result;
}

std::string render_trace(const std::vector<StepOutcome>& trace) {
  std::string out;
  for (const StepOutcome& s : trace) out += fmt::format("[{}] {} => {}\n", s.index, s.op_text, s.summary);
  return out;
}

}  // namespace dataagent
