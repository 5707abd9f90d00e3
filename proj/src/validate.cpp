#include <fmt/format.h>

#include "dataagent/plan.hpp"

namespace dataagent {

namespace {

/// What a step produces, as far as static checking can tell.
enum class Shape { Table, Scalar, Map, Model };

Shape shape_of(const Operation& op) {
  if (std::holds_alternative<op::Filter>(op) || std::holds_alternative<op::HeadN>(op)) return Shape::Table;
  if (std::holds_alternative<op::CountMissingAll>(op) || std::holds_alternative<op::ValueCounts>(op) ||
      std::holds_alternative<op::GroupAgg>(op))
    return Shape::Map;
  if (std::holds_alternative<op::LinRegFit>(op)) return Shape::Model;
  return Shape::Scalar;
}

std::string_view shape_name(Shape s) {
  switch (s) {
    case Shape::Table: return "a table";
    case Shape::Scalar: return "a scalar or list";
    case Shape::Map: return "a key/number map";
    case Shape::Model: return "a regression model";
  }
  return "";
}

class Checker {
 public:
  Checker(const ActionPlan& plan, const std::vector<ColumnSchema>& schema) : plan_(plan), schema_(schema) {}

  std::vector<Diagnostic> run() {
    for (const PlanStep& s : plan_.steps) {
      step_ = s.index;
      check_source(s);
      std::visit([this](const auto& o) { check(o); }, s.expr.op);
    }
    return std::move(out_);
  }

 private:
  void report(Errc code, std::string message) { out_.push_back({step_, code, std::move(message)}); }

  const ColumnSchema* column(const std::string& name) {
    for (const ColumnSchema& c : schema_)
      if (c.name == name) return &c;
    report(Errc::UnknownColumn, fmt::format("column '{}' does not exist", name));
    return nullptr;
  }

  void numeric(const std::string& name, std::string_view why) {
    if (const ColumnSchema* c = column(name); c && c->dtype != DType::Numeric)
      report(Errc::DtypeMismatch, fmt::format("{} needs a numeric column; '{}' is categorical", why, name));
  }

  const PlanStep* step(int index) const {
    for (const PlanStep& s : plan_.steps)
      if (s.index == index) return &s;
    return nullptr;
  }

  void check_source(const PlanStep& s) {
    const Source& src = s.expr.source;
    Shape want = Shape::Table;
    if (std::holds_alternative<op::ExtremeKey>(s.expr.op)) want = Shape::Map;
    if (std::holds_alternative<op::LinRegPredict>(s.expr.op)) want = Shape::Model;

    if (src.is_table()) {
      if (want != Shape::Table)
        report(Errc::RefTypeMismatch, fmt::format("{} must read {} via REF(k), not TABLE", op_name(s.expr.op), shape_name(want)));
      return;
    }
    const PlanStep* from = step(*src.ref);
    if (from == nullptr || *src.ref >= s.index) {
      report(Errc::ForwardRef, fmt::format("REF({}) does not name an earlier step", *src.ref));
      return;
    }
    Shape got = shape_of(from->expr.op);
    if (got != want)
      report(Errc::RefTypeMismatch, fmt::format("{} needs {} but step {} ({}) produces {}", op_name(s.expr.op),
                                                shape_name(want), from->index, op_name(from->expr.op), shape_name(got)));
  }

  void check(const op::CountRows&) {}
  void check(const op::CountCols&) {}
  void check(const op::Columns&) {}
  void check(const op::Dtypes&) {}
  void check(const op::HeadN&) {}
  void check(const op::CountMissingAll&) {}
  void check(const op::ExtremeKey&) {}
  void check(const op::LinRegPredict&) {}
  void check(const op::CountMissing& o) { column(o.column); }
  void check(const op::ValueCounts& o) { column(o.column); }
  void check(const op::TopValue& o) { column(o.column); }
  void check(const op::Stat& o) {
    if (requires_numeric(o.kind))
      numeric(o.column, fmt::format("STAT kind={}", to_string(o.kind)));
    else
      column(o.column);
  }
  void check(const op::Corr& o) {
    numeric(o.x, "CORR");
    numeric(o.y, "CORR");
  }
  void check(const op::LinRegFit& o) {
    numeric(o.x, "LINREG_FIT");
    numeric(o.y, "LINREG_FIT");
  }
  void check(const op::GroupAgg& o) {
    column(o.by);
    if (o.agg == AggKind::Count)
      column(o.target);
    else
      numeric(o.target, fmt::format("GROUP_AGG agg={}", to_string(o.agg)));
  }
  void check(const op::SortTop& o) {
    column(o.column);
    if (o.return_column) column(*o.return_column);
  }
  void check(const op::ArgExtreme& o) {
    column(o.column);
    column(o.return_column);
  }
  void check(const op::Filter& o) {
    comparison(o.where.first);
    for (const auto& [conn, cmp] : o.where.rest) comparison(cmp);
  }

  void comparison(const Comparison& c) {
    const ColumnSchema* col = column(c.column);
    if (col == nullptr) return;
    const bool text_literal = std::holds_alternative<std::string>(c.literal);
    if (col->dtype == DType::Numeric && text_literal) {
      report(Errc::DtypeMismatch, fmt::format("numeric column '{}' compared with a string literal", c.column));
    } else if (col->dtype == DType::Categorical) {
      if (!text_literal)
        report(Errc::DtypeMismatch, fmt::format("categorical column '{}' compared with a number", c.column));
      else if (c.op != CmpOp::Eq && c.op != CmpOp::Ne)
        report(Errc::DtypeMismatch,
               fmt::format("categorical column '{}' only supports == and !=, not {}", c.column, to_string(c.op)));
    }
  }

  const ActionPlan& plan_;
  const std::vector<ColumnSchema>& schema_;
  std::vector<Diagnostic> out_;
  int step_ = 0;
};

}  // namespace

std::vector<Diagnostic> validate_plan(const ActionPlan& plan, const std::vector<ColumnSchema>& schema) {
  return Checker(plan, schema).run();
}

}  // namespace dataagent
