#include <doctest.h>

#include <random>

#include "dataagent/executor.hpp"
#include "dataagent/plan.hpp"
#include "fixtures.hpp"
#include "oracle/random_tables.hpp"

using namespace dataagent;
using fixtures::error_of;

TEST_CASE("parse a two-step plan") {
  ActionPlan p = parse_plan(
      "Step 1: Keep hot days.\n"
      "OP: FILTER(where=Temp > 30 AND Clouds == \"Sun\") ON TABLE\n"
      "\n"
      "Step 2: Count them.\n"
      "OP: COUNT_ROWS() ON REF(1)\n");
  REQUIRE(p.steps.size() == 2);
  CHECK(p.steps[0].rationale == "Keep hot days.");
  const auto& f = std::get<op::Filter>(p.steps[0].expr.op);
  CHECK(f.where.first == Comparison{"Temp", CmpOp::Gt, 30.0});
  REQUIRE(f.where.rest.size() == 1);
  CHECK(f.where.rest[0].first == Connective::And);
  CHECK(f.where.rest[0].second == Comparison{"Clouds", CmpOp::Eq, std::string("Sun")});
  CHECK(p.steps[1].expr.source == Source::step(1));
}

TEST_CASE("canonical rendering") {
  CHECK(render_op({op::Stat{"Temp", StatKind::Mean}, Source::table()}) == "STAT(col=Temp, kind=mean) ON TABLE");
  CHECK(render_op({op::SortTop{"Temp", 3, SortOrder::Desc, std::string("City")}, Source::table()}) ==
        "SORT_TOP(col=Temp, k=3, order=desc, return_col=City) ON TABLE");
  CHECK(render_op({op::ExtremeKey{Extreme::Max, true}, Source::step(1)}) ==
        "EXTREME_KEY(mode=max, strict_positive=true) ON REF(1)");
  CHECK(render_op({op::LinRegPredict{28}, Source::step(1)}) == "LINREG_PREDICT(x0=28) ON REF(1)");
  CHECK(render_op({op::HeadN{5}, Source::table()}) == "HEAD(n=5) ON TABLE");
  CHECK(render_op({op::CountMissing{"Avg Temp"}, Source::table()}) == "COUNT_MISSING(col=\"Avg Temp\") ON TABLE");
}

TEST_CASE("parse errors carry labels and line numbers") {
  CHECK(error_of([] { parse_plan(""); }) == "SyntaxError");
  CHECK(error_of([] { parse_plan("Step 1: x\nOP: COUNT_ROWS() ON TABLE\nStep 3: y\nOP: COUNT_ROWS() ON TABLE\n"); }) ==
        "NonConsecutiveStep");
  CHECK(error_of([] { parse_plan("Step 1: x\nOP: COUNT_ROWS() ON REF(1)\n"); }) == "ForwardRef");
  CHECK(error_of([] { parse_plan("Step 1: x\nOP: COUNT_ROWS() ON REF(0)\n"); }) == "ForwardRef");
  CHECK(error_of([] { parse_plan("Step 1: x\nOP: PIVOT(col=Temp) ON TABLE\n"); }) == "UnknownOp");
  CHECK(error_of([] { parse_plan("Step 1: x\nOP: STAT(col=Temp) ON TABLE\n"); }) == "BadArg");
  CHECK(error_of([] { parse_plan("Step 1: x\nOP: STAT(col=Temp, kind=avg) ON TABLE\n"); }) == "BadArg");
  CHECK(error_of([] { parse_plan("Step 1: x\nOP: STAT(col=Temp, kind=mean, extra=1) ON TABLE\n"); }) == "BadArg");
  CHECK(error_of([] { parse_plan("Step 1: x\nOP: HEAD(n=0) ON TABLE\n"); }) == "BadArg");
  CHECK(error_of([] { parse_plan("Step 1: x\nOP: COUNT_ROWS( ON TABLE\n"); }) == "SyntaxError");
  CHECK(error_of([] { parse_plan("Step 1: x\n"); }) == "SyntaxError");
  try {
    parse_plan("Step 1: x\nOP: COUNT_ROWS() ON TABLE\nStep 2: y\nOP: NOPE() ON TABLE\n");
    FAIL("expected UnknownOp");
  } catch (const Error& e) {
    CHECK(e.detail().rfind("line 4:", 0) == 0);
  }
}

TEST_CASE("parse_op on a single expression") {
  OpExpr e = parse_op("GROUP_AGG(by=Clouds, target=Temp, agg=mean) ON TABLE");
  CHECK(std::get<op::GroupAgg>(e.op) == op::GroupAgg{"Clouds", "Temp", AggKind::Mean});
  OpExpr neg = parse_op("FILTER(where=Temp >= -2.5) ON TABLE");
  CHECK(std::get<op::Filter>(neg.op).where.first.literal == Literal{-2.5});
}

TEST_CASE("render/parse round trip on random plans") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    ActionPlan p = oracle::random_plan(rng);
    std::string text = render_plan(p);
    ActionPlan back = parse_plan(text);
    CHECK_MESSAGE(back == p, text);
    CHECK(render_plan(back) == text);
  }
}

TEST_CASE("validation against the cities schema") {
  auto schema = fixtures::cities().schema();
  auto validate = [&](const std::string& text) { return validate_plan(parse_plan(text), schema); };
  CHECK(validate("Step 1: m\nOP: STAT(col=Temp, kind=mean) ON TABLE\n").empty());
  auto unknown = validate("Step 1: m\nOP: STAT(col=Price, kind=mean) ON TABLE\n");
  REQUIRE(unknown.size() == 1);
  CHECK(unknown[0].code == Errc::UnknownColumn);
  CHECK(unknown[0].message.find("Price") != std::string::npos);
  auto median = validate("Step 1: m\nOP: STAT(col=Clouds, kind=median) ON TABLE\n");
  REQUIRE(median.size() == 1);
  CHECK(median[0].code == Errc::DtypeMismatch);
  CHECK(to_string(median[0]).rfind("step 1: DtypeMismatch: ", 0) == 0);
  CHECK(validate("Step 1: m\nOP: STAT(col=Clouds, kind=mode) ON TABLE\n").empty());
  CHECK(validate("Step 1: m\nOP: COUNT_MISSING_ALL() ON TABLE\nStep 2: k\nOP: EXTREME_KEY(mode=max, strict_positive=true) ON REF(1)\n").empty());
  CHECK(validate("Step 1: m\nOP: EXTREME_KEY(mode=max, strict_positive=true) ON TABLE\n")[0].code == Errc::RefTypeMismatch);
  CHECK(validate("Step 1: m\nOP: COUNT_ROWS() ON TABLE\nStep 2: k\nOP: COUNT_ROWS() ON REF(1)\n")[0].code ==
        Errc::RefTypeMismatch);
  CHECK(validate("Step 1: m\nOP: CORR(x=Temp, y=City) ON TABLE\n")[0].code == Errc::DtypeMismatch);
  CHECK(validate("Step 1: m\nOP: FILTER(where=Clouds > 3) ON TABLE\n")[0].code == Errc::DtypeMismatch);
  CHECK(validate("Step 1: m\nOP: FILTER(where=Temp == \"hot\") ON TABLE\n")[0].code == Errc::DtypeMismatch);
  CHECK(validate("Step 1: m\nOP: GROUP_AGG(by=Clouds, target=City, agg=mean) ON TABLE\n")[0].code == Errc::DtypeMismatch);
  CHECK(validate("Step 1: m\nOP: GROUP_AGG(by=Clouds, target=City, agg=count) ON TABLE\n").empty());
  CHECK(validate("Step 1: f\nOP: LINREG_FIT(x=Temp, y=Humidity) ON TABLE\nStep 2: p\nOP: LINREG_PREDICT(x0=28) ON REF(1)\n").empty());
}

TEST_CASE("validation is sound on random tables") {
  // A plan with no diagnostics never fails with UnknownColumn or DtypeMismatch.
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    Table t = oracle::random_table(rng);
    for (const ActionPlan& p : oracle::catalog_plans(rng, t)) {
      if (!validate_plan(p, t.schema()).empty()) continue;
      try {
        execute_plan(p, t);
      } catch (const StepFailure& e) {
        CHECK_MESSAGE(e.cause() != Errc::UnknownColumn, render_plan(p));
        CHECK_MESSAGE(e.cause() != Errc::DtypeMismatch, render_plan(p));
        CHECK_MESSAGE(e.cause() != Errc::RefTypeMismatch, render_plan(p));
      }
    }
  }
}

TEST_CASE("negated predicates partition complete tables") {
  std::mt19937_64 rng(3);
  oracle::RandomTableOptions opts;
  opts.missing_rate = 0;
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    Table t = oracle::random_table(rng, opts);
    for (const ActionPlan& p : oracle::catalog_plans(rng, t)) {
      const auto* f = std::get_if<op::Filter>(&p.steps[0].expr.op);
      if (!f || p.steps.size() != 1 || !validate_plan(p, t.schema()).empty()) continue;
      std::vector<std::size_t> yes = filter_rows(t, f->where);
      std::vector<std::size_t> no = filter_rows(t, f->where.negated());
      CHECK(yes.size() + no.size() == t.row_count());
      for (std::size_t r : yes) CHECK(std::find(no.begin(), no.end(), r) == no.end());
      ++checked;
    }
  }
  CHECK(checked > 50);
}
