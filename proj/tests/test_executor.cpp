#include <doctest.h>

#include <random>

#include "dataagent/executor.hpp"
#include "fixtures.hpp"
#include "oracle/brute_force.hpp"
#include "oracle/random_tables.hpp"

using namespace dataagent;
using fixtures::error_of;

namespace {

Value run(const std::string& text) { return execute_plan(parse_plan(text), fixtures::cities()).final; }

Errc failure(const std::string& text, const Table& t = fixtures::cities()) {
  try {
    execute_plan(parse_plan(text), t);
  } catch (const StepFailure& e) {
    return e.cause();
  }
  FAIL("plan did not fail: " << text);
  return Errc::InvalidArgument;
}

// Frozen from scipy.stats over the 7 rows where Temp and Humidity are both present.
constexpr double kCorrTempHumidity = -0.3866980176306298;
constexpr double kPredictHumidityAt28 = 53.8657804441027;

}  // namespace

TEST_CASE("count rows") { CHECK(std::get<double>(run("Step 1: c\nOP: COUNT_ROWS() ON TABLE\n")) == 9); }

TEST_CASE("most missing column on the cities chunk ties all four") {
  Value v = run("Step 1: c\nOP: COUNT_MISSING_ALL() ON TABLE\nStep 2: k\nOP: EXTREME_KEY(mode=max, strict_positive=true) ON REF(1)\n");
  CHECK(std::get<TextList>(v) == TextList{"Clouds", "Humidity", "Temp", "Wind"});
}

TEST_CASE("most missing column on a complete table is an explicit none") {
  Table t = load_csv("a,b\n1,x\n2,y\n", "full");
  ActionPlan p = parse_plan("Step 1: c\nOP: COUNT_MISSING_ALL() ON TABLE\nStep 2: k\nOP: EXTREME_KEY(mode=max, strict_positive=true) ON REF(1)\n");
  Value v = execute_plan(p, t).final;
  REQUIRE(std::holds_alternative<NoneOutcome>(v));
  CHECK(std::get<NoneOutcome>(v).reason == "no missing values");
}

TEST_CASE("filter excludes missing cells") {
  Value v = run("Step 1: f\nOP: FILTER(where=Temp > 30) ON TABLE\n");
  CHECK(std::get<TableRef>(v).table->row_count() == 6);
  CHECK(std::get<double>(run("Step 1: f\nOP: FILTER(where=Temp > 30 AND Clouds == \"Sun\") ON TABLE\nStep 2: c\nOP: COUNT_ROWS() ON REF(1)\n")) == 3);
  // Left-to-right chain: (Temp < 20 OR Clouds == "Sun") AND Wind > 11
  CHECK(std::get<double>(run("Step 1: f\nOP: FILTER(where=Temp < 20 OR Clouds == \"Sun\" AND Wind > 11) ON TABLE\nStep 2: c\nOP: COUNT_ROWS() ON REF(1)\n")) == 1);
}

TEST_CASE("group means skip missing targets") {
  auto m = std::get<KeyNumberMap>(run("Step 1: g\nOP: GROUP_AGG(by=Clouds, target=Temp, agg=mean) ON TABLE\n"));
  REQUIRE(m.size() == 3);
  CHECK(m["PartShade"] == doctest::Approx(29.5).epsilon(1e-12));
  CHECK(m["Sun"] == doctest::Approx(35.266666666666666).epsilon(1e-12));
  CHECK(m["Shade"] == doctest::Approx(15.9).epsilon(1e-12));
  auto counts = std::get<KeyNumberMap>(run("Step 1: g\nOP: GROUP_AGG(by=Clouds, target=Temp, agg=count) ON TABLE\n"));
  CHECK(counts["Shade"] == 2);
}

TEST_CASE("statistics on the cities chunk") {
  CHECK(std::get<double>(run("Step 1: s\nOP: STAT(col=Temp, kind=mean) ON TABLE\n")) == doctest::Approx(30.7625).epsilon(1e-12));
  CHECK(std::get<double>(run("Step 1: s\nOP: STAT(col=Temp, kind=median) ON TABLE\n")) == doctest::Approx(31.6).epsilon(1e-12));
  CHECK(std::get<TextList>(run("Step 1: s\nOP: STAT(col=Clouds, kind=mode) ON TABLE\n")) == TextList{"PartShade", "Sun"});
  CHECK(std::get<double>(run("Step 1: s\nOP: STAT(col=Clouds, kind=nunique) ON TABLE\n")) == 3);
  CHECK(std::get<std::string>(run("Step 1: s\nOP: TOP_VALUE(col=Clouds) ON TABLE\n")) == "PartShade");
  CHECK(std::get<double>(run("Step 1: s\nOP: STAT(col=Temp, kind=range) ON TABLE\n")) == doctest::Approx(24.6).epsilon(1e-12));
  CHECK(std::get<std::string>(run("Step 1: s\nOP: STAT(col=City, kind=min) ON TABLE\n")) == "Beijing");
}

TEST_CASE("arg extreme, sort top and head") {
  CHECK(std::get<std::string>(run("Step 1: a\nOP: ARG_EXTREME(col=Temp, mode=max, return_col=City) ON TABLE\n")) == "Dubai");
  CHECK(std::get<std::string>(run("Step 1: a\nOP: ARG_EXTREME(col=Temp, mode=min, return_col=City) ON TABLE\n")) == "Moscow");
  CHECK(std::holds_alternative<NoneOutcome>(run("Step 1: a\nOP: ARG_EXTREME(col=Humidity, mode=max, return_col=Clouds) ON TABLE\n")) == false);
  CHECK(std::get<TextList>(run("Step 1: s\nOP: SORT_TOP(col=Temp, k=3, order=desc, return_col=City) ON TABLE\n")) ==
        TextList{"Dubai", "Sao Paulo", "Mumbai"});
  CHECK(std::get<NumberList>(run("Step 1: s\nOP: SORT_TOP(col=Wind, k=2, order=asc) ON TABLE\n")) == NumberList{6.4, 10});
  CHECK(std::get<TableRef>(run("Step 1: h\nOP: HEAD(n=2) ON TABLE\n")).table->row_count() == 2);
}

TEST_CASE("correlation and regression match the frozen reference") {
  CHECK(std::get<double>(run("Step 1: r\nOP: CORR(x=Temp, y=Humidity) ON TABLE\n")) ==
        doctest::Approx(kCorrTempHumidity).epsilon(1e-12));
  Value m = run("Step 1: f\nOP: LINREG_FIT(x=Temp, y=Humidity) ON TABLE\n");
  CHECK(std::get<Model>(m).n == 7);
  CHECK(std::get<Model>(m).r == doctest::Approx(kCorrTempHumidity).epsilon(1e-12));
  CHECK(std::get<double>(run("Step 1: f\nOP: LINREG_FIT(x=Temp, y=Humidity) ON TABLE\nStep 2: p\nOP: LINREG_PREDICT(x0=28) ON REF(1)\n")) ==
        doctest::Approx(kPredictHumidityAt28).epsilon(1e-12));
}

TEST_CASE("executor errors") {
  CHECK(failure("Step 1: s\nOP: STAT(col=Clouds, kind=median) ON TABLE\n") == Errc::DtypeMismatch);
  CHECK(failure("Step 1: s\nOP: STAT(col=Price, kind=mean) ON TABLE\n") == Errc::UnknownColumn);
  Table constant = load_csv("x,y\n1,2\n1,3\n1,4\n", "c");
  CHECK(failure("Step 1: r\nOP: CORR(x=x, y=y) ON TABLE\n", constant) == Errc::ZeroVariance);
  Table one = load_csv("x,y\n1,2\n", "one");
  CHECK(failure("Step 1: s\nOP: STAT(col=x, kind=std) ON TABLE\n", one) == Errc::InsufficientData);
  CHECK(failure("Step 1: f\nOP: FILTER(where=Temp > 100) ON TABLE\nStep 2: s\nOP: STAT(col=Temp, kind=mean) ON REF(1)\n") ==
        Errc::EmptyResult);
  CHECK(failure("Step 1: c\nOP: COUNT_ROWS() ON TABLE\nStep 2: k\nOP: EXTREME_KEY(mode=max, strict_positive=false) ON REF(1)\n") ==
        Errc::RefTypeMismatch);
}

TEST_CASE("step failure keeps the partial context") {
  try {
    execute_plan(parse_plan("Step 1: c\nOP: COUNT_ROWS() ON TABLE\nStep 2: s\nOP: STAT(col=Nope, kind=mean) ON TABLE\n"),
                 fixtures::cities());
    FAIL("expected failure");
  } catch (const StepFailure& e) {
    CHECK(e.step() == 2);
    CHECK(e.partial().size() == 1);
    CHECK(e.trace().size() == 1);
    CHECK(std::string(e.what()).find("UnknownColumn") != std::string::npos);
  }
}

TEST_CASE("context store is write-once") {
  ContextStore s;
  s.put(1, {"COUNT_ROWS() ON TABLE", 9.0});
  CHECK(error_of([&] { s.put(1, {"x", 1.0}); }) == "InvalidArgument");
  CHECK(s.find(2) == nullptr);
}

TEST_CASE("trace lines") {
  ExecutionResult r = execute_plan(parse_plan("Step 1: c\nOP: COUNT_ROWS() ON TABLE\n"), fixtures::cities());
  CHECK(render_trace(r.trace) == "[1] COUNT_ROWS() ON TABLE => 9\n");
}

TEST_CASE("executor agrees with the brute-force interpreter (sample)") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 40; ++i) {
    Table t = oracle::random_table(rng);
    for (const ActionPlan& p : oracle::catalog_plans(rng, t)) {
      oracle::Outcome want = oracle::evaluate(p, t);
      std::string text = render_plan(p);
      try {
        Value got = execute_plan(p, t).final;
        REQUIRE_MESSAGE(want.value.has_value(), text);
        std::string why;
        CHECK_MESSAGE(oracle::agree(got, *want.value, 1e-9, 1e-12, &why), text << why);
      } catch (const StepFailure& e) {
        REQUIRE_MESSAGE(want.error.has_value(), text << e.what());
        CHECK_MESSAGE(e.cause() == *want.error, text << e.what());
        CHECK(e.step() == want.failed_step);
      }
    }
  }
}
