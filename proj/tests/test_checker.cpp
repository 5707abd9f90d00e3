#include <doctest.h>

#include <random>

#include "dataagent/checker.hpp"
#include "dataagent/json_io.hpp"
#include "fixtures.hpp"

using namespace dataagent;
using fixtures::error_of;

TEST_CASE("numbers under the default margin") {
  Verdict ok = check_answer(100.0005, GroundTruth::of_number(100));
  CHECK(ok.correct);
  CHECK(ok.reason == "relative error 5e-6 within margin 1e-5");
  Verdict bad = check_answer(100.01, GroundTruth::of_number(100));
  CHECK_FALSE(bad.correct);
  CHECK(bad.reason.find("relative error 0.0001 exceeds") != std::string::npos);
  CHECK(check_answer(1.0 + 9.9e-6, GroundTruth::of_number(1)).correct);
  CHECK_FALSE(check_answer(1.0 + 1.1e-5, GroundTruth::of_number(1)).correct);
  CHECK(check_answer(9.0, GroundTruth::of_number(9)).reason == "exact match");
}

TEST_CASE("zero truth uses the absolute floor") {
  CHECK(check_answer(5e-10, GroundTruth::of_number(0)).correct);
  CHECK_FALSE(check_answer(2e-9, GroundTruth::of_number(0)).correct);
}

TEST_CASE("margin zero means exact equality") {
  CheckOptions exact;
  exact.default_margin = 0;
  CHECK(check_answer(30.7625, GroundTruth::of_number(30.7625), exact).correct);
  CHECK_FALSE(check_answer(std::nextafter(30.7625, 100.0), GroundTruth::of_number(30.7625), exact).correct);
  CHECK_FALSE(check_answer(1.0 + 1e-12, GroundTruth::of_number(1, 0.0)).correct);
}

TEST_CASE("per-truth margin overrides the default") {
  CHECK(check_answer(101.0, GroundTruth::of_number(100, 0.02)).correct);
  CHECK_FALSE(check_answer(101.0, GroundTruth::of_number(100)).correct);
}

TEST_CASE("text normalization") {
  CHECK(normalize_text("  PartShade ") == "partshade");
  CHECK(normalize_text("New  York") == "new york");
  CHECK(normalize_text("") == "");
  CHECK(check_answer(std::string("dubai "), GroundTruth::of_text("Dubai")).correct);
  CHECK_FALSE(check_answer(std::string("Paris"), GroundTruth::of_text("Dubai")).correct);
}

TEST_CASE("kind mismatches are incorrect, never thrown") {
  Verdict v = check_answer(std::string("9"), GroundTruth::of_number(9));
  CHECK_FALSE(v.correct);
  CHECK(v.reason.find("kind mismatch") != std::string::npos);
  CHECK_FALSE(check_answer(NoneOutcome{"x"}, GroundTruth::of_text("a")).correct);
  CHECK_FALSE(check_answer(9.0, GroundTruth::none()).correct);
  CHECK(check_answer(NoneOutcome{"no missing values"}, GroundTruth::none()).correct);
}

TEST_CASE("lists compare element-wise, optionally unordered") {
  GroundTruth texts = GroundTruth::of_texts({"PartShade", "Sun"});
  CHECK(check_answer(TextList{"partshade", "SUN"}, texts).correct);
  CHECK_FALSE(check_answer(TextList{"Sun", "PartShade"}, texts).correct);
  CheckOptions unordered;
  unordered.order_insensitive = true;
  CHECK(check_answer(TextList{"Sun", "PartShade"}, texts, unordered).correct);
  CHECK_FALSE(check_answer(TextList{"Sun"}, texts).correct);
  CHECK(check_answer(NumberList{1.000001, 2}, GroundTruth::of_numbers({1, 2})).correct);
  CHECK_FALSE(check_answer(NumberList{1.1, 2}, GroundTruth::of_numbers({1, 2})).correct);
}

TEST_CASE("multi-part answers need every part") {
  GroundTruth t = GroundTruth::of_parts({GroundTruth::of_number(30.7625), GroundTruth::of_text("Dubai")});
  std::vector<Value> only_mean{30.7625};
  Verdict v = check_parts(only_mean, t);
  CHECK_FALSE(v.correct);
  CHECK(v.reason == "part 2 missing");
  std::vector<Value> both{30.7625, std::string("Dubai")};
  CHECK(check_parts(both, t).correct);
  std::vector<Value> wrong{30.7625, std::string("Paris")};
  CHECK(check_parts(wrong, t).reason.rfind("part 2: ", 0) == 0);
  CHECK(error_of([] { GroundTruth::of_parts({GroundTruth::of_number(1)}); }) == "InvalidArgument");
}

TEST_CASE("expected failures") {
  GroundTruth t = GroundTruth::error("DtypeMismatch");
  CHECK(check_failure("generation-error: PlanRejected: attempt 1: step 1: DtypeMismatch: ...", t).correct);
  CHECK_FALSE(check_failure("execution-error: StepFailure: step 1: UnknownColumn: x", t).correct);
  CHECK_FALSE(check_failure("execution-error: x", GroundTruth::of_number(1)).correct);
  CHECK_FALSE(check_answer(1.0, t).correct);
}

TEST_CASE("monotone in distance to the truth") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3e-5, 3e-5);
  for (int i = 0; i < 2000; ++i) {
    double t = 1 + static_cast<double>(rng() % 1000);
    double d1 = u(rng) * t, d2 = u(rng) * t;
    if (std::abs(d1) > std::abs(d2)) std::swap(d1, d2);
    GroundTruth truth = GroundTruth::of_number(t);
    if (check_answer(t + d2, truth).correct) CHECK(check_answer(t + d1, truth).correct);
  }
}

TEST_CASE("verdicts are deterministic") {
  GroundTruth t = GroundTruth::of_number(3.14159);
  CHECK(check_answer(3.1416, t) == check_answer(3.1416, t));
}

TEST_CASE("model judge") {
  JudgeConfig on;
  on.enabled = true;
  GroundTruth t = GroundTruth::of_text("Dubai");
  ScriptedBackend yes({}, std::string("CORRECT: values match within margin"));
  Verdict v = llm_judge("Which city?", std::string("Dubai"), t, {}, yes, on);
  CHECK(v.correct);
  CHECK(v.reason == "judge: values match within margin");

  ScriptedBackend no({}, std::string("Thinking...\nINCORRECT - wrong city"));
  CHECK_FALSE(llm_judge("Which city?", std::string("Dubai"), t, {}, no, on).correct);

  ScriptedBackend prose({}, std::string("The answer looks plausible to me."));
  Verdict fb = llm_judge("Which city?", std::string("Paris"), t, {}, prose, on);
  CHECK_FALSE(fb.correct);
  CHECK(fb.reason.rfind("judge unparseable", 0) == 0);

  CHECK(error_of([&] { llm_judge("q", 1.0, t, {}, yes, JudgeConfig{}); }) == "JudgeDisabled");
  ScriptedBackend broken({});
  CHECK(error_of([&] { llm_judge("q", 1.0, t, {}, broken, on); }) == "MatchFailure");

  std::string prompt = judge_prompt("Which city?", std::string("Dubai"), t, 1e-5);
  CHECK(prompt.find("Which city?") != std::string::npos);
  CHECK(prompt.find("Dubai") != std::string::npos);
  CHECK(prompt.find("1e-5") != std::string::npos);
}

TEST_CASE("truth json round trip") {
  std::vector<GroundTruth> truths{GroundTruth::of_number(2.5, 0.01), GroundTruth::of_text("Sun"),
                                  GroundTruth::of_texts({"a", "b"}), GroundTruth::of_numbers({1, 2}),
                                  GroundTruth::of_parts({GroundTruth::of_number(1), GroundTruth::of_text("x")}),
                                  GroundTruth::none(), GroundTruth::error("DtypeMismatch")};
  for (const GroundTruth& t : truths) CHECK(truth_from_json(truth_to_json(t)) == t);
  CHECK(error_of([] { truth_from_json(nlohmann::json{{"kind", "number"}, {"value", "x"}}); }) == "ManifestError");
  CHECK(error_of([] { truth_from_json(nlohmann::json{{"kind", "blob"}}); }) == "ManifestError");
  CHECK(error_of([] { truth_from_json(nlohmann::json{{"kind", "number"}, {"value", 1}, {"margin", -1}}); }) == "ManifestError");
}
