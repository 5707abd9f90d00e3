#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dataagent/backend.hpp"
#include "dataagent/value.hpp"

namespace dataagent {

/// 0.001 percent, relative.
inline constexpr double kDefaultMargin = 1e-5;
/// Absolute tolerance used when the expected number is exactly zero.
inline constexpr double kZeroFloor = 1e-9;

enum class TruthKind {
  Number,
  Text,
  TextList,
  NumberList,
  MultiPart,
  None,   ///< the expected answer is an explicit NoneOutcome
  Error,  ///< the query has no value; the pipeline must fail with `text` as its label
};

std::string_view to_string(TruthKind kind);

struct GroundTruth {
  TruthKind kind = TruthKind::Number;
  double number = 0;
  std::string text;
  TextList texts;
  NumberList numbers;
  std::vector<GroundTruth> parts;
  std::optional<double> margin;  ///< overrides the default margin for this truth

  static GroundTruth of_number(double v, std::optional<double> margin = std::nullopt);
  static GroundTruth of_text(std::string v);
  static GroundTruth of_texts(TextList v);
  static GroundTruth of_numbers(NumberList v, std::optional<double> margin = std::nullopt);
  static GroundTruth of_parts(std::vector<GroundTruth> parts);
  static GroundTruth none();
  static GroundTruth error(std::string label);

  bool operator==(const GroundTruth&) const = default;
};

/// Human-readable rendering of the expected answer.
std::string describe(const GroundTruth& truth);

struct Verdict {
  bool correct = false;
  std::string reason;

  bool operator==(const Verdict&) const = default;
};

/// Trim, collapse internal whitespace runs to one space, ASCII case-fold.
std::string normalize_text(std::string_view s);

struct CheckOptions {
  double default_margin = kDefaultMargin;
  bool order_insensitive = false;  ///< sort both lists before element-wise comparison
};

/// Never throws for kind mismatches; they produce an incorrect verdict.
Verdict check_answer(const Value& predicted, const GroundTruth& truth, const CheckOptions& options = {});

/// Multi-part answers: one predicted value per part, in order. Missing parts are incorrect.
Verdict check_parts(std::span<const Value> predicted, const GroundTruth& truth, const CheckOptions& options = {});

/// A pipeline that failed instead of producing a value. Correct only for an
/// Error truth whose label appears in the failure text.
Verdict check_failure(std::string_view failure, const GroundTruth& truth);

struct JudgeConfig {
  bool enabled = false;
  CompletionParams params{"gpt-4", 0.0, 256};
};

/// Model-judge mode: asks the backend for a CORRECT/INCORRECT line and falls
/// back to check_answer when the reply has neither. Throws JudgeDisabled when
/// not enabled; backend errors propagate.
Verdict llm_judge(std::string_view question, const Value& predicted, const GroundTruth& truth,
                  const CheckOptions& options, const LLMBackend& backend, const JudgeConfig& config);

/// Prompt sent by llm_judge.
std::string judge_prompt(std::string_view question, const Value& predicted, const GroundTruth& truth, double margin);

}  // namespace dataagent
