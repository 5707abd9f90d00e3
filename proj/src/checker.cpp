#include "dataagent/checker.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "dataagent/error.hpp"
#include "dataagent/format.hpp"

namespace dataagent {

std::string_view to_string(TruthKind kind) {
  switch (kind) {
    case TruthKind::Number: return "number";
    case TruthKind::Text: return "text";
    case TruthKind::TextList: return "text_list";
    case TruthKind::NumberList: return "number_list";
    case TruthKind::MultiPart: return "multi_part";
    case TruthKind::None: return "none";
    case TruthKind::Error: return "error";
  }
  return "number";
}

GroundTruth GroundTruth::of_number(double v, std::optional<double> margin) {
  GroundTruth t;
  t.kind = TruthKind::Number;
  t.number = v;
  t.margin = margin;
  return t;
}

GroundTruth GroundTruth::of_text(std::string v) {
  GroundTruth t;
  t.kind = TruthKind::Text;
  t.text = std::move(v);
  return t;
}

GroundTruth GroundTruth::of_texts(TextList v) {
  GroundTruth t;
  t.kind = TruthKind::TextList;
  t.texts = std::move(v);
  return t;
}

GroundTruth GroundTruth::of_numbers(NumberList v, std::optional<double> margin) {
  GroundTruth t;
  t.kind = TruthKind::NumberList;
  t.numbers = std::move(v);
  t.margin = margin;
  return t;
}

GroundTruth GroundTruth::of_parts(std::vector<GroundTruth> parts) {
  if (parts.size() < 2) throw Error(Errc::InvalidArgument, "a multi-part truth needs at least 2 parts");
  GroundTruth t;
  t.kind = TruthKind::MultiPart;
  t.parts = std::move(parts);
  return t;
}

GroundTruth GroundTruth::none() {
  GroundTruth t;
  t.kind = TruthKind::None;
  return t;
}

GroundTruth GroundTruth::error(std::string label) {
  GroundTruth t;
  t.kind = TruthKind::Error;
  t.text = std::move(label);
  return t;
}

std::string describe(const GroundTruth& t) {
  switch (t.kind) {
    case TruthKind::Number: return format_number(t.number);
    case TruthKind::Text: return t.text;
    case TruthKind::TextList: return summarize(Value{t.texts});
    case TruthKind::NumberList: return summarize(Value{t.numbers});
    case TruthKind::MultiPart: {
      std::vector<std::string> parts;
      for (const GroundTruth& p : t.parts) parts.push_back(describe(p));
      return fmt::format("({})", fmt::join(parts, "; "));
    }
    case TruthKind::None: return "none (no applicable answer)";
    case TruthKind::Error: return fmt::format("failure {}", t.text);
  }
  return "";
}

std::string normalize_text(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(s)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

namespace {

Verdict ok(std::string reason) { return {true, std::move(reason)}; }
Verdict bad(std::string reason) { return {false, std::move(reason)}; }

double margin_of(const GroundTruth& t, const CheckOptions& o) { return t.margin.value_or(o.default_margin); }

Verdict compare_number(double p, double t, double margin) {
  if (p == t) return ok("exact match");
  if (margin == 0) return bad(fmt::format("expected exactly {}, got {}", format_number(t), format_number(p)));
  if (t == 0) {
    if (std::abs(p) < kZeroFloor)
      return ok(fmt::format("absolute error {} within zero floor {}", format_sci(std::abs(p)), format_sci(kZeroFloor)));
    return bad(fmt::format("absolute error {} exceeds zero floor {}", format_sci(std::abs(p)), format_sci(kZeroFloor)));
  }
  const double rel = std::abs(p - t) / std::abs(t);
  if (rel < margin) return ok(fmt::format("relative error {} within margin {}", format_sci(rel), format_sci(margin)));
  return bad(fmt::format("relative error {} exceeds margin {} (expected {}, got {})", format_sci(rel),
                         format_sci(margin), format_number(t), format_number(p)));
}

Verdict compare_text(const std::string& p, const std::string& t) {
  if (normalize_text(p) == normalize_text(t)) return ok("text matches");
  return bad(fmt::format("expected '{}', got '{}'", t, p));
}

Verdict kind_mismatch(const GroundTruth& t, const Value& p) {
  std::string got = std::string(kind_name(p));
  if (const auto* none = std::get_if<NoneOutcome>(&p)) got += fmt::format(" ({})", none->reason);
  return bad(fmt::format("kind mismatch: expected {}, got {}", to_string(t.kind), got));
}

template <typename T, typename Cmp>
Verdict compare_lists(std::vector<T> p, std::vector<T> t, bool order_insensitive, Cmp cmp) {
  if (p.size() != t.size()) return bad(fmt::format("expected {} elements, got {}", t.size(), p.size()));
  if (order_insensitive) {
    std::sort(p.begin(), p.end());
    std::sort(t.begin(), t.end());
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    Verdict v = cmp(p[i], t[i]);
    if (!v.correct) return bad(fmt::format("element {}: {}", i + 1, v.reason));
  }
  return ok(fmt::format("all {} elements match", p.size()));
}

}  // namespace

Verdict check_answer(const Value& predicted, const GroundTruth& truth, const CheckOptions& options) {
  switch (truth.kind) {
    case TruthKind::Number:
      if (const double* p = std::get_if<double>(&predicted)) return compare_number(*p, truth.number, margin_of(truth, options));
      return kind_mismatch(truth, predicted);
    case TruthKind::Text:
      if (const auto* p = std::get_if<std::string>(&predicted)) return compare_text(*p, truth.text);
      return kind_mismatch(truth, predicted);
    case TruthKind::TextList:
      if (const auto* p = std::get_if<TextList>(&predicted)) {
        TextList a, b;
        for (const auto& s : *p) a.push_back(normalize_text(s));
        for (const auto& s : truth.texts) b.push_back(normalize_text(s));
        return compare_lists(a, b, options.order_insensitive, compare_text);
      }
      return kind_mismatch(truth, predicted);
    case TruthKind::NumberList:
      if (const auto* p = std::get_if<NumberList>(&predicted)) {
        const double m = margin_of(truth, options);
        return compare_lists(*p, truth.numbers, options.order_insensitive,
                             [m](double a, double b) { return compare_number(a, b, m); });
      }
      return kind_mismatch(truth, predicted);
    case TruthKind::MultiPart:
      return check_parts(std::span<const Value>(&predicted, 1), truth, options);
    case TruthKind::None:
      if (const auto* n = std::get_if<NoneOutcome>(&predicted)) return ok(fmt::format("explicit none ({})", n->reason));
      return bad(fmt::format("expected an explicit none, got {} {}", kind_name(predicted), summarize(predicted)));
    case TruthKind::Error:
      return bad(fmt::format("expected failure {}, got {} {}", truth.text, kind_name(predicted), summarize(predicted)));
  }
  return bad("unknown truth kind");
}

Verdict check_parts(std::span<const Value> predicted, const GroundTruth& truth, const CheckOptions& options) {
  if (truth.kind != TruthKind::MultiPart) {
    if (predicted.size() != 1) return bad(fmt::format("expected 1 answer, got {}", predicted.size()));
    return check_answer(predicted.front(), truth, options);
  }
  for (std::size_t i = 0; i < truth.parts.size(); ++i) {
    if (i >= predicted.size()) return bad(fmt::format("part {} missing", i + 1));
    GroundTruth part = truth.parts[i];
    if (!part.margin && truth.margin) part.margin = truth.margin;
    Verdict v = check_answer(predicted[i], part, options);
    if (!v.correct) return bad(fmt::format("part {}: {}", i + 1, v.reason));
  }
  if (predicted.size() > truth.parts.size())
    return bad(fmt::format("expected {} parts, got {}", truth.parts.size(), predicted.size()));
  return ok(fmt::format("all {} parts correct", truth.parts.size()));
}

Verdict check_failure(std::string_view failure, const GroundTruth& truth) {
  if (truth.kind == TruthKind::Error && !truth.text.empty() && failure.find(truth.text) != std::string_view::npos)
    return ok(fmt::format("failed as expected with {}", truth.text));
  return bad(std::string(failure));
}

std::string judge_prompt(std::string_view question, const Value& predicted, const GroundTruth& truth, double margin) {
  return fmt::format(
      "You are grading an answer to a data analysis question.\n"
      "Question: {}\n"
      "Ground truth: {}\n"
      "Predicted answer: {}\n"
      "Numeric answers count as correct when their relative error is below {}. Text is compared ignoring case "
      "and extra whitespace.\n"
      "Reply with exactly one line: CORRECT: <reason> or INCORRECT: <reason>.",
      question, describe(truth), summarize(predicted), format_sci(margin));
}

Verdict llm_judge(std::string_view question, const Value& predicted, const GroundTruth& truth,
                  const CheckOptions& options, const LLMBackend& backend, const JudgeConfig& config) {
  if (!config.enabled) throw Error(Errc::JudgeDisabled, "model judge is not enabled; use check_answer");
  const double margin = margin_of(truth, options);
  std::string reply = backend.complete(judge_prompt(question, predicted, truth, margin), config.params);

  std::size_t pos = 0;
  while (pos <= reply.size()) {
    std::size_t nl = reply.find('\n', pos);
    std::string_view line = trim(std::string_view(reply).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos));
    pos = nl == std::string::npos ? reply.size() + 1 : nl + 1;
    for (auto [token, correct] : {std::pair{std::string_view("INCORRECT"), false}, std::pair{std::string_view("CORRECT"), true}}) {
      if (line.substr(0, token.size()) != token) continue;
      std::string_view rest = line.substr(token.size());
      if (!rest.empty() && rest[0] != ':' && rest[0] != ' ' && rest[0] != '-') continue;
      while (!rest.empty() && (rest[0] == ':' || rest[0] == ' ' || rest[0] == '-')) rest.remove_prefix(1);
      std::string reason = rest.empty() ? std::string(token) : std::string(rest);
      return {correct, "judge: " + reason};
    }
  }
  Verdict fallback = check_answer(predicted, truth, options);
  fallback.reason = "judge unparseable; deterministic check: " + fallback.reason;
  return fallback;
}

}  // namespace dataagent
