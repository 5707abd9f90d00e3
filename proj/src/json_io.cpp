#include "dataagent/json_io.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "dataagent/error.hpp"

namespace dataagent {

namespace {

[[noreturn]] void bad(std::string why) { throw Error(Errc::ManifestError, std::move(why)); }

std::string kind_key(std::string s) {
  std::string out;
  for (char c : s)
    if (c != '_' && c != '-') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double finite_number(const nlohmann::json& j, std::string_view what) {
  if (!j.is_number()) bad(fmt::format("{} must be a number", what));
  return j.get<double>();
}

}  // namespace

GroundTruth truth_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("truth must be an object");
  if (!j.contains("kind") || !j["kind"].is_string()) bad("truth needs a string 'kind'");
  const std::string kind = kind_key(j["kind"].get<std::string>());
  std::optional<double> margin;
  if (j.contains("margin")) {
    margin = finite_number(j["margin"], "truth margin");
    if (*margin < 0) bad("truth margin must be >= 0");
  }
  auto value = [&]() -> const nlohmann::json& {
    if (!j.contains("value")) bad(fmt::format("truth of kind '{}' needs a 'value'", j["kind"].get<std::string>()));
    return j["value"];
  };

  GroundTruth t;
  if (kind == "number") {
    t = GroundTruth::of_number(finite_number(value(), "number truth value"));
  } else if (kind == "text") {
    if (!value().is_string()) bad("text truth value must be a string");
    t = GroundTruth::of_text(value().get<std::string>());
  } else if (kind == "textlist") {
    if (!value().is_array()) bad("text_list truth value must be an array");
    TextList xs;
    for (const auto& x : value()) {
      if (!x.is_string()) bad("text_list elements must be strings");
      xs.push_back(x.get<std::string>());
    }
    t = GroundTruth::of_texts(std::move(xs));
  } else if (kind == "numberlist") {
    if (!value().is_array()) bad("number_list truth value must be an array");
    NumberList xs;
    for (const auto& x : value()) xs.push_back(finite_number(x, "number_list element"));
    t = GroundTruth::of_numbers(std::move(xs));
  } else if (kind == "multipart") {
    if (!value().is_array() || value().size() < 2) bad("multi_part truth value must be an array of >= 2 truths");
    std::vector<GroundTruth> parts;
    for (const auto& p : value()) parts.push_back(truth_from_json(p));
    t = GroundTruth::of_parts(std::move(parts));
  } else if (kind == "none") {
    t = GroundTruth::none();
  } else if (kind == "error") {
    if (!value().is_string() || value().get<std::string>().empty()) bad("error truth value must be an error label");
    t = GroundTruth::error(value().get<std::string>());
  } else {
    bad(fmt::format("unknown truth kind '{}'", j["kind"].get<std::string>()));
  }
  t.margin = margin;
  return t;
}

nlohmann::json truth_to_json(const GroundTruth& t) {
  nlohmann::json j = {{"kind", std::string(to_string(t.kind))}};
  switch (t.kind) {
    case TruthKind::Number: j["value"] = t.number; break;
    case TruthKind::Text: j["value"] = t.text; break;
    case TruthKind::TextList: j["value"] = t.texts; break;
    case TruthKind::NumberList: j["value"] = t.numbers; break;
    case TruthKind::MultiPart: {
      nlohmann::json parts = nlohmann::json::array();
      for (const GroundTruth& p : t.parts) parts.push_back(truth_to_json(p));
      j["value"] = parts;
      break;
    }
    case TruthKind::None: break;
    case TruthKind::Error: j["value"] = t.text; break;
  }
  if (t.margin) j["margin"] = *t.margin;
  return j;
}

namespace {

struct ToJson {
  nlohmann::json operator()(double v) const { return v; }
  nlohmann::json operator()(const std::string& s) const { return s; }
  nlohmann::json operator()(const TextList& xs) const { return xs; }
  nlohmann::json operator()(const NumberList& xs) const { return xs; }
  nlohmann::json operator()(const KeyNumberMap& m) const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
  }
  nlohmann::json operator()(const TableRef& t) const {
    nlohmann::json cols = nlohmann::json::array();
    std::size_t rows = 0;
    if (t.table) {
      rows = t.table->row_count();
      for (const Column& c : t.table->columns()) cols.push_back(c.name());
    }
    return {{"table", {{"rows", rows}, {"columns", cols}}}};
  }
  nlohmann::json operator()(const Model& m) const {
    return {{"model", {{"slope", m.slope}, {"intercept", m.intercept}, {"r", m.r}, {"n", m.n}}}};
  }
  nlohmann::json operator()(const NoneOutcome& n) const { return {{"none", n.reason}}; }
};

}  // namespace

nlohmann::json value_to_json(const Value& value) { return std::visit(ToJson{}, value); }

Value value_from_json(const nlohmann::json& j) {
  if (j.is_null()) return NoneOutcome{"null"};
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) {
    if (j.empty()) return TextList{};
    if (std::all_of(j.begin(), j.end(), [](const auto& x) { return x.is_number(); })) return j.get<NumberList>();
    if (std::all_of(j.begin(), j.end(), [](const auto& x) { return x.is_string(); })) return j.get<TextList>();
    throw Error(Errc::InvalidArgument, "answer arrays must hold only numbers or only strings");
  }
  if (j.is_object()) {
    if (j.size() == 1 && j.contains("none") && j["none"].is_string()) return NoneOutcome{j["none"].get<std::string>()};
    KeyNumberMap m;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!it.value().is_number()) throw Error(Errc::InvalidArgument, "answer objects must map keys to numbers");
      m[it.key()] = it.value().get<double>();
    }
    return m;
  }
  throw Error(Errc::InvalidArgument, "unsupported answer JSON");
}

nlohmann::json verdict_to_json(const Verdict& v) { return {{"correct", v.correct}, {"reason", v.reason}}; }

}  // namespace dataagent
