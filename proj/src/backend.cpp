#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dataagent/backend.hpp"
#include "dataagent/error.hpp"
#include "dataagent/format.hpp"

namespace dataagent {

std::string render_params(const CompletionParams& p) {
  return fmt::format("model={};temperature={};max_tokens={}", p.model, format_number(p.temperature), p.max_tokens);
}

ScriptedBackend::ScriptedBackend(std::vector<Rule> rules, std::optional<std::string> default_response)
    : rules_(std::move(rules)), default_(std::move(default_response)) {
  for (const Rule& r : rules_) {
    if (r.kind == MatchKind::Pattern) {
      try {
        compiled_.emplace_back(std::regex(r.matcher, std::regex::ECMAScript));
      } catch (const std::regex_error& e) {
        throw Error(Errc::InvalidArgument, fmt::format("bad script pattern '{}': {}", r.matcher, e.what()));
      }
    } else {
      compiled_.emplace_back(std::nullopt);
    }
  }
}

namespace {

void append_rules(const nlohmann::json& doc, std::vector<ScriptedBackend::Rule>& rules,
                  std::optional<std::string>& default_response) {
  if (!doc.is_object()) throw Error(Errc::InvalidArgument, "script must be a JSON object");
  if (doc.contains("rules")) {
    if (!doc["rules"].is_array()) throw Error(Errc::InvalidArgument, "script 'rules' must be an array");
    for (const auto& r : doc["rules"]) {
      ScriptedBackend::Rule rule;
      if (r.contains("contains") && r["contains"].is_string()) {
        rule.kind = ScriptedBackend::MatchKind::Substring;
        rule.matcher = r["contains"].get<std::string>();
      } else if (r.contains("pattern") && r["pattern"].is_string()) {
        rule.kind = ScriptedBackend::MatchKind::Pattern;
        rule.matcher = r["pattern"].get<std::string>();
      } else {
        throw Error(Errc::InvalidArgument, "script rule needs a 'contains' or 'pattern' string");
      }
      if (!r.contains("response") || !r["response"].is_string())
        throw Error(Errc::InvalidArgument, "script rule needs a 'response' string");
      rule.response = r["response"].get<std::string>();
      rules.push_back(std::move(rule));
    }
  }
  if (doc.contains("default")) {
    if (!doc["default"].is_string()) throw Error(Errc::InvalidArgument, "script 'default' must be a string");
    default_response = doc["default"].get<std::string>();
  }
}

}  // namespace

ScriptedBackend ScriptedBackend::from_json_text(std::string_view json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::InvalidArgument, "script is not valid JSON");
  std::vector<Rule> rules;
  std::optional<std::string> def;
  append_rules(doc, rules, def);
  return ScriptedBackend(std::move(rules), std::move(def));
}

ScriptedBackend ScriptedBackend::from_files(const std::vector<std::filesystem::path>& paths) {
  std::vector<Rule> rules;
  std::optional<std::string> def;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::InvalidArgument, "cannot read script " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json doc = nlohmann::json::parse(ss.str(), nullptr, false);
    if (doc.is_discarded()) throw Error(Errc::InvalidArgument, "script " + path.string() + " is not valid JSON");
    append_rules(doc, rules, def);
  }
  return ScriptedBackend(std::move(rules), std::move(def));
}

std::string ScriptedBackend::complete(std::string_view prompt, const CompletionParams&) const {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const Rule& r = rules_[i];
    bool hit = r.kind == MatchKind::Substring
                   ? prompt.find(r.matcher) != std::string_view::npos
                   : std::regex_search(prompt.begin(), prompt.end(), *compiled_[i]);
    if (hit) return r.response;
  }
  if (default_) return *default_;
  throw Error(Errc::MatchFailure, fmt::format("no scripted rule matches the prompt ({} rules)", rules_.size()));
}

std::string CountingBackend::complete(std::string_view prompt, const CompletionParams& params) const {
  ++calls_;
  return inner_->complete(prompt, params);
}

std::optional<std::string> api_key_from_env() {
  for (const char* name : {"DATAAGENT_API_KEY", "OPENAI_API_KEY"})
    if (const char* v = std::getenv(name); v != nullptr && *v != '\0') return std::string(v);
  return std::nullopt;
}

}  // namespace dataagent
