#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dataagent {

struct CompletionParams {
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 1024;

  bool operator==(const CompletionParams&) const = default;
};

/// `model=...;temperature=...;max_tokens=...`
std::string render_params(const CompletionParams& params);

/// A completion source. Implementations are immutable after construction
/// (or internally synchronized) and shareable across concurrent queries.
class LLMBackend {
 public:
  virtual ~LLMBackend() = default;
  virtual std::string complete(std::string_view prompt, const CompletionParams& params) const = 0;
};

/// Deterministic prompt -> response table for offline runs. First matching
/// rule wins; with no match and no default the call fails with MatchFailure.
class ScriptedBackend final : public LLMBackend {
 public:
  enum class MatchKind { Substring, Pattern };

  struct Rule {
    MatchKind kind = MatchKind::Substring;
    std::string matcher;
    std::string response;
  };

  explicit ScriptedBackend(std::vector<Rule> rules, std::optional<std::string> default_response = std::nullopt);

  /// Script document: {"rules": [{"contains"|"pattern": str, "response": str}], "default": str?}
  static ScriptedBackend from_json_text(std::string_view json_text);
  /// Rules of several script files, concatenated in order. The last default wins.
  static ScriptedBackend from_files(const std::vector<std::filesystem::path>& paths);

  std::string complete(std::string_view prompt, const CompletionParams& params) const override;

  const std::vector<Rule>& rules() const noexcept { return rules_; }

 private:
  std::vector<Rule> rules_;
  std::vector<std::optional<std::regex>> compiled_;
  std::optional<std::string> default_;
};

/// Forwards to an inner backend and counts calls.
class CountingBackend final : public LLMBackend {
 public:
  explicit CountingBackend(std::shared_ptr<const LLMBackend> inner) : inner_(std::move(inner)) {}
  std::string complete(std::string_view prompt, const CompletionParams& params) const override;
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::shared_ptr<const LLMBackend> inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

// ---------------------------------------------------------------------------
// HTTP chat-completions client

struct HttpRequest {
  std::string path;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
};

struct HttpResponse {
  int status = 0;  ///< 0 means no response (network failure or timeout)
  std::string body;
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) const = 0;
};

/// cpp-httplib transport for `scheme://host[:port]`.
std::shared_ptr<HttpTransport> make_http_transport(const std::string& origin, std::chrono::seconds timeout);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{1000};
  double multiplier = 2.0;
};

struct HttpBackendConfig {
  std::string base_url = "https://api.openai.com";
  std::string api_key;
  RetryPolicy retry;
  std::chrono::seconds timeout{60};
  std::string system_prompt =
      "You are a data analysis planner. Reply only with a plan in the requested format.";
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// OpenAI-compatible POST {base_url}/v1/chat/completions with bearer auth.
/// Retries timeouts, 429 and 5xx with exponential backoff; 401/403 fail
/// immediately with AuthError.
class HttpChatBackend final : public LLMBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig config, std::shared_ptr<HttpTransport> transport = nullptr,
                           Sleeper sleeper = nullptr);

  std::string complete(std::string_view prompt, const CompletionParams& params) const override;

  /// Request body for one call; exposed for wire-format tests.
  std::string request_body(std::string_view prompt, const CompletionParams& params) const;

 private:
  HttpBackendConfig config_;
  std::string path_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleeper_;
};

/// First choice's message content of a chat-completions response body.
/// Throws MalformedResponse.
std::string parse_chat_response(std::string_view body);

/// DATAAGENT_API_KEY, falling back to OPENAI_API_KEY.
std::optional<std::string> api_key_from_env();

// ---------------------------------------------------------------------------
// Record / replay

enum class CassetteMode { Record, Replay };

/// Lowercase hex SHA-256 of the prompt.
std::string prompt_hash(std::string_view prompt);

struct CassetteEntry {
  std::string hash;
  std::string params;
  std::string completion;

  bool operator==(const CassetteEntry&) const = default;
};

/// Cassette line: `<n>:<hash> <n>:<params> <n>:<completion>` where each field is
/// backslash-escaped (\\ \n \r \t) and <n> is the escaped field's byte length.
std::string encode_cassette_entry(const CassetteEntry& entry);
/// Throws CassetteCorrupt.
CassetteEntry decode_cassette_entry(std::string_view line);
std::vector<CassetteEntry> read_cassette(const std::filesystem::path& path);

/// Record mode forwards to `inner` and appends every call to the cassette.
/// Replay mode serves completions by prompt hash and never calls `inner`.
class RecordReplayBackend final : public LLMBackend {
 public:
  RecordReplayBackend(std::shared_ptr<const LLMBackend> inner, std::filesystem::path cassette, CassetteMode mode);

  std::string complete(std::string_view prompt, const CompletionParams& params) const override;

 private:
  std::shared_ptr<const LLMBackend> inner_;
  std::filesystem::path path_;
  CassetteMode mode_;
  std::map<std::string, std::string> replay_;
  mutable std::mutex write_mutex_;
};

}  // namespace dataagent
