#include <cmath>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "dataagent/backend.hpp"
#include "dataagent/error.hpp"

namespace dataagent {

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttplibTransport(std::string origin, std::chrono::seconds timeout) : origin_(std::move(origin)), timeout_(timeout) {}

  HttpResponse post(const HttpRequest& request) const override {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    auto res = client.Post(request.path, headers, request.body, "application/json");
    if (!res) return {0, "", httplib::to_string(res.error())};
    return {res->status, res->body, ""};
  }

 private:
  std::string origin_;
  std::chrono::seconds timeout_;
};

/// Splits "scheme://host[:port]/prefix" into origin and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  auto scheme = url.find("://");
  auto start = scheme == std::string::npos ? 0 : scheme + 3;
  auto slash = url.find('/', start);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

bool transient(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(const std::string& origin, std::chrono::seconds timeout) {
  return std::make_shared<HttplibTransport>(origin, timeout);
}

HttpChatBackend::HttpChatBackend(HttpBackendConfig config, std::shared_ptr<HttpTransport> transport, Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
  auto [origin, prefix] = split_base_url(config_.base_url);
  path_ = prefix + "/v1/chat/completions";
  if (!transport_) transport_ = make_http_transport(origin, config_.timeout);
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (config_.retry.max_attempts < 1) config_.retry.max_attempts = 1;
}

std::string HttpChatBackend::request_body(std::string_view prompt, const CompletionParams& params) const {
  nlohmann::json body = {
      {"model", params.model},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", config_.system_prompt}},
                              {{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", params.temperature},
      {"max_tokens", params.max_tokens},
  };
  return body.dump();
}

std::string parse_chat_response(std::string_view body) {
  nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::MalformedResponse, "response body is not JSON");
  if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
    throw Error(Errc::MalformedResponse, "response has no choices");
  const auto& choice = doc["choices"][0];
  if (!choice.contains("message") || !choice["message"].is_object() || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string())
    throw Error(Errc::MalformedResponse, "first choice has no message content");
  return choice["message"]["content"].get<std::string>();
}

std::string HttpChatBackend::complete(std::string_view prompt, const CompletionParams& params) const {
  if (config_.api_key.empty()) throw Error(Errc::AuthError, "no API key configured");
  HttpRequest request{path_,
                      {{"Authorization", "Bearer " + config_.api_key}, {"Accept", "application/json"}},
                      request_body(prompt, params)};

  HttpResponse last;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      double factor = std::pow(config_.retry.multiplier, attempt - 2);
      sleeper_(std::chrono::milliseconds(static_cast<long long>(config_.retry.base_delay.count() * factor)));
    }
    last = transport_->post(request);
    if (last.status == 401 || last.status == 403)
      throw Error(Errc::AuthError, fmt::format("HTTP {} from {}", last.status, path_));
    if (last.status >= 200 && last.status < 300) return parse_chat_response(last.body);
    if (!transient(last.status))
      throw Error(Errc::Transport, fmt::format("HTTP {} from {}: {}", last.status, path_, last.body.substr(0, 200)));
  }
  if (last.status == 429)
    throw Error(Errc::RateLimited, fmt::format("HTTP 429 after {} attempts", config_.retry.max_attempts));
  if (last.status == 0)
    throw Error(Errc::Transport, fmt::format("{} after {} attempts", last.error, config_.retry.max_attempts));
  throw Error(Errc::Transport, fmt::format("HTTP {} after {} attempts", last.status, config_.retry.max_attempts));
}

}  // namespace dataagent
