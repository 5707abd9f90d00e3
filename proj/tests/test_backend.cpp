#include <doctest.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dataagent/backend.hpp"
#include "fixtures.hpp"

using namespace dataagent;
using fixtures::error_of;

namespace {

const std::string kChatReply = R"({"choices":[{"message":{"role":"assistant","content":"Step 1: c\nOP: COUNT_ROWS() ON TABLE\n"}}]})";

/// Replays a fixed list of statuses, then 200s.
class ScriptedTransport : public HttpTransport {
 public:
  explicit ScriptedTransport(std::vector<int> statuses) : statuses_(std::move(statuses)) {}
  HttpResponse post(const HttpRequest& request) const override {
    last_request = request;
    std::size_t i = calls++;
    int status = i < statuses_.size() ? statuses_[i] : 200;
    return {status, status == 200 ? kChatReply : "{}", status == 0 ? "connection refused" : ""};
  }
  mutable std::size_t calls = 0;
  mutable HttpRequest last_request;

 private:
  std::vector<int> statuses_;
};

class FailingBackend : public LLMBackend {
 public:
  std::string complete(std::string_view, const CompletionParams&) const override {
    throw Error(Errc::Transport, "network disabled in this test");
  }
};

HttpBackendConfig keyed() {
  HttpBackendConfig c;
  c.api_key = "sk-test";
  return c;
}

struct SleepLog {
  std::vector<long long> ms;
  Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) { ms.push_back(d.count()); };
  }
};

}  // namespace

TEST_CASE("scripted backend matches substrings and patterns in order") {
  ScriptedBackend b({{ScriptedBackend::MatchKind::Substring, "rows", "A"},
                     {ScriptedBackend::MatchKind::Pattern, R"(mean of \w+)", "B"}});
  CHECK(b.complete("how many rows?", {}) == "A");
  CHECK(b.complete("the mean of Temp", {}) == "B");
  CHECK(error_of([&] { b.complete("nothing", {}); }) == "MatchFailure");
  ScriptedBackend with_default({}, std::string("D"));
  CHECK(with_default.complete("anything", {}) == "D");
}

TEST_CASE("scripted backend from json") {
  auto b = ScriptedBackend::from_json_text(R"({"rules":[{"contains":"x","response":"1"},{"pattern":"^y+$","response":"2"}],"default":"3"})");
  CHECK(b.complete("axb", {}) == "1");
  CHECK(b.complete("yyy", {}) == "2");
  CHECK(b.complete("z", {}) == "3");
  CHECK(error_of([] { ScriptedBackend::from_json_text("[1,2"); }) == "InvalidArgument");
  CHECK(error_of([] { ScriptedBackend::from_json_text(R"({"rules":[{"response":"1"}]})"); }) == "InvalidArgument");
}

TEST_CASE("counting backend") {
  auto inner = std::make_shared<ScriptedBackend>(std::vector<ScriptedBackend::Rule>{}, std::string("ok"));
  CountingBackend c(inner);
  c.complete("a", {});
  c.complete("b", {});
  CHECK(c.calls() == 2);
}

TEST_CASE("chat request wire format") {
  auto t = std::make_shared<ScriptedTransport>(std::vector<int>{});
  HttpChatBackend b(keyed(), t);
  CHECK(b.complete("hello", {"gpt-3.5-turbo", 0.0, 1024}) == "Step 1: c\nOP: COUNT_ROWS() ON TABLE\n");
  CHECK(t->last_request.path == "/v1/chat/completions");
  bool bearer = false;
  for (const auto& [k, v] : t->last_request.headers) bearer = bearer || (k == "Authorization" && v == "Bearer sk-test");
  CHECK(bearer);
  auto body = nlohmann::json::parse(t->last_request.body);
  CHECK(body["model"] == "gpt-3.5-turbo");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["max_tokens"] == 1024);
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(body["messages"][1]["content"] == "hello");
}

TEST_CASE("base url path prefix is kept") {
  auto t = std::make_shared<ScriptedTransport>(std::vector<int>{});
  HttpBackendConfig c = keyed();
  c.base_url = "http://localhost:9/proxy";
  HttpChatBackend b(c, t);
  b.complete("x", {});
  CHECK(t->last_request.path == "/proxy/v1/chat/completions");
}

TEST_CASE("retry schedule and error mapping") {
  SUBCASE("429 twice then success backs off 1s then 2s") {
    auto t = std::make_shared<ScriptedTransport>(std::vector<int>{429, 429});
    SleepLog log;
    HttpChatBackend b(keyed(), t, log.sleeper());
    CHECK_NOTHROW(b.complete("x", {}));
    CHECK(t->calls == 3);
    CHECK(log.ms == std::vector<long long>{1000, 2000});
  }
  SUBCASE("persistent 429 is RateLimited") {
    auto t = std::make_shared<ScriptedTransport>(std::vector<int>{429, 429, 429});
    SleepLog log;
    HttpChatBackend b(keyed(), t, log.sleeper());
    CHECK(error_of([&] { b.complete("x", {}); }) == "RateLimited");
    CHECK(t->calls == 3);
  }
  SUBCASE("5xx and timeouts are retried then Transport") {
    auto t = std::make_shared<ScriptedTransport>(std::vector<int>{503, 0, 500});
    SleepLog log;
    HttpChatBackend b(keyed(), t, log.sleeper());
    CHECK(error_of([&] { b.complete("x", {}); }) == "Transport");
    CHECK(t->calls == 3);
  }
  SUBCASE("401 fails immediately") {
    auto t = std::make_shared<ScriptedTransport>(std::vector<int>{401});
    SleepLog log;
    HttpChatBackend b(keyed(), t, log.sleeper());
    CHECK(error_of([&] { b.complete("x", {}); }) == "AuthError");
    CHECK(t->calls == 1);
    CHECK(log.ms.empty());
  }
  SUBCASE("400 is not retried") {
    auto t = std::make_shared<ScriptedTransport>(std::vector<int>{400});
    HttpChatBackend b(keyed(), t, SleepLog{}.sleeper());
    CHECK(error_of([&] { b.complete("x", {}); }) == "Transport");
    CHECK(t->calls == 1);
  }
  SUBCASE("missing key") {
    auto t = std::make_shared<ScriptedTransport>(std::vector<int>{});
    HttpChatBackend b(HttpBackendConfig{}, t);
    CHECK(error_of([&] { b.complete("x", {}); }) == "AuthError");
    CHECK(t->calls == 0);
  }
}

TEST_CASE("malformed responses") {
  CHECK(error_of([] { parse_chat_response("not json"); }) == "MalformedResponse");
  CHECK(error_of([] { parse_chat_response(R"({"choices":[]})"); }) == "MalformedResponse");
  CHECK(error_of([] { parse_chat_response(R"({"choices":[{"message":{}}]})"); }) == "MalformedResponse");
  CHECK(parse_chat_response(kChatReply).rfind("Step 1", 0) == 0);
}

TEST_CASE("real HTTP round trip against a local stub with backoff") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    int n = ++hits;
    seen_auth = req.get_header_value("Authorization");
    if (n <= 2) {
      res.status = 429;
      res.set_content("{}", "application/json");
      return;
    }
    res.set_content(kChatReply, "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackendConfig c = keyed();
  c.base_url = "http://127.0.0.1:" + std::to_string(port);
  c.timeout = std::chrono::seconds(5);
  HttpChatBackend b(c);
  auto start = std::chrono::steady_clock::now();
  std::string out = b.complete("hello", {});
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  server.stop();
  th.join();

  CHECK(out.rfind("Step 1", 0) == 0);
  CHECK(hits == 3);
  CHECK(elapsed >= 3.0);
  CHECK(seen_auth == "Bearer sk-test");
}

TEST_CASE("api key comes from the environment") {
  setenv("DATAAGENT_API_KEY", "k1", 1);
  CHECK(api_key_from_env() == "k1");
  unsetenv("DATAAGENT_API_KEY");
  setenv("OPENAI_API_KEY", "k2", 1);
  CHECK(api_key_from_env() == "k2");
  unsetenv("OPENAI_API_KEY");
  CHECK_FALSE(api_key_from_env());
}

TEST_CASE("cassette entry encoding") {
  CassetteEntry e{prompt_hash("p"), "model=m;temperature=0;max_tokens=5", "line1\nline2\ttab \\ back"};
  std::string line = encode_cassette_entry(e);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(decode_cassette_entry(line) == e);
  CHECK(prompt_hash("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(error_of([] { decode_cassette_entry("garbage"); }) == "CassetteCorrupt");
  CHECK(error_of([] { decode_cassette_entry("3:abc 1:x 1:y"); }) == "CassetteCorrupt");
  CHECK(error_of([&] { decode_cassette_entry(line + "x"); }) == "CassetteCorrupt");
}

TEST_CASE("record then replay without network") {
  auto dir = fixtures::scratch("cassette");
  auto path = dir / "run.cassette";
  auto inner = std::make_shared<ScriptedBackend>(std::vector<ScriptedBackend::Rule>{}, std::string("plan\ntext"));
  {
    RecordReplayBackend rec(inner, path, CassetteMode::Record);
    CHECK(rec.complete("prompt one", {}) == "plan\ntext");
    CHECK(rec.complete("prompt two", {}) == "plan\ntext");
  }
  CHECK(read_cassette(path).size() == 2);

  RecordReplayBackend replay(std::make_shared<FailingBackend>(), path, CassetteMode::Replay);
  CHECK(replay.complete("prompt one", {}) == "plan\ntext");
  CHECK(error_of([&] { replay.complete("unseen prompt", {}); }) == "CassetteMiss");

  CHECK(error_of([&] { RecordReplayBackend(nullptr, dir / "absent.cassette", CassetteMode::Replay); }) == "CassetteMiss");
  std::ofstream(dir / "bad.cassette") << "not a cassette line\n";
  CHECK(error_of([&] { RecordReplayBackend(nullptr, dir / "bad.cassette", CassetteMode::Replay); }) == "CassetteCorrupt");
}
