#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dataagent/app.hpp"
#include "fixtures.hpp"

using namespace dataagent;
using nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const char* name) { return (fixtures::kDataDir / name).string(); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Service cities_service() {
  auto backend = std::make_shared<ScriptedBackend>(ScriptedBackend::from_files({fixtures::kDataDir / "cities.script.json"}));
  auto gold = std::make_shared<ScriptedBackend>(
      ScriptedBackend::from_files({fixtures::kDataDir / "mini" / "mini.script.json"}));
  return Service(backend, AppConfig{}, [gold](const std::filesystem::path&) { return gold; });
}

ServiceResponse post(const Service& s, const std::string& path, const std::string& body) {
  return s.handle({"POST", path, body, {}});
}

std::string upload_cities(const Service& s) {
  ServiceResponse r = post(s, "/datasets", slurp(fixtures::kDataDir / "cities.csv"));
  REQUIRE(r.status == 200);
  return json::parse(r.body)["id"].get<std::string>();
}

}  // namespace

TEST_CASE("cli ask answers from the scripted backend") {
  CliRun r = cli({"ask", data("cities.csv"), "Which city has the highest temperature?"});
  CHECK(r.code == 0);
  CHECK(r.out.find("ARG_EXTREME") != std::string::npos);
  CHECK(r.out.find("answer: Dubai") != std::string::npos);

  CliRun quiet = cli({"ask", data("cities.csv"), "Which city has the highest temperature?", "--no-show-plan"});
  CHECK(quiet.code == 0);
  CHECK(quiet.out == "answer: Dubai\n");
}

TEST_CASE("cli ask failures") {
  CHECK(cli({"ask", data("cities.csv"), "   "}).code == 2);
  CHECK(cli({"ask", data("cities.csv")}).code == 2);
  CHECK(cli({"ask", data("cities.csv"), "q", "--bogus"}).code == 2);
  CHECK(cli({"ask", data("cities.csv"), "q", "--backend", "replay"}).code == 2);
  CHECK(cli({"ask", data("missing.csv"), "q"}).code != 0);

  CliRun rejected = cli({"ask", data("cities.csv"), "What is the median cloud cover?"});
  CHECK(rejected.code == 1);
  CHECK(rejected.err.find("generation-error") != std::string::npos);
  CHECK(rejected.err.find("DtypeMismatch") != std::string::npos);

  CliRun unmatched = cli({"ask", data("cities.csv"), "What is the meaning of life?"});
  CHECK(unmatched.code == 1);
  CHECK(unmatched.err.find("backend-error") != std::string::npos);
}

TEST_CASE("cli never takes an api key flag") {
  CHECK(cli({"ask", data("cities.csv"), "q", "--api-key", "secret"}).code == 2);
}

TEST_CASE("cli profile") {
  CliRun r = cli({"profile", data("cities.csv")});
  CHECK(r.code == 0);
  CHECK(r.out.find("Humidity") != std::string::npos);
  CHECK(r.out.find("9") != std::string::npos);
  CHECK(cli({"profile", data("cities.csv"), "--budget", "5"}).code == 1);
}

TEST_CASE("cli check") {
  CliRun ok = cli({"check", "--predicted", "30.76250001", "--truth", R"({"kind":"number","value":30.7625})"});
  CHECK(ok.code == 0);
  CHECK(ok.out.rfind("correct: ", 0) == 0);
  CliRun bad = cli({"check", "--predicted", "31", "--truth", R"({"kind":"number","value":30.7625})"});
  CHECK(bad.code == 0);
  CHECK(bad.out.rfind("incorrect: ", 0) == 0);
  CliRun text = cli({"check", "--predicted", "dubai", "--truth", R"({"kind":"text","value":"Dubai"})"});
  CHECK(text.out.rfind("correct: ", 0) == 0);
  CHECK(cli({"check", "--predicted", "1", "--truth", "{bad"}).code != 0);
}

TEST_CASE("cli bench run and generate") {
  auto dir = fixtures::scratch("cli-bench");
  CliRun r = cli({"bench", "run", (fixtures::kDataDir / "mini" / "mini.json").string(), "--report",
                  (dir / "report.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("Percent Correct  100.00  100.00  100.00   100.00") != std::string::npos);
  json report = json::parse(slurp(dir / "report.json"));
  CHECK(report["overall"]["correct"] == 30);
  CHECK(report["verdicts"].size() == 30);

  CHECK(cli({"bench", "generate", (dir / "gen").string()}).code == 0);
  CHECK(slurp(dir / "gen" / "mini.json") == slurp(fixtures::kDataDir / "mini" / "mini.json"));
  CHECK(cli({"bench", "run", (dir / "absent.json").string()}).code == 1);
}

TEST_CASE("service upload and profile") {
  Service s = cities_service();
  ServiceResponse up = post(s, "/datasets", slurp(fixtures::kDataDir / "cities.csv"));
  REQUIRE(up.status == 200);
  json body = json::parse(up.body);
  CHECK(body["rows"] == 9);
  CHECK(body["size"] == "Small");
  std::string id = body["id"];
  CHECK(id.size() == 16);
  CHECK(post(s, "/datasets", slurp(fixtures::kDataDir / "cities.csv")).body == up.body);
  CHECK(s.dataset_count() == 1);

  ServiceResponse prof = s.handle({"GET", "/datasets/" + id + "/profile", "", {}});
  CHECK(prof.status == 200);
  CHECK(json::parse(prof.body)["profile"].get<std::string>().find("Clouds") != std::string::npos);
  CHECK(s.handle({"GET", "/datasets/0123456789abcdef/profile", "", {}}).status == 404);
}

TEST_CASE("service upload variants") {
  Service s = cities_service();
  ServiceRequest multipart{"POST", "/datasets", "", {{"file", {"cities.csv", slurp(fixtures::kDataDir / "cities.csv")}}}};
  ServiceResponse r = s.handle(multipart);
  CHECK(r.status == 200);
  CHECK(json::parse(r.body)["rows"] == 9);

  ServiceResponse ragged = post(s, "/datasets", "a,b\n1,2\n3\n");
  CHECK(ragged.status == 400);
  CHECK(json::parse(ragged.body)["error"] == "RaggedRow");
  ServiceResponse empty = post(s, "/datasets", "");
  CHECK(empty.status == 400);
  CHECK(json::parse(empty.body)["error"] == "EmptyInput");
}

TEST_CASE("service query") {
  Service s = cities_service();
  std::string id = upload_cities(s);
  ServiceResponse r =
      post(s, "/query", json{{"dataset_id", id}, {"question", "How many rows does the dataset have?"}}.dump());
  REQUIRE(r.status == 200);
  json body = json::parse(r.body);
  CHECK(body["answer"] == 9);
  CHECK(body["plan"].size() == 1);
  CHECK(body["plan"][0]["op"].get<std::string>().find("COUNT_ROWS") != std::string::npos);

  ServiceResponse failed =
      post(s, "/query", json{{"dataset_id", id}, {"question", "What is the median cloud cover?"}}.dump());
  CHECK(failed.status == 422);
  json f = json::parse(failed.body);
  CHECK(f["failure"]["class"] == "generation-error");
  CHECK(f["failure"]["label"] == "PlanRejected");
  CHECK(f["answer"].is_null());

  CHECK(post(s, "/query", json{{"dataset_id", "ffffffffffffffff"}, {"question", "q"}}.dump()).status == 404);
  CHECK(post(s, "/query", "{not json").status == 400);
  CHECK(post(s, "/query", json{{"dataset_id", id}}.dump()).status == 400);
  CHECK(post(s, "/query", json{{"dataset_id", id}, {"question", "  "}}.dump()).status == 400);
}

TEST_CASE("service check") {
  Service s = cities_service();
  ServiceResponse r = post(s, "/check", json{{"predicted", 1.0000099}, {"truth", {{"kind", "number"}, {"value", 1}}}}.dump());
  REQUIRE(r.status == 200);
  CHECK(json::parse(r.body)["correct"] == true);
  r = post(s, "/check",
           json{{"predicted", 1.0000099}, {"truth", {{"kind", "number"}, {"value", 1}}}, {"margin", 0}}.dump());
  CHECK(json::parse(r.body)["correct"] == false);
  r = post(s, "/check",
           json{{"predicted", {"b", "a"}}, {"truth", {{"kind", "text_list"}, {"value", {"a", "b"}}}}, {"order_insensitive", true}}
               .dump());
  CHECK(json::parse(r.body)["correct"] == true);
  CHECK(post(s, "/check", json{{"predicted", 1}}.dump()).status == 400);
  CHECK(post(s, "/check", json{{"predicted", 1}, {"truth", {{"kind", "nope"}}}}.dump()).status == 400);
  CHECK(post(s, "/check", json{{"predicted", 1}, {"truth", {{"kind", "number"}, {"value", 1}}}, {"margin", -1}}.dump())
            .status == 400);
}

TEST_CASE("service bench run") {
  Service s = cities_service();
  ServiceResponse r =
      post(s, "/bench/run", json{{"manifest_path", (fixtures::kDataDir / "mini" / "mini.json").string()}}.dump());
  REQUIRE(r.status == 200);
  json body = json::parse(r.body);
  CHECK(body["overall"]["correct"] == 30);
  CHECK(body["buckets"]["Small"]["percent"] == "100.00");
  ServiceResponse missing = post(s, "/bench/run", json{{"manifest_path", "/nonexistent/x.json"}}.dump());
  CHECK(missing.status == 422);
  CHECK(json::parse(missing.body)["error"] == "ManifestError");
}

TEST_CASE("service routing") {
  Service s = cities_service();
  CHECK(s.handle({"GET", "/nowhere", "", {}}).status == 404);
  CHECK(s.handle({"GET", "/query", "", {}}).status == 405);
  CHECK(s.handle({"DELETE", "/datasets", "", {}}).status == 405);
}

TEST_CASE("backend factory") {
  AppConfig replay;
  replay.backend = BackendKind::Replay;
  replay.cassette = "/nonexistent/cassette.txt";
  CHECK(fixtures::error_of([&] { make_backend(replay); }) == "CassetteMiss");
  AppConfig scripted;
  scripted.scripts = {fixtures::kDataDir / "cities.script.json"};
  CHECK(make_backend(scripted)->complete("Question: What is the average temperature?\n", {}).find("STAT") !=
        std::string::npos);
}
