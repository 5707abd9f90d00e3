#include <mutex>
#include <regex>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "dataagent/app.hpp"
#include "dataagent/format.hpp"
#include "dataagent/harness.hpp"
#include "dataagent/json_io.hpp"
#include "dataagent/pipeline.hpp"
#include "dataagent/profiler.hpp"

namespace dataagent {

namespace {

using nlohmann::json;

ServiceResponse reply(int status, const json& body) { return {status, body.dump() + "\n"}; }

ServiceResponse error_reply(int status, std::string_view label, std::string_view message) {
  return reply(status, {{"error", label}, {"message", message}});
}

ServiceResponse error_reply(int status, const Error& e) { return error_reply(status, e.label(), e.what()); }

/// Parses a JSON object body; nullopt (and a 400 in `bad`) when malformed.
std::optional<json> object_body(const ServiceRequest& request, ServiceResponse& bad) {
  json body = json::parse(request.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    bad = error_reply(400, "BadRequest", "request body must be a JSON object");
    return std::nullopt;
  }
  return body;
}

std::optional<std::string> string_field(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) return std::nullopt;
  return body[key].get<std::string>();
}

}  // namespace

Service::Service(std::shared_ptr<const LLMBackend> backend, AppConfig config,
                 std::function<std::shared_ptr<const LLMBackend>(const std::filesystem::path&)> bench_backend)
    : backend_(std::move(backend)), config_(std::move(config)), bench_backend_(std::move(bench_backend)) {}

std::size_t Service::dataset_count() const {
  std::shared_lock lock(mutex_);
  return datasets_.size();
}

std::shared_ptr<const Table> Service::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = datasets_.find(id);
  return it == datasets_.end() ? nullptr : it->second;
}

ServiceResponse Service::handle(const ServiceRequest& request) const {
  static const std::regex profile_path(R"(/datasets/([0-9a-f]+)/profile)");
  std::smatch m;
  try {
    if (request.path == "/datasets") {
      if (request.method == "POST") return upload(request);
    } else if (std::regex_match(request.path, m, profile_path)) {
      if (request.method == "GET") return profile(m[1]);
    } else if (request.path == "/query") {
      if (request.method == "POST") return query(request);
    } else if (request.path == "/check") {
      if (request.method == "POST") return check(request);
    } else if (request.path == "/bench/run") {
      if (request.method == "POST") return bench(request);
    } else {
      return error_reply(404, "NotFound", fmt::format("no route for {}", request.path));
    }
    return error_reply(405, "MethodNotAllowed", fmt::format("{} is not supported on {}", request.method, request.path));
  } catch (const Error& e) {
    return error_reply(422, e);
  } catch (const std::exception& e) {
    return error_reply(500, "InternalError", e.what());
  }
}

ServiceResponse Service::upload(const ServiceRequest& request) const {
  std::string content = request.body;
  std::string name = "dataset";
  if (!request.files.empty()) {
    auto it = request.files.find("file");
    const FilePart& part = it != request.files.end() ? it->second : request.files.begin()->second;
    content = part.content;
    if (!part.filename.empty()) name = std::filesystem::path(part.filename).stem().string();
  }
  std::shared_ptr<const Table> table;
  try {
    table = std::make_shared<const Table>(load_csv(content, name));
  } catch (const Error& e) {
    return error_reply(400, e);
  }
  std::string id = sha256_hex(content).substr(0, 16);
  {
    std::unique_lock lock(mutex_);
    datasets_.try_emplace(id, table);
  }
  return reply(200, {{"id", id}, {"rows", table->row_count()}, {"size", to_string(size_category(*table))}});
}

ServiceResponse Service::profile(const std::string& id) const {
  auto table = find(id);
  if (!table) return error_reply(404, "UnknownDataset", fmt::format("no dataset with id {}", id));
  return reply(200, {{"id", id}, {"profile", render_background(describe(*table), BackgroundDetail::Full)}});
}

ServiceResponse Service::query(const ServiceRequest& request) const {
  ServiceResponse bad;
  auto body = object_body(request, bad);
  if (!body) return bad;
  auto id = string_field(*body, "dataset_id");
  auto question = string_field(*body, "question");
  if (!id || !question) return error_reply(400, "BadRequest", "fields 'dataset_id' and 'question' must be strings");
  if (trim(*question).empty()) return error_reply(400, "BadRequest", "question must not be empty");
  auto table = find(*id);
  if (!table) return error_reply(404, "UnknownDataset", fmt::format("no dataset with id {}", *id));

  QueryOutcome outcome = run_query(*question, *table, *backend_, config_.planner);
  json plan = json::array();
  for (const StepOutcome& s : outcome.trace) {
    json step = {{"index", s.index}, {"rationale", s.rationale}, {"op", s.op_text}, {"summary", s.summary}};
    if (const StepRecord* rec = outcome.context.find(s.index)) step["result"] = value_to_json(rec->result);
    plan.push_back(step);
  }
  json out = {{"plan", plan}, {"answer", outcome.answer ? value_to_json(*outcome.answer) : json(nullptr)}};
  if (outcome.failure) {
    out["failure"] = {{"class", outcome.failure->failure_class},
                      {"label", outcome.failure->label},
                      {"message", outcome.failure->message}};
    return reply(422, out);
  }
  return reply(200, out);
}

ServiceResponse Service::check(const ServiceRequest& request) const {
  ServiceResponse bad;
  auto body = object_body(request, bad);
  if (!body) return bad;
  if (!body->contains("predicted") || !body->contains("truth"))
    return error_reply(400, "BadRequest", "fields 'predicted' and 'truth' are required");
  CheckOptions options;
  options.default_margin = config_.margin;
  if (body->contains("margin")) {
    const json& margin = (*body)["margin"];
    if (!margin.is_number() || margin.get<double>() < 0)
      return error_reply(400, "BadRequest", "margin must be a non-negative number");
    options.default_margin = margin.get<double>();
  }
  GroundTruth truth;
  Value predicted;
  try {
    truth = truth_from_json((*body)["truth"]);
    predicted = value_from_json((*body)["predicted"]);
  } catch (const Error& e) {
    return error_reply(400, e);
  }
  if (body->contains("order_insensitive") && (*body)["order_insensitive"].is_boolean())
    options.order_insensitive = (*body)["order_insensitive"].get<bool>();
  return reply(200, verdict_to_json(check_answer(predicted, truth, options)));
}

ServiceResponse Service::bench(const ServiceRequest& request) const {
  ServiceResponse bad;
  auto body = object_body(request, bad);
  if (!body) return bad;
  auto path = string_field(*body, "manifest_path");
  if (!path || path->empty()) return error_reply(400, "BadRequest", "field 'manifest_path' must be a string");
  BenchmarkSuite suite = load_suite(*path);
  std::shared_ptr<const LLMBackend> backend = bench_backend_ ? bench_backend_(*path) : backend_;
  RunOptions options;
  options.planner = config_.planner;
  options.check.default_margin = config_.margin;
  std::vector<CaseResult> results = run_suite(suite, *backend, options);
  AccuracyReport report = aggregate(std::span<const CaseResult>(results), suite);
  return {200, render_report_json(report, results)};
}

bool serve(const Service& service, const std::string& host, int port) {
  httplib::Server server;
  auto bridge = [&service](const httplib::Request& req, httplib::Response& res) {
    ServiceRequest request{req.method, req.path, req.body, {}};
    if (req.is_multipart_form_data())
      for (const auto& [field, file] : req.files) request.files[field] = FilePart{file.filename, file.content};
    ServiceResponse response = service.handle(request);
    res.status = response.status;
    res.set_content(response.body, "application/json");
  };
  server.Get(".*", bridge);
  server.Post(".*", bridge);
  server.Put(".*", bridge);
  server.Delete(".*", bridge);
  if (!server.bind_to_port(host, port)) return false;
  return server.listen_after_bind();
}

}  // namespace dataagent
