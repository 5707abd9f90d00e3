#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "dataagent/harness.hpp"
#include "dataagent/json_io.hpp"

namespace dataagent {

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Medium: return "medium";
    case Difficulty::Hard: return "hard";
  }
  return "easy";
}

std::optional<Difficulty> parse_difficulty(std::string_view text) {
  std::string s;
  for (char c : text) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "easy") return Difficulty::Easy;
  if (s == "medium") return Difficulty::Medium;
  if (s == "hard") return Difficulty::Hard;
  return std::nullopt;
}

const DatasetEntry* BenchmarkSuite::dataset(std::string_view id) const {
  for (const DatasetEntry& d : datasets)
    if (d.id == id) return &d;
  return nullptr;
}

namespace {

[[noreturn]] void bad(std::string why) { throw Error(Errc::ManifestError, std::move(why)); }

std::string required_string(const nlohmann::json& j, const char* key, std::string_view where) {
  if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty())
    bad(fmt::format("{}: '{}' must be a non-empty string", where, key));
  return j[key].get<std::string>();
}

}  // namespace

BenchmarkSuite parse_suite(std::string_view manifest_json, const std::filesystem::path& base_dir) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(manifest_json);
  } catch (const nlohmann::json::parse_error& e) {
    bad(fmt::format("manifest is not valid JSON: {}", e.what()));
  }
  if (!root.is_object()) bad("manifest must be a JSON object");
  if (!root.contains("datasets") || !root["datasets"].is_array()) bad("manifest needs a 'datasets' array");
  if (!root.contains("cases") || !root["cases"].is_array()) bad("manifest needs a 'cases' array");

  BenchmarkSuite suite;
  for (const auto& d : root["datasets"]) {
    if (!d.is_object()) bad("dataset entries must be objects");
    DatasetEntry entry;
    entry.id = required_string(d, "id", "dataset");
    std::string where = fmt::format("dataset '{}'", entry.id);
    if (suite.dataset(entry.id)) bad(fmt::format("duplicate dataset id '{}'", entry.id));
    entry.path = base_dir / required_string(d, "path", where);
    auto size = parse_size_category(required_string(d, "size", where));
    if (!size) bad(fmt::format("{}: size must be Small, Medium or Large", where));
    entry.size = *size;
    auto table = std::make_shared<Table>(load_csv_file(entry.path));
    SizeCategory actual = size_category(*table);
    if (actual != entry.size)
      throw Error(Errc::SizeMismatch, fmt::format("{} declared {} but has {} rows ({})", where, to_string(entry.size),
                                                  table->row_count(), to_string(actual)));
    entry.table = std::move(table);
    suite.datasets.push_back(std::move(entry));
  }

  std::set<std::string, std::less<>> ids;
  for (const auto& c : root["cases"]) {
    if (!c.is_object()) bad("case entries must be objects");
    QueryCase qc;
    qc.id = required_string(c, "id", "case");
    std::string where = fmt::format("case '{}'", qc.id);
    if (!ids.insert(qc.id).second) bad(fmt::format("duplicate case id '{}'", qc.id));
    qc.dataset = required_string(c, "dataset", where);
    if (!suite.dataset(qc.dataset)) bad(fmt::format("{}: unknown dataset '{}'", where, qc.dataset));
    qc.question = required_string(c, "question", where);
    if (c.contains("difficulty")) {
      if (!c["difficulty"].is_string()) bad(fmt::format("{}: difficulty must be a string", where));
      auto d = parse_difficulty(c["difficulty"].get<std::string>());
      if (!d) bad(fmt::format("{}: difficulty must be easy, medium or hard", where));
      qc.difficulty = *d;
    }
    if (c.contains("order_insensitive")) {
      if (!c["order_insensitive"].is_boolean()) bad(fmt::format("{}: order_insensitive must be a boolean", where));
      qc.order_insensitive = c["order_insensitive"].get<bool>();
    }
    if (!c.contains("truth")) bad(fmt::format("{}: missing 'truth'", where));
    try {
      qc.truth = truth_from_json(c["truth"]);
    } catch (const Error& e) {
      bad(fmt::format("{}: {}", where, e.detail()));
    }
    suite.cases.push_back(std::move(qc));
  }
  return suite;
}

BenchmarkSuite load_suite(const std::filesystem::path& manifest) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw Error(Errc::ManifestError, fmt::format("cannot open manifest {}", manifest.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_suite(ss.str(), manifest.parent_path());
}

CaseResult run_case(const QueryCase& qc, const Table& table, const LLMBackend& backend, const RunOptions& options) {
  CaseResult result;
  result.case_id = qc.id;
  QueryOutcome outcome = run_query(qc.question, table, backend, options.planner);
  result.trace = trace_lines(outcome);

  CheckOptions check = options.check;
  check.order_insensitive = check.order_insensitive || qc.order_insensitive;
  if (outcome.failure) {
    result.verdict = check_failure(outcome.failure->reason(), qc.truth);
  } else if (qc.truth.kind == TruthKind::MultiPart) {
    std::vector<Value> parts = outcome.last_results(qc.truth.parts.size());
    std::vector<std::string> texts;
    for (const Value& v : parts) texts.push_back(summarize(v));
    result.answer = fmt::format("{}", fmt::join(texts, "; "));
    result.verdict = check_parts(parts, qc.truth, check);
  } else {
    result.answer = summarize(*outcome.answer);
    result.verdict = check_answer(*outcome.answer, qc.truth, check);
  }
  return result;
}

std::vector<CaseResult> run_suite(const BenchmarkSuite& suite, const LLMBackend& backend, const RunOptions& options) {
  std::vector<CaseResult> results(suite.cases.size());
  auto one = [&](std::size_t i) {
    const QueryCase& qc = suite.cases[i];
    const DatasetEntry* d = suite.dataset(qc.dataset);
    if (!d || !d->table) throw Error(Errc::MissingDataset, fmt::format("case '{}': dataset '{}' not loaded", qc.id, qc.dataset));
    results[i] = run_case(qc, *d->table, backend, options);
  };

  unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1 || suite.cases.size() < 2) {
    for (std::size_t i = 0; i < suite.cases.size(); ++i) one(i);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < std::min<std::size_t>(jobs, suite.cases.size()); ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < suite.cases.size(); i = next++) {
        try {
          one(i);
        } catch (...) {
          std::lock_guard lock(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

std::optional<long long> BucketStats::basis_points() const {
  if (total == 0) return std::nullopt;
  auto c = static_cast<long long>(correct), t = static_cast<long long>(total);
  return (20000 * c + t) / (2 * t);
}

std::optional<double> BucketStats::percent() const {
  auto bp = basis_points();
  if (!bp) return std::nullopt;
  return static_cast<double>(*bp) / 100.0;
}

std::string BucketStats::percent_text() const {
  auto bp = basis_points();
  if (!bp) return "-";
  return fmt::format("{}.{:02}", *bp / 100, *bp % 100);
}

AccuracyReport aggregate(std::span<const CaseVerdict> verdicts, const BenchmarkSuite& suite) {
  std::map<std::string, const QueryCase*, std::less<>> cases;
  for (const QueryCase& qc : suite.cases) cases.emplace(qc.id, &qc);

  AccuracyReport report;
  std::set<std::string, std::less<>> seen;
  for (const CaseVerdict& v : verdicts) {
    auto it = cases.find(v.case_id);
    if (it == cases.end())
      throw Error(Errc::CardinalityMismatch, fmt::format("verdict for unknown case '{}'", v.case_id));
    if (!seen.insert(v.case_id).second)
      throw Error(Errc::CardinalityMismatch, fmt::format("more than one verdict for case '{}'", v.case_id));
    const DatasetEntry* d = suite.dataset(it->second->dataset);
    if (!d) throw Error(Errc::MissingDataset, fmt::format("case '{}': unknown dataset", v.case_id));
    BucketStats& b = report.buckets[static_cast<std::size_t>(d->size)];
    ++b.total;
    ++report.overall.total;
    if (v.verdict.correct) {
      ++b.correct;
      ++report.overall.correct;
    }
  }
  if (seen.size() != cases.size())
    throw Error(Errc::CardinalityMismatch,
                fmt::format("{} verdicts for {} cases", seen.size(), cases.size()));
  return report;
}

AccuracyReport aggregate(std::span<const CaseResult> results, const BenchmarkSuite& suite) {
  std::vector<CaseVerdict> verdicts;
  verdicts.reserve(results.size());
  for (const CaseResult& r : results) verdicts.push_back({r.case_id, r.verdict});
  return aggregate(std::span<const CaseVerdict>(verdicts), suite);
}

}  // namespace dataagent
