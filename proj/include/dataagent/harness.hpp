#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dataagent/backend.hpp"
#include "dataagent/checker.hpp"
#include "dataagent/pipeline.hpp"
#include "dataagent/planner.hpp"
#include "dataagent/table.hpp"

namespace dataagent {

enum class Difficulty { Easy, Medium, Hard };
std::string_view to_string(Difficulty d);
std::optional<Difficulty> parse_difficulty(std::string_view text);

struct QueryCase {
  std::string id;
  std::string dataset;
  std::string question;
  GroundTruth truth;
  Difficulty difficulty = Difficulty::Easy;
  bool order_insensitive = false;
};

struct DatasetEntry {
  std::string id;
  std::filesystem::path path;
  SizeCategory size = SizeCategory::Small;
  std::shared_ptr<const Table> table;  ///< null for suites built without data
};

struct BenchmarkSuite {
  std::vector<DatasetEntry> datasets;
  std::vector<QueryCase> cases;

  const DatasetEntry* dataset(std::string_view id) const;
};

/// Manifest JSON: {datasets: [{id, path, size}], cases: [{id, dataset, question,
/// difficulty, order_insensitive, truth: {kind, value, margin?}}]}.
/// Dataset paths are relative to the manifest's directory. Throws ManifestError,
/// SizeMismatch or MissingDataset.
BenchmarkSuite load_suite(const std::filesystem::path& manifest);
BenchmarkSuite parse_suite(std::string_view manifest_json, const std::filesystem::path& base_dir);

struct CaseResult {
  std::string case_id;
  Verdict verdict;
  std::vector<std::string> trace;
  std::string answer;  ///< summary of the produced answer, empty on failure
};

struct RunOptions {
  PlannerConfig planner;
  CheckOptions check;
  unsigned jobs = 1;  ///< cases run concurrently when > 1; results keep case order
};

/// generate_plan -> execute_plan -> check_answer for every case.
std::vector<CaseResult> run_suite(const BenchmarkSuite& suite, const LLMBackend& backend, const RunOptions& options);
CaseResult run_case(const QueryCase& qc, const Table& table, const LLMBackend& backend, const RunOptions& options);

struct BucketStats {
  std::size_t correct = 0;
  std::size_t total = 0;

  /// round(10000 * correct / total), half up; nullopt for an empty bucket.
  std::optional<long long> basis_points() const;
  std::optional<double> percent() const;
  /// "33.33", or "-" for an empty bucket.
  std::string percent_text() const;
  bool operator==(const BucketStats&) const = default;
};

struct AccuracyReport {
  std::array<BucketStats, 3> buckets;  ///< indexed by SizeCategory
  BucketStats overall;

  const BucketStats& bucket(SizeCategory s) const { return buckets[static_cast<std::size_t>(s)]; }
  bool operator==(const AccuracyReport&) const = default;
};

struct CaseVerdict {
  std::string case_id;
  Verdict verdict;
};

/// One verdict per case, any order. Throws CardinalityMismatch.
AccuracyReport aggregate(std::span<const CaseVerdict> verdicts, const BenchmarkSuite& suite);
AccuracyReport aggregate(std::span<const CaseResult> results, const BenchmarkSuite& suite);

/// Aligned text table: Correct Queries / Total Queries / Percent Correct rows
/// with Small, Medium, Large and Overall columns.
std::string render_report_text(const AccuracyReport& report);
/// Same fields as the text table, plus the per-case verdicts when given.
std::string render_report_json(const AccuracyReport& report, std::span<const CaseResult> results = {});

// ---------------------------------------------------------------------------
// Brute-force ground truth and synthetic suite generation

/// Computes the expected answer for a templated question with plain loops over
/// the table. Shares no statistics code with the executor. Throws UnknownTemplate.
GroundTruth oracle_answer(const QueryCase& qc, const Table& table);

struct GeneratorOptions {
  std::uint64_t seed = 20240601;
  std::size_t small_rows = 60;
  std::size_t medium_rows = 150;
  std::size_t large_rows = 250;
  double small_missing_rate = 0.08;
  double medium_missing_rate = 0.05;
  double large_missing_rate = 0.0;
};

struct GeneratedDataset {
  std::string id;
  std::string file_name;
  SizeCategory size;
  std::string csv;
};

struct GeneratedCase {
  QueryCase query;
  std::string gold_plan;
};

struct GeneratedSuite {
  std::vector<GeneratedDataset> datasets;
  std::vector<GeneratedCase> cases;  ///< truths filled in by oracle_answer
};

/// Three datasets (weather / sales / people; Small / Medium / Large) with ten
/// templated questions each.
GeneratedSuite generate_suite(const GeneratorOptions& options = {});

/// Writes <name>.json (manifest), <name>.script.json (gold scripted backend
/// rules) and the dataset CSVs into dir.
void write_suite(const GeneratedSuite& suite, const std::filesystem::path& dir, const std::string& name);

/// Scripted-backend rule that answers `question` on `dataset` with `plan_text`.
ScriptedBackend::Rule gold_rule(std::string_view dataset, std::string_view question, std::string plan_text);

}  // namespace dataagent
