#include <fmt/format.h>
#include <json.hpp>

#include "dataagent/harness.hpp"
#include "dataagent/json_io.hpp"

namespace dataagent {

namespace {

constexpr std::array<SizeCategory, 3> kSizes{SizeCategory::Small, SizeCategory::Medium, SizeCategory::Large};

}  // namespace

std::string render_report_text(const AccuracyReport& report) {
  std::vector<std::string> header{"", "Small", "Medium", "Large", "Overall"};
  std::vector<std::vector<std::string>> rows(3);
  rows[0].push_back("Correct Queries");
  rows[1].push_back("Total Queries");
  rows[2].push_back("Percent Correct");
  auto add = [&](const BucketStats& b) {
    rows[0].push_back(std::to_string(b.correct));
    rows[1].push_back(std::to_string(b.total));
    rows[2].push_back(b.percent_text());
  };
  for (SizeCategory s : kSizes) add(report.bucket(s));
  add(report.overall);

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string l = fmt::format("{:<{}}", cells[0], width[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) l += fmt::format("  {:>{}}", cells[c], width[c]);
    out += l + "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string render_report_json(const AccuracyReport& report, std::span<const CaseResult> results) {
  auto bucket = [](const BucketStats& b) {
    nlohmann::json j = {{"correct", b.correct}, {"total", b.total}};
    if (auto bp = b.basis_points())
      j["percent"] = b.percent_text();
    else
      j["percent"] = nullptr;
    return j;
  };
  nlohmann::ordered_json j;
  nlohmann::json buckets = nlohmann::json::object();
  for (SizeCategory s : kSizes) buckets[std::string(to_string(s))] = bucket(report.bucket(s));
  j["buckets"] = buckets;
  j["overall"] = bucket(report.overall);
  if (!results.empty()) {
    nlohmann::json verdicts = nlohmann::json::array();
    for (const CaseResult& r : results)
      verdicts.push_back({{"case_id", r.case_id},
                          {"correct", r.verdict.correct},
                          {"reason", r.verdict.reason},
                          {"answer", r.answer}});
    j["verdicts"] = verdicts;
  }
  return j.dump(2) + "\n";
}

}  // namespace dataagent
