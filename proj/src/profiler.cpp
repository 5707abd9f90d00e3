#include "dataagent/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "dataagent/error.hpp"
#include "dataagent/format.hpp"
#include "dataagent/stats.hpp"

namespace dataagent {

std::size_t estimate_tokens(std::string_view text) {
  std::size_t chars = 0;
  for (unsigned char c : text)
    if ((c & 0xC0) != 0x80) ++chars;  // count UTF-8 code points
  return (chars + 3) / 4;
}

Table head(const Table& table, std::size_t n) {
  if (n == 0) throw Error(Errc::InvalidArgument, "head: n must be >= 1");
  return table.head(n);
}

namespace {

NumericSummary summarize_numeric(const Column& column) {
  NumericSummary s;
  std::vector<double> xs = column.numbers();
  s.count = xs.size();
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  s.mean = stats::mean(xs);
  if (xs.size() >= 2) s.std = std::sqrt(stats::sample_variance(xs));
  s.min = xs.front();
  s.max = xs.back();
  s.q25 = stats::quantile_sorted(xs, 0.25);
  s.median = stats::quantile_sorted(xs, 0.5);
  s.q75 = stats::quantile_sorted(xs, 0.75);
  return s;
}

CategoricalSummary summarize_categorical(const Column& column) {
  CategoricalSummary s;
  std::map<std::string, std::size_t> counts;
  for (std::size_t r = 0; r < column.size(); ++r)
    if (const std::string* t = column.text(r)) {
      ++counts[*t];
      ++s.count;
    }
  s.unique = counts.size();
  // std::map iterates in lexicographic order, so the first maximum wins ties.
  for (const auto& [value, n] : counts) {
    if (n > s.top_freq) {
      s.top = value;
      s.top_freq = n;
    }
  }
  return s;
}

std::string cell_text(const Cell& cell) {
  if (const double* v = std::get_if<double>(&cell)) return format_number(*v);
  if (const std::string* t = std::get_if<std::string>(&cell)) return *t;
  return "";
}

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

}  // namespace

DatasetProfile describe(const Table& table, std::size_t head_rows) {
  DatasetProfile p;
  p.name = table.name();
  p.row_count = table.row_count();
  p.head_rows = table.head(head_rows);
  p.schema = table.schema();
  for (const Column& c : table.columns()) {
    if (c.numeric())
      p.describe.push_back({c.name(), summarize_numeric(c)});
    else
      p.describe.push_back({c.name(), summarize_categorical(c)});
  }
  return p;
}

std::string render_background(const DatasetProfile& p, BackgroundDetail detail) {
  std::string out;
  out += fmt::format("[{}]\n", kBackgroundVersion);
  out += fmt::format("dataset: {}, {} rows x {} columns\n", p.name, p.row_count, p.schema.size());
  out += "columns (name:num|cat/non-missing):";
  for (const ColumnSchema& s : p.schema)
    out += fmt::format(" {}:{}/{}", s.name, s.dtype == DType::Numeric ? "num" : "cat", s.non_missing);
  out += "\n";

  if (detail == BackgroundDetail::Full) {
    out += fmt::format("head (first {} rows):\n", p.head_rows.row_count());
    std::vector<std::string> names;
    for (const Column& c : p.head_rows.columns()) names.push_back(c.name());
    out += fmt::format("{}\n", fmt::join(names, " | "));
    for (std::size_t r = 0; r < p.head_rows.row_count(); ++r) {
      std::vector<std::string> cells;
      for (const Column& c : p.head_rows.columns()) cells.push_back(cell_text(c[r]));
      out += fmt::format("{}\n", fmt::join(cells, " | "));
    }
  }

  if (detail != BackgroundDetail::SchemaOnly) {
    out += "summary:\n";
    const bool quartiles = detail == BackgroundDetail::Full || detail == BackgroundDetail::NoHead;
    for (const ColumnSummary& cs : p.describe) {
      if (const auto* n = std::get_if<NumericSummary>(&cs.stats)) {
        out += fmt::format("{}: count={} mean={} std={} min={}", cs.name, n->count, opt(n->mean), opt(n->std),
                           opt(n->min));
        if (quartiles)
          out += fmt::format(" q25={} median={} q75={}", opt(n->q25), opt(n->median), opt(n->q75));
        out += fmt::format(" max={}\n", opt(n->max));
      } else {
        const auto& c = std::get<CategoricalSummary>(cs.stats);
        out += fmt::format("{}: count={} unique={} top={} freq={}\n", cs.name, c.count, c.unique,
                           c.top ? *c.top : "NA", c.top_freq);
      }
    }
  }
  return out;
}

std::string render_background(const DatasetProfile& profile, std::size_t budget, const TokenEstimator& estimator) {
  if (budget == 0) throw Error(Errc::InvalidArgument, "budget must be positive");
  for (BackgroundDetail d : {BackgroundDetail::Full, BackgroundDetail::NoHead, BackgroundDetail::NoQuartiles,
                             BackgroundDetail::SchemaOnly}) {
    std::string text = render_background(profile, d);
    if (estimator(text) <= budget) return text;
  }
  throw Error(Errc::BudgetTooSmall, fmt::format("schema-only background needs {} tokens, budget is {}",
                                                estimator(render_background(profile, BackgroundDetail::SchemaOnly)),
                                                budget));
}

}  // namespace dataagent
