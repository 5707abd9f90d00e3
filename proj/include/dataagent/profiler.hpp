#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dataagent/table.hpp"
#include "dataagent/tokens.hpp"

namespace dataagent {

struct NumericSummary {
  std::size_t count = 0;
  // Absent when count == 0 (std also absent when count < 2).
  std::optional<double> mean, std, min, q25, median, q75, max;
};

struct CategoricalSummary {
  std::size_t count = 0;
  std::size_t unique = 0;
  std::optional<std::string> top;  // ties broken lexicographically
  std::size_t top_freq = 0;
};

struct ColumnSummary {
  std::string name;
  std::variant<NumericSummary, CategoricalSummary> stats;
};

/// Background gathered before planning: head / schema / describe.
struct DatasetProfile {
  std::string name;
  std::size_t row_count = 0;
  Table head_rows;
  std::vector<ColumnSchema> schema;
  std::vector<ColumnSummary> describe;
};

/// First min(n, row_count) rows. n must be >= 1.
Table head(const Table& table, std::size_t n);

DatasetProfile describe(const Table& table, std::size_t head_rows = 5);

/// Rendering levels, most to least detailed. Budget fitting walks down this list.
enum class BackgroundDetail { Full, NoHead, NoQuartiles, SchemaOnly };

inline constexpr std::string_view kBackgroundVersion = "background v1";

std::string render_background(const DatasetProfile& profile, BackgroundDetail detail);

/// Most detailed rendering whose token estimate fits budget.
/// Throws BudgetTooSmall when even SchemaOnly does not fit.
std::string render_background(const DatasetProfile& profile, std::size_t budget,
                              const TokenEstimator& estimator = estimate_tokens);

}  // namespace dataagent
