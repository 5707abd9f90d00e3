#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dataagent {

struct Missing {
  bool operator==(const Missing&) const = default;
};

/// Number(real) | Text(text) | Missing. Numbers are always finite.
using Cell = std::variant<Missing, double, std::string>;

enum class DType { Numeric, Categorical };

enum class SizeCategory { Small, Medium, Large };

std::string_view to_string(DType dtype);
std::string_view to_string(SizeCategory size);
std::optional<SizeCategory> parse_size_category(std::string_view text);

class Column {
 public:
  /// Throws InvalidArgument if a non-missing cell does not conform to dtype.
  Column(std::string name, DType dtype, std::vector<Cell> cells);

  const std::string& name() const noexcept { return name_; }
  DType dtype() const noexcept { return dtype_; }
  bool numeric() const noexcept { return dtype_ == DType::Numeric; }
  std::span<const Cell> cells() const noexcept { return cells_; }
  std::size_t size() const noexcept { return cells_.size(); }
  const Cell& operator[](std::size_t row) const { return cells_[row]; }

  bool is_missing(std::size_t row) const { return std::holds_alternative<Missing>(cells_[row]); }
  std::size_t missing_count() const noexcept { return missing_; }
  std::size_t present_count() const noexcept { return cells_.size() - missing_; }

  /// Value at row for numeric columns; nullopt when missing.
  std::optional<double> number(std::size_t row) const;
  /// Value at row for categorical columns; nullptr when missing.
  const std::string* text(std::size_t row) const;

  /// Non-missing numeric values in row order.
  std::vector<double> numbers() const;

  bool operator==(const Column&) const = default;

 private:
  std::string name_;
  DType dtype_;
  std::vector<Cell> cells_;
  std::size_t missing_ = 0;
};

struct ColumnSchema {
  std::string name;
  DType dtype;
  std::size_t non_missing;

  bool operator==(const ColumnSchema&) const = default;
};

/// Immutable columnar dataset. Derived results (row subsets) are new tables.
class Table {
 public:
  Table() = default;
  /// Throws InvalidArgument on ragged columns, empty or duplicate names.
  Table(std::string name, std::vector<Column> columns);

  const std::string& name() const noexcept { return name_; }
  std::span<const Column> columns() const noexcept { return columns_; }
  std::size_t row_count() const noexcept { return rows_; }
  std::size_t column_count() const noexcept { return columns_.size(); }

  const Column* find(std::string_view column) const;
  /// Throws UnknownColumn.
  const Column& column(std::string_view column) const;

  std::vector<ColumnSchema> schema() const;

  /// New table holding the given rows, in the given order.
  Table take_rows(std::span<const std::size_t> rows) const;
  Table head(std::size_t n) const;

  bool operator==(const Table&) const = default;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

enum class LoadPolicy {
  Strict,   ///< a Numeric-typed cell that fails to parse is a BadCell error
  Lenient,  ///< ... is coerced to Missing
};

struct LoadOptions {
  LoadPolicy policy = LoadPolicy::Strict;
  /// Forces a dtype for the named columns instead of inferring it.
  std::map<std::string, DType, std::less<>> dtypes;
};

/// Parses a real number: optional sign, integer or decimal, surrounding
/// whitespace allowed. No exponents, thousands separators, inf or nan.
std::optional<double> parse_number(std::string_view text);

/// Numeric iff every cell parses as a number and there is at least one cell.
DType infer_dtype(std::span<const std::string> raw_cells);

/// RFC 4180 CSV with a header row. Empty fields (quoted or not) are Missing.
/// Fully blank lines are skipped.
Table load_csv(std::istream& source, std::string name, const LoadOptions& options = {});
Table load_csv(std::string_view text, std::string name, const LoadOptions& options = {});
Table load_csv_file(const std::filesystem::path& path, const LoadOptions& options = {});

SizeCategory size_category(std::size_t row_count);
inline SizeCategory size_category(const Table& table) { return size_category(table.row_count()); }

}  // namespace dataagent
