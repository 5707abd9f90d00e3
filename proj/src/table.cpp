#include "dataagent/table.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "dataagent/error.hpp"

namespace dataagent {

std::string_view to_string(DType dtype) {
  return dtype == DType::Numeric ? "numeric" : "categorical";
}

std::string_view to_string(SizeCategory size) {
  switch (size) {
    case SizeCategory::Small: return "Small";
    case SizeCategory::Medium: return "Medium";
    case SizeCategory::Large: return "Large";
  }
  return "Small";
}

std::optional<SizeCategory> parse_size_category(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "small") return SizeCategory::Small;
  if (lower == "medium") return SizeCategory::Medium;
  if (lower == "large") return SizeCategory::Large;
  return std::nullopt;
}

Column::Column(std::string name, DType dtype, std::vector<Cell> cells)
    : name_(std::move(name)), dtype_(dtype), cells_(std::move(cells)) {
  for (const Cell& cell : cells_) {
    if (std::holds_alternative<Missing>(cell)) {
      ++missing_;
    } else if (dtype_ == DType::Numeric) {
      const double* v = std::get_if<double>(&cell);
      if (v == nullptr || !std::isfinite(*v))
        throw Error(Errc::InvalidArgument, "column '" + name_ + "': non-finite or text cell in numeric column");
    } else if (!std::holds_alternative<std::string>(cell)) {
      throw Error(Errc::InvalidArgument, "column '" + name_ + "': number cell in categorical column");
    }
  }
}

std::optional<double> Column::number(std::size_t row) const {
  if (const double* v = std::get_if<double>(&cells_[row])) return *v;
  return std::nullopt;
}

const std::string* Column::text(std::size_t row) const {
  return std::get_if<std::string>(&cells_[row]);
}

std::vector<double> Column::numbers() const {
  std::vector<double> out;
  out.reserve(present_count());
  for (const Cell& cell : cells_)
    if (const double* v = std::get_if<double>(&cell)) out.push_back(*v);
  return out;
}

Table::Table(std::string name, std::vector<Column> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {
  std::set<std::string_view> seen;
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (const Column& c : columns_) {
    if (c.name().empty()) throw Error(Errc::InvalidArgument, "empty column name");
    if (!seen.insert(c.name()).second) throw Error(Errc::InvalidArgument, "duplicate column '" + c.name() + "'");
    if (c.size() != rows_) throw Error(Errc::InvalidArgument, "column '" + c.name() + "' has wrong length");
  }
}

const Column* Table::find(std::string_view column) const {
  for (const Column& c : columns_)
    if (c.name() == column) return &c;
  return nullptr;
}

const Column& Table::column(std::string_view column) const {
  if (const Column* c = find(column)) return *c;
  throw Error(Errc::UnknownColumn, std::string(column));
}

std::vector<ColumnSchema> Table::schema() const {
  std::vector<ColumnSchema> out;
  out.reserve(columns_.size());
  for (const Column& c : columns_) out.push_back({c.name(), c.dtype(), c.present_count()});
  return out;
}

Table Table::take_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const Column& c : columns_) {
    std::vector<Cell> cells;
    cells.reserve(rows.size());
    for (std::size_t r : rows) cells.push_back(c[r]);
    cols.emplace_back(c.name(), c.dtype(), std::move(cells));
  }
  return Table(name_, std::move(cols));
}

Table Table::head(std::size_t n) const {
  std::vector<std::size_t> rows(std::min(n, rows_));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return take_rows(rows);
}

SizeCategory size_category(std::size_t row_count) {
  if (row_count < 100) return SizeCategory::Small;
  if (row_count <= 200) return SizeCategory::Medium;
  return SizeCategory::Large;
}

}  // namespace dataagent
