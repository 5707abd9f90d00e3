#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "dataagent/error.hpp"
#include "dataagent/format.hpp"
#include "dataagent/table.hpp"

namespace dataagent {

namespace {

struct Field {
  std::string text;
  bool quoted = false;
};

using Record = std::vector<Field>;

struct ParsedRecord {
  Record fields;
  std::size_t line;  // 1-based line where the record starts
};

std::vector<ParsedRecord> split_records(std::string_view text) {
  std::vector<ParsedRecord> records;
  std::size_t i = 0;
  std::size_t line = 1;
  const std::size_t n = text.size();

  while (i < n) {
    // Fully blank line.
    if (text[i] == '\n' || (text[i] == '\r' && i + 1 < n && text[i + 1] == '\n')) {
      i += text[i] == '\r' ? 2 : 1;
      ++line;
      continue;
    }
    ParsedRecord rec{{}, line};
    Field field;
    bool end_of_record = false;
    while (!end_of_record) {
      if (i < n && text[i] == '"') {
        field.quoted = true;
        ++i;
        bool closed = false;
        while (i < n) {
          char c = text[i];
          if (c == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              field.text += '"';
              i += 2;
            } else {
              ++i;
              closed = true;
              break;
            }
          } else {
            if (c == '\n') ++line;
            field.text += c;
            ++i;
          }
        }
        if (!closed) throw Error(Errc::MalformedCsv, "unterminated quoted field starting on line " + std::to_string(rec.line));
        // Only a delimiter or end of record may follow a closing quote.
        if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
          throw Error(Errc::MalformedCsv, "unexpected character after closing quote on line " + std::to_string(line));
      } else {
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"')
            throw Error(Errc::MalformedCsv, "stray quote in unquoted field on line " + std::to_string(line));
          field.text += text[i++];
        }
      }
      if (i >= n) {
        end_of_record = true;
      } else if (text[i] == ',') {
        ++i;
      } else {
        if (text[i] == '\r') ++i;
        if (i < n && text[i] == '\n') ++i;
        ++line;
        end_of_record = true;
      }
      rec.fields.push_back(std::move(field));
      field = Field{};
    }
    records.push_back(std::move(rec));
  }
  return records;
}

bool field_empty(const Field& f) { return trim(f.text).empty(); }

}  // namespace

std::optional<double> parse_number(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') {
    negative = s[i] == '-';
    ++i;
  }
  std::string_view body = s.substr(i);
  if (body.empty()) return std::nullopt;
  std::size_t digits = 0;
  std::size_t dots = 0;
  for (char c : body) {
    if (c >= '0' && c <= '9') {
      ++digits;
    } else if (c == '.') {
      ++dots;
    } else {
      return std::nullopt;
    }
  }
  if (digits == 0 || dots > 1) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value, std::chars_format::fixed);
  if (ec != std::errc() || ptr != body.data() + body.size() || !std::isfinite(value)) return std::nullopt;
  return negative ? -value : value;
}

DType infer_dtype(std::span<const std::string> raw_cells) {
  if (raw_cells.empty()) return DType::Categorical;
  for (const std::string& cell : raw_cells)
    if (!parse_number(cell)) return DType::Categorical;
  return DType::Numeric;
}

Table load_csv(std::string_view text, std::string name, const LoadOptions& options) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<ParsedRecord> records = split_records(text);
  if (records.empty()) throw Error(Errc::EmptyInput, "no header row");

  const Record& header = records.front().fields;
  std::vector<std::string> names;
  std::set<std::string, std::less<>> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::string col(trim(header[c].text));
    if (col.empty()) throw Error(Errc::BadHeader, "column " + std::to_string(c + 1) + " has an empty name");
    if (!seen.insert(col).second) throw Error(Errc::DuplicateHeader, col);
    names.push_back(std::move(col));
  }

  const std::size_t width = names.size();
  const std::size_t rows = records.size() - 1;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != width)
      throw Error(Errc::RaggedRow, "row " + std::to_string(r) + " (line " + std::to_string(records[r].line) + ") has " +
                                       std::to_string(records[r].fields.size()) + " fields, expected " +
                                       std::to_string(width));
  }

  std::vector<Column> columns;
  columns.reserve(width);
  for (std::size_t c = 0; c < width; ++c) {
    std::vector<std::string> present;
    for (std::size_t r = 1; r < records.size(); ++r)
      if (!field_empty(records[r].fields[c])) present.push_back(records[r].fields[c].text);

    DType dtype;
    if (auto forced = options.dtypes.find(names[c]); forced != options.dtypes.end()) {
      dtype = forced->second;
    } else {
      dtype = infer_dtype(present);
    }

    std::vector<Cell> cells;
    cells.reserve(rows);
    for (std::size_t r = 1; r < records.size(); ++r) {
      const Field& f = records[r].fields[c];
      if (field_empty(f)) {
        cells.emplace_back(Missing{});
      } else if (dtype == DType::Numeric) {
        if (auto v = parse_number(f.text)) {
          cells.emplace_back(*v);
        } else if (options.policy == LoadPolicy::Lenient) {
          cells.emplace_back(Missing{});
        } else {
          throw Error(Errc::BadCell, "row " + std::to_string(r) + ", column '" + names[c] + "': '" + f.text +
                                         "' is not a number");
        }
      } else {
        cells.emplace_back(std::string(trim(f.text)));
      }
    }
    columns.emplace_back(names[c], dtype, std::move(cells));
  }
  return Table(std::move(name), std::move(columns));
}

Table load_csv(std::istream& source, std::string name, const LoadOptions& options) {
  std::string text((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  return load_csv(std::string_view(text), std::move(name), options);
}

Table load_csv_file(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingDataset, path.string());
  return load_csv(in, path.stem().string(), options);
}

}  // namespace dataagent
