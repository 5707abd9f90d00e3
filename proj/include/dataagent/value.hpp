#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "dataagent/table.hpp"

namespace dataagent {

using TextList = std::vector<std::string>;
using NumberList = std::vector<double>;
using KeyNumberMap = std::map<std::string, double, std::less<>>;

/// A derived table held by a step result (FILTER, HEAD).
struct TableRef {
  std::shared_ptr<const Table> table;

  bool operator==(const TableRef& other) const {
    return table == other.table || (table && other.table && *table == *other.table);
  }
};

/// y = slope * x + intercept, with r the Pearson correlation of the fit data.
struct Model {
  double slope = 0;
  double intercept = 0;
  double r = 0;
  std::size_t n = 0;

  bool operator==(const Model&) const = default;
};

/// An explicit "there is no answer", e.g. most-missing column on a complete table.
struct NoneOutcome {
  std::string reason;

  bool operator==(const NoneOutcome&) const = default;
};

using Value = std::variant<double, std::string, TextList, NumberList, KeyNumberMap, TableRef, Model, NoneOutcome>;

std::string_view kind_name(const Value& v);

/// One-line human summary used in traces and CLI output.
std::string summarize(const Value& v);

}  // namespace dataagent
