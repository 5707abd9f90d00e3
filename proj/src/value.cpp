#include <fmt/format.h>

#include "dataagent/format.hpp"
#include "dataagent/value.hpp"

namespace dataagent {

namespace {

struct KindName {
  std::string_view operator()(double) const { return "Number"; }
  std::string_view operator()(const std::string&) const { return "Text"; }
  std::string_view operator()(const TextList&) const { return "TextList"; }
  std::string_view operator()(const NumberList&) const { return "NumberList"; }
  std::string_view operator()(const KeyNumberMap&) const { return "KeyNumberMap"; }
  std::string_view operator()(const TableRef&) const { return "TableRef"; }
  std::string_view operator()(const Model&) const { return "Model"; }
  std::string_view operator()(const NoneOutcome&) const { return "NoneOutcome"; }
};

struct Summary {
  std::string operator()(double v) const { return format_number(v); }
  std::string operator()(const std::string& s) const { return s; }
  std::string operator()(const TextList& xs) const { return fmt::format("[{}]", fmt::join(xs, ", ")); }
  std::string operator()(const NumberList& xs) const {
    std::vector<std::string> parts;
    for (double x : xs) parts.push_back(format_number(x));
    return fmt::format("[{}]", fmt::join(parts, ", "));
  }
  std::string operator()(const KeyNumberMap& m) const {
    std::vector<std::string> parts;
    for (const auto& [k, v] : m) parts.push_back(fmt::format("{}: {}", k, format_number(v)));
    return fmt::format("{{{}}}", fmt::join(parts, ", "));
  }
  std::string operator()(const TableRef& t) const {
    if (!t.table) return "table(empty)";
    return fmt::format("table({} rows x {} columns)", t.table->row_count(), t.table->column_count());
  }
  std::string operator()(const Model& m) const {
    return fmt::format("model(slope={}, intercept={}, r={})", format_number(m.slope), format_number(m.intercept),
                       format_number(m.r));
  }
  std::string operator()(const NoneOutcome& n) const { return fmt::format("none ({})", n.reason); }
};

}  // namespace

std::string_view kind_name(const Value& v) { return std::visit(KindName{}, v); }
std::string summarize(const Value& v) { return std::visit(Summary{}, v); }

}  // namespace dataagent
