#include <algorithm>
#include <cmath>
#include <map>
#include <regex>

#include <fmt/format.h>

#include "dataagent/format.hpp"
#include "dataagent/harness.hpp"

// Plain-loop ground truth for the templated benchmark questions. Deliberately
// independent of executor.cpp and stats.cpp.

namespace dataagent {

namespace {

const std::string kCol = R"(([A-Za-z_][A-Za-z0-9_]*))";
const std::string kStat = "(mean|median|standard deviation|variance|minimum|maximum|sum|range)";
const std::string kCmp = R"((>=|<=|==|!=|>|<))";
const std::string kLit = R"((-?[0-9]+(?:\.[0-9]+)?|"[^"]*"))";
const std::string kNum = R"((-?[0-9]+(?:\.[0-9]+)?))";

struct Oracle {
  const Table& t;

  [[noreturn]] static void expect_error(Errc code) { throw code; }

  const Column& col(const std::string& name) const {
    const Column* c = t.find(name);
    if (!c) expect_error(Errc::UnknownColumn);
    return *c;
  }

  std::vector<double> present(const Column& c) const {
    std::vector<double> xs;
    for (std::size_t r = 0; r < c.size(); ++r)
      if (const double* v = std::get_if<double>(&c[r])) xs.push_back(*v);
    return xs;
  }

  void need(std::size_t have, std::size_t want) const {
    if (have >= want) return;
    expect_error(t.row_count() == 0 ? Errc::EmptyResult : Errc::InsufficientData);
  }

  GroundTruth stat(const std::string& kind, const Column& c) const {
    bool numeric_only = kind == "mean" || kind == "median" || kind == "standard deviation" || kind == "variance" ||
                        kind == "sum" || kind == "range";
    if (!c.numeric()) {
      if (numeric_only) expect_error(Errc::DtypeMismatch);
      std::vector<std::string> xs;
      for (std::size_t r = 0; r < c.size(); ++r)
        if (const std::string* s = std::get_if<std::string>(&c[r])) xs.push_back(*s);
      need(xs.size(), 1);
      std::string best = xs[0];
      for (const std::string& s : xs)
        if (kind == "minimum" ? s < best : s > best) best = s;
      return GroundTruth::of_text(best);
    }
    std::vector<double> xs = present(c);
    need(xs.size(), kind == "standard deviation" || kind == "variance" ? 2 : 1);
    double total = 0;
    for (double x : xs) total += x;
    double mean = total / static_cast<double>(xs.size());
    double lo = xs[0], hi = xs[0];
    for (double x : xs) lo = std::min(lo, x), hi = std::max(hi, x);
    if (kind == "mean") return GroundTruth::of_number(mean);
    if (kind == "sum") return GroundTruth::of_number(total);
    if (kind == "minimum") return GroundTruth::of_number(lo);
    if (kind == "maximum") return GroundTruth::of_number(hi);
    if (kind == "range") return GroundTruth::of_number(hi - lo);
    if (kind == "median") {
      std::sort(xs.begin(), xs.end());
      std::size_t n = xs.size();
      return GroundTruth::of_number(n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2);
    }
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    double var = ss / static_cast<double>(xs.size() - 1);
    return GroundTruth::of_number(kind == "variance" ? var : std::sqrt(var));
  }

  std::vector<std::size_t> filter(const std::string& name, const std::string& cmp, const std::string& lit) const {
    const Column& c = col(name);
    bool quoted = lit.front() == '"';
    if (c.numeric() == quoted) expect_error(Errc::DtypeMismatch);
    if (quoted && cmp != "==" && cmp != "!=") expect_error(Errc::DtypeMismatch);
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < c.size(); ++r) {
      bool keep = false;
      if (const double* v = std::get_if<double>(&c[r])) {
        double x = std::stod(lit);
        keep = cmp == ">" ? *v > x : cmp == "<" ? *v < x : cmp == ">=" ? *v >= x : cmp == "<=" ? *v <= x
             : cmp == "==" ? *v == x : *v != x;
      } else if (const std::string* s = std::get_if<std::string>(&c[r])) {
        std::string x = lit.substr(1, lit.size() - 2);
        keep = cmp == "==" ? *s == x : *s != x;
      }
      if (keep) rows.push_back(r);
    }
    return rows;
  }

  static GroundTruth cell_truth(const Cell& cell) {
    if (const double* v = std::get_if<double>(&cell)) return GroundTruth::of_number(*v);
    if (const std::string* s = std::get_if<std::string>(&cell)) return GroundTruth::of_text(*s);
    return GroundTruth::none();
  }

  GroundTruth arg_extreme(const std::string& ret_name, bool highest, const std::string& key_name) const {
    const Column& key = col(key_name);
    const Column& ret = col(ret_name);
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < key.size(); ++r) {
      if (key.is_missing(r)) continue;
      if (!best) {
        best = r;
        continue;
      }
      const Cell &a = key[r], &b = key[*best];
      bool better;
      if (key.numeric())
        better = highest ? std::get<double>(a) > std::get<double>(b) : std::get<double>(a) < std::get<double>(b);
      else
        better = highest ? std::get<std::string>(a) > std::get<std::string>(b)
                         : std::get<std::string>(a) < std::get<std::string>(b);
      if (better) best = r;
    }
    need(best ? 1 : 0, 1);
    return cell_truth(ret[*best]);
  }

  static std::string key_of(const Cell& cell) {
    if (const double* v = std::get_if<double>(&cell)) return format_number(*v);
    return std::get<std::string>(cell);
  }

  static GroundTruth keys_at_extreme(const std::map<std::string, double>& m, bool highest) {
    if (m.empty()) return GroundTruth::none();
    double e = m.begin()->second;
    for (const auto& [k, v] : m) e = highest ? std::max(e, v) : std::min(e, v);
    TextList keys;
    for (const auto& [k, v] : m)
      if (v == e) keys.push_back(k);
    if (keys.size() == 1) return GroundTruth::of_text(keys[0]);
    return GroundTruth::of_texts(keys);
  }

  GroundTruth answer(const std::string& q) const {
    std::smatch m;
    auto is = [&](const std::string& pattern) { return std::regex_match(q, m, std::regex(pattern)); };

    if (is(R"(How many rows are in the dataset\?)")) return GroundTruth::of_number(static_cast<double>(t.row_count()));
    if (is(R"(How many columns are in the dataset\?)"))
      return GroundTruth::of_number(static_cast<double>(t.column_count()));
    if (is("What is the " + kStat + " of " + kCol + R"(\?)")) return stat(m[1], col(m[2]));
    if (is("What is the " + kStat + " of " + kCol + " where " + kCol + " " + kCmp + " " + kLit + R"(\?)")) {
      std::string kind = m[1], target = m[2];
      (void)col(target);
      Table sub = t.take_rows(filter(m[3], m[4], m[5]));
      return Oracle{sub}.stat(kind, sub.column(target));
    }
    if (is("What is the " + kStat + " of " + kCol + " and which " + kCol + " has the (highest|lowest) " + kCol + R"(\?)")) {
      std::string kind = m[1], target = m[2], ret = m[3], mode = m[4], key = m[5];
      return GroundTruth::of_parts({stat(kind, col(target)), arg_extreme(ret, mode == "highest", key)});
    }
    if (is("How many unique values does " + kCol + R"( have\?)")) {
      const Column& c = col(m[1]);
      std::vector<std::string> seen;
      for (std::size_t r = 0; r < c.size(); ++r) {
        if (c.is_missing(r)) continue;
        std::string k = key_of(c[r]);
        if (std::find(seen.begin(), seen.end(), k) == seen.end()) seen.push_back(k);
      }
      return GroundTruth::of_number(static_cast<double>(seen.size()));
    }
    if (is("What is the most common value of " + kCol + R"(\?)")) {
      const Column& c = col(m[1]);
      std::optional<std::size_t> best;
      std::size_t best_n = 0;
      for (std::size_t r = 0; r < c.size(); ++r) {
        if (c.is_missing(r)) continue;
        std::size_t n = 0;
        for (std::size_t s = 0; s < c.size(); ++s) n += c[s] == c[r];
        bool smaller = best && (c.numeric() ? std::get<double>(c[r]) < std::get<double>(c[*best])
                                            : std::get<std::string>(c[r]) < std::get<std::string>(c[*best]));
        if (n > best_n || (n == best_n && smaller)) best = r, best_n = n;
      }
      need(best ? 1 : 0, 1);
      return cell_truth(c[*best]);
    }
    if (is("How many missing values does " + kCol + R"( have\?)")) {
      const Column& c = col(m[1]);
      std::size_t n = 0;
      for (std::size_t r = 0; r < c.size(); ++r) n += c.is_missing(r);
      return GroundTruth::of_number(static_cast<double>(n));
    }
    if (is(R"(Which column has the most missing values\?)")) {
      std::map<std::string, double> counts;
      for (const Column& c : t.columns()) {
        std::size_t n = 0;
        for (std::size_t r = 0; r < c.size(); ++r) n += c.is_missing(r);
        if (n > 0) counts[c.name()] = static_cast<double>(n);
      }
      return keys_at_extreme(counts, true);
    }
    if (is("What is the correlation between " + kCol + " and " + kCol + R"(\?)")) {
      const Column& x = col(m[1]);
      const Column& y = col(m[2]);
      if (!x.numeric() || !y.numeric()) expect_error(Errc::DtypeMismatch);
      std::vector<double> xs, ys;
      for (std::size_t r = 0; r < x.size(); ++r)
        if (!x.is_missing(r) && !y.is_missing(r)) xs.push_back(std::get<double>(x[r])), ys.push_back(std::get<double>(y[r]));
      need(xs.size(), 2);
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
      mx /= static_cast<double>(xs.size());
      my /= static_cast<double>(ys.size());
      double sxy = 0, sxx = 0, syy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
      }
      if (sxx == 0 || syy == 0) expect_error(Errc::ZeroVariance);
      return GroundTruth::of_number(std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0));
    }
    if (is("How many rows have " + kCol + " " + kCmp + " " + kLit + R"(\?)"))
      return GroundTruth::of_number(static_cast<double>(filter(m[1], m[2], m[3]).size()));
    if (is("Which " + kCol + " has the (highest|lowest) average " + kCol + R"(\?)")) {
      const Column& by = col(m[1]);
      const Column& target = col(m[3]);
      if (!target.numeric()) expect_error(Errc::DtypeMismatch);
      std::map<std::string, std::pair<double, double>> acc;
      for (std::size_t r = 0; r < by.size(); ++r) {
        if (by.is_missing(r) || target.is_missing(r)) continue;
        auto& [s, n] = acc[key_of(by[r])];
        s += std::get<double>(target[r]);
        n += 1;
      }
      std::map<std::string, double> means;
      for (const auto& [k, sn] : acc) means[k] = sn.first / sn.second;
      return keys_at_extreme(means, m[2] == "highest");
    }
    if (is("Which " + kCol + " has the (highest|lowest) " + kCol + R"(\?)")) return arg_extreme(m[1], m[2] == "highest", m[3]);
    if (is("What is the predicted " + kCol + " for " + kCol + " = " + kNum + R"( using a linear regression\?)")) {
      const Column& y = col(m[1]);
      const Column& x = col(m[2]);
      if (!x.numeric() || !y.numeric()) expect_error(Errc::DtypeMismatch);
      double x0 = std::stod(m[3]);
      double n = 0, sx = 0, sy = 0;
      for (std::size_t r = 0; r < x.size(); ++r)
        if (!x.is_missing(r) && !y.is_missing(r)) n += 1, sx += std::get<double>(x[r]), sy += std::get<double>(y[r]);
      need(static_cast<std::size_t>(n), 2);
      double mx = sx / n, my = sy / n, sxy = 0, sxx = 0, syy = 0;
      for (std::size_t r = 0; r < x.size(); ++r) {
        if (x.is_missing(r) || y.is_missing(r)) continue;
        double dx = std::get<double>(x[r]) - mx, dy = std::get<double>(y[r]) - my;
        sxy += dx * dy, sxx += dx * dx, syy += dy * dy;
      }
      if (sxx == 0 || syy == 0) expect_error(Errc::ZeroVariance);
      double slope = sxy / sxx;
      return GroundTruth::of_number(my - slope * mx + slope * x0);
    }
    if (is(R"(What are the top ([0-9]+) values of )" + kCol + " by " + kCol + R"(\?)")) {
      std::size_t k = std::stoul(m[1]);
      const Column& ret = col(m[2]);
      const Column& key = col(m[3]);
      std::vector<std::size_t> rows;
      for (std::size_t r = 0; r < key.size(); ++r)
        if (!key.is_missing(r) && !ret.is_missing(r)) rows.push_back(r);
      // Selection by repeated scans; earliest row wins ties.
      std::vector<std::size_t> picked;
      std::vector<bool> used(rows.size(), false);
      while (picked.size() < k && picked.size() < rows.size()) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (used[i]) continue;
          if (!best) {
            best = i;
            continue;
          }
          const Cell &a = key[rows[i]], &b = key[rows[*best]];
          bool greater = key.numeric() ? std::get<double>(a) > std::get<double>(b)
                                       : std::get<std::string>(a) > std::get<std::string>(b);
          if (greater) best = i;
        }
        used[*best] = true;
        picked.push_back(rows[*best]);
      }
      if (ret.numeric()) {
        NumberList xs;
        for (std::size_t r : picked) xs.push_back(std::get<double>(ret[r]));
        return GroundTruth::of_numbers(xs);
      }
      TextList xs;
      for (std::size_t r : picked) xs.push_back(std::get<std::string>(ret[r]));
      return GroundTruth::of_texts(xs);
    }
    throw Error(Errc::UnknownTemplate, fmt::format("no oracle template matches '{}'", q));
  }
};

}  // namespace

GroundTruth oracle_answer(const QueryCase& qc, const Table& table) {
  try {
    return Oracle{table}.answer(qc.question);
  } catch (Errc code) {
    return GroundTruth::error(std::string(label(code)));
  }
}

}  // namespace dataagent
