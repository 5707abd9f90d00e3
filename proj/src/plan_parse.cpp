#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "dataagent/format.hpp"
#include "dataagent/plan.hpp"

namespace dataagent {

namespace {

enum class Tok { Ident, Number, Quoted, LParen, RParen, Comma, Assign, Cmp, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0;
  CmpOp cmp = CmpOp::Eq;
};

[[noreturn]] void syntax(std::string_view why) { throw Error(Errc::SyntaxError, std::string(why)); }

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == ' ' || c == '\t') {
      ++i;
    } else if (ident_start(c)) {
      std::size_t b = i;
      while (i < s.size() && ident_char(s[i])) ++i;
      out.push_back({Tok::Ident, std::string(s.substr(b, i - b))});
    } else if (digit(c) || c == '.' || ((c == '-' || c == '+') && i + 1 < s.size() && (digit(s[i + 1]) || s[i + 1] == '.'))) {
      std::size_t b = i;
      if (c == '-' || c == '+') ++i;
      while (i < s.size() && (digit(s[i]) || s[i] == '.')) ++i;
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
        while (i < s.size() && digit(s[i])) ++i;
      }
      std::string_view lit = s.substr(b, i - b);
      std::string_view body = lit[0] == '+' ? lit.substr(1) : lit;
      double v = 0;
      auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
      if (ec != std::errc() || ptr != body.data() + body.size() || !std::isfinite(v))
        syntax(fmt::format("bad number '{}'", lit));
      out.push_back({Tok::Number, std::string(lit), v});
    } else if (c == '"') {
      ++i;
      std::string text;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == '\\' && i + 1 < s.size()) {
          text += s[i + 1];
          i += 2;
        } else if (s[i] == '"') {
          ++i;
          closed = true;
          break;
        } else {
          text += s[i++];
        }
      }
      if (!closed) syntax("unterminated string literal");
      out.push_back({Tok::Quoted, std::move(text)});
    } else if (c == '(') {
      out.push_back({Tok::LParen, "("});
      ++i;
    } else if (c == ')') {
      out.push_back({Tok::RParen, ")"});
      ++i;
    } else if (c == ',') {
      out.push_back({Tok::Comma, ","});
      ++i;
    } else if (c == '=' || c == '!' || c == '<' || c == '>') {
      char next = i + 1 < s.size() ? s[i + 1] : '\0';
      Token t{Tok::Cmp, ""};
      if (c == '=' && next == '=') {
        t.cmp = CmpOp::Eq, t.text = "==", i += 2;
      } else if (c == '=') {
        t.kind = Tok::Assign, t.text = "=", i += 1;
      } else if (c == '!' && next == '=') {
        t.cmp = CmpOp::Ne, t.text = "!=", i += 2;
      } else if (c == '>' && next == '=') {
        t.cmp = CmpOp::Ge, t.text = ">=", i += 2;
      } else if (c == '<' && next == '=') {
        t.cmp = CmpOp::Le, t.text = "<=", i += 2;
      } else if (c == '>') {
        t.cmp = CmpOp::Gt, t.text = ">", i += 1;
      } else if (c == '<') {
        t.cmp = CmpOp::Lt, t.text = "<", i += 1;
      } else {
        syntax("unexpected '!'");
      }
      out.push_back(std::move(t));
    } else {
      syntax(fmt::format("unexpected character '{}'", c));
    }
  }
  out.push_back({Tok::End, ""});
  return out;
}

/// A parsed argument value: a single token or a predicate chain.
struct ArgValue {
  std::vector<Token> tokens;
};

class OpParser {
 public:
  explicit OpParser(std::string_view text) : toks_(tokenize(text)) {}

  OpExpr parse() {
    const Token& name = expect(Tok::Ident, "operation name");
    std::string op = name.text;
    expect(Tok::LParen, "'('");
    std::map<std::string, ArgValue> args;
    std::vector<std::string> order;
    if (peek().kind != Tok::RParen) {
      while (true) {
        const Token& key = expect(Tok::Ident, "argument key");
        expect(Tok::Assign, "'=' after argument key");
        if (args.count(key.text)) throw Error(Errc::BadArg, fmt::format("{}: duplicate key '{}'", op, key.text));
        args[key.text] = read_value();
        order.push_back(key.text);
        if (peek().kind == Tok::Comma) {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect(Tok::RParen, "')'");
    Source source = read_source();
    if (peek().kind != Tok::End) syntax(fmt::format("unexpected '{}' after source", peek().text));
    return {build(op, args), source};
  }

 private:
  const Token& peek() const { return toks_[pos_]; }

  const Token& expect(Tok kind, std::string_view what) {
    if (toks_[pos_].kind != kind)
      syntax(fmt::format("expected {}, found '{}'", what, toks_[pos_].kind == Tok::End ? "end of line" : toks_[pos_].text));
    return toks_[pos_++];
  }

  // Collects tokens up to the next top-level ',' or ')'.
  ArgValue read_value() {
    ArgValue v;
    while (peek().kind != Tok::Comma && peek().kind != Tok::RParen && peek().kind != Tok::End) {
      if (peek().kind == Tok::LParen || peek().kind == Tok::Assign) syntax(fmt::format("unexpected '{}' in argument", peek().text));
      v.tokens.push_back(toks_[pos_++]);
    }
    if (v.tokens.empty()) syntax("empty argument value");
    return v;
  }

  Source read_source() {
    const Token& on = expect(Tok::Ident, "'ON'");
    if (on.text != "ON") syntax(fmt::format("expected 'ON', found '{}'", on.text));
    const Token& what = expect(Tok::Ident, "'TABLE' or 'REF(k)'");
    if (what.text == "TABLE") return Source::table();
    if (what.text != "REF") syntax(fmt::format("expected 'TABLE' or 'REF(k)', found '{}'", what.text));
    expect(Tok::LParen, "'(' after REF");
    const Token& n = expect(Tok::Number, "step index");
    if (n.number != std::floor(n.number) || n.text.find_first_of(".eE") != std::string::npos || n.number < 0 || n.number > 1e6)
      syntax(fmt::format("bad step index '{}'", n.text));
    expect(Tok::RParen, "')' after REF index");
    return Source::step(static_cast<int>(n.number));
  }

  Operation build(const std::string& op, std::map<std::string, ArgValue>& args);

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

struct ArgReader {
  const std::string& op;
  std::map<std::string, ArgValue>& args;
  std::set<std::string> used;

  [[noreturn]] void bad(const std::string& key, std::string_view why) const {
    throw Error(Errc::BadArg, fmt::format("{}: argument '{}' {}", op, key, why));
  }

  const Token& single(const std::string& key) {
    auto it = args.find(key);
    if (it == args.end()) bad(key, "is required");
    used.insert(key);
    if (it->second.tokens.size() != 1) bad(key, "must be a single value");
    return it->second.tokens.front();
  }

  bool has(const std::string& key) const { return args.count(key) != 0; }

  std::string column(const std::string& key) {
    const Token& t = single(key);
    if ((t.kind != Tok::Ident && t.kind != Tok::Quoted) || t.text.empty()) bad(key, "must be a column name");
    return t.text;
  }

  std::int64_t positive_int(const std::string& key) {
    const Token& t = single(key);
    if (t.kind != Tok::Number || t.text.find_first_of(".eE") != std::string::npos || t.number < 1 || t.number > 1e9)
      bad(key, "must be a positive integer");
    return static_cast<std::int64_t>(t.number);
  }

  double number(const std::string& key) {
    const Token& t = single(key);
    if (t.kind != Tok::Number) bad(key, "must be a number");
    return t.number;
  }

  bool boolean(const std::string& key) {
    const Token& t = single(key);
    if (t.kind == Tok::Ident && t.text == "true") return true;
    if (t.kind == Tok::Ident && t.text == "false") return false;
    bad(key, "must be true or false");
  }

  template <typename Enum, std::size_t N>
  Enum keyword(const std::string& key, const std::pair<std::string_view, Enum> (&choices)[N]) {
    const Token& t = single(key);
    if (t.kind == Tok::Ident)
      for (const auto& [word, value] : choices)
        if (t.text == word) return value;
    std::string allowed;
    for (const auto& [word, value] : choices) allowed += (allowed.empty() ? "" : "|") + std::string(word);
    bad(key, fmt::format("must be one of {}", allowed));
  }

  Predicate predicate(const std::string& key) {
    auto it = args.find(key);
    if (it == args.end()) bad(key, "is required");
    used.insert(key);
    const std::vector<Token>& t = it->second.tokens;
    std::size_t i = 0;
    auto cmp = [&]() -> Comparison {
      if (i + 3 > t.size()) bad(key, "has an incomplete comparison");
      const Token& col = t[i];
      const Token& rel = t[i + 1];
      const Token& lit = t[i + 2];
      if ((col.kind != Tok::Ident && col.kind != Tok::Quoted) || col.text.empty() || col.text == "AND" || col.text == "OR")
        bad(key, "comparison must start with a column name");
      if (rel.kind != Tok::Cmp) bad(key, fmt::format("expected a comparison operator after '{}'", col.text));
      Comparison c{col.text, rel.cmp, 0.0};
      if (lit.kind == Tok::Number)
        c.literal = lit.number;
      else if (lit.kind == Tok::Quoted)
        c.literal = lit.text;
      else
        bad(key, "comparison literal must be a number or a quoted string");
      i += 3;
      return c;
    };
    Predicate p{cmp(), {}};
    while (i < t.size()) {
      const Token& conn = t[i];
      if (conn.kind != Tok::Ident || (conn.text != "AND" && conn.text != "OR")) bad(key, fmt::format("expected AND or OR, found '{}'", conn.text));
      ++i;
      Connective c = conn.text == "AND" ? Connective::And : Connective::Or;
      p.rest.emplace_back(c, cmp());
    }
    return p;
  }

  void finish() const {
    for (const auto& [key, value] : args)
      if (!used.count(key)) bad(key, "is not accepted");
  }
};

constexpr std::pair<std::string_view, StatKind> kStatKinds[] = {
    {"mean", StatKind::Mean}, {"median", StatKind::Median}, {"mode", StatKind::Mode},   {"std", StatKind::Std},
    {"var", StatKind::Var},   {"min", StatKind::Min},       {"max", StatKind::Max},     {"sum", StatKind::Sum},
    {"range", StatKind::Range}, {"nunique", StatKind::NUnique}};
constexpr std::pair<std::string_view, AggKind> kAggKinds[] = {
    {"mean", AggKind::Mean}, {"sum", AggKind::Sum}, {"count", AggKind::Count}, {"min", AggKind::Min}, {"max", AggKind::Max}};
constexpr std::pair<std::string_view, Extreme> kExtremes[] = {{"max", Extreme::Max}, {"min", Extreme::Min}};
constexpr std::pair<std::string_view, SortOrder> kOrders[] = {{"asc", SortOrder::Asc}, {"desc", SortOrder::Desc}};

Operation OpParser::build(const std::string& op, std::map<std::string, ArgValue>& args) {
  ArgReader a{op, args, {}};
  Operation out;
  if (op == "COUNT_ROWS") {
    out = op::CountRows{};
  } else if (op == "COUNT_COLS") {
    out = op::CountCols{};
  } else if (op == "COLUMNS") {
    out = op::Columns{};
  } else if (op == "DTYPES") {
    out = op::Dtypes{};
  } else if (op == "HEAD") {
    out = op::HeadN{a.positive_int("n")};
  } else if (op == "COUNT_MISSING") {
    out = op::CountMissing{a.column("col")};
  } else if (op == "COUNT_MISSING_ALL") {
    out = op::CountMissingAll{};
  } else if (op == "STAT") {
    std::string col = a.column("col");
    out = op::Stat{std::move(col), a.keyword("kind", kStatKinds)};
  } else if (op == "VALUE_COUNTS") {
    out = op::ValueCounts{a.column("col")};
  } else if (op == "TOP_VALUE") {
    out = op::TopValue{a.column("col")};
  } else if (op == "CORR") {
    std::string x = a.column("x");
    out = op::Corr{std::move(x), a.column("y")};
  } else if (op == "FILTER") {
    out = op::Filter{a.predicate("where")};
  } else if (op == "GROUP_AGG") {
    std::string by = a.column("by");
    std::string target = a.column("target");
    out = op::GroupAgg{std::move(by), std::move(target), a.keyword("agg", kAggKinds)};
  } else if (op == "SORT_TOP") {
    op::SortTop s{a.column("col"), a.positive_int("k"), a.keyword("order", kOrders), std::nullopt};
    if (a.has("return_col")) s.return_column = a.column("return_col");
    out = std::move(s);
  } else if (op == "ARG_EXTREME") {
    std::string col = a.column("col");
    Extreme mode = a.keyword("mode", kExtremes);
    out = op::ArgExtreme{std::move(col), mode, a.column("return_col")};
  } else if (op == "EXTREME_KEY") {
    Extreme mode = a.keyword("mode", kExtremes);
    out = op::ExtremeKey{mode, a.boolean("strict_positive")};
  } else if (op == "LINREG_FIT") {
    std::string x = a.column("x");
    out = op::LinRegFit{std::move(x), a.column("y")};
  } else if (op == "LINREG_PREDICT") {
    out = op::LinRegPredict{a.number("x0")};
  } else {
    throw Error(Errc::UnknownOp, op);
  }
  a.finish();
  return out;
}

[[noreturn]] void rethrow_at(const Error& e, std::size_t line) {
  throw Error(e.code(), fmt::format("line {}: {}", line, e.detail()));
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace

OpExpr parse_op(std::string_view text) { return OpParser(trim(text)).parse(); }

ActionPlan parse_plan(std::string_view text) {
  ActionPlan plan;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::optional<std::pair<int, std::string>> pending;  // step header awaiting its OP line
  std::size_t pending_line = 0;

  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (!pending) {
      if (!starts_with(line, "Step"))
        throw Error(Errc::SyntaxError, fmt::format("line {}: expected 'Step N: ...', found '{}'", line_no, line));
      std::string_view rest = trim(line.substr(4));
      std::size_t d = 0;
      while (d < rest.size() && rest[d] >= '0' && rest[d] <= '9') ++d;
      if (d == 0 || d > 6) throw Error(Errc::SyntaxError, fmt::format("line {}: expected a step number", line_no));
      int index = 0;
      std::from_chars(rest.data(), rest.data() + d, index);
      rest = trim(rest.substr(d));
      if (rest.empty() || rest[0] != ':') throw Error(Errc::SyntaxError, fmt::format("line {}: expected ':' after step number", line_no));
      std::string rationale(trim(rest.substr(1)));
      if (rationale.empty()) throw Error(Errc::SyntaxError, fmt::format("line {}: step rationale is empty", line_no));
      int expected = static_cast<int>(plan.steps.size()) + 1;
      if (index != expected)
        throw Error(Errc::NonConsecutiveStep, fmt::format("line {}: found step {}, expected step {}", line_no, index, expected));
      pending.emplace(index, std::move(rationale));
      pending_line = line_no;
    } else {
      if (!starts_with(line, "OP:"))
        throw Error(Errc::SyntaxError, fmt::format("line {}: expected 'OP: ...' for step {}", line_no, pending->first));
      OpExpr expr;
      try {
        expr = parse_op(line.substr(3));
      } catch (const Error& e) {
        rethrow_at(e, line_no);
      }
      if (expr.source.ref && (*expr.source.ref < 1 || *expr.source.ref >= pending->first))
        throw Error(Errc::ForwardRef, fmt::format("line {}: step {} references REF({}); only earlier steps may be referenced",
                                                  line_no, pending->first, *expr.source.ref));
      plan.steps.push_back({pending->first, std::move(pending->second), std::move(expr)});
      pending.reset();
    }
  }
  if (pending)
    throw Error(Errc::SyntaxError, fmt::format("line {}: step {} has no OP line", pending_line, pending->first));
  if (plan.steps.empty()) throw Error(Errc::SyntaxError, "line 1: plan has no steps");
  return plan;
}

}  // namespace dataagent
