#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dataagent/format.hpp"
#include "dataagent/harness.hpp"
#include "dataagent/json_io.hpp"

namespace dataagent {

namespace {

// std distributions are implementation-defined; map raw engine output by hand
// so generated suites are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [lo, hi].
  long long between(long long lo, long long hi) {
    auto span = static_cast<unsigned __int128>(hi - lo + 1);
    return lo + static_cast<long long>((static_cast<unsigned __int128>(engine_()) * span) >> 64);
  }
  template <typename T>
  const T& pick(const std::vector<T>& xs) { return xs[static_cast<std::size_t>(between(0, static_cast<long long>(xs.size()) - 1))]; }
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

/// A number with `decimals` fractional digits, printed in shortest form.
std::string fixed(long long scaled, int decimals) {
  double v = static_cast<double>(scaled);
  for (int i = 0; i < decimals; ++i) v /= 10.0;
  return format_number(v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

struct Sheet {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
      out += "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }

  void blank_out(Rng& rng, double rate, const std::vector<std::size_t>& columns) {
    if (rate <= 0) return;
    for (auto& r : rows)
      for (std::size_t c : columns)
        if (rng.chance(rate)) r[c].clear();
  }
};

Sheet weather(Rng& rng, std::size_t n, double missing) {
  const std::vector<std::string> cities{"New York", "Los Angeles", "Beijing",  "Paris",  "Sao Paulo", "Moscow",
                                        "Dubai",    "Singapore",   "Mumbai",   "Sydney", "Cairo",     "Toronto"};
  const std::vector<std::string> clouds{"Sun", "PartShade", "Shade"};
  Sheet s{{"City", "Temp", "Humidity", "Wind", "Clouds"}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    long long temp = rng.between(50, 420);
    // Humidity drifts down as temperature rises, with noise.
    long long humidity = std::clamp<long long>(950 - temp + rng.between(-150, 150), 150, 950);
    s.rows.push_back({rng.pick(cities), fixed(temp, 1), fixed(humidity, 1), fixed(rng.between(0, 300), 1),
                      rng.pick(clouds)});
  }
  s.blank_out(rng, missing, {1, 2, 3, 4});
  return s;
}

Sheet sales(Rng& rng, std::size_t n, double missing) {
  const std::vector<std::string> regions{"North", "South", "East", "West"};
  const std::vector<std::string> products{"Widget", "Gadget", "Gizmo", "Doohickey"};
  const std::vector<std::string> channels{"Online", "Retail"};
  Sheet s{{"OrderId", "Region", "Product", "Units", "Price", "Revenue", "Channel"}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    long long units = rng.between(1, 20);
    long long cents = rng.between(500, 9999);
    s.rows.push_back({std::to_string(1001 + i), rng.pick(regions), rng.pick(products), std::to_string(units),
                      fixed(cents, 2), fixed(units * cents, 2), rng.pick(channels)});
  }
  s.blank_out(rng, missing, {1, 3, 4, 6});
  return s;
}

Sheet people(Rng& rng, std::size_t n, double missing) {
  const std::vector<std::string> first{"Ada",  "Ben",   "Chen", "Dana", "Eli",  "Fatima", "Gus",  "Hana",  "Ivan", "Jude",
                                       "Kiri", "Leo",   "Mia",  "Nils", "Omar", "Pia",    "Quin", "Rosa",  "Sami", "Tess"};
  const std::vector<std::string> last{"Abe", "Brook", "Cruz", "Diaz", "Eng", "Ford", "Gray",
                                      "Hale", "Iyer", "Jain", "Kahn", "Lund", "Moss", "Nash"};
  const std::vector<std::string> departments{"Engineering", "Sales", "Marketing", "Finance", "HR"};
  const std::vector<std::string> cities{"Austin", "Boston", "Chicago", "Denver", "Seattle"};
  Sheet s{{"Name", "Age", "Department", "Salary", "YearsExperience", "City"}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    std::string name = first[i % first.size()] + " " + last[(i / first.size()) % last.size()];
    if (i >= first.size() * last.size()) name += " " + std::to_string(i);
    long long age = rng.between(22, 65);
    long long years = rng.between(0, std::min<long long>(40, age - 21));
    long long dept = rng.between(0, static_cast<long long>(departments.size()) - 1);
    long long salary = 38000 + 2100 * years + 6000 * (4 - dept) + rng.between(-5000, 5000);
    s.rows.push_back({name, std::to_string(age), departments[static_cast<std::size_t>(dept)], std::to_string(salary),
                      std::to_string(years), rng.pick(cities)});
  }
  s.blank_out(rng, missing, {1, 3, 4, 5});
  return s;
}

std::string stat_keyword(const std::string& words) {
  if (words == "standard deviation") return "std";
  if (words == "variance") return "var";
  if (words == "minimum") return "min";
  if (words == "maximum") return "max";
  return words;
}

struct PlanText {
  std::string text;
  int steps = 0;

  PlanText& step(std::string rationale, std::string op) {
    text += fmt::format("Step {}: {}\nOP: {}\n", ++steps, rationale, op);
    return *this;
  }
};

struct CaseSpec {
  std::string question;
  std::string plan;
  Difficulty difficulty;
};

CaseSpec count_rows() {
  return {"How many rows are in the dataset?", PlanText{}.step("Count the rows.", "COUNT_ROWS() ON TABLE").text,
          Difficulty::Easy};
}

CaseSpec count_cols() {
  return {"How many columns are in the dataset?",
          PlanText{}.step("Count the columns.", "COUNT_COLS() ON TABLE").text, Difficulty::Easy};
}

CaseSpec stat(const std::string& words, const std::string& col) {
  return {fmt::format("What is the {} of {}?", words, col),
          PlanText{}
              .step(fmt::format("Compute the {} of {}.", words, col),
                    fmt::format("STAT(col={}, kind={}) ON TABLE", col, stat_keyword(words)))
              .text,
          Difficulty::Easy};
}

CaseSpec filtered_stat(const std::string& words, const std::string& col, const std::string& where) {
  return {fmt::format("What is the {} of {} where {}?", words, col, where),
          PlanText{}
              .step("Keep the matching rows.", fmt::format("FILTER(where={}) ON TABLE", where))
              .step(fmt::format("Compute the {} of {} on them.", words, col),
                    fmt::format("STAT(col={}, kind={}) ON REF(1)", col, stat_keyword(words)))
              .text,
          Difficulty::Medium};
}

CaseSpec count_where(const std::string& where) {
  return {fmt::format("How many rows have {}?", where),
          PlanText{}
              .step("Keep the matching rows.", fmt::format("FILTER(where={}) ON TABLE", where))
              .step("Count them.", "COUNT_ROWS() ON REF(1)")
              .text,
          Difficulty::Medium};
}

CaseSpec arg_extreme(const std::string& ret, const std::string& mode, const std::string& key) {
  return {fmt::format("Which {} has the {} {}?", ret, mode, key),
          PlanText{}
              .step(fmt::format("Find the row with the {} {}.", mode, key),
                    fmt::format("ARG_EXTREME(col={}, mode={}, return_col={}) ON TABLE", key,
                                mode == "highest" ? "max" : "min", ret))
              .text,
          Difficulty::Medium};
}

CaseSpec group_extreme(const std::string& by, const std::string& mode, const std::string& target) {
  return {fmt::format("Which {} has the {} average {}?", by, mode, target),
          PlanText{}
              .step(fmt::format("Average {} per {}.", target, by),
                    fmt::format("GROUP_AGG(by={}, target={}, agg=mean) ON TABLE", by, target))
              .step("Pick the extreme group.",
                    fmt::format("EXTREME_KEY(mode={}, strict_positive=false) ON REF(1)", mode == "highest" ? "max" : "min"))
              .text,
          Difficulty::Hard};
}

CaseSpec most_missing() {
  return {"Which column has the most missing values?",
          PlanText{}
              .step("Count missing cells per column.", "COUNT_MISSING_ALL() ON TABLE")
              .step("Pick the column with the most.", "EXTREME_KEY(mode=max, strict_positive=true) ON REF(1)")
              .text,
          Difficulty::Medium};
}

CaseSpec count_missing(const std::string& col) {
  return {fmt::format("How many missing values does {} have?", col),
          PlanText{}.step(fmt::format("Count missing cells in {}.", col), fmt::format("COUNT_MISSING(col={}) ON TABLE", col)).text,
          Difficulty::Easy};
}

CaseSpec nunique(const std::string& col) {
  return {fmt::format("How many unique values does {} have?", col),
          PlanText{}.step("Count distinct values.", fmt::format("STAT(col={}, kind=nunique) ON TABLE", col)).text,
          Difficulty::Easy};
}

CaseSpec top_value(const std::string& col) {
  return {fmt::format("What is the most common value of {}?", col),
          PlanText{}.step("Find the most frequent value.", fmt::format("TOP_VALUE(col={}) ON TABLE", col)).text,
          Difficulty::Easy};
}

CaseSpec corr(const std::string& x, const std::string& y) {
  return {fmt::format("What is the correlation between {} and {}?", x, y),
          PlanText{}.step("Correlate the two columns.", fmt::format("CORR(x={}, y={}) ON TABLE", x, y)).text,
          Difficulty::Medium};
}

CaseSpec predict(const std::string& y, const std::string& x, const std::string& x0) {
  return {fmt::format("What is the predicted {} for {} = {} using a linear regression?", y, x, x0),
          PlanText{}
              .step(fmt::format("Fit {} against {}.", y, x), fmt::format("LINREG_FIT(x={}, y={}) ON TABLE", x, y))
              .step("Predict at the requested point.", fmt::format("LINREG_PREDICT(x0={}) ON REF(1)", x0))
              .text,
          Difficulty::Hard};
}

CaseSpec top_k(int k, const std::string& ret, const std::string& key) {
  return {fmt::format("What are the top {} values of {} by {}?", k, ret, key),
          PlanText{}
              .step(fmt::format("Sort by {} and keep {}.", key, k),
                    fmt::format("SORT_TOP(col={}, k={}, order=desc, return_col={}) ON TABLE", key, k, ret))
              .text,
          Difficulty::Medium};
}

CaseSpec stat_and_extreme(const std::string& words, const std::string& col, const std::string& ret,
                          const std::string& mode, const std::string& key) {
  return {fmt::format("What is the {} of {} and which {} has the {} {}?", words, col, ret, mode, key),
          PlanText{}
              .step(fmt::format("Compute the {} of {}.", words, col),
                    fmt::format("STAT(col={}, kind={}) ON TABLE", col, stat_keyword(words)))
              .step(fmt::format("Find the {} with the {} {}.", ret, mode, key),
                    fmt::format("ARG_EXTREME(col={}, mode={}, return_col={}) ON TABLE", key,
                                mode == "highest" ? "max" : "min", ret))
              .text,
          Difficulty::Hard};
}

}  // namespace

GeneratedSuite generate_suite(const GeneratorOptions& options) {
  Rng rng(options.seed);
  struct Spec {
    std::string id;
    SizeCategory size;
    Sheet sheet;
    std::vector<CaseSpec> cases;
  };
  std::vector<Spec> specs;
  specs.push_back({"weather", SizeCategory::Small, weather(rng, options.small_rows, options.small_missing_rate),
                   {count_rows(), stat("mean", "Temp"), stat("median", "Clouds"), arg_extreme("City", "highest", "Temp"),
                    count_where("Temp > 30"), corr("Temp", "Humidity"), most_missing(),
                    stat_and_extreme("mean", "Temp", "City", "highest", "Temp"), top_value("Clouds"),
                    predict("Humidity", "Temp", "28")}});
  specs.push_back({"sales", SizeCategory::Medium, sales(rng, options.medium_rows, options.medium_missing_rate),
                   {count_missing("Region"), stat("sum", "Revenue"), group_extreme("Region", "highest", "Revenue"),
                    stat("standard deviation", "Price"), filtered_stat("mean", "Units", "Channel == \"Online\""),
                    nunique("Product"), top_k(3, "OrderId", "Revenue"), count_cols(), stat("range", "Units"),
                    arg_extreme("Product", "lowest", "Price")}});
  specs.push_back({"people", SizeCategory::Large, people(rng, options.large_rows, options.large_missing_rate),
                   {most_missing(), stat("mean", "Salary"), stat("median", "Age"),
                    group_extreme("Department", "highest", "Salary"), count_where("Department == \"Engineering\""),
                    corr("YearsExperience", "Salary"), predict("Salary", "YearsExperience", "10"),
                    arg_extreme("Name", "highest", "Salary"), stat("variance", "YearsExperience"),
                    filtered_stat("maximum", "Age", "Department == \"Sales\"")}});

  GeneratedSuite suite;
  for (Spec& spec : specs) {
    GeneratedDataset d{spec.id, spec.id + ".csv", spec.size, spec.sheet.csv()};
    Table table = load_csv(d.csv, spec.id);
    std::size_t n = 0;
    for (CaseSpec& c : spec.cases) {
      GeneratedCase gc;
      gc.query.id = fmt::format("{}-{:02}", spec.id, ++n);
      gc.query.dataset = spec.id;
      gc.query.question = c.question;
      gc.query.difficulty = c.difficulty;
      gc.query.truth = oracle_answer(gc.query, table);
      gc.gold_plan = std::move(c.plan);
      suite.cases.push_back(std::move(gc));
    }
    suite.datasets.push_back(std::move(d));
  }
  return suite;
}

ScriptedBackend::Rule gold_rule(std::string_view dataset, std::string_view question, std::string plan_text) {
  static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
  auto escape = [](std::string_view s) { return std::regex_replace(std::string(s), special, R"(\$&)"); };
  ScriptedBackend::Rule rule;
  rule.kind = ScriptedBackend::MatchKind::Pattern;
  rule.matcher = fmt::format(R"(dataset: {},[\s\S]*Question: {}\n)", escape(dataset), escape(question));
  rule.response = std::move(plan_text);
  return rule;
}

void write_suite(const GeneratedSuite& suite, const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::InvalidArgument, fmt::format("cannot write {}", (dir / file).string()));
    out << text;
  };

  nlohmann::ordered_json manifest;
  manifest["datasets"] = nlohmann::json::array();
  for (const GeneratedDataset& d : suite.datasets) {
    write(d.file_name, d.csv);
    manifest["datasets"].push_back({{"id", d.id}, {"path", d.file_name}, {"size", std::string(to_string(d.size))}});
  }
  manifest["cases"] = nlohmann::json::array();
  nlohmann::ordered_json rules = nlohmann::json::array();
  for (const GeneratedCase& c : suite.cases) {
    nlohmann::ordered_json jc;
    jc["id"] = c.query.id;
    jc["dataset"] = c.query.dataset;
    jc["question"] = c.query.question;
    jc["difficulty"] = std::string(to_string(c.query.difficulty));
    jc["order_insensitive"] = c.query.order_insensitive;
    jc["truth"] = truth_to_json(c.query.truth);
    manifest["cases"].push_back(jc);
    ScriptedBackend::Rule r = gold_rule(c.query.dataset, c.query.question, c.gold_plan);
    rules.push_back({{"pattern", r.matcher}, {"response", r.response}});
  }
  write(name + ".json", manifest.dump(2) + "\n");
  nlohmann::ordered_json script;
  script["rules"] = rules;
  write(name + ".script.json", script.dump(2) + "\n");
}

}  // namespace dataagent
