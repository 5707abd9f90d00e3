#include <doctest.h>

#include <random>

#include "dataagent/error.hpp"
#include "dataagent/format.hpp"
#include "dataagent/table.hpp"
#include "fixtures.hpp"

using namespace dataagent;
using fixtures::error_of;

TEST_CASE("cities chunk loads with inferred dtypes") {
  Table t = fixtures::cities();
  CHECK(t.name() == "cities");
  CHECK(t.row_count() == 9);
  REQUIRE(t.column_count() == 5);
  std::vector<DType> dtypes;
  for (const Column& c : t.columns()) dtypes.push_back(c.dtype());
  CHECK(dtypes == std::vector<DType>{DType::Categorical, DType::Numeric, DType::Numeric, DType::Numeric, DType::Categorical});
  CHECK(t.column("Temp").missing_count() == 1);
  CHECK(t.column("Temp").is_missing(3));
  CHECK(*t.column("Temp").number(8) == 35.0);
  CHECK(*t.column("City").text(6) == "Dubai");
  CHECK(t.column("Clouds").is_missing(4));
}

TEST_CASE("schema reports non-missing counts") {
  auto schema = fixtures::cities().schema();
  REQUIRE(schema.size() == 5);
  CHECK(schema[0] == ColumnSchema{"City", DType::Categorical, 9});
  CHECK(schema[2] == ColumnSchema{"Humidity", DType::Numeric, 8});
}

TEST_CASE("quoting, CRLF, BOM and embedded newlines") {
  Table t = load_csv("\xEF\xBB\xBFname,note\r\n\"Smith, J\",\"said \"\"hi\"\"\"\r\nLee,\"two\nlines\"\r\n", "q");
  REQUIRE(t.row_count() == 2);
  CHECK(t.columns()[0].name() == "name");
  CHECK(*t.column("name").text(0) == "Smith, J");
  CHECK(*t.column("note").text(0) == "said \"hi\"");
  CHECK(*t.column("note").text(1) == "two\nlines");
}

TEST_CASE("empty and quoted-empty fields are missing; blank lines skipped") {
  Table t = load_csv("a,b\n1,\"\"\n\n2,x\n,  \n", "m");
  CHECK(t.row_count() == 3);
  CHECK(t.column("a").numeric());
  CHECK(t.column("a").missing_count() == 1);
  CHECK(t.column("b").missing_count() == 2);
}

TEST_CASE("csv errors") {
  CHECK(error_of([] { load_csv("", "e"); }) == "EmptyInput");
  CHECK(error_of([] { load_csv("\n\n", "e"); }) == "EmptyInput");
  CHECK(error_of([] { load_csv("a,a\n1,2\n", "e"); }) == "DuplicateHeader");
  CHECK(error_of([] { load_csv("a,,c\n1,2,3\n", "e"); }) == "BadHeader");
  CHECK(error_of([] { load_csv("a,b\n1,2\n3\n", "e"); }) == "RaggedRow");
  CHECK(error_of([] { load_csv("a,b\n\"1,2\n", "e"); }) == "MalformedCsv");
  CHECK(error_of([] { load_csv_file(fixtures::kDataDir / "no-such.csv"); }) == "MissingDataset");
}

TEST_CASE("ragged row message names the row") {
  try {
    load_csv("a,b\n1,2\n3,4,5\n", "e");
    FAIL("expected RaggedRow");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
}

TEST_CASE("strict and lenient policies for forced numeric columns") {
  LoadOptions strict;
  strict.dtypes["v"] = DType::Numeric;
  CHECK(error_of([&] { load_csv("v\n1\nabc\n", "p", strict); }) == "BadCell");
  LoadOptions lenient = strict;
  lenient.policy = LoadPolicy::Lenient;
  Table t = load_csv("v\n1\nabc\n", "p", lenient);
  CHECK(t.column("v").numeric());
  CHECK(t.column("v").missing_count() == 1);
}

TEST_CASE("number parsing") {
  CHECK(parse_number("42") == 42.0);
  CHECK(parse_number(" -3.5 ") == -3.5);
  CHECK(parse_number("+.5") == 0.5);
  CHECK(parse_number("7.") == 7.0);
  CHECK_FALSE(parse_number("1e5"));
  CHECK_FALSE(parse_number("1,000"));
  CHECK_FALSE(parse_number("inf"));
  CHECK_FALSE(parse_number("nan"));
  CHECK_FALSE(parse_number(""));
  CHECK_FALSE(parse_number("-"));
}

TEST_CASE("dtype inference") {
  std::vector<std::string> nums{"1", "2.5", "-3"}, mixed{"1", "x"}, none{};
  CHECK(infer_dtype(nums) == DType::Numeric);
  CHECK(infer_dtype(mixed) == DType::Categorical);
  CHECK(infer_dtype(none) == DType::Categorical);
}

TEST_CASE("all-missing column is categorical") {
  Table t = load_csv("a,b\n1,\n2,\n", "m");
  CHECK_FALSE(t.column("b").numeric());
  CHECK(t.column("b").missing_count() == 2);
}

TEST_CASE("size category boundaries") {
  CHECK(size_category(99) == SizeCategory::Small);
  CHECK(size_category(100) == SizeCategory::Medium);
  CHECK(size_category(200) == SizeCategory::Medium);
  CHECK(size_category(201) == SizeCategory::Large);
  CHECK(size_category(165) == SizeCategory::Medium);
  CHECK(parse_size_category("large") == SizeCategory::Large);
  CHECK_FALSE(parse_size_category("huge"));
}

TEST_CASE("take_rows and head produce new tables") {
  Table t = fixtures::cities();
  std::vector<std::size_t> rows{6, 0};
  Table sub = t.take_rows(rows);
  CHECK(sub.row_count() == 2);
  CHECK(*sub.column("City").text(0) == "Dubai");
  CHECK(t.head(3).row_count() == 3);
  CHECK(t.head(100).row_count() == 9);
  CHECK(error_of([&] { (void)t.column("Price"); }) == "UnknownColumn");
}

TEST_CASE("column construction validates cells") {
  CHECK(error_of([] { Column("x", DType::Numeric, {Cell{std::string("a")}}); }) == "InvalidArgument");
  CHECK(error_of([] {
          Table("t", {Column("a", DType::Numeric, {Cell{1.0}}), Column("a", DType::Numeric, {Cell{2.0}})});
        }) == "InvalidArgument");
}

TEST_CASE("round trip through rendered csv preserves numbers") {
  std::mt19937_64 rng(7);
  std::string csv = "x\n";
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i) {
    double v = static_cast<double>(static_cast<long long>(rng() % 200001) - 100000) / 1000.0;
    xs.push_back(v);
    csv += format_number(v) + "\n";
  }
  Table t = load_csv(csv, "r");
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(*t.column("x").number(i) == xs[i]);
}

TEST_CASE("format helpers") {
  CHECK(format_number(9) == "9");
  CHECK(format_number(30.7625) == "30.7625");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_sci(5e-6) == "5e-6");
  CHECK(trim("  a b \t") == "a b");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
