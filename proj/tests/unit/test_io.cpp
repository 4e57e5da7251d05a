#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "betadpd/csv.hpp"
#include "betadpd/error.hpp"

using namespace betadpd;

namespace {

std::string message_of(const std::string& text) {
  std::istringstream in(text);
  try {
    io::read_csv(in, "doc.csv");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("csv reading") {
  std::istringstream in("\xEF\xBB\xBFx,\"a, b\",y\r\n1,\"he said \"\"hi\"\"\",0.5\r\n2,,0.25\n");
  const io::CsvTable t = io::read_csv(in);
  REQUIRE(t.header == std::vector<std::string>{"x", "a, b", "y"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "he said \"hi\"");
  CHECK(t.rows[1][1].empty());
  CHECK(t.lines == std::vector<std::size_t>{2, 3});
  CHECK(t.numeric("y") == std::vector<double>{0.5, 0.25});
  CHECK(t.column("x") == 0);
  CHECK_THROWS_AS(t.column("z"), ParseError);
}

TEST_CASE("quoted newlines keep line numbers right") {
  std::istringstream in("a,b\n\"two\nlines\",1\n3,x\n");
  const io::CsvTable t = io::read_csv(in, "f.csv");
  CHECK(t.rows[0][0] == "two\nlines");
  CHECK(t.lines[1] == 4);
  try {
    (void)t.numeric("b");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("f.csv:4") != std::string::npos);
  }
}

TEST_CASE("csv errors carry line numbers") {
  CHECK(message_of("a,b\n1,2\n3\n").find("doc.csv:3") != std::string::npos);
  CHECK(message_of("a,b\n1,\"open\n").find("doc.csv:2") != std::string::npos);
  CHECK_FALSE(message_of("").empty());
  CHECK_FALSE(message_of("a,a\n1,2\n").empty());
  CHECK_FALSE(message_of("a,\n1,2\n").empty());
  CHECK_THROWS_AS(io::read_csv_file("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("key-value documents") {
  std::istringstream in("# scenario\nname = t1\n\n n=50, 100   # sizes\n");
  const auto kv = io::read_key_values(in);
  CHECK(kv.at("name") == "t1");
  CHECK(kv.at("n") == "50, 100");
  std::istringstream dup("a=1\na=2\n");
  CHECK_THROWS_AS(io::read_key_values(dup), ParseError);
  std::istringstream bad("just text\n");
  CHECK_THROWS_AS(io::read_key_values(bad), ParseError);
}

TEST_CASE("number formatting round-trips") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> e(-300, 300);
  for (int k = 0; k < 20000; ++k) {
    const double v = std::pow(10.0, e(rng)) * (k % 2 ? -1 : 1);
    const std::string s = io::fmt(v);
    REQUIRE(std::strtod(s.c_str(), nullptr) == v);
    REQUIRE(s.size() <= 24);
  }
  CHECK(io::fmt(0.1) == "0.1");
  CHECK(io::fmt(5.0) == "5");
  CHECK(io::fmt(-0.0) == "-0");
  CHECK(io::fmt(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(io::fmt(INFINITY) == "inf");
}

TEST_CASE("scalar parsing") {
  CHECK(io::parse_real(" 2.5 ", "x") == 2.5);
  CHECK_THROWS_AS(io::parse_real("2.5abc", "x"), ParseError);
  CHECK_THROWS_AS(io::parse_real("", "x"), ParseError);
  CHECK(io::parse_integer("42", "k") == 42);
  CHECK_THROWS_AS(io::parse_integer("4.2", "k"), ParseError);
  CHECK(io::parse_bool("true", "b"));
  CHECK_FALSE(io::parse_bool("0", "b"));
  CHECK_THROWS_AS(io::parse_bool("maybe", "b"), ParseError);
  CHECK(io::parse_real_list("0, 0.1,0.2", "alpha") == std::vector<double>{0.0, 0.1, 0.2});
  CHECK(io::split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
  CHECK(io::trim("  x y\t") == "x y");
}
