#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "horizon_limit/io.hpp"
#include "support/fixtures.hpp"

using namespace horizon_limit;
using fixtures::vec;

namespace {

std::string error_of(const std::string& text) {
  try {
    (void)parse_toml(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Toml, SectionsAndValueKinds) {
  const auto t = parse_toml(R"(# leading comment
top = 1

[problem]
id = "LQ1"   # trailing comment
b = 1.5e0
flag = true
off = false

[horizons]
taus = [2, 4,
        8, 1_000]
names = ["a", "b"]
empty = []
neg = -inf
)");
  EXPECT_EQ(std::get<double>(t.at("").at("top")), 1.0);
  EXPECT_EQ(std::get<std::string>(t.at("problem").at("id")), "LQ1");
  EXPECT_EQ(std::get<double>(t.at("problem").at("b")), 1.5);
  EXPECT_TRUE(std::get<bool>(t.at("problem").at("flag")));
  EXPECT_FALSE(std::get<bool>(t.at("problem").at("off")));
  EXPECT_EQ(std::get<std::vector<double>>(t.at("horizons").at("taus")), (std::vector<double>{2, 4, 8, 1000}));
  EXPECT_EQ(std::get<std::vector<std::string>>(t.at("horizons").at("names")), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(std::get<std::vector<double>>(t.at("horizons").at("empty")).empty());
  EXPECT_EQ(std::get<double>(t.at("horizons").at("neg")), -INFINITY);
}

TEST(Toml, StringEscapes) {
  const auto t = parse_toml("s = \"a\\\"b\\\\c\\n\"\n");
  EXPECT_EQ(std::get<std::string>(t.at("").at("s")), "a\"b\\c\n");
}

TEST(Toml, ErrorsNameTheLine) {
  EXPECT_NE(error_of("a = 1\nb = \n").find("config line 2"), std::string::npos);
  EXPECT_NE(error_of("a = 1\na = 2\n").find("duplicate key 'a'"), std::string::npos);
  EXPECT_NE(error_of("[s]\nk = 1\n[s]\n").find("duplicate section"), std::string::npos);
  EXPECT_NE(error_of("[s]\nk = 1\nk = 2\n").find("'s.k'"), std::string::npos);
  EXPECT_NE(error_of("k = 1 2\n").find("unexpected text"), std::string::npos);
  EXPECT_NE(error_of("k = 1x\n").find("invalid value"), std::string::npos);
  EXPECT_NE(error_of("k = [1, \"a\"]\n").find("mixed array"), std::string::npos);
  EXPECT_NE(error_of("k = \"abc\n").find("unterminated"), std::string::npos);
  EXPECT_NE(error_of("[s\n").find("expected ']'"), std::string::npos);
  EXPECT_NE(error_of("= 3\n").find("expected a key"), std::string::npos);
}

// Property: the printed form reads back to the same double.
TEST(Format, ShortestRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(mant(rng), expo(rng) / 4);
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(-1.2360679774997898), "-1.2360679774997898");
  EXPECT_EQ(format_number(NAN), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
}

TEST(Csv, HeadersAndRows) {
  std::ostringstream os;
  write_csv_header(os, concat({{"t"}, indexed("x", 2)}));
  write_csv_row(os, {0.5, 1.0, -2.0});
  EXPECT_EQ(os.str(), "t,x_1,x_2\n0.5,1,-2\n");
}

TEST(Csv, HorizonsTable) {
  const auto p = instantiate_problem("LQ1");
  const auto c = fixtures::catalog_candidate(p, 8.0);
  const auto sol = limiting_costate(p, c, HorizonSequence::explicit_values({2, 4, 8}));
  std::ostringstream os;
  write_horizons_csv(os, sol);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "tau,lambda_n,psi0_1,I_norm");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Csv, FundamentalColumns) {
  const auto p = fixtures::linear2();
  const double g[] = {0.5, 1.0};
  const auto ft = solve_fundamental(p, vec({1.0, 0.0}), constant_control(vec({0.0})), 1.0, g);
  std::ostringstream os;
  write_fundamental_csv(os, ft);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,x_1,x_2,A_11,A_12,A_21,A_22,I_1,I_2,logdetA");
}

TEST(Csv, TranscriptionLastRowHasNoControl) {
  const auto tr = transcribe(instantiate_problem("LQ1"), vec({1.0}), 1.0, 4);
  std::ostringstream os;
  write_transcription_csv(os, tr);
  std::istringstream in(os.str());
  std::string line, last;
  std::getline(in, line);
  EXPECT_EQ(line, "k,t_k,u_1,x_1,p_1");
  int rows = 0;
  while (std::getline(in, line)) {
    last = line;
    ++rows;
  }
  EXPECT_EQ(rows, 5);
  EXPECT_EQ(last.rfind("4,1,,", 0), 0u);
  EXPECT_EQ(last.substr(last.size() - 2), ",0");
}

TEST(Csv, ReadTable) {
  std::istringstream in("t, u_1 ,u_2\n0,1,2\n\n0.5, -1 ,3e-1\n");
  const auto [ts, vs] = read_table_csv(in, "u");
  EXPECT_EQ(ts, (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(vs[1][0], -1.0);
  EXPECT_EQ(vs[1][1], 0.3);
}

TEST(Csv, ReadTableErrors) {
  auto fails = [](const std::string& text) {
    std::istringstream in(text);
    EXPECT_THROW(read_table_csv(in, "u"), ConfigError) << text;
  };
  fails("");
  fails("x,u_1\n0,1\n");
  fails("t,v_1\n0,1\n");
  fails("t,u_1\n");
  fails("t,u_1\n0,abc\n");
  fails("t,u_1\n0,1,2\n");
}
