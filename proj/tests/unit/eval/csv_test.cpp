#include <gtest/gtest.h>

#include <sstream>

#include "ctxrec/eval/csv.hpp"
#include "fixtures.hpp"

namespace ctxrec::eval {
namespace {

TEST(Csv, Escaping) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_escape("two\nlines"), "\"two\nlines\"");
}

TEST(Csv, RoundTripAwkwardFields) {
  CsvTable t;
  t.header = {"a", "b", "c"};
  t.rows = {{"1", "x,y", "{\"k\": [1, 2]}"}, {"", "line\r\nbreak", "\"q\""}};
  testing::TempDir dir;
  write_csv(dir / "t.csv", t);
  const auto back = read_csv(dir / "t.csv");
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.cell(0, "b"), "x,y");
  EXPECT_THROW((void)back.column("zz"), CsvError);
}

TEST(Csv, HeaderOnlyAndCrLf) {
  const auto t = parse_csv("a,b\r\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(t.rows.empty());
  const auto u = parse_csv("a,b\r\n1,2\r\n3,\r\n");
  ASSERT_EQ(u.rows.size(), 2u);
  EXPECT_EQ(u.rows[1], (std::vector<std::string>{"3", ""}));
}

TEST(Csv, Malformed) {
  EXPECT_THROW((void)parse_csv("a,b\n\"open,1\n"), CsvError);
  EXPECT_THROW((void)parse_csv("a,b\n1,2,3\n"), CsvError);
}

}  // namespace
}  // namespace ctxrec::eval
