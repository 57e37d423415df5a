#include <gtest/gtest.h>

#include <cmath>

#include "hsnli/error.hpp"
#include "hsnli/report.hpp"
#include "support/temp_dir.hpp"
#include "support/toy_grid.hpp"

namespace {

using namespace hsnli;

const std::filesystem::path kReference =
    std::filesystem::path(HSNLI_SOURCE_DIR) / "references/table1.csv";

constexpr const char* kHeader = "table,variant,dataset,n,macro_f1\n";

TEST(ReferenceTable, ShippedTableSpotValues) {
  const auto table = ReferenceTable::load(kReference);
  EXPECT_EQ(table.entries().size(), 150u);
  ASSERT_TRUE(table.find("X+DEN", "BAS19_ES", 20));
  EXPECT_DOUBLE_EQ(*table.find("X+DEN", "BAS19_ES", 20), 0.66);
  EXPECT_DOUBLE_EQ(*table.find("X + DEN", "BAS19_ES", 20), 0.66);
  EXPECT_FALSE(table.find("X+DEN", "BAS19_ES", 21));
  EXPECT_FALSE(table.find("X+DEN [strategies]", "BAS19_ES", 20));
  for (const auto& e : table.entries()) {
    EXPECT_GE(e.value, 0.0);
    EXPECT_LE(e.value, 1.0);
  }
}

TEST(ReferenceTable, ParseErrors) {
  EXPECT_THROW(ReferenceTable::parse("variant,dataset,n,macro_f1\n"), Error);
  EXPECT_THROW(ReferenceTable::parse(std::string(kHeader) + "held_out,X,D,20,66\n"), Error);
  EXPECT_THROW(ReferenceTable::parse(std::string(kHeader) + "held_out,X,D,20\n"), Error);
  EXPECT_THROW(ReferenceTable::parse(std::string(kHeader) + "held_out,X,D,abc,0.5\n"), Error);
  EXPECT_THROW(ReferenceTable::parse(std::string(kHeader) +
                                     "held_out,X,D,20,0.5\nheld_out,X,D,20,0.6\n"),
               Error);
  const auto ok =
      ReferenceTable::parse(std::string(kHeader) + "# comment\nheld_out,X,D,20,0.5\n");
  EXPECT_EQ(ok.entries().size(), 1u);
}

TEST(FormatFixed, Rounding) {
  EXPECT_EQ(format_fixed(-0.016, 2), "-0.02");
  EXPECT_EQ(format_fixed(0.66, 2), "0.66");
  EXPECT_EQ(format_fixed(-0.001, 2), "0.00");
  EXPECT_EQ(format_fixed(-0.0, 2), "0.00");
  EXPECT_EQ(format_fixed(0.125, 3), "0.125");
}

TEST(CompareToReference, AverageDiffArithmetic) {
  const auto reference = ReferenceTable::parse(std::string(kHeader) +
                                               "held_out,X,A,20,0.50\n"
                                               "held_out,X,A,200,0.60\n"
                                               "held_out,X,B,20,0.70\n"
                                               "held_out,X,B,200,0.80\n"
                                               "held_out,X,C,20,0.90\n");
  const std::vector<ResultEntry> ours = {{"X", "A", 20, 0.47},
                                         {"X", "A", 200, 0.57},
                                         {"X", "B", 20, 0.69},
                                         {"X", "B", 200, 0.79},
                                         {"X", "C", 20, 0.90}};
  const auto table = compare_to_reference(ours, reference);
  ASSERT_EQ(table.rows.size(), 1u);
  ASSERT_EQ(table.columns.size(), 5u);
  const double expected[] = {-0.03, -0.03, -0.01, -0.01, 0.0};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(*table.diffs[0][i], expected[i], 1e-12);
  ASSERT_TRUE(table.row_avg[0]);
  EXPECT_NEAR(*table.row_avg[0], -0.016, 1e-12);
  EXPECT_NEAR(*table.overall_avg, -0.016, 1e-12);
  const std::string csv = diff_table_csv(table);
  EXPECT_EQ(csv,
            "variant,A/20,A/200,B/20,B/200,C/20,Avg. Diff.\n"
            "X,-0.03,-0.03,-0.01,-0.01,0.00,-0.02\n"
            "Avg. Diff.,-0.03,-0.03,-0.01,-0.01,0.00,-0.02\n");
}

TEST(CompareToReference, RowAndColumnAverages) {
  const auto reference = ReferenceTable::parse(std::string(kHeader) +
                                               "held_out,P,A,20,0.5\n"
                                               "held_out,P,A,200,0.5\n"
                                               "held_out,Q,A,20,0.5\n");
  const std::vector<ResultEntry> ours = {
      {"P", "A", 20, 0.6}, {"P", "A", 200, 0.7}, {"Q", "A", 20, 0.2}, {"Q", "A", 200, 0.9}};
  const auto table = compare_to_reference(ours, reference);
  ASSERT_EQ(table.rows, (std::vector<std::string>{"P", "Q"}));
  EXPECT_NEAR(*table.row_avg[0], 0.15, 1e-12);
  EXPECT_NEAR(*table.row_avg[1], -0.3, 1e-12);
  EXPECT_NEAR(*table.col_avg[0], -0.1, 1e-12);
  EXPECT_NEAR(*table.col_avg[1], 0.2, 1e-12);
  EXPECT_NEAR(*table.overall_avg, (0.1 + 0.2 - 0.3) / 3.0, 1e-12);
  EXPECT_FALSE(table.diffs[1][1]);
  EXPECT_EQ(table.warnings.size(), 1u);
}

TEST(CompareToReference, ShippedTableSpot) {
  const auto reference = ReferenceTable::load(kReference);
  const std::vector<ResultEntry> ours = {{"X+DEN", "BAS19_ES", 20, 0.70}};
  const auto table = compare_to_reference(ours, reference);
  EXPECT_NEAR(*table.overall_avg, 0.70 - 0.66, 1e-12);
}

TEST(CompareToReference, RejectsOutOfRangeValues) {
  const auto reference = ReferenceTable::parse(std::string(kHeader) + "held_out,X,A,20,0.5\n");
  const std::vector<ResultEntry> ours = {{"X", "A", 20, 66.0}};
  EXPECT_THROW(compare_to_reference(ours, reference), Error);
}

TEST(ResultsTable, Layout) {
  const std::vector<ResultEntry> entries = {
      {"M", "B", 200, 0.5}, {"M", "B", 20, 0.25}, {"X", "A", 20, 0.126}};
  EXPECT_EQ(results_table_csv(entries),
            "variant,B/20,B/200,A/20\n"
            "M,0.25,0.50,\n"
            "X,,,0.13\n");
}

TEST(ResultsJsonl, SkipsFailedCells) {
  test::TempDir dir;
  test::write_text(dir / "r.jsonl",
                   R"({"variant":"X","dataset":"A","n":20,"macro_f1":0.5,"ok":true})" "\n"
                   R"({"variant":"X","dataset":"B","n":20,"ok":false,"error":"boom"})" "\n");
  const auto entries = read_results_jsonl(dir / "r.jsonl");
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].dataset, "A");
  test::write_text(dir / "bad.jsonl", "{nope\n");
  EXPECT_THROW(read_results_jsonl(dir / "bad.jsonl"), Error);
}

}  // namespace
