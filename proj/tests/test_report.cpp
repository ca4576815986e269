#include <gtest/gtest.h>

#include "qrelgauge/report.hpp"

using namespace qrelgauge;

namespace {

Report sample_report() {
    Report r;
    r.name = "study";
    r.set_meta("metric", "recall@20");
    r.set_meta("seed", "42");
    Table t{"selection", {"selection", "tau", "error_rate_pct"}, {}};
    t.add_row({std::string("random"), 0.936, 3.2});
    t.add_row({std::string("most_popular"), 0.696, 15.2});
    r.tables.push_back(t);
    Table u{"misc", {"name", "count", "value"}, {}};
    u.add_row({std::string("a,b \"quoted\""), std::int64_t{7}, std::monostate{}});
    u.add_row({std::string("inf"), std::int64_t{-1}, 1e-300});
    r.tables.push_back(u);
    return r;
}

} // namespace

TEST(ReportJson, RoundTrip) {
    const auto r = sample_report();
    EXPECT_EQ(parse_report_json(emit_json(r)), r);
    EXPECT_EQ(parse_report_json(emit_json(r, Precision::Full)), r);
}

TEST(ReportJson, FullPrecisionIsLossless) {
    Report r;
    r.name = "x";
    Table t{"t", {"v"}, {}};
    for (double v : {0.1, 1.0 / 3.0, 2.718281828459045, -1e-17, 12345678.901234567})
        t.add_row({v});
    r.tables.push_back(t);
    EXPECT_EQ(parse_report_json(emit_json(r, Precision::Full)), r);
    const auto rounded = parse_report_json(emit_json(r));
    EXPECT_EQ(std::get<double>(rounded.tables[0].rows[1][0]), 0.333333);
}

TEST(ReportJson, EmptyReportIsValid) {
    Report r;
    const auto text = emit_json(r);
    EXPECT_EQ(parse_report_json(text), r);
}

TEST(ReportJson, EmitParseEmitIsStable) {
    const auto text = emit_json(sample_report());
    EXPECT_EQ(emit_json(parse_report_json(text)), text);
}

TEST(ReportCsv, PinnedTauHeader) {
    const auto csv = emit_csv(sample_report().tables[0]);
    EXPECT_EQ(csv, "selection,tau,error_rate_pct\nrandom,0.936,3.2\nmost_popular,0.696,15.2\n");
}

TEST(ReportCsv, QuotingAndNulls) {
    const auto csv = emit_csv(sample_report().tables[1]);
    EXPECT_EQ(csv, "name,count,value\n\"a,b \"\"quoted\"\"\",7,\ninf,-1,1e-300\n");
}

TEST(ReportCsv, SixSignificantDigits) {
    Table t{"t", {"v"}, {}};
    t.add_row({1.0 / 3.0});
    EXPECT_EQ(emit_csv(t), "v\n0.333333\n");
    EXPECT_EQ(emit_csv(t, Precision::Full), "v\n0.33333333333333331\n");
}

TEST(Report, RowWidthChecked) {
    Table t{"t", {"a", "b"}, {}};
    EXPECT_THROW(t.add_row({std::int64_t{1}}), Error);
}

TEST(Report, NonFiniteNumbersBecomeStrings) {
    EXPECT_EQ(std::get<std::string>(number_cell(std::numeric_limits<double>::infinity())), "inf");
    EXPECT_EQ(std::get<std::string>(number_cell(std::nan(""))), "nan");
    EXPECT_EQ(std::get<double>(number_cell(0.5)), 0.5);
}
