#include <gtest/gtest.h>

#include "nle/report.hpp"

using nle::CompareResult;
using nle::RunReport;

namespace {

RunReport make_report(const std::string& method, std::uint64_t seed, double error) {
    RunReport r;
    r.method = method;
    r.seed = seed;
    r.error_rate = error;
    r.epochs = 10;
    return r;
}

CompareResult two_method_result() {
    CompareResult result;
    for (std::uint64_t s = 0; s < 10; ++s) {
        result.runs.push_back(make_report("one_hot", s, 0.10 + 0.001 * s));
    }
    for (std::uint64_t s = 0; s < 10; ++s) {
        result.runs.push_back(make_report("nle_skl", s, 0.09 + 0.001 * s));
    }
    result.means.push_back(make_report("one_hot", 0, 0.1045));
    result.means.push_back(make_report("nle_skl", 0, 0.0945));
    return result;
}

}  // namespace

TEST(CsvTest, RowCountingContract) {
    const std::string csv = nle::reports_to_csv(two_method_result());
    // header + 20 run rows + 2 mean rows
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 23);
    EXPECT_NE(csv.find("method,seed,error_rate,epochs,wall_time_s"), std::string::npos);
    EXPECT_NE(csv.find("one_hot,mean,"), std::string::npos);
    EXPECT_NE(csv.find("nle_skl,mean,"), std::string::npos);
}

TEST(CsvTest, IdenticalResultsGiveIdenticalBytes) {
    const CompareResult result = two_method_result();
    EXPECT_EQ(nle::reports_to_csv(result), nle::reports_to_csv(result));
}

TEST(JsonTest, CarriesProvenanceAndTimingFields) {
    const auto j = nle::reports_to_json(two_method_result(), "v1.2.3-g123", "abcd");
    EXPECT_EQ(j.at("git_describe"), "v1.2.3-g123");
    EXPECT_EQ(j.at("config_hash"), "abcd");
    EXPECT_EQ(j.at("runs").size(), 20u);
    EXPECT_EQ(j.at("means").size(), 2u);
    EXPECT_TRUE(j.at("runs")[0].contains("soft_target_build_s"));
    EXPECT_TRUE(j.at("runs")[0].contains("loss_curve"));
}

TEST(SummaryTest, RelativeReductionMatchesHeadlineExample) {
    // Baseline 20.37 vs method 17.97 (as error rates): ~11.78% relative.
    std::vector<RunReport> reports{make_report("one_hot", 0, 0.2037),
                                   make_report("nle_skl", 0, 0.1797)};
    const auto summary = nle::summarize(reports);
    ASSERT_TRUE(summary.has_baseline);
    ASSERT_EQ(summary.rows.size(), 2u);
    EXPECT_EQ(summary.rows[1].method, "nle_skl");
    EXPECT_NEAR(summary.rows[1].relative_reduction_pct, 11.78, 0.01);
    EXPECT_NEAR(summary.rows[0].relative_reduction_pct, 0.0, 1e-12);
}

TEST(SummaryTest, EqualErrorGivesZeroReduction) {
    std::vector<RunReport> reports{make_report("one_hot", 0, 0.15),
                                   make_report("nle_kl", 0, 0.15)};
    const auto summary = nle::summarize(reports);
    EXPECT_NEAR(summary.rows[1].relative_reduction_pct, 0.0, 1e-12);
}

TEST(SummaryTest, MissingBaselineOmitsRelativeColumnWithNotice) {
    std::vector<RunReport> reports{make_report("nle_l2", 0, 0.2),
                                   make_report("nle_l2", 1, 0.3)};
    const auto summary = nle::summarize(reports);
    EXPECT_FALSE(summary.has_baseline);
    EXPECT_FALSE(summary.notice.empty());
    EXPECT_EQ(summary.to_csv().find("relative"), std::string::npos);
    EXPECT_NE(summary.to_text().find("note:"), std::string::npos);
}

TEST(SummaryTest, ComputesMeanAndStd) {
    std::vector<RunReport> reports{make_report("one_hot", 0, 0.1), make_report("one_hot", 1, 0.2),
                                   make_report("one_hot", 2, 0.3)};
    const auto summary = nle::summarize(reports);
    EXPECT_NEAR(summary.rows[0].mean_error, 0.2, 1e-12);
    EXPECT_NEAR(summary.rows[0].std_error, 0.1, 1e-12);
}

TEST(SummaryTest, EmptyReportsRejected) {
    EXPECT_THROW(nle::summarize({}), nle::ConfigError);
}
