#include "reportkg/compliance.hpp"
#include "reportkg/error.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace reportkg;
using namespace reportkg::compliance;
using units::parse_acceptance_limits;
using units::parse_quantity;
using units::parse_success_mark;

namespace {

Verdict check(const char* measured, const char* limits) {
    return oracle_check(parse_quantity(measured), parse_acceptance_limits(limits));
}

Observation row(std::string id, std::string measured, std::string limits, std::string success) {
    Observation o;
    o.id = std::move(id);
    o.result_raw = std::move(measured);
    o.limits_raw = std::move(limits);
    o.success_raw = std::move(success);
    return o;
}

}  // namespace

TEST(Oracle, Examples) {
    EXPECT_EQ(check("1.097 V", "[1.076, 1.224] V"), Verdict::InRange);
    EXPECT_EQ(check("2.1 MΩ", "1.1M - 1.9MΩ"), Verdict::OutOfRange);
    EXPECT_EQ(check("1500 kΩ", "1.1M - 1.9MΩ"), Verdict::InRange);
    EXPECT_EQ(check("1.224 V", "[1.076, 1.224] V"), Verdict::InRange);
}

TEST(Oracle, DegenerateInterval) {
    EXPECT_EQ(check("0 V", "[0, 0] V"), Verdict::InRange);
    EXPECT_EQ(check("0.000001 V", "[0, 0] V"), Verdict::OutOfRange);
    EXPECT_EQ(check("-0.000001 V", "[0, 0] V"), Verdict::OutOfRange);
}

TEST(Oracle, BareMeasuredAdoptsLimitUnit) {
    EXPECT_EQ(check("1.097", "[1.076, 1.224] V"), Verdict::InRange);
    EXPECT_EQ(check("1097", "[1076, 1224] mV"), Verdict::InRange);
    EXPECT_EQ(check("1.097", "[1076, 1224] mV"), Verdict::OutOfRange);
}

TEST(Oracle, DimensionMismatchIsUnknown) {
    EXPECT_EQ(check("1.1 V", "1.1M - 1.9MΩ"), Verdict::Unknown);
}

TEST(Oracle, ExclusiveBoundsOption) {
    const OracleOptions exclusive{false};
    const auto limits = parse_acceptance_limits("[1.076, 1.224] V");
    EXPECT_EQ(oracle_check(parse_quantity("1.224 V"), limits, exclusive), Verdict::OutOfRange);
    EXPECT_EQ(oracle_check(parse_quantity("1.2 V"), limits, exclusive), Verdict::InRange);
}

TEST(Oracle, AgreesWithIntegerBruteForce) {
    std::mt19937_64 rng(20240301);
    int boundary = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto c = support::random_oracle_case(rng);
        boundary += c.boundary;
        EXPECT_EQ(check(c.measured_text.c_str(), c.limits_text.c_str()), c.expected)
            << c.measured_text << " vs " << c.limits_text;
    }
    EXPECT_GT(boundary, 100);
}

TEST(Oracle, ScalingInvariance) {
    const auto& registry = units::UnitRegistry::defaults();
    const auto limits = parse_acceptance_limits("1.1M - 1.9MΩ");
    for (const char* text : {"1.1 MΩ", "1.9 MΩ", "2.1 MΩ", "0.5 MΩ", "1.5 MΩ"}) {
        const auto q = parse_quantity(text);
        for (const char* symbol : {"Ω", "kΩ", "MΩ", "GΩ", "mΩ"}) {
            EXPECT_EQ(oracle_check(units::convert(q, registry.unit(symbol)), limits), oracle_check(q, limits))
                << text << " in " << symbol;
        }
    }
}

TEST(Classify, ExhaustiveTruthTable) {
    const auto pass = parse_success_mark("OK");
    const auto fail = parse_success_mark("-");
    EXPECT_EQ(classify(Verdict::InRange, pass).validity, Validity::Valid);
    EXPECT_EQ(classify(Verdict::OutOfRange, fail).validity, Validity::Valid);
    const auto in_fail = classify(Verdict::InRange, fail);
    EXPECT_EQ(in_fail.validity, Validity::Anomalous);
    EXPECT_FALSE(in_fail.reason.empty());
    const auto out_pass = classify(Verdict::OutOfRange, pass);
    EXPECT_EQ(out_pass.validity, Validity::Anomalous);
    EXPECT_FALSE(out_pass.reason.empty());
}

TEST(Classify, UnknownVerdictThrows) {
    try {
        classify(Verdict::Unknown, parse_success_mark("OK"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnknownVerdict);
    }
}

TEST(AssessRow, DefaultUnitAndUnparseableCells) {
    auto bare = row("R-1", "1.097", "[1.076, 1.224] V", "OK");
    bare.default_unit = "V";
    EXPECT_TRUE(assess_row(bare).is_valid());

    const auto typo = assess_row(row("R-2", "1.1O3 V", "[1.076, 1.224] V", "OK"));
    EXPECT_EQ(typo.verdict, Verdict::Unknown);
    EXPECT_FALSE(typo.validity);
    EXPECT_FALSE(typo.detail.empty());

    const auto bad_limits = assess_row(row("R-3", "1.1 V", "about one volt", "OK"));
    EXPECT_EQ(bad_limits.verdict, Verdict::Unknown);
}

TEST(ValidateObservations, Examples) {
    const std::vector<Observation> clean = {row("A-1", "1.1 V", "[1, 1.2] V", "OK"),
                                            row("A-2", "1.3 V", "[1, 1.2] V", "-")};
    const auto ok = validate_observations(clean);
    EXPECT_EQ(ok.status, ReportStatus::OK);
    EXPECT_TRUE(ok.anomalies.empty());

    const std::vector<Observation> mixed = {row("B-2", "1.3 V", "[1, 1.2] V", "OK"),
                                            row("B-1", "1.1 V", "[1, 1.2] V", "OK"),
                                            row("B-0", "1.x V", "[1, 1.2] V", "OK")};
    const auto pending = validate_observations(mixed);
    EXPECT_EQ(pending.status, ReportStatus::Pending);
    ASSERT_EQ(pending.anomalies.size(), 2u);
    EXPECT_EQ(pending.anomalies[0].observation_id, "B-0");
    EXPECT_EQ(pending.anomalies[0].verdict, Verdict::Unknown);
    EXPECT_EQ(pending.anomalies[1].observation_id, "B-2");

    const auto empty = validate_observations({});
    EXPECT_EQ(empty.status, ReportStatus::OK);
    EXPECT_TRUE(empty.anomalies.empty());
}
