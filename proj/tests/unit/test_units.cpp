#include "reportkg/error.hpp"
#include "reportkg/units.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <random>

using namespace reportkg;
using namespace reportkg::units;

namespace {

Decimal d(const char* text) { return *Decimal::parse(text); }

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::IoError;
}

}  // namespace

TEST(ParseQuantity, Examples) {
    const auto volts = parse_quantity("1.097 V");
    EXPECT_EQ(volts.value, d("1.097"));
    EXPECT_EQ(volts.dimension(), Dimension::Voltage);
    EXPECT_EQ(volts.unit.scale, Decimal(1));
    EXPECT_EQ(volts.raw, "1.097 V");

    const auto ohms = parse_quantity("1.9MΩ");
    EXPECT_EQ(ohms.base_value(), d("1900000"));
    EXPECT_EQ(ohms.dimension(), Dimension::Resistance);

    const auto zero = parse_quantity("0 V");
    EXPECT_TRUE(zero.value.is_zero());
    EXPECT_EQ(zero.dimension(), Dimension::Voltage);

    const auto bare = parse_quantity("12.5");
    EXPECT_EQ(bare.value, d("12.5"));
    EXPECT_EQ(bare.dimension(), Dimension::Dimensionless);
}

TEST(ParseQuantity, SynonymsShareAUnit) {
    EXPECT_EQ(parse_quantity("3 µA"), parse_quantity("3 uA"));
    EXPECT_EQ(parse_quantity("10 Ohm"), parse_quantity("10 ohm"));
    EXPECT_EQ(parse_quantity("10 Ohm"), parse_quantity("10 Ω"));
    EXPECT_EQ(parse_quantity("10 Ω"), parse_quantity("10 Ω"));  // OHM SIGN
}

TEST(ParseQuantity, Errors) {
    EXPECT_EQ(kind_of([] { parse_quantity("V"); }), ErrorKind::UnparseableQuantity);
    EXPECT_EQ(kind_of([] { parse_quantity("   "); }), ErrorKind::UnparseableQuantity);
    EXPECT_EQ(kind_of([] { parse_quantity("1.1O3 V"); }), ErrorKind::UnparseableQuantity);
    EXPECT_EQ(kind_of([] { parse_quantity("5 furlongs"); }), ErrorKind::UnknownUnit);
}

TEST(ParseLimits, Examples) {
    const auto pol = parse_acceptance_limits("[1.076, 1.224] V");
    EXPECT_EQ(pol.kind, LimitKind::ClosedInterval);
    EXPECT_EQ(pol.lower->base_value(), d("1.076"));
    EXPECT_EQ(pol.upper->base_value(), d("1.224"));

    const auto isolation = parse_acceptance_limits("1.1M - 1.9MΩ");
    EXPECT_EQ(isolation.kind, LimitKind::ClosedInterval);
    EXPECT_EQ(isolation.lower->base_value(), d("1100000"));
    EXPECT_EQ(isolation.upper->base_value(), d("1900000"));
    EXPECT_EQ(isolation.dimension(), Dimension::Resistance);

    const auto rail = parse_acceptance_limits("[3.198, 3.532] V");
    EXPECT_EQ(rail.kind, LimitKind::ClosedInterval);

    const auto degenerate = parse_acceptance_limits("[0, 0] V");
    EXPECT_EQ(degenerate.lower->base_value(), degenerate.upper->base_value());
}

TEST(ParseLimits, OneSided) {
    const auto at_least = parse_acceptance_limits(">= 100 MΩ");
    EXPECT_EQ(at_least.kind, LimitKind::AtLeast);
    EXPECT_TRUE(at_least.lower);
    EXPECT_FALSE(at_least.upper);

    const auto at_most = parse_acceptance_limits("≤ 5 mA");
    EXPECT_EQ(at_most.kind, LimitKind::AtMost);
    EXPECT_FALSE(at_most.lower);
    EXPECT_EQ(at_most.upper->base_value(), d("0.005"));
}

TEST(ParseLimits, Errors) {
    EXPECT_EQ(kind_of([] { parse_acceptance_limits("whatever"); }), ErrorKind::UnparseableRange);
    EXPECT_EQ(kind_of([] { parse_acceptance_limits("[2, 1] V"); }), ErrorKind::InvertedInterval);
    EXPECT_EQ(kind_of([] { parse_acceptance_limits("[2 V, 1000 mV]"); }), ErrorKind::InvertedInterval);
}

TEST(Convert, Examples) {
    const auto& registry = UnitRegistry::defaults();
    const auto mega = convert(parse_quantity("1900000 Ω"), registry.unit("MΩ"));
    EXPECT_EQ(mega.value, d("1.9"));
    EXPECT_EQ(format_quantity(mega), "1.9 MΩ");

    const auto milli = convert(parse_quantity("1.097 V"), registry.unit("mV"));
    EXPECT_EQ(milli.value, d("1097"));

    EXPECT_EQ(kind_of([&] { convert(parse_quantity("5 V"), registry.unit("Ω")); }), ErrorKind::DimensionMismatch);
}

TEST(Convert, DimensionlessAdoptsTarget) {
    const auto adopted = convert(parse_quantity("1.2"), UnitRegistry::defaults().unit("kΩ"));
    EXPECT_EQ(adopted.dimension(), Dimension::Resistance);
    EXPECT_EQ(adopted.base_value(), d("1200"));
}

TEST(Convert, RoundTripIsExact) {
    const auto& registry = UnitRegistry::defaults();
    const char* const symbols[] = {"pV", "nV", "µV", "mV", "V", "kV", "MV", "GV"};
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long long> mantissa(-99'999'999, 99'999'999);
    std::uniform_int_distribution<int> exponent(-9, 9);
    std::uniform_int_distribution<std::size_t> which(0, std::size(symbols) - 1);
    for (int i = 0; i < 1000; ++i) {
        Quantity q{Decimal(Decimal::Coefficient(mantissa(rng)), exponent(rng)), registry.unit(symbols[which(rng)]), ""};
        const Unit target = registry.unit(symbols[which(rng)]);
        const auto there = convert(q, target);
        EXPECT_EQ(there.base_value(), q.base_value());
        EXPECT_EQ(convert(there, q.unit), q);
    }
}

TEST(SuccessMark, Examples) {
    EXPECT_EQ(parse_success_mark("OK").verdict, Mark::Pass);
    EXPECT_EQ(parse_success_mark("-").verdict, Mark::Fail);
    EXPECT_EQ(parse_success_mark("").verdict, Mark::Fail);
    EXPECT_EQ(parse_success_mark("  oK ").verdict, Mark::Pass);
    EXPECT_EQ(parse_success_mark("OK!").verdict, Mark::Fail);
}

TEST(Registry, ConfigExtendsDefaults) {
    auto config = KeyValueConfig::parse(
        "unit.Volt = Voltage, V\n"
        "prefix.d = -1\n"
        "success.pass = ok, pass, passed\n");
    const auto registry = UnitRegistry::from_config(config);
    EXPECT_EQ(registry.parse_quantity("12 dVolt").base_value(), d("1.2"));
    EXPECT_EQ(registry.parse_success_mark("Passed").verdict, Mark::Pass);
    EXPECT_EQ(registry.parse_success_mark("OK").verdict, Mark::Pass);
    EXPECT_EQ(UnitRegistry::defaults().parse_success_mark("pass").verdict, Mark::Fail);
    EXPECT_EQ(kind_of([] { UnitRegistry::from_config(KeyValueConfig::parse("unit.Hz = Dimensionless\n")); }),
              ErrorKind::ConfigError);
}

TEST(Format, LimitsRoundTrip) {
    for (const char* text : {"[1.076, 1.224] V", "1.1M - 1.9MΩ", ">= 100 MΩ", "<= 5 mA", "[1.5, 2.5]", "900k - 1.9MΩ"}) {
        const auto limits = parse_acceptance_limits(text);
        EXPECT_EQ(parse_acceptance_limits(format_limits(limits)), limits) << text;
    }
    EXPECT_EQ(format_limits(parse_acceptance_limits("[1.076, 1.224] V")), "[1.076, 1.224] V");
}

TEST(Corpus, EveryEntryParsesToItsStructureWithinOneSecond) {
    const auto start = std::chrono::steady_clock::now();
    const auto result = support::check_parser_corpus(support::fixture("parser_corpus.json"));
    const auto elapsed = std::chrono::steady_clock::now() - start;
    EXPECT_GT(result.entries, 40u);
    for (const auto& failure : result.failures) {
        ADD_FAILURE() << failure;
    }
    EXPECT_LT(elapsed, std::chrono::seconds(1));
}
