#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chronocal/core.hpp"
#include "support/oracles.hpp"

using namespace chronocal;

namespace {

std::size_t idx(const char* label) { return *default_taxonomy()->index_of(label); }

DurationDistribution dist(std::initializer_list<std::pair<const char*, double>> mass) {
    std::vector<double> p(default_taxonomy()->size(), 0.0);
    for (const auto& [label, v] : mass) p[idx(label)] = v;
    return {default_taxonomy(), p};
}

}  // namespace

TEST(Duration, LogSeconds) {
    EXPECT_NEAR(to_log_seconds(Duration::days(1)), 11.366742954792146, 1e-12);
    EXPECT_EQ(to_log_seconds(Duration::seconds(1)), 0.0);
    EXPECT_NEAR(to_log_seconds(Duration::weeks(1)), 13.31265310384746, 1e-12);
}

TEST(Duration, ClampsToOneSecond) {
    EXPECT_EQ(Duration(0.25).count(), 1.0);
    EXPECT_EQ(Duration(-5).count(), 1.0);
    EXPECT_THROW(Duration(std::nan("")), ValidationError);
    EXPECT_DOUBLE_EQ(Duration::years(4).count(), 126144000.0);
    EXPECT_DOUBLE_EQ(Duration::years(2).in_years(), 2.0);
}

TEST(Duration, LogRoundTrip) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double s = std::exp(std::uniform_real_distribution<double>(0, 25)(rng));
        const Duration d(s);
        EXPECT_NEAR(std::exp(to_log_seconds(d)) / s, 1.0, 1e-12);
    }
}

TEST(Taxonomy, DefaultHasThirteenIncreasingClasses) {
    const auto& tax = *default_taxonomy();
    ASSERT_EQ(tax.size(), 13u);
    for (std::size_t i = 1; i < tax.size(); ++i) EXPECT_LT(tax[i - 1].canonical, tax[i].canonical);
}

TEST(Taxonomy, RejectsBadClassLists) {
    EXPECT_THROW(DurationTaxonomy({}), ValidationError);
    EXPECT_THROW(DurationTaxonomy({{"a", Duration(10)}, {"b", Duration(10)}}), ValidationError);
    EXPECT_THROW(DurationTaxonomy({{"a", Duration(10)}, {"a", Duration(20)}}), ValidationError);
}

TEST(Distribution, Validates) {
    EXPECT_THROW(DurationDistribution(default_taxonomy(), {1.0}), ValidationError);
    std::vector<double> p(13, 0.0);
    p[0] = 0.5;
    EXPECT_THROW(DurationDistribution(default_taxonomy(), p), ValidationError);
    p[1] = 0.5;
    EXPECT_NO_THROW(DurationDistribution(default_taxonomy(), p));
    p[1] = 0.6;
    p[2] = -0.1;
    EXPECT_THROW(DurationDistribution(default_taxonomy(), p), ValidationError);
}

TEST(NearestClass, Examples) {
    const auto& tax = *default_taxonomy();
    EXPECT_EQ(nearest_class(Duration::years(1), tax), idx("1 year"));
    // |ln 22 - ln 10| = 0.788 < |ln 50 - ln 22| = 0.821
    EXPECT_EQ(nearest_class(Duration::years(22), tax), idx("1 decade"));
    for (std::size_t i = 0; i + 1 < tax.size(); ++i) {
        const double mid = std::sqrt(tax[i].canonical.count() * tax[i + 1].canonical.count());
        EXPECT_EQ(nearest_class(Duration(mid), tax), i) << "between " << tax[i].label << " and " << tax[i + 1].label;
    }
}

TEST(NearestClass, IdempotentOnCanonicals) {
    const auto& tax = *default_taxonomy();
    for (std::size_t i = 0; i < tax.size(); ++i) EXPECT_EQ(nearest_class(tax[i].canonical, tax), i);
}

TEST(CdfAt, Examples) {
    EXPECT_DOUBLE_EQ(cdf_at(dist({{"1 year", 0.5}, {"1 decade", 0.5}}), Duration::years(3)), 0.5);
    EXPECT_EQ(cdf_at(dist({{"1 minute", 1.0}}), Duration::seconds(1)), 0.0);
    EXPECT_EQ(cdf_at(dist({{"1 year", 0.3}, {"1 century", 0.7}}), Duration::years(200)), 1.0);
    EXPECT_EQ(cdf_at(dist({{"1 second", 1.0}}), Misalignment(0.0)), 0.0);
}

TEST(CdfAt, InclusiveAtEquality) {
    EXPECT_EQ(cdf_at(dist({{"1 year", 1.0}}), Duration::years(1)), 1.0);
}

TEST(CdfAt, MonotoneAndReachesOne) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(13);
        double s = 0;
        for (auto& v : p) s += (v = std::uniform_real_distribution<double>(0, 1)(rng));
        for (auto& v : p) v /= s;
        const DurationDistribution d(default_taxonomy(), p);
        double prev = 0.0;
        for (double ls = 0.0; ls < 23.0; ls += 0.25) {
            const double c = cdf_at(d, Misalignment(std::exp(ls)));
            EXPECT_GE(c, prev);
            prev = c;
        }
        EXPECT_EQ(cdf_at(d, Duration::years(100)), 1.0);
    }
}

TEST(Expectation, Examples) {
    EXPECT_NEAR(expectation_log_seconds(dist({{"1 year", 1.0}})).count() / kYearSeconds, 1.0, 1e-12);
    EXPECT_NEAR(expectation_log_seconds(dist({{"1 year", 0.5}, {"1 century", 0.5}})).in_years(), 10.0, 1e-9);
    const auto& tax = *default_taxonomy();
    std::vector<double> secs, w;
    for (const auto& c : tax.classes()) {
        secs.push_back(c.canonical.count());
        w.push_back(1.0 / 13.0);
    }
    const double expect = oracle::geometric_mean(secs, w);
    EXPECT_NEAR(expectation_log_seconds(DurationDistribution::uniform(default_taxonomy())).count() / expect, 1.0, 1e-12);
}

TEST(Expectation, WithinTaxonomyRange) {
    std::mt19937_64 rng(5);
    const auto& tax = *default_taxonomy();
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(13);
        double s = 0;
        for (auto& v : p) s += (v = std::uniform_real_distribution<double>(0, 1)(rng));
        for (auto& v : p) v /= s;
        const auto e = expectation_log_seconds(DurationDistribution(default_taxonomy(), p));
        EXPECT_GE(e.count(), tax[0].canonical.count());
        EXPECT_LE(e.count(), tax[12].canonical.count());
    }
}

TEST(Argmax, TieBreaksToSmallerClass) {
    EXPECT_EQ(argmax_class(dist({{"1 year", 0.9}, {"1 decade", 0.1}})), idx("1 year"));
    EXPECT_EQ(argmax_class(DurationDistribution::uniform(default_taxonomy())), 0u);
    EXPECT_EQ(argmax_class(dist({{"1 month", 0.4}, {"1 year", 0.4}, {"1 decade", 0.2}})), idx("1 month"));
}

TEST(Dates, ParseGranularities) {
    EXPECT_EQ(Date::parse("2019").granularity(), DateGranularity::kYear);
    EXPECT_EQ(Date::parse("2020-06").month(), 6u);
    const auto d = Date::parse("2021-03-19");
    EXPECT_EQ(d.day(), 19u);
    EXPECT_EQ(d.to_string(), "2021-03-19");
    EXPECT_THROW(Date::parse("2021-13"), ValidationError);
    EXPECT_THROW(Date::parse("2021-02-30"), ValidationError);
    EXPECT_THROW(Date::parse("21"), ValidationError);
    EXPECT_THROW(Date::parse("2021/03/19"), ValidationError);
}

TEST(Dates, SpanMatchesJulianDayOracle) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        const int y1 = 1800 + static_cast<int>(rng() % 300), y2 = 1800 + static_cast<int>(rng() % 300);
        const unsigned m1 = 1 + rng() % 12, m2 = 1 + rng() % 12;
        const unsigned d1 = 1 + rng() % 28, d2 = 1 + rng() % 28;
        const Date a(y1, DateGranularity::kDay, m1, d1), b(y2, DateGranularity::kDay, m2, d2);
        const long days = oracle::julian_day(y2, m2, d2) - oracle::julian_day(y1, m1, d1);
        EXPECT_EQ(span_seconds(a, b), static_cast<double>(days) * kDaySeconds);
    }
    EXPECT_EQ(span_seconds(Date::parse("2010-01-01"), Date::parse("2021-03-19")), 4095 * kDaySeconds);
}

TEST(Dates, CoarserGranularityWins) {
    EXPECT_EQ(span_seconds(Date(1856), Date(1878)), 22 * kYearSeconds);
    EXPECT_EQ(span_seconds(Date::parse("2018"), Date::parse("2021-03-19")), 3 * kYearSeconds);
    EXPECT_EQ(span_seconds(Date::parse("2020-06"), Date::parse("2021-02")), 8 * kMonthSeconds);
}

TEST(Misalignment, FromDates) {
    EXPECT_EQ(misalignment_between(Date(2018), Date(2021)).count(), 3 * kYearSeconds);
    EXPECT_EQ(misalignment_between(Date(2021), Date(2021)).count(), 0.0);
    EXPECT_THROW(misalignment_between(Date(2021), Date(2018)), ValidationError);
    EXPECT_THROW(Misalignment(-1.0), ValidationError);
}
