#include "memaudit/calendar.hpp"
#include "memaudit/csv.hpp"
#include "memaudit/error.hpp"
#include "memaudit/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace memaudit;
using std::chrono::day;
using std::chrono::month;
using std::chrono::year;

namespace {
Date ymd(int y, unsigned m, unsigned d) { return Date{year{y}, month{m}, day{d}}; }
}  // namespace

TEST(Calendar, ParsesIsoDates) {
    EXPECT_EQ(parse_iso_date("2019-03-15"), ymd(2019, 3, 15));
    EXPECT_EQ(parse_iso_date("2020-02-29"), ymd(2020, 2, 29));
    EXPECT_THROW(parse_iso_date("2019-02-29"), DataError);
    EXPECT_THROW(parse_iso_date("2019-3-15"), DataError);
    EXPECT_THROW(parse_iso_date("2019-03-15x"), DataError);
    EXPECT_FALSE(try_parse_iso_date("15/03/2019"));
}

TEST(Calendar, ParsesPeriods) {
    EXPECT_EQ(parse_period("2020-06"), ymd(2020, 6, 1));
    EXPECT_EQ(parse_period("2020-Q4"), ymd(2020, 10, 1));
    EXPECT_EQ(parse_period("2020-Q1"), ymd(2020, 1, 1));
    EXPECT_EQ(parse_period("2020-06-30"), ymd(2020, 6, 30));
    EXPECT_THROW(parse_period("2020-Q5"), DataError);
    EXPECT_THROW(parse_period("2020-13"), DataError);
}

TEST(Calendar, UsDates) {
    EXPECT_EQ(try_parse_us_date("03/15/2019"), ymd(2019, 3, 15));
    EXPECT_EQ(try_parse_us_date("3/5/2019"), ymd(2019, 3, 5));
    EXPECT_FALSE(try_parse_us_date("02/30/2019"));
    EXPECT_FALSE(try_parse_us_date("2019-03-15"));
}

TEST(Calendar, Formatting) {
    EXPECT_EQ(to_iso(ymd(2010, 12, 31)), "2010-12-31");
    EXPECT_EQ(long_date(ymd(2019, 3, 15)), "March 15, 2019");
    EXPECT_EQ(ordinal_date(ymd(2010, 12, 31)), "December 31st, 2010");
    EXPECT_EQ(ordinal_date(ymd(2010, 12, 1)), "December 1st, 2010");
    EXPECT_EQ(ordinal_date(ymd(2010, 12, 2)), "December 2nd, 2010");
    EXPECT_EQ(ordinal_date(ymd(2010, 12, 3)), "December 3rd, 2010");
    EXPECT_EQ(ordinal_date(ymd(2010, 12, 11)), "December 11th, 2010");
    EXPECT_EQ(ordinal_date(ymd(2010, 12, 12)), "December 12th, 2010");
    EXPECT_EQ(ordinal_date(ymd(2010, 12, 13)), "December 13th, 2010");
    EXPECT_EQ(ordinal_date(ymd(2010, 12, 22)), "December 22nd, 2010");
    EXPECT_EQ(period_key(ymd(2020, 11, 3), Frequency::quarterly), "2020-Q4");
    EXPECT_EQ(period_key(ymd(2020, 11, 3), Frequency::monthly), "2020-11");
    EXPECT_EQ(period_key(ymd(2020, 11, 3), Frequency::daily), "2020-11-03");
}

TEST(Calendar, Arithmetic) {
    EXPECT_EQ(end_of_month(ymd(2020, 2, 10)), ymd(2020, 2, 29));
    EXPECT_EQ(first_of_month(ymd(2020, 2, 10)), ymd(2020, 2, 1));
    EXPECT_EQ(previous_day(ymd(2021, 1, 1)), ymd(2020, 12, 31));
    EXPECT_EQ(add_days(ymd(2020, 12, 31), 1), ymd(2021, 1, 1));
    EXPECT_EQ(days_between(ymd(2021, 1, 1), ymd(2020, 1, 1)), 366);
    EXPECT_EQ(quarter_of(ymd(2020, 9, 30)), 3);
    EXPECT_EQ(parse_frequency("quarterly"), Frequency::quarterly);
    EXPECT_THROW(parse_frequency("weekly"), DataError);
}

TEST(Csv, QuotedFieldsAndNewlines) {
    const auto rows = csv::parse("a,b,c\r\n1,\"x, \"\"y\"\"\",\"two\nlines\"\n\n3,4,5");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].fields, (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(rows[1].fields[1], "x, \"y\"");
    EXPECT_EQ(rows[1].fields[2], "two\nlines");
    EXPECT_EQ(rows[2].line, 5u);
}

TEST(Csv, UnterminatedQuoteIsAnError) { EXPECT_THROW(csv::parse("a,\"b\n"), DataError); }

TEST(Csv, HeaderLookupIsNormalized) {
    const auto rows = csv::parse(" Date ,VALUE\n");
    csv::Header h(rows[0]);
    EXPECT_EQ(h.require("date"), 0u);
    EXPECT_EQ(h.find("value"), 1u);
    EXPECT_FALSE(h.find("market_cap"));
    EXPECT_THROW(h.require("market_cap"), DataError);
}

TEST(Csv, EscapeRoundTrip) {
    const std::vector<std::string> fields{"plain", "a,b", "say \"hi\"", "x\ny", ""};
    const auto rows = csv::parse(csv::join(fields) + "\n");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].fields, fields);
}

TEST(Csv, NumbersAndFixed) {
    EXPECT_EQ(csv::parse_double(" 2.5 "), 2.5);
    EXPECT_FALSE(csv::parse_double("2.5x"));
    EXPECT_FALSE(csv::parse_double("nan"));
    EXPECT_FALSE(csv::parse_double(""));
    EXPECT_EQ(csv::fixed(-0.00001, 2), "0.00");
    EXPECT_EQ(csv::fixed(2834.4, 2), "2834.40");
    EXPECT_EQ(csv::fixed(1.0 / 3.0, 4), "0.3333");
}

TEST(Random, UniformIndexStaysInRangeAndCoversIt) {
    std::mt19937_64 rng(3);
    std::vector<int> seen(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto k = uniform_index(rng, 7);
        ASSERT_LT(k, 7u);
        ++seen[k];
    }
    for (int c : seen) EXPECT_GT(c, 800);
}

TEST(Random, NormalSamplerMoments) {
    std::mt19937_64 rng(11);
    NormalSampler normal;
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = normal(rng);
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Random, DerivedSeedsDifferPerStream) {
    EXPECT_NE(derive_seed(7, {2019}), derive_seed(7, {2020}));
    EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
    EXPECT_EQ(derive_seed(7, {2019, 3}), derive_seed(7, {2019, 3}));
}
