#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "chronocal/ingest.hpp"

using namespace chronocal;

namespace {

ParseResult<FactRecord> parse(const std::string& text, ParseMode mode = ParseMode::kStrict) {
    std::istringstream in(text);
    return parse_facts(in, mode);
}

AnswerTimeline timeline(std::initializer_list<std::pair<const char*, const char*>> entries) {
    AnswerTimeline t;
    for (const auto& [a, s] : entries) t.entries.push_back({a, Date::parse(s), std::nullopt});
    return t;
}

}  // namespace

TEST(ParseFacts, CopiesDuration) {
    const auto r = parse(R"({"id":"f1","statement":"The games were held in Athens","duration_seconds":126144000,"split":"test"})");
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].gold_duration->count(), 4 * kYearSeconds);
    EXPECT_EQ(r.records[0].split, Split::kTest);
}

TEST(ParseFacts, EmptyStatementIsAValidationError) {
    const std::string line = R"({"id":"f1","statement":"","split":"test"})";
    EXPECT_THROW(parse(line), ValidationError);
    const auto lenient = parse(line + "\n" + R"({"id":"f2","statement":"ok","split":"dev"})", ParseMode::kLenient);
    ASSERT_EQ(lenient.records.size(), 1u);
    ASSERT_EQ(lenient.diagnostics.size(), 1u);
    EXPECT_EQ(lenient.diagnostics[0].line, 1u);
}

TEST(ParseFacts, DuplicateIdAbortsInBothModes) {
    const std::string text = R"({"id":"x","statement":"a","split":"test"}
{"id":"x","statement":"b","split":"test"})";
    EXPECT_THROW(parse(text), ValidationError);
    EXPECT_THROW(parse(text, ParseMode::kLenient), ValidationError);
}

TEST(ParseFacts, MalformedLineReportsLineNumber) {
    try {
        parse("\n{\"id\":\"a\",\"statement\":\"s\",\"split\":\"test\"}\n{not json\n");
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(ParseFacts, TemplateFallbackIsFlagged) {
    const auto r = parse(R"({"id":"q","question":"Who are the judges on Star Search?","answer":"Lin Mei","split":"test"})");
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_TRUE(r.records[0].template_converted);
    EXPECT_EQ(r.records[0].statement, "the judges on Star Search are Lin Mei");
}

TEST(ParseFacts, EmptyTimelineAnswerDropsRecord) {
    const auto r = parse(
        R"({"id":"t","statement":"s","timeline":[{"answer":"","start":"2001"},{"answer":"B","start":"2003"}],"split":"train"})");
    EXPECT_TRUE(r.records.empty());
    ASSERT_EQ(r.diagnostics.size(), 1u);
}

TEST(ParseFacts, RoundTripIsLossFree) {
    std::mt19937_64 rng(1);
    std::ostringstream text;
    std::vector<FactRecord> originals;
    for (int i = 0; i < 50; ++i) {
        FactRecord f;
        f.id = "r" + std::to_string(i);
        f.statement = "statement number " + std::to_string(rng() % 1000);
        if (i % 3 == 0) f.question = "question?";
        if (i % 3 == 0) f.answer = "answer";
        if (i % 2 == 0) f.gold_duration = Duration(1.0 + static_cast<double>(rng() % 4000000000ULL) / 7.0);
        if (i % 5 == 0) f.timeline = timeline({{"A", "2001-02"}, {"B", "2004-07-09"}});
        f.split = static_cast<Split>(i % 3);
        originals.push_back(f);
        text << fact_to_json(f).dump() << "\n";
    }
    std::istringstream in(text.str());
    const auto parsed = parse_facts(in).records;
    ASSERT_EQ(parsed.size(), originals.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) EXPECT_EQ(fact_to_json(parsed[i]), fact_to_json(originals[i]));
}

TEST(DeriveTimeline, YearGranularityExamples) {
    auto d = derive_duration_timeline(timeline({{"Porto", "1856"}, {"Toronto", "1878"}}));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].first, "Porto");
    EXPECT_EQ(d[0].second, Duration::years(22));

    d = derive_duration_timeline(timeline({{"Lin", "2015"}, {"Other", "2017"}}));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].second, Duration::years(2));

    d = derive_duration_timeline(timeline({{"A", "2019"}, {"B", "2019"}}));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].second, Duration::months(1));
}

TEST(DeriveTimeline, ExplicitEndAndTrailingOpenSpan) {
    AnswerTimeline t = timeline({{"A", "2000"}, {"B", "2004"}, {"C", "2010"}});
    t.entries[2].end = Date::parse("2013");
    auto d = derive_duration_timeline(t);
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d[2].second, Duration::years(3));

    d = derive_duration_timeline(timeline({{"A", "2000"}, {"B", "2004"}, {"C", "2010"}}));
    EXPECT_EQ(d.size(), 2u);
    for (const auto& [_, dur] : d) EXPECT_GE(dur.count(), kMonthSeconds);
}

TEST(DeriveTimeline, Errors) {
    EXPECT_THROW(derive_duration_timeline(timeline({{"A", "2010"}, {"B", "2004"}})), ValidationError);
    EXPECT_THROW(derive_duration_timeline(timeline({{"", "2001"}, {"B", "2004"}})), ValidationError);
}

TEST(DeriveSituatedQA, Examples) {
    EXPECT_EQ(derive_duration_situatedqa(Date(2015), Date(2017)), Duration::years(2));
    EXPECT_EQ(derive_duration_situatedqa(Date::parse("2020-06"), Date::parse("2020-06")), Duration::months(1));
    const Duration d = derive_duration_situatedqa(Date::parse("2010-01-01"), Date::parse("2021-03-19"));
    EXPECT_EQ(d.count(), 4095 * kDaySeconds);
    EXPECT_NEAR(d.in_years(), 11.219178, 1e-6);
    EXPECT_THROW(derive_duration_situatedqa(Date(2017), Date(2015)), ValidationError);
}

TEST(Cloze, AppendsSuffix) {
    EXPECT_EQ(cloze_format("Lin Mei is the judge on Star Search"),
              "Lin Mei is the judge on Star Search , lasting [MASK] [MASK] .");
    EXPECT_EQ(cloze_format("Ana Costa (painter) lived in Porto, Portugal."),
              "Ana Costa (painter) lived in Porto, Portugal , lasting [MASK] [MASK] .");
    EXPECT_THROW(cloze_format("   "), ValidationError);
}

TEST(Cloze, ReplacesSpanInPlace) {
    EXPECT_EQ(cloze_format("It took 3 months to make profit.", "3 Months"), "It took [MASK] [MASK] to make profit.");
    EXPECT_THROW(cloze_format("It took a while.", "3 months"), ValidationError);
}

TEST(Cloze, AlwaysTwoMasks) {
    auto count = [](const std::string& s) {
        std::size_t n = 0;
        for (auto p = s.find(kMaskToken); p != std::string::npos; p = s.find(kMaskToken, p + 1)) ++n;
        return n;
    };
    for (const char* s : {"a", "b c.", "x y z!", "It lasted 2 years"}) EXPECT_EQ(count(cloze_format(s)), 2u);
    EXPECT_EQ(count(cloze_format("It lasted 2 years", "2 years")), 2u);
}

TEST(MCTaco, MaskedInputPrependsContext) {
    MCTacoRecord r;
    r.id = "m";
    r.context = "About 30% of Ratners's profit already is derived from the U.S.";
    r.question = "How long did it take to make profit?";
    r.statement = "It took 3 months to make profit.";
    r.options = {{"3 months", Duration::months(3), true}, {"3 seconds", Duration::seconds(3), false}};
    EXPECT_EQ(mctaco_masked_input(r),
              "About 30% of Ratners's profit already is derived from the U.S. It took [MASK] [MASK] to make profit.");
}

TEST(MCTaco, ParseValidates) {
    std::istringstream ok(R"({"id":"m1","context":"c","question":"q","options":[{"text":"1 day","duration_seconds":86400,"label":true}]})");
    const auto r = parse_mctaco(ok);
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_TRUE(r.records[0].options[0].gold_label);
    std::istringstream empty(R"({"id":"m1","context":"c","question":"q","options":[]})");
    EXPECT_THROW(parse_mctaco(empty), ValidationError);
}

TEST(Stats, Histograms) {
    const auto tax = default_taxonomy();
    std::vector<FactRecord> recs(4);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].id = std::to_string(i);
        recs[i].gold_duration = Duration::years(1);
    }
    auto s = compute_stats(recs, *tax);
    EXPECT_EQ(s.percentages[*tax->index_of("1 year")], 100.0);

    recs[0].gold_duration = recs[1].gold_duration = Duration::days(1);
    recs[2].gold_duration = recs[3].gold_duration = Duration::years(100);
    s = compute_stats(recs, *tax);
    EXPECT_EQ(s.percentages[*tax->index_of("1 day")], 50.0);
    EXPECT_EQ(s.percentages[*tax->index_of("1 century")], 50.0);

    recs[1].gold_duration.reset();
    EXPECT_THROW(compute_stats(recs, *tax), ValidationError);
}

TEST(Stats, MatchesIndependentCounter) {
    const auto tax = default_taxonomy();
    std::mt19937_64 rng(99);
    std::vector<FactRecord> recs(100);
    std::map<std::size_t, int> counts;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].id = std::to_string(i);
        const double ls = std::uniform_real_distribution<double>(0, 22.5)(rng);
        recs[i].gold_duration = Duration::from_log_seconds(ls);
        // Counter: linear scan for the minimum log-distance, first wins.
        std::size_t best = 0;
        for (std::size_t k = 1; k < tax->size(); ++k)
            if (std::abs(ls - std::log((*tax)[k].canonical.count())) < std::abs(ls - std::log((*tax)[best].canonical.count())))
                best = k;
        ++counts[best];
    }
    const auto s = compute_stats(recs, *tax);
    double total = 0;
    for (std::size_t k = 0; k < tax->size(); ++k) {
        EXPECT_DOUBLE_EQ(s.percentages[k], counts[k]) << (*tax)[k].label;
        total += s.percentages[k];
    }
    EXPECT_NEAR(total, 100.0, 1e-6);
}
