#pragma once

// Domain types shared by every chronocal module: durations, the duration
// class taxonomy, distributions over it, calendar dates at mixed granularity
// and the fact records that carry gold durations.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chronocal/error.hpp"

namespace chronocal {

inline constexpr double kMinuteSeconds = 60.0;
inline constexpr double kHourSeconds = 3600.0;
inline constexpr double kDaySeconds = 86400.0;
inline constexpr double kWeekSeconds = 7 * kDaySeconds;
inline constexpr double kMonthSeconds = 30 * kDaySeconds;
inline constexpr double kYearSeconds = 365 * kDaySeconds;
inline constexpr double kDecadeSeconds = 10 * kYearSeconds;
inline constexpr double kCenturySeconds = 100 * kYearSeconds;

/// A positive time span. Stored in seconds and clamped up to one second so
/// that its logarithm is always finite.
class Duration {
public:
    Duration() = default;
    explicit Duration(double seconds) {
        if (std::isnan(seconds) || std::isinf(seconds))
            throw ValidationError("duration must be finite");
        seconds_ = std::max(seconds, 1.0);
    }

    static Duration from_log_seconds(double log_seconds) { return Duration(std::exp(log_seconds)); }
    static Duration seconds(double n) { return Duration(n); }
    static Duration minutes(double n) { return Duration(n * kMinuteSeconds); }
    static Duration hours(double n) { return Duration(n * kHourSeconds); }
    static Duration days(double n) { return Duration(n * kDaySeconds); }
    static Duration weeks(double n) { return Duration(n * kWeekSeconds); }
    static Duration months(double n) { return Duration(n * kMonthSeconds); }
    static Duration years(double n) { return Duration(n * kYearSeconds); }

    double count() const { return seconds_; }
    double log_seconds() const { return std::log(seconds_); }
    double in_years() const { return seconds_ / kYearSeconds; }

    friend bool operator==(Duration, Duration) = default;
    friend auto operator<=>(Duration a, Duration b) { return a.seconds_ <=> b.seconds_; }

private:
    double seconds_ = 1.0;
};

inline double to_log_seconds(Duration d) { return d.log_seconds(); }

/// Elapsed time between a model's training date and the query date. Unlike
/// Duration this may be zero (no misalignment).
class Misalignment {
public:
    Misalignment() = default;
    explicit Misalignment(double seconds) {
        if (!(seconds >= 0.0) || std::isinf(seconds))
            throw ValidationError("misalignment must be a finite non-negative number of seconds");
        seconds_ = seconds;
    }
    Misalignment(Duration d) : seconds_(d.count()) {}  // NOLINT: implicit by intent

    double count() const { return seconds_; }
    double in_years() const { return seconds_ / kYearSeconds; }

    friend bool operator==(Misalignment, Misalignment) = default;

private:
    double seconds_ = 0.0;
};

struct DurationClass {
    std::string label;
    Duration canonical;
};

/// Ordered label space for duration classification.
class DurationTaxonomy {
public:
    explicit DurationTaxonomy(std::vector<DurationClass> classes) : classes_(std::move(classes)) {
        if (classes_.empty()) throw ValidationError("taxonomy must have at least one class");
        for (std::size_t i = 0; i < classes_.size(); ++i) {
            if (classes_[i].label.empty()) throw ValidationError("taxonomy labels must be non-empty");
            if (i > 0 && !(classes_[i - 1].canonical < classes_[i].canonical))
                throw ValidationError("taxonomy canonical durations must be strictly increasing (at '" +
                                      classes_[i].label + "')");
            for (std::size_t j = 0; j < i; ++j)
                if (classes_[j].label == classes_[i].label)
                    throw ValidationError("duplicate taxonomy label '" + classes_[i].label + "'");
        }
    }

    std::size_t size() const { return classes_.size(); }
    const DurationClass& operator[](std::size_t i) const { return classes_[i]; }
    std::span<const DurationClass> classes() const { return classes_; }
    Duration canonical(std::size_t i) const { return classes_.at(i).canonical; }

    std::optional<std::size_t> index_of(std::string_view label) const {
        for (std::size_t i = 0; i < classes_.size(); ++i)
            if (classes_[i].label == label) return i;
        return std::nullopt;
    }

    friend bool operator==(const DurationTaxonomy& a, const DurationTaxonomy& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].label != b[i].label || a[i].canonical != b[i].canonical) return false;
        return true;
    }

private:
    std::vector<DurationClass> classes_;
};

using TaxonomyPtr = std::shared_ptr<const DurationTaxonomy>;

/// The 13 default classes, one second to one century.
inline TaxonomyPtr default_taxonomy() {
    static const TaxonomyPtr tax = std::make_shared<const DurationTaxonomy>(std::vector<DurationClass>{
        {"1 second", Duration::seconds(1)},
        {"1 minute", Duration::minutes(1)},
        {"1 hour", Duration::hours(1)},
        {"1 day", Duration::days(1)},
        {"1 week", Duration::weeks(1)},
        {"1 month", Duration::months(1)},
        {"6 months", Duration::months(6)},
        {"1 year", Duration::years(1)},
        {"2 years", Duration::years(2)},
        {"5 years", Duration::years(5)},
        {"1 decade", Duration::years(10)},
        {"5 decades", Duration::years(50)},
        {"1 century", Duration::years(100)},
    });
    return tax;
}

/// Probability mass over the classes of a taxonomy.
class DurationDistribution {
public:
    static constexpr double kSumTolerance = 1e-9;

    DurationDistribution(TaxonomyPtr taxonomy, std::vector<double> probs)
        : taxonomy_(std::move(taxonomy)), probs_(std::move(probs)) {
        if (!taxonomy_) throw ValidationError("distribution needs a taxonomy");
        if (probs_.size() != taxonomy_->size())
            throw ValidationError("distribution has " + std::to_string(probs_.size()) + " entries, taxonomy has " +
                                  std::to_string(taxonomy_->size()));
        double sum = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0) || std::isinf(p)) throw ValidationError("distribution probabilities must be finite and >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kSumTolerance)
            throw ValidationError("distribution probabilities sum to " + std::to_string(sum) + ", expected 1");
    }

    static DurationDistribution point_mass(TaxonomyPtr taxonomy, std::size_t index) {
        std::vector<double> probs(taxonomy->size(), 0.0);
        probs.at(index) = 1.0;
        return {std::move(taxonomy), std::move(probs)};
    }

    static DurationDistribution uniform(TaxonomyPtr taxonomy) {
        const std::size_t k = taxonomy->size();
        return {std::move(taxonomy), std::vector<double>(k, 1.0 / static_cast<double>(k))};
    }

    const DurationTaxonomy& taxonomy() const { return *taxonomy_; }
    const TaxonomyPtr& taxonomy_ptr() const { return taxonomy_; }
    std::span<const double> probs() const { return probs_; }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::size_t size() const { return probs_.size(); }

private:
    TaxonomyPtr taxonomy_;
    std::vector<double> probs_;
};

/// Index minimizing log-second distance to d. Ties go to the smaller class.
inline std::size_t nearest_class(Duration d, const DurationTaxonomy& tax) {
    constexpr double kTieEpsilon = 1e-12;
    const double target = d.log_seconds();
    std::size_t best = 0;
    double best_dist = std::abs(target - tax[0].canonical.log_seconds());
    for (std::size_t i = 1; i < tax.size(); ++i) {
        const double dist = std::abs(target - tax[i].canonical.log_seconds());
        if (dist < best_dist - kTieEpsilon) {
            best = i;
            best_dist = dist;
        }
    }
    return best;
}

/// P(duration <= m): mass on classes whose canonical duration does not
/// exceed the misalignment.
inline double cdf_at(const DurationDistribution& dist, Misalignment m) {
    const auto& tax = dist.taxonomy();
    if (tax[tax.size() - 1].canonical.count() <= m.count()) return 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < tax.size() && tax[i].canonical.count() <= m.count(); ++i) sum += dist[i];
    return std::clamp(sum, 0.0, 1.0);
}

/// Expected duration in log-second space (geometric mean of canonicals).
inline Duration expectation_log_seconds(const DurationDistribution& dist) {
    const auto& tax = dist.taxonomy();
    double acc = 0.0;
    for (std::size_t i = 0; i < tax.size(); ++i) acc += dist[i] * tax[i].canonical.log_seconds();
    const double lo = tax[0].canonical.log_seconds();
    const double hi = tax[tax.size() - 1].canonical.log_seconds();
    return Duration::from_log_seconds(std::clamp(acc, lo, hi));
}

/// Most probable class; ties go to the smaller class.
inline std::size_t argmax_class(const DurationDistribution& dist) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.size(); ++i)
        if (dist[i] > dist[best]) best = i;
    return best;
}

// ---------------------------------------------------------------------------
// Calendar dates

enum class DateGranularity { kYear = 0, kMonth = 1, kDay = 2 };

/// A calendar date known to year, month or day precision. Missing components
/// resolve to January / the first of the month.
class Date {
public:
    Date() = default;
    Date(int year, DateGranularity g = DateGranularity::kYear, unsigned month = 1, unsigned day = 1)
        : year_(year), month_(g == DateGranularity::kYear ? 1 : month),
          day_(g == DateGranularity::kDay ? day : 1), granularity_(g) {
        using namespace std::chrono;
        if (!year_month_day{std::chrono::year{year_}, std::chrono::month{month_}, std::chrono::day{day_}}.ok())
            throw ValidationError("invalid calendar date " + to_string());
    }

    static Date parse(std::string_view text) {
        auto digits = [&](std::string_view s) {
            if (s.empty()) return false;
            return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
        };
        auto num = [](std::string_view s) { return std::stoi(std::string(s)); };
        const auto bad = [&] { return ValidationError("invalid date '" + std::string(text) + "' (expected YYYY, YYYY-MM or YYYY-MM-DD)"); };
        if (text.size() == 4 && digits(text)) return Date(num(text));
        if (text.size() == 7 && text[4] == '-' && digits(text.substr(0, 4)) && digits(text.substr(5, 2)))
            return Date(num(text.substr(0, 4)), DateGranularity::kMonth, static_cast<unsigned>(num(text.substr(5, 2))));
        if (text.size() == 10 && text[4] == '-' && text[7] == '-' && digits(text.substr(0, 4)) &&
            digits(text.substr(5, 2)) && digits(text.substr(8, 2)))
            return Date(num(text.substr(0, 4)), DateGranularity::kDay, static_cast<unsigned>(num(text.substr(5, 2))),
                        static_cast<unsigned>(num(text.substr(8, 2))));
        throw bad();
    }

    int year() const { return year_; }
    unsigned month() const { return month_; }
    unsigned day() const { return day_; }
    DateGranularity granularity() const { return granularity_; }

    std::string to_string() const {
        char buf[32];
        switch (granularity_) {
            case DateGranularity::kYear: std::snprintf(buf, sizeof buf, "%04d", year_); break;
            case DateGranularity::kMonth: std::snprintf(buf, sizeof buf, "%04d-%02u", year_, month_); break;
            case DateGranularity::kDay: std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year_, month_, day_); break;
        }
        return buf;
    }

    friend bool operator==(const Date&, const Date&) = default;

private:
    int year_ = 1970;
    unsigned month_ = 1;
    unsigned day_ = 1;
    DateGranularity granularity_ = DateGranularity::kYear;
};

/// Signed span later - earlier in seconds, measured at the coarser of the two
/// granularities: whole years count 365 days, whole months 30 days, day
/// precision uses actual calendar days.
inline double span_seconds(const Date& earlier, const Date& later) {
    const auto g = std::min(earlier.granularity(), later.granularity());
    switch (g) {
        case DateGranularity::kYear:
            return static_cast<double>(later.year() - earlier.year()) * kYearSeconds;
        case DateGranularity::kMonth: {
            const long months = (later.year() - earlier.year()) * 12L +
                                (static_cast<long>(later.month()) - static_cast<long>(earlier.month()));
            return static_cast<double>(months) * kMonthSeconds;
        }
        case DateGranularity::kDay: {
            using namespace std::chrono;
            const sys_days a{std::chrono::year{earlier.year()} / std::chrono::month{earlier.month()} / std::chrono::day{earlier.day()}};
            const sys_days b{std::chrono::year{later.year()} / std::chrono::month{later.month()} / std::chrono::day{later.day()}};
            return static_cast<double>((b - a).count()) * kDaySeconds;
        }
    }
    return 0.0;
}

inline Misalignment misalignment_between(const Date& training_date, const Date& query_date) {
    const double s = span_seconds(training_date, query_date);
    if (s < 0)
        throw ValidationError("query date " + query_date.to_string() + " precedes training date " +
                              training_date.to_string());
    return Misalignment(s);
}

// ---------------------------------------------------------------------------
// Fact records

struct TimelineEntry {
    std::string answer;
    Date start;
    std::optional<Date> end;
};

struct AnswerTimeline {
    std::vector<TimelineEntry> entries;
};

enum class Split { kTrain, kDev, kTest };

inline std::string_view to_string(Split s) {
    switch (s) {
        case Split::kTrain: return "train";
        case Split::kDev: return "dev";
        case Split::kTest: return "test";
    }
    return "test";
}

inline Split parse_split(std::string_view s) {
    if (s == "train") return Split::kTrain;
    if (s == "dev") return Split::kDev;
    if (s == "test") return Split::kTest;
    throw ValidationError("unknown split '" + std::string(s) + "' (expected train, dev or test)");
}

struct FactRecord {
    std::string id;
    std::string statement;
    std::optional<std::string> question;
    std::optional<std::string> answer;
    std::optional<Duration> gold_duration;
    std::optional<AnswerTimeline> timeline;
    Split split = Split::kTest;
    bool template_converted = false;
};

}  // namespace chronocal
