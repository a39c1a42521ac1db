#pragma once

// Dataset ingestion: fact and MC-TACO style records, gold durations derived
// from dated answer timelines, cloze statements for external predictors and
// per-class dataset statistics.

#include <algorithm>
#include <cctype>
#include <istream>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "chronocal/core.hpp"
#include "chronocal/jsonl.hpp"

namespace chronocal {

inline constexpr const char* kMaskToken = "[MASK]";

template <class Record>
struct ParseResult {
    std::vector<Record> records;
    std::vector<Diagnostic> diagnostics;
};

// ---------------------------------------------------------------------------
// Duration derivation

/// Span between two answer start dates. Zero-length spans at the dates'
/// granularity count as one month.
inline Duration derive_duration_situatedqa(const Date& previous_answer_start, const Date& current_answer_start) {
    const double s = span_seconds(previous_answer_start, current_answer_start);
    if (s < 0)
        throw ValidationError("current answer start " + current_answer_start.to_string() +
                              " precedes previous answer start " + previous_answer_start.to_string());
    if (s == 0) return Duration::months(1);
    return Duration(s);
}

/// Duration of each timeline entry: next start minus this start, or this
/// entry's explicit end minus its start. A trailing entry with neither is
/// dropped.
inline std::vector<std::pair<std::string, Duration>> derive_duration_timeline(const AnswerTimeline& t) {
    const auto& e = t.entries;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i].answer.empty())
            throw ValidationError("timeline entry " + std::to_string(i) + " has an empty answer");
        if (i > 0 && span_seconds(e[i - 1].start, e[i].start) < 0)
            throw ValidationError("timeline starts out of order: " + e[i - 1].start.to_string() + " then " +
                                  e[i].start.to_string());
    }
    std::vector<std::pair<std::string, Duration>> out;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i].end) {
            if (span_seconds(e[i].start, *e[i].end) < 0)
                throw ValidationError("timeline entry '" + e[i].answer + "' ends before it starts");
            out.emplace_back(e[i].answer, derive_duration_situatedqa(e[i].start, *e[i].end));
        } else if (i + 1 < e.size()) {
            out.emplace_back(e[i].answer, derive_duration_situatedqa(e[i].start, e[i + 1].start));
        }
    }
    return out;
}

/// Gold duration for a record from its timeline: the entry matching the
/// record's answer when given, else the first derivable entry.
inline std::optional<Duration> gold_from_timeline(const FactRecord& f) {
    if (!f.timeline) return std::nullopt;
    const auto spans = derive_duration_timeline(*f.timeline);
    if (spans.empty()) return std::nullopt;
    if (f.answer) {
        for (const auto& [answer, d] : spans)
            if (answer == *f.answer) return d;
        return std::nullopt;
    }
    return spans.front().second;
}

// ---------------------------------------------------------------------------
// Statements

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace detail

/// Appends the duration cloze suffix: trailing sentence punctuation is
/// dropped and " , lasting [MASK] [MASK] ." appended.
inline std::string cloze_format(std::string_view statement) {
    std::string s = detail::trim(statement);
    while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?' || s.back() == ' ')) s.pop_back();
    if (s.empty()) throw ValidationError("cannot build a cloze statement from an empty statement");
    return s + " , lasting [MASK] [MASK] .";
}

inline std::string cloze_format(const FactRecord& f) { return cloze_format(f.statement); }

/// In-place variant: the first (case-insensitive) occurrence of `span` in
/// the statement becomes the two mask tokens.
inline std::string cloze_format(std::string_view statement, std::string_view span) {
    std::string s = detail::trim(statement);
    if (s.empty()) throw ValidationError("cannot build a cloze statement from an empty statement");
    const auto pos = detail::lower(s).find(detail::lower(detail::trim(span)));
    if (span.empty() || pos == std::string::npos)
        throw ValidationError("duration span '" + std::string(span) + "' not found in statement");
    return s.substr(0, pos) + "[MASK] [MASK]" + s.substr(pos + detail::trim(span).size());
}

/// Declarative fallback when no converted statement is supplied:
/// "Who are the judges on X?" + "A" -> "the judges on X are A".
inline std::string template_statement(std::string_view question, std::string_view answer) {
    std::string q = detail::trim(question);
    while (!q.empty() && (q.back() == '?' || q.back() == ' ')) q.pop_back();
    static const std::vector<std::string> wh = {"who", "what", "which", "where", "when"};
    static const std::vector<std::string> aux = {"is", "are", "was", "were"};
    std::vector<std::string> words;
    {
        std::string w;
        for (char c : q) {
            if (c == ' ') {
                if (!w.empty()) words.push_back(std::move(w));
                w.clear();
            } else {
                w.push_back(c);
            }
        }
        if (!w.empty()) words.push_back(std::move(w));
    }
    const std::string a = detail::trim(answer);
    if (words.size() >= 3 && std::find(wh.begin(), wh.end(), detail::lower(words[0])) != wh.end() &&
        std::find(aux.begin(), aux.end(), detail::lower(words[1])) != aux.end()) {
        std::string rest;
        for (std::size_t i = 2; i < words.size(); ++i) rest += (i > 2 ? " " : "") + words[i];
        return rest + " " + words[1] + " " + a;
    }
    return q + " " + a;
}

// ---------------------------------------------------------------------------
// Fact files

inline FactRecord fact_from_json(const json& obj) {
    FactRecord f;
    f.id = require_string(obj, "id");
    if (f.id.empty()) throw ValidationError("field 'id' must be non-empty");
    f.question = optional_string(obj, "question");
    f.answer = optional_string(obj, "answer");
    f.split = parse_split(require_string(obj, "split"));
    if (auto it = obj.find("template_converted"); it != obj.end() && it->is_boolean()) f.template_converted = it->get<bool>();
    auto statement = optional_string(obj, "statement");
    if (statement && !detail::trim(*statement).empty()) {
        f.statement = *statement;
    } else if (!statement && f.question && f.answer) {
        f.statement = template_statement(*f.question, *f.answer);
        f.template_converted = true;
    } else {
        throw ValidationError("field 'statement' must be non-empty");
    }
    if (auto secs = optional_number(obj, "duration_seconds")) {
        if (!(*secs >= 1.0)) throw ValidationError("field 'duration_seconds' must be >= 1");
        f.gold_duration = Duration(*secs);
    }
    if (auto it = obj.find("timeline"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("field 'timeline' must be a list");
        AnswerTimeline t;
        for (const auto& e : *it) {
            if (!e.is_object()) throw ValidationError("timeline entries must be objects");
            TimelineEntry entry;
            entry.answer = require_string(e, "answer");
            entry.start = Date::parse(require_string(e, "start"));
            if (auto end = optional_string(e, "end")) entry.end = Date::parse(*end);
            t.entries.push_back(std::move(entry));
        }
        f.timeline = std::move(t);
    }
    return f;
}

inline json fact_to_json(const FactRecord& f) {
    json obj;
    obj["id"] = f.id;
    obj["statement"] = f.statement;
    if (f.question) obj["question"] = *f.question;
    if (f.answer) obj["answer"] = *f.answer;
    if (f.gold_duration) obj["duration_seconds"] = f.gold_duration->count();
    if (f.timeline) {
        json t = json::array();
        for (const auto& e : f.timeline->entries) {
            json je;
            je["answer"] = e.answer;
            je["start"] = e.start.to_string();
            if (e.end) je["end"] = e.end->to_string();
            t.push_back(std::move(je));
        }
        obj["timeline"] = std::move(t);
    }
    obj["split"] = std::string(to_string(f.split));
    if (f.template_converted) obj["template_converted"] = true;
    return obj;
}

/// Parses a facts file. Duplicate ids abort in either mode; timelines with
/// empty-string answers drop the record with a diagnostic.
inline ParseResult<FactRecord> parse_facts(std::istream& in, ParseMode mode = ParseMode::kStrict,
                                           std::string source = {}) {
    DiagnosticSink sink(mode, std::move(source));
    ParseResult<FactRecord> result;
    std::unordered_set<std::string> seen;
    for_each_json_line(
        in,
        [&](std::size_t line, const json& obj) {
            FactRecord f;
            try {
                f = fact_from_json(obj);
            } catch (const ValidationError& e) {
                sink.report({line, e.what()});
                return;
            }
            if (!seen.insert(f.id).second) sink.fatal({line, "duplicate id '" + f.id + "'"});
            if (f.timeline) {
                auto& entries = f.timeline->entries;
                const bool has_empty =
                    std::any_of(entries.begin(), entries.end(), [](const TimelineEntry& e) { return e.answer.empty(); });
                if (has_empty) {
                    sink.note({line, "record '" + f.id + "' dropped: timeline contains an empty answer"});
                    return;
                }
                try {
                    derive_duration_timeline(*f.timeline);
                } catch (const ValidationError& e) {
                    sink.report({line, "record '" + f.id + "': " + e.what()});
                    return;
                }
            }
            result.records.push_back(std::move(f));
        },
        [&](Diagnostic d) { sink.report(std::move(d)); });
    result.diagnostics = sink.take();
    return result;
}

// ---------------------------------------------------------------------------
// MC-TACO style records

struct MCTacoOption {
    std::string text;
    Duration duration;
    bool gold_label = false;
};

struct MCTacoRecord {
    std::string id;
    std::string context;
    std::string question;
    std::optional<std::string> statement;  // converted statement containing a duration span
    std::vector<MCTacoOption> options;
};

inline MCTacoRecord mctaco_from_json(const json& obj) {
    MCTacoRecord r;
    r.id = require_string(obj, "id");
    if (r.id.empty()) throw ValidationError("field 'id' must be non-empty");
    r.context = require_string(obj, "context");
    r.question = require_string(obj, "question");
    r.statement = optional_string(obj, "statement");
    const json& opts = require_field(obj, "options");
    if (!opts.is_array() || opts.empty()) throw ValidationError("field 'options' must be a non-empty list");
    for (const auto& o : opts) {
        if (!o.is_object()) throw ValidationError("options must be objects");
        MCTacoOption opt;
        opt.text = require_string(o, "text");
        const double secs = require_number(o, "duration_seconds");
        if (!(secs >= 1.0)) throw ValidationError("option 'duration_seconds' must be >= 1");
        opt.duration = Duration(secs);
        const json& label = require_field(o, "label");
        if (!label.is_boolean()) throw ValidationError("option 'label' must be a boolean");
        opt.gold_label = label.get<bool>();
        r.options.push_back(std::move(opt));
    }
    return r;
}

inline json mctaco_to_json(const MCTacoRecord& r) {
    json obj;
    obj["id"] = r.id;
    obj["context"] = r.context;
    obj["question"] = r.question;
    if (r.statement) obj["statement"] = *r.statement;
    json opts = json::array();
    for (const auto& o : r.options)
        opts.push_back({{"text", o.text}, {"duration_seconds", o.duration.count()}, {"label", o.gold_label}});
    obj["options"] = std::move(opts);
    return obj;
}

inline ParseResult<MCTacoRecord> parse_mctaco(std::istream& in, ParseMode mode = ParseMode::kStrict,
                                              std::string source = {}) {
    DiagnosticSink sink(mode, std::move(source));
    ParseResult<MCTacoRecord> result;
    std::unordered_set<std::string> seen;
    for_each_json_line(
        in,
        [&](std::size_t line, const json& obj) {
            MCTacoRecord r;
            try {
                r = mctaco_from_json(obj);
            } catch (const ValidationError& e) {
                sink.report({line, e.what()});
                return;
            }
            if (!seen.insert(r.id).second) sink.fatal({line, "duplicate id '" + r.id + "'"});
            result.records.push_back(std::move(r));
        },
        [&](Diagnostic d) { sink.report(std::move(d)); });
    result.diagnostics = sink.take();
    return result;
}

/// Context sentence followed by the statement with its duration span masked.
/// The span is the longest option text found in the statement, gold options
/// first. Without a converted statement the question is appended with the
/// cloze suffix.
inline std::string mctaco_masked_input(const MCTacoRecord& r) {
    std::string prefix = detail::trim(r.context);
    if (!prefix.empty()) prefix += " ";
    if (!r.statement) return prefix + cloze_format(r.question);
    std::vector<const MCTacoOption*> order;
    for (const auto& o : r.options) order.push_back(&o);
    std::stable_sort(order.begin(), order.end(), [](const MCTacoOption* a, const MCTacoOption* b) {
        if (a->gold_label != b->gold_label) return a->gold_label;
        return a->text.size() > b->text.size();
    });
    const std::string lowered = detail::lower(*r.statement);
    for (const auto* o : order) {
        const std::string span = detail::trim(o->text);
        if (!span.empty() && lowered.find(detail::lower(span)) != std::string::npos)
            return prefix + cloze_format(*r.statement, span);
    }
    return prefix + cloze_format(*r.statement);
}

// ---------------------------------------------------------------------------
// Statistics

struct DatasetStats {
    std::vector<double> percentages;  // aligned to taxonomy classes
    std::size_t count = 0;
};

/// Histogram of nearest-class assignments of gold durations, in percent.
inline DatasetStats compute_stats(std::span<const FactRecord> records, const DurationTaxonomy& tax) {
    if (records.empty()) throw ContractError("cannot compute statistics over an empty record set");
    std::vector<std::size_t> counts(tax.size(), 0);
    for (const auto& r : records) {
        if (!r.gold_duration) throw ValidationError("record '" + r.id + "' has no gold duration");
        ++counts[nearest_class(*r.gold_duration, tax)];
    }
    DatasetStats stats;
    stats.count = records.size();
    stats.percentages.reserve(tax.size());
    for (auto c : counts) stats.percentages.push_back(100.0 * static_cast<double>(c) / static_cast<double>(records.size()));
    return stats;
}

}  // namespace chronocal
