// ensemble: hybrid closed/open gate, two-corpus rerank

#include <iostream>

#include "common.hpp"

namespace chronocal::cli {

namespace {

struct EnsembleOptions {
    std::string mode = "hybrid";
    std::string closed;
    std::string open;
    std::string corpus_a;
    std::string corpus_b;
    std::string durations;
    MisalignmentOptions misalignment;
    double p_star = 0.5;
    std::string out;
    std::string report;
};

std::map<std::string, QAPrediction> by_id(const std::vector<QAPrediction>& preds, const std::string& path) {
    std::map<std::string, QAPrediction> out;
    for (const auto& p : preds)
        if (!out.emplace(p.id, p).second) throw ValidationError(path + ": duplicate id '" + p.id + "'");
    return out;
}

const DurationDistribution& distribution_for(const std::map<std::string, DurationPrediction>& durations,
                                             const std::string& key, const std::string& fallback,
                                             const std::string& path) {
    auto it = durations.find(key);
    if (it == durations.end()) it = durations.find(fallback);
    if (it == durations.end()) throw ValidationError(path + ": no duration prediction for '" + key + "'");
    const auto* d = std::get_if<DurationDistribution>(&it->second);
    if (!d) throw ValidationError(path + ": '" + it->first + "' is a point prediction; the ensemble needs a distribution");
    return *d;
}

Date corpus_date_of(const QAPrediction& p, const std::string& path) {
    auto it = p.extra.find("corpus_date");
    if (it == p.extra.end() || !it->is_string())
        throw ValidationError(path + ": record '" + p.id + "' needs a string corpus_date");
    return Date::parse(it->get<std::string>());
}

std::vector<EnsembleDecision> run_hybrid(const RunContext& ctx, const EnsembleOptions& o, std::vector<json>& records) {
    if (o.closed.empty() || o.open.empty()) throw ValidationError("hybrid mode needs --closed and --open");
    const auto closed = load_qa(ctx, o.closed);
    const auto open = by_id(load_qa(ctx, o.open), o.open);
    const auto durations = load_durations(ctx, o.durations);
    const Misalignment m = require_misalignment(o.misalignment);

    std::vector<EnsembleDecision> decisions;
    for (const auto& c : closed) {
        auto it = open.find(c.id);
        if (it == open.end()) throw ValidationError(o.open + ": no open-book prediction for id '" + c.id + "'");
        const auto g = hybrid_gate(c, distribution_for(durations, c.id, c.id, o.durations), m, it->second, o.p_star);
        decisions.push_back({c.id, g.answer, g.used_retrieval, c.gold_at_query});
        records.push_back({{"id", c.id},
                           {"answer", g.answer},
                           {"used_retrieval", g.used_retrieval},
                           {"change_probability", g.change_probability}});
    }
    return decisions;
}

std::vector<EnsembleDecision> run_two_corpus(const RunContext& ctx, const EnsembleOptions& o,
                                             std::vector<json>& records) {
    if (o.corpus_a.empty() || o.corpus_b.empty()) throw ValidationError("two-corpus mode needs --corpus-a and --corpus-b");
    if (o.misalignment.query_date.empty()) throw ValidationError("two-corpus mode needs --query-date");
    const Date query = Date::parse(o.misalignment.query_date);
    const auto a = load_qa(ctx, o.corpus_a);
    const auto b = by_id(load_qa(ctx, o.corpus_b), o.corpus_b);
    const auto durations = load_durations(ctx, o.durations);

    std::vector<EnsembleDecision> decisions;
    for (const auto& pa : a) {
        auto it = b.find(pa.id);
        if (it == b.end()) throw ValidationError(o.corpus_b + ": no prediction for id '" + pa.id + "'");
        const auto& pb = it->second;
        const std::vector<CorpusAnswer> cands = {
            {pa.id + "#a", pa.answer, pa.confidence, corpus_date_of(pa, o.corpus_a)},
            {pb.id + "#b", pb.answer, pb.confidence, corpus_date_of(pb, o.corpus_b)},
        };
        std::map<std::string, DurationDistribution> dists;
        for (const auto& c : cands) dists.emplace(c.id, distribution_for(durations, c.id, pa.id, o.durations));
        const auto r = two_corpus_rerank(cands, dists, query);
        const auto& other = cands[1 - r.chosen_index];
        const bool newer = span_seconds(other.corpus_date, r.chosen.corpus_date) > 0;
        decisions.push_back({pa.id, r.chosen.answer, newer, pa.gold_at_query});
        records.push_back({{"id", pa.id},
                           {"answer", r.chosen.answer},
                           {"chosen", r.chosen_index == 0 ? "a" : "b"},
                           {"used_newer_corpus", newer},
                           {"adjusted", r.adjusted}});
    }
    return decisions;
}

void run_ensemble(const RunContext& ctx, const EnsembleOptions& o) {
    std::vector<json> records;
    const auto decisions = o.mode == "hybrid" ? run_hybrid(ctx, o, records) : run_two_corpus(ctx, o, records);
    if (decisions.empty()) throw ValidationError("no predictions to combine");
    const auto s = ensemble_report(decisions);
    write_jsonl(ctx, o.out, records);
    if (!o.report.empty())
        write_json(ctx, o.report, {{"mode", o.mode}, {"em_pct", s.em_pct}, {"updated_path_pct", s.updated_path_pct}, {"count", s.count}});
    std::cout << o.mode << ": EM " << s.em_pct << "%, updated path " << s.updated_path_pct << "% of " << s.count << "\n";
}

}  // namespace

void add_ensemble_commands(CLI::App& app, CommonOptions& common, std::vector<Subcommand>& subs) {
    static EnsembleOptions o;
    auto* s = app.add_subcommand("ensemble", "Closed/open-book gate or two-corpus rerank driven by duration predictions");
    s->add_option("--mode", o.mode, "hybrid or two-corpus")->check(CLI::IsMember({"hybrid", "two-corpus"}))->capture_default_str();
    s->add_option("--closed", o.closed, "Closed-book QA predictions (hybrid)")->check(CLI::ExistingFile);
    s->add_option("--open", o.open, "Open-book QA predictions (hybrid)")->check(CLI::ExistingFile);
    s->add_option("--corpus-a", o.corpus_a, "QA predictions from corpus A, with corpus_date (two-corpus)")->check(CLI::ExistingFile);
    s->add_option("--corpus-b", o.corpus_b, "QA predictions from corpus B, with corpus_date (two-corpus)")->check(CLI::ExistingFile);
    s->add_option("--durations", o.durations, "Duration distributions; two-corpus keys may be <id>#a / <id>#b")
        ->required()
        ->check(CLI::ExistingFile);
    add_misalignment(s, o.misalignment);
    s->add_option("--p-star", o.p_star, "Retrieve when P(d <= m) reaches this")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    s->add_option("--out", o.out, "Per-question decisions JSONL")->required();
    s->add_option("--report", o.report, "Summary report JSON");
    add_common(s, common);
    subs.push_back({s, [](const RunContext& ctx) { run_ensemble(ctx, o); }});
}

}  // namespace chronocal::cli
