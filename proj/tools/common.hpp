#pragma once

// Plumbing shared by the subcommands: resolved-config capture, output
// headers, atomic writers and input loaders.

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chronocal/chronocal.hpp"

namespace chronocal::cli {

inline constexpr int kExitValidation = 1;
inline constexpr int kExitContract = 2;

struct CommonOptions {
    bool lenient = false;
    std::string taxonomy;
};

struct RunContext {
    std::string command;
    json options;
    std::string digest;
    ParseMode mode = ParseMode::kStrict;
    TaxonomyPtr taxonomy;
};

using Handler = std::function<void(const RunContext&)>;

struct Subcommand {
    CLI::App* app = nullptr;
    Handler run;
};

/// Options every subcommand accepts.
inline void add_common(CLI::App* sub, CommonOptions& common) {
    sub->add_flag("--lenient", common.lenient, "Skip invalid records with a diagnostic instead of aborting");
    sub->add_option("--taxonomy", common.taxonomy, "JSON list of {label, seconds} duration classes")
        ->check(CLI::ExistingFile);
}

/// Every option of the parsed subcommand, defaults included, in declaration
/// order.
inline json resolved_options(const CLI::App& sub) {
    json out = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || names.front() == "help") continue;
        const std::string& key = names.front();
        if (opt->get_expected_max() == 0) {
            out[key] = opt->count() > 0;
            continue;
        }
        const auto& results = opt->results();
        if (opt->get_expected_max() > 1 || opt->get_multi_option_policy() == CLI::MultiOptionPolicy::TakeAll) {
            out[key] = results;
        } else if (!results.empty()) {
            out[key] = results.back();
        } else if (!opt->get_default_str().empty()) {
            out[key] = opt->get_default_str();
        } else {
            out[key] = nullptr;
        }
    }
    return out;
}

inline TaxonomyPtr load_taxonomy(const std::string& path) {
    if (path.empty()) return default_taxonomy();
    auto in = open_input(path);
    json arr;
    try {
        arr = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": malformed JSON: " + e.what());
    }
    return detail::taxonomy_from_json(arr);
}

inline RunContext make_context(const CLI::App& sub, const CommonOptions& common) {
    RunContext ctx;
    ctx.command = sub.get_name();
    ctx.options = resolved_options(sub);
    ctx.digest = hex_digest(json{{"command", ctx.command}, {"options", ctx.options}}.dump());
    ctx.mode = common.lenient ? ParseMode::kLenient : ParseMode::kStrict;
    ctx.taxonomy = load_taxonomy(common.taxonomy);
    return ctx;
}

inline json meta(const RunContext& ctx) {
    return {{"tool", kToolName}, {"version", kToolVersion}, {"command", ctx.command}, {"config_digest", ctx.digest}};
}

inline void write_config_sidecar(const RunContext& ctx, const std::string& out_path) {
    json cfg = meta(ctx);
    cfg["options"] = ctx.options;
    write_file_atomic(out_path + ".config.json", cfg.dump(2) + "\n");
}

/// JSONL output: a `_meta` header line, then one record per line.
inline void write_jsonl(const RunContext& ctx, const std::string& path, const std::vector<json>& records) {
    std::string text = json{{kMetaKey, meta(ctx)}}.dump() + "\n";
    for (const auto& r : records) text += r.dump() + "\n";
    write_file_atomic(path, text);
    write_config_sidecar(ctx, path);
}

/// Single JSON document with a leading `_meta` key.
inline void write_json(const RunContext& ctx, const std::string& path, const json& body) {
    json doc = json::object();
    doc[kMetaKey] = meta(ctx);
    for (const auto& [k, v] : body.items()) doc[k] = v;
    write_file_atomic(path, doc.dump(2) + "\n");
    write_config_sidecar(ctx, path);
}

inline void report_diagnostics(const std::string& source, const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags) std::cerr << "warning: " << source << ": " << format_diagnostic(d) << "\n";
}

inline std::vector<FactRecord> load_facts(const RunContext& ctx, const std::string& path) {
    auto in = open_input(path);
    auto parsed = parse_facts(in, ctx.mode, path);
    report_diagnostics(path, parsed.diagnostics);
    for (auto& f : parsed.records)
        if (!f.gold_duration) f.gold_duration = gold_from_timeline(f);
    return std::move(parsed.records);
}

inline std::vector<MCTacoRecord> load_mctaco(const RunContext& ctx, const std::string& path) {
    auto in = open_input(path);
    auto parsed = parse_mctaco(in, ctx.mode, path);
    report_diagnostics(path, parsed.diagnostics);
    return std::move(parsed.records);
}

inline std::vector<QAPrediction> load_qa(const RunContext& ctx, const std::string& path) {
    auto in = open_input(path);
    std::vector<Diagnostic> diags;
    auto preds = parse_qa_predictions(in, ctx.mode, path, &diags);
    report_diagnostics(path, diags);
    return preds;
}

inline std::map<std::string, DurationPrediction> load_durations(const RunContext& ctx, const std::string& path) {
    auto in = open_input(path);
    std::vector<Diagnostic> diags;
    auto preds = import_predictions(in, ctx.taxonomy, ctx.mode, path, &diags);
    report_diagnostics(path, diags);
    return preds;
}

inline json load_json(const std::string& path) {
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": malformed JSON: " + e.what());
    }
}

/// "all" or a split name.
inline std::vector<FactRecord> filter_split(std::vector<FactRecord> records, const std::string& split) {
    if (split == "all") return records;
    const Split s = parse_split(split);
    std::erase_if(records, [&](const FactRecord& f) { return f.split != s; });
    return records;
}

struct MisalignmentOptions {
    std::string train_date;
    std::string query_date;
    std::optional<double> seconds;
};

inline void add_misalignment(CLI::App* sub, MisalignmentOptions& m) {
    sub->add_option("--train-date", m.train_date, "Training-data date t_M (YYYY, YYYY-MM or YYYY-MM-DD)");
    sub->add_option("--query-date", m.query_date, "Query date t_q");
    sub->add_option("--misalignment-seconds", m.seconds, "Misalignment m in seconds (dates take precedence)");
}

/// Dates take precedence over an explicit m.
inline std::optional<Misalignment> resolve_misalignment(const MisalignmentOptions& m) {
    if (!m.train_date.empty() || !m.query_date.empty()) {
        if (m.train_date.empty() || m.query_date.empty())
            throw ValidationError("--train-date and --query-date must be given together");
        return misalignment_between(Date::parse(m.train_date), Date::parse(m.query_date));
    }
    if (m.seconds) return Misalignment(*m.seconds);
    return std::nullopt;
}

inline Misalignment require_misalignment(const MisalignmentOptions& m) {
    auto r = resolve_misalignment(m);
    if (!r) throw ValidationError("a misalignment is required: give --train-date/--query-date or --misalignment-seconds");
    return *r;
}

void add_data_commands(CLI::App& app, CommonOptions& common, std::vector<Subcommand>& subs);
void add_duration_commands(CLI::App& app, CommonOptions& common, std::vector<Subcommand>& subs);
void add_calibration_commands(CLI::App& app, CommonOptions& common, std::vector<Subcommand>& subs);
void add_ensemble_commands(CLI::App& app, CommonOptions& common, std::vector<Subcommand>& subs);

}  // namespace chronocal::cli
