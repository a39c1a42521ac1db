// ingest, stats

#include <cstdio>
#include <iostream>

#include "common.hpp"

namespace chronocal::cli {

namespace {

struct IngestOptions {
    std::string input;
    std::string out;
    std::string kind = "facts";
    bool cloze = false;
};

void run_ingest(const RunContext& ctx, const IngestOptions& o) {
    std::vector<json> records;
    if (o.kind == "mctaco") {
        for (const auto& r : load_mctaco(ctx, o.input)) {
            json obj = mctaco_to_json(r);
            if (o.cloze) obj["masked_input"] = mctaco_masked_input(r);
            records.push_back(std::move(obj));
        }
    } else {
        for (const auto& f : load_facts(ctx, o.input)) {
            json obj = fact_to_json(f);
            if (o.cloze) obj["cloze"] = cloze_format(f);
            records.push_back(std::move(obj));
        }
    }
    write_jsonl(ctx, o.out, records);
    std::cout << "ingested " << records.size() << " records into " << o.out << "\n";
}

struct StatsOptions {
    std::string input;
    std::string out;
    std::string split = "all";
};

void run_stats(const RunContext& ctx, const StatsOptions& o) {
    const auto records = filter_split(load_facts(ctx, o.input), o.split);
    const auto stats = compute_stats(records, *ctx.taxonomy);
    json classes = json::array();
    std::string table = "Class        Percent\n--------------------\n";
    for (std::size_t i = 0; i < ctx.taxonomy->size(); ++i) {
        const auto& label = (*ctx.taxonomy)[i].label;
        classes.push_back({{"label", label}, {"percent", stats.percentages[i]}});
        char row[64];
        std::snprintf(row, sizeof row, "%-11s  %7.2f\n", label.c_str(), stats.percentages[i]);
        table += row;
    }
    std::cout << table << "n = " << stats.count << "\n";
    write_json(ctx, o.out, {{"split", o.split}, {"count", stats.count}, {"classes", std::move(classes)}});
}

}  // namespace

void add_data_commands(CLI::App& app, CommonOptions& common, std::vector<Subcommand>& subs) {
    static IngestOptions ingest;
    auto* s = app.add_subcommand("ingest", "Validate a facts or MC-TACO file and write it normalized");
    s->add_option("--input", ingest.input, "Input JSONL file")->required()->check(CLI::ExistingFile);
    s->add_option("--out", ingest.out, "Output JSONL file")->required();
    s->add_option("--kind", ingest.kind, "Record kind")->check(CLI::IsMember({"facts", "mctaco"}))->capture_default_str();
    s->add_flag("--cloze", ingest.cloze, "Add the masked cloze input to every record");
    add_common(s, common);
    subs.push_back({s, [](const RunContext& ctx) { run_ingest(ctx, ingest); }});

    static StatsOptions stats;
    s = app.add_subcommand("stats", "Duration-class histogram of gold durations");
    s->add_option("--input", stats.input, "Facts JSONL file")->required()->check(CLI::ExistingFile);
    s->add_option("--out", stats.out, "Report JSON file")->required();
    s->add_option("--split", stats.split, "train, dev, test or all")
        ->check(CLI::IsMember({"train", "dev", "test", "all"}))
        ->capture_default_str();
    add_common(s, common);
    subs.push_back({s, [](const RunContext& ctx) { run_stats(ctx, stats); }});
}

}  // namespace chronocal::cli
