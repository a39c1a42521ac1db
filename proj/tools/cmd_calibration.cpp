// adjust, eval-calibration

#include <iostream>

#include "common.hpp"

namespace chronocal::cli {

namespace {

struct AdjustOptions {
    std::string qa;
    std::string durations;
    std::string strategy = "cdf";
    std::string mode = "survival";
    std::string uniform_from = "cdf";
    MisalignmentOptions misalignment;
    std::string out;
};

const DurationDistribution& need_distribution(const DurationPrediction& p, const QAPrediction& q, Strategy s) {
    if (const auto* d = std::get_if<DurationDistribution>(&p)) return *d;
    throw ValidationError("strategy " + std::string(to_string(s)) + " needs a distribution for id '" + q.id +
                          "', got a point prediction");
}

AdjustedPrediction adjust_one(const QAPrediction& q, Strategy s, DiscountMode mode,
                              const std::map<std::string, DurationPrediction>& durations,
                              const std::optional<Misalignment>& m, const std::string& durations_path) {
    if (s == Strategy::kNone) return adjust_none(q);
    if (s == Strategy::kOracle) return adjust_oracle(q);
    auto it = durations.find(q.id);
    if (it == durations.end()) throw ValidationError(durations_path + ": no duration prediction for QA id '" + q.id + "'");
    switch (s) {
        case Strategy::kCdf: return adjust_cdf(q, need_distribution(it->second, q, s), *m, mode);
        case Strategy::kBinary: return adjust_binary(q, point_estimate(it->second), *m, mode);
        case Strategy::kExpectation: return adjust_expectation(q, need_distribution(it->second, q, s), *m);
        case Strategy::kArgmax: return adjust_argmax(q, need_distribution(it->second, q, s), *m);
        default: break;
    }
    throw ContractError("unhandled strategy");
}

bool needs_durations(Strategy s) { return s != Strategy::kNone && s != Strategy::kOracle; }

void run_adjust(const RunContext& ctx, const AdjustOptions& o) {
    const Strategy strategy = parse_strategy(o.strategy);
    const DiscountMode mode = parse_discount_mode(o.mode);
    const Strategy per_example = strategy == Strategy::kUniform ? parse_strategy(o.uniform_from) : strategy;
    if (per_example == Strategy::kUniform) throw ValidationError("--uniform-from cannot itself be uniform");

    const auto preds = load_qa(ctx, o.qa);
    std::map<std::string, DurationPrediction> durations;
    std::optional<Misalignment> m;
    if (needs_durations(per_example)) {
        if (o.durations.empty()) throw ValidationError("strategy " + o.strategy + " needs --durations");
        durations = load_durations(ctx, o.durations);
        m = require_misalignment(o.misalignment);
    }

    std::vector<AdjustedPrediction> adjusted;
    adjusted.reserve(preds.size());
    for (const auto& q : preds) adjusted.push_back(adjust_one(q, per_example, mode, durations, m, o.durations));
    if (strategy == Strategy::kUniform) adjusted = adjust_uniform(preds, adjusted).predictions;

    std::vector<json> records;
    records.reserve(adjusted.size());
    double before = 0.0, after = 0.0;
    for (const auto& a : adjusted) {
        records.push_back(adjusted_to_json(a));
        before += a.base.confidence;
        after += a.adjusted_confidence;
    }
    write_jsonl(ctx, o.out, records);
    std::cout << "adjusted " << records.size() << " predictions with " << o.strategy << "; total confidence " << before
              << " -> " << after << "\n";
}

struct EvalCalibrationOptions {
    std::vector<std::string> systems;
    double target = 55.0;
    std::string out;
    std::string table;
};

EvalReport evaluate_system(const std::string& name, const std::vector<QAPrediction>& preds, double target) {
    if (preds.empty()) throw ValidationError("system '" + name + "' has no predictions");
    std::vector<ScoredOutcome> calib, eval;
    std::vector<double> conf, base;
    std::vector<bool> correct;
    bool any_adjusted = false;
    std::size_t hits = 0;
    for (const auto& p : preds) {
        if (p.gold_at_training.empty() || p.gold_at_query.empty())
            throw ValidationError("system '" + name + "': prediction '" + p.id + "' has an empty gold list");
        double c = p.confidence;
        if (auto it = p.extra.find("adjusted_confidence"); it != p.extra.end()) {
            if (!it->is_number()) throw ValidationError("prediction '" + p.id + "': adjusted_confidence must be a number");
            c = it->get<double>();
            any_adjusted = true;
        }
        const bool ok = exact_match(p.answer, p.gold_at_query);
        calib.push_back({p.confidence, exact_match(p.answer, p.gold_at_training)});
        eval.push_back({c, ok});
        conf.push_back(c);
        base.push_back(p.confidence);
        correct.push_back(ok);
        hits += ok ? 1 : 0;
    }
    EvalReport r;
    r.em = 100.0 * static_cast<double>(hits) / static_cast<double>(preds.size());
    if (hits > 0 && hits < preds.size()) {
        r.aucroc = auc_roc(conf, correct);
    } else {
        std::cerr << "note: system '" << name << "': AUCROC undefined (all answers " << (hits ? "correct" : "wrong")
                  << ")\n";
    }
    r.ece = ece(conf, correct);
    r.rc = risk_control(calib, eval, target);
    if (any_adjusted) r.avg_conf_delta_pct = avg_conf_delta(base, conf);
    r.counts["examples"] = preds.size();
    return r;
}

void run_eval_calibration(const RunContext& ctx, const EvalCalibrationOptions& o) {
    std::vector<std::pair<std::string, EvalReport>> rows;
    json systems = json::array();
    for (const auto& arg : o.systems) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
            throw ValidationError("--system expects NAME=PATH, got '" + arg + "'");
        const std::string name = arg.substr(0, eq), path = arg.substr(eq + 1);
        const auto r = evaluate_system(name, load_qa(ctx, path), o.target);
        json row = {{"name", name}};
        const json body = report_to_json(r);
        for (const auto& [k, v] : body.items()) row[k] = v;
        systems.push_back(std::move(row));
        rows.emplace_back(name, r);
    }
    const std::string text = render_table(rows);
    std::cout << text;
    write_json(ctx, o.out, {{"systems", std::move(systems)}});
    if (!o.table.empty()) write_file_atomic(o.table, text);
}

}  // namespace

void add_calibration_commands(CLI::App& app, CommonOptions& common, std::vector<Subcommand>& subs) {
    static AdjustOptions adj;
    auto* s = app.add_subcommand("adjust", "Misalignment-aware confidence adjustment of QA predictions");
    s->add_option("--qa", adj.qa, "QA-prediction JSONL file")->required()->check(CLI::ExistingFile);
    s->add_option("--durations", adj.durations, "Duration predictions keyed by QA id")->check(CLI::ExistingFile);
    s->add_option("--strategy", adj.strategy, "cdf, binary, expectation, argmax, uniform, oracle or none")
        ->check(CLI::IsMember({"cdf", "binary", "expectation", "argmax", "uniform", "oracle", "none"}))
        ->capture_default_str();
    s->add_option("--mode", adj.mode, "survival or literal discount for cdf and binary")
        ->check(CLI::IsMember({"survival", "literal"}))
        ->capture_default_str();
    s->add_option("--uniform-from", adj.uniform_from, "Per-example strategy whose total the uniform offset matches")
        ->check(CLI::IsMember({"cdf", "binary", "expectation", "argmax", "oracle", "none"}))
        ->capture_default_str();
    add_misalignment(s, adj.misalignment);
    s->add_option("--out", adj.out, "Adjusted-output JSONL file")->required();
    add_common(s, common);
    subs.push_back({s, [](const RunContext& ctx) { run_adjust(ctx, adj); }});

    static EvalCalibrationOptions ec;
    s = app.add_subcommand("eval-calibration", "EM, AUCROC, ECE, RC@XX and confidence change per system");
    s->add_option("--system", ec.systems, "NAME=PATH of a QA or adjusted-output file (repeatable)")->required();
    s->add_option("--target", ec.target, "RC accuracy target XX in percent")->check(CLI::Range(0.0, 100.0))->capture_default_str();
    s->add_option("--out", ec.out, "Report JSON file")->required();
    s->add_option("--table", ec.table, "Also write the text table here");
    add_common(s, common);
    subs.push_back({s, [](const RunContext& ctx) { run_eval_calibration(ctx, ec); }});
}

}  // namespace chronocal::cli
