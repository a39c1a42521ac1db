// train, predict, eval-duration, eval-mctaco

#include <iostream>

#include "common.hpp"

namespace chronocal::cli {

namespace {

struct TrainOptions {
    std::string input;
    std::string out;
    std::string kind = "classifier";
    std::string split = "train";
    TrainingParams params;
};

void run_train(const RunContext& ctx, const TrainOptions& o) {
    const auto train = filter_split(load_facts(ctx, o.input), o.split);
    json artifact;
    std::vector<double> losses;
    if (o.kind == "classifier") {
        const auto m = train_classifier(std::span<const FactRecord>(train), ctx.taxonomy, o.params);
        losses = m.meta.epoch_losses;
        artifact = model_to_json(m);
    } else {
        const auto m = train_regressor(std::span<const FactRecord>(train), o.params);
        losses = m.meta.epoch_losses;
        artifact = model_to_json(m);
    }
    write_json(ctx, o.out, artifact);
    std::cout << "trained " << o.kind << " on " << train.size() << " records; final loss " << losses.back() << "\n";
}

struct PredictOptions {
    std::string input;
    std::string out;
    std::string kind = "facts";
    std::string split = "all";
    std::string model;
    std::string baseline;
    std::string reference;
    std::string reference_split = "train";
    std::uint64_t seed = 13;
    std::string average_mode = "log";
};

/// Facts to predict on; MC-TACO records become facts over their masked input.
std::vector<FactRecord> prediction_inputs(const RunContext& ctx, const PredictOptions& o) {
    if (o.kind == "facts") return filter_split(load_facts(ctx, o.input), o.split);
    std::vector<FactRecord> out;
    for (const auto& r : load_mctaco(ctx, o.input)) {
        FactRecord f;
        f.id = r.id;
        f.statement = mctaco_masked_input(r);
        out.push_back(std::move(f));
    }
    return out;
}

void run_predict(const RunContext& ctx, const PredictOptions& o) {
    if (o.model.empty() == o.baseline.empty()) throw ValidationError("give exactly one of --model and --baseline");
    const auto inputs = prediction_inputs(ctx, o);
    std::vector<json> records;
    records.reserve(inputs.size());

    if (!o.model.empty()) {
        const json artifact = load_json(o.model);
        const std::string kind = model_kind(artifact);
        if (kind == "classifier") {
            const auto m = classifier_from_json(artifact);
            for (const auto& f : inputs) records.push_back(prediction_to_json(f.id, predict_classifier(m, f)));
        } else if (kind == "regressor") {
            const auto m = regressor_from_json(artifact);
            for (const auto& f : inputs) records.push_back(prediction_to_json(f.id, predict_regressor(m, f)));
        } else {
            throw ValidationError(o.model + ": unknown model kind '" + kind + "'");
        }
    } else if (o.baseline == "upperbound") {
        const auto ub = classification_upperbound(inputs, ctx.taxonomy);
        for (std::size_t i = 0; i < inputs.size(); ++i) records.push_back(prediction_to_json(inputs[i].id, ub[i]));
    } else {
        if (o.reference.empty()) throw ValidationError("--baseline " + o.baseline + " needs --reference");
        const auto reference = filter_split(load_facts(ctx, o.reference), o.reference_split);
        if (o.baseline == "random") {
            RandomBaseline b(reference, o.seed);
            for (const auto& f : inputs) records.push_back(prediction_to_json(f.id, b.predict(f)));
        } else {
            const AverageBaseline b(reference, o.average_mode == "log" ? AverageMode::kLogSpace : AverageMode::kArithmetic);
            for (const auto& f : inputs) records.push_back(prediction_to_json(f.id, b.predict(f)));
        }
    }
    write_jsonl(ctx, o.out, records);
    std::cout << "wrote " << records.size() << " predictions to " << o.out << "\n";
}

Duration to_point(const DurationPrediction& p, const std::string& how) {
    if (how == "expectation")
        if (const auto* d = std::get_if<DurationDistribution>(&p)) return expectation_log_seconds(*d);
    return point_estimate(p);
}

struct EvalDurationOptions {
    std::string predictions;
    std::string gold;
    std::string split = "all";
    std::string point = "argmax";
    std::string out;
    std::string table;
};

void run_eval_duration(const RunContext& ctx, const EvalDurationOptions& o) {
    const auto gold = filter_split(load_facts(ctx, o.gold), o.split);
    const auto preds = load_durations(ctx, o.predictions);
    std::vector<Duration> p, g;
    for (const auto& f : gold) {
        auto it = preds.find(f.id);
        if (it == preds.end()) throw ValidationError(o.predictions + ": no prediction for gold id '" + f.id + "'");
        if (!f.gold_duration) throw ValidationError(o.gold + ": record '" + f.id + "' has no gold duration");
        p.push_back(to_point(it->second, o.point));
        g.push_back(*f.gold_duration);
    }
    EvalReport r;
    r.y_mae = year_mae(p, g);
    r.ls_mse = logsec_mse(p, g);
    r.counts["examples"] = p.size();
    const std::string text = render_table({{"predictions", r}});
    std::cout << text;
    write_json(ctx, o.out, report_to_json(r));
    if (!o.table.empty()) write_file_atomic(o.table, text);
}

struct EvalMCTacoOptions {
    std::vector<std::string> predictions;
    std::string test;
    std::string dev;
    std::optional<double> threshold;
    double grid_max = 10.0;
    double grid_step = 0.05;
    std::string point = "argmax";
    std::string out;
    std::string table;
};

void run_eval_mctaco(const RunContext& ctx, const EvalMCTacoOptions& o) {
    std::map<std::string, Duration> points;
    for (const auto& path : o.predictions)
        for (const auto& [id, p] : load_durations(ctx, path))
            if (!points.emplace(id, to_point(p, o.point)).second)
                throw ValidationError(path + ": id '" + id + "' already given by an earlier --predictions file");

    double threshold = 0.0;
    if (o.threshold) {
        threshold = *o.threshold;
    } else {
        if (o.dev.empty()) throw ValidationError("give --dev to tune the threshold, or a fixed --threshold");
        if (!(o.grid_step > 0) || !(o.grid_max >= 0)) throw ValidationError("--grid-step must be positive");
        std::vector<double> grid;
        for (int i = 0; i * o.grid_step <= o.grid_max + 1e-12; ++i) grid.push_back(i * o.grid_step);
        threshold = tune_mctaco_threshold(load_mctaco(ctx, o.dev), points, grid);
    }
    const auto test = load_mctaco(ctx, o.test);
    const auto score = mctaco_eval(test, points, threshold);
    EvalReport r;
    r.mctaco_strict = score.strict_acc;
    r.mctaco_f1 = score.f1;
    r.mctaco_threshold = threshold;
    r.counts["examples"] = test.size();
    const std::string text = render_table({{"predictions", r}});
    std::cout << text << "threshold " << threshold << "\n";
    write_json(ctx, o.out, report_to_json(r));
    if (!o.table.empty()) write_file_atomic(o.table, text);
}

}  // namespace

void add_duration_commands(CLI::App& app, CommonOptions& common, std::vector<Subcommand>& subs) {
    static TrainOptions train;
    auto* s = app.add_subcommand("train", "Train the hashed-feature classifier or regressor");
    s->add_option("--input", train.input, "Facts JSONL file")->required()->check(CLI::ExistingFile);
    s->add_option("--out", train.out, "Model artifact (JSON)")->required();
    s->add_option("--kind", train.kind, "classifier or regressor")
        ->check(CLI::IsMember({"classifier", "regressor"}))
        ->capture_default_str();
    s->add_option("--split", train.split, "Split to train on (or all)")
        ->check(CLI::IsMember({"train", "dev", "test", "all"}))
        ->capture_default_str();
    s->add_option("--seed", train.params.seed, "Shuffle seed")->capture_default_str();
    s->add_option("--epochs", train.params.epochs, "Epochs")->capture_default_str();
    s->add_option("--lr", train.params.learning_rate, "Initial step size")->capture_default_str();
    s->add_option("--lr-decay", train.params.lr_decay, "Step at epoch e is lr / (1 + lr_decay * e)")->capture_default_str();
    s->add_option("--l2", train.params.l2, "L2 penalty")->capture_default_str();
    s->add_option("--dimension", train.params.dimension, "Hashed feature dimension")->capture_default_str();
    add_common(s, common);
    subs.push_back({s, [](const RunContext& ctx) { run_train(ctx, train); }});

    static PredictOptions predict;
    s = app.add_subcommand("predict", "Write duration predictions from a model or a reference baseline");
    s->add_option("--input", predict.input, "Facts or MC-TACO JSONL file")->required()->check(CLI::ExistingFile);
    s->add_option("--out", predict.out, "Duration-prediction JSONL file")->required();
    s->add_option("--kind", predict.kind, "Input kind")->check(CLI::IsMember({"facts", "mctaco"}))->capture_default_str();
    s->add_option("--split", predict.split, "Facts split to predict (or all)")
        ->check(CLI::IsMember({"train", "dev", "test", "all"}))
        ->capture_default_str();
    s->add_option("--model", predict.model, "Model artifact from `train`")->check(CLI::ExistingFile);
    s->add_option("--baseline", predict.baseline, "random, average or upperbound")
        ->check(CLI::IsMember({"random", "average", "upperbound"}));
    s->add_option("--reference", predict.reference, "Facts file the baselines draw from")->check(CLI::ExistingFile);
    s->add_option("--reference-split", predict.reference_split, "Reference split (or all)")
        ->check(CLI::IsMember({"train", "dev", "test", "all"}))
        ->capture_default_str();
    s->add_option("--seed", predict.seed, "Seed for the random baseline")->capture_default_str();
    s->add_option("--average-mode", predict.average_mode, "log or arithmetic mean for the average baseline")
        ->check(CLI::IsMember({"log", "arithmetic"}))
        ->capture_default_str();
    add_common(s, common);
    subs.push_back({s, [](const RunContext& ctx) { run_predict(ctx, predict); }});

    static EvalDurationOptions ed;
    s = app.add_subcommand("eval-duration", "Year-MAE and log-second MSE against gold durations");
    s->add_option("--predictions", ed.predictions, "Duration-prediction JSONL file")->required()->check(CLI::ExistingFile);
    s->add_option("--gold", ed.gold, "Facts JSONL file with gold durations")->required()->check(CLI::ExistingFile);
    s->add_option("--split", ed.split, "Gold split (or all)")
        ->check(CLI::IsMember({"train", "dev", "test", "all"}))
        ->capture_default_str();
    s->add_option("--point", ed.point, "Point estimate of a distribution: argmax or expectation")
        ->check(CLI::IsMember({"argmax", "expectation"}))
        ->capture_default_str();
    s->add_option("--out", ed.out, "Report JSON file")->required();
    s->add_option("--table", ed.table, "Also write the text table here");
    add_common(s, common);
    subs.push_back({s, [](const RunContext& ctx) { run_eval_duration(ctx, ed); }});

    static EvalMCTacoOptions em;
    s = app.add_subcommand("eval-mctaco", "MC-TACO strict accuracy and F1 with a dev-tuned threshold");
    s->add_option("--predictions", em.predictions, "Duration predictions keyed by MC-TACO id (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    s->add_option("--test", em.test, "MC-TACO JSONL file to score")->required()->check(CLI::ExistingFile);
    s->add_option("--dev", em.dev, "MC-TACO JSONL file for threshold tuning")->check(CLI::ExistingFile);
    s->add_option("--threshold", em.threshold, "Fixed threshold in log-seconds (skips tuning)");
    s->add_option("--grid-max", em.grid_max, "Largest threshold tried")->capture_default_str();
    s->add_option("--grid-step", em.grid_step, "Threshold grid step")->capture_default_str();
    s->add_option("--point", em.point, "Point estimate of a distribution: argmax or expectation")
        ->check(CLI::IsMember({"argmax", "expectation"}))
        ->capture_default_str();
    s->add_option("--out", em.out, "Report JSON file")->required();
    s->add_option("--table", em.table, "Also write the text table here");
    add_common(s, common);
    subs.push_back({s, [](const RunContext& ctx) { run_eval_mctaco(ctx, em); }});
}

}  // namespace chronocal::cli
