#pragma once

// Duration predictors: feature-hashed linear classifier (softmax over the
// taxonomy) and regressor (log-seconds), trivial reference baselines, the
// classification upper bound and an importer for externally computed
// predictions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "chronocal/core.hpp"
#include "chronocal/ingest.hpp"
#include "chronocal/jsonl.hpp"

namespace chronocal {

// ---------------------------------------------------------------------------
// Features

struct FeatureVector {
    std::uint32_t dimension = 0;
    std::vector<std::pair<std::uint32_t, double>> entries;  // sorted, unique indices
};

namespace detail {

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

}  // namespace detail

/// Lower-cased unigram and bigram counts hashed into `dimension` buckets,
/// L2-normalized. Mask tokens are ignored.
inline FeatureVector hash_features(std::string_view text, std::uint32_t dimension) {
    if (dimension == 0) throw ContractError("feature dimension must be positive");
    auto tokens = detail::tokenize(text);
    std::erase(tokens, std::string("mask"));
    std::map<std::uint32_t, double> counts;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        counts[static_cast<std::uint32_t>(fnv1a64("u|" + tokens[i]) % dimension)] += 1.0;
        if (i + 1 < tokens.size())
            counts[static_cast<std::uint32_t>(fnv1a64("b|" + tokens[i] + " " + tokens[i + 1]) % dimension)] += 1.0;
    }
    double norm = 0.0;
    for (const auto& [_, v] : counts) norm += v * v;
    norm = std::sqrt(norm);
    FeatureVector fv;
    fv.dimension = dimension;
    fv.entries.reserve(counts.size());
    for (const auto& [idx, v] : counts) fv.entries.emplace_back(idx, v / norm);
    return fv;
}

// ---------------------------------------------------------------------------
// Models

struct TrainingParams {
    std::uint64_t seed = 13;
    int epochs = 12;
    double learning_rate = 0.5;
    /// Step size at epoch e is learning_rate / (1 + lr_decay * e).
    double lr_decay = 0.5;
    double l2 = 0.0;
    std::uint32_t dimension = 1u << 18;
};

struct TrainingMetadata {
    TrainingParams params;
    std::size_t examples = 0;
    std::vector<double> epoch_losses;  // full-set loss after each epoch
    std::vector<double> epoch_steps;   // step size actually applied; 0 when the epoch was rolled back
};

/// Softmax classifier over taxonomy classes. Weights are stored feature-major:
/// weights[feature * K + class].
struct ClassifierModel {
    TaxonomyPtr taxonomy;
    std::uint32_t dimension = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    TrainingMetadata meta;

    std::size_t classes() const { return taxonomy->size(); }

    std::vector<double> scores(const FeatureVector& x) const {
        const std::size_t k = classes();
        std::vector<double> s(bias);
        for (const auto& [idx, v] : x.entries) {
            const double* row = &weights[static_cast<std::size_t>(idx) * k];
            for (std::size_t c = 0; c < k; ++c) s[c] += row[c] * v;
        }
        return s;
    }
};

struct RegressorModel {
    std::uint32_t dimension = 0;
    std::vector<double> weights;
    double bias = 0.0;
    TrainingMetadata meta;

    double raw_score(const FeatureVector& x) const {
        double s = bias;
        for (const auto& [idx, v] : x.entries) s += weights[idx] * v;
        return s;
    }
};

/// Regression outputs are clamped to [1 second, 1000 years].
inline double regression_max_log_seconds() { return std::log(1000.0 * kYearSeconds); }

inline std::vector<double> softmax(std::span<const double> scores) {
    const double mx = *std::max_element(scores.begin(), scores.end());
    std::vector<double> p(scores.size());
    double z = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        p[i] = std::exp(scores[i] - mx);
        z += p[i];
    }
    for (auto& v : p) v /= z;
    return p;
}

/// A featurized training example: x plus either a class index or a target
/// in log-seconds.
struct LabeledExample {
    FeatureVector x;
    std::size_t label = 0;
    double target = 0.0;
};

// Loss and gradient definitions. Training applies the per-example form of
// these same derivatives.

inline double classifier_loss(const ClassifierModel& m, std::span<const LabeledExample> data) {
    double loss = 0.0;
    for (const auto& ex : data) {
        const auto s = m.scores(ex.x);
        const double mx = *std::max_element(s.begin(), s.end());
        double z = 0.0;
        for (double v : s) z += std::exp(v - mx);
        loss += (mx + std::log(z)) - s[ex.label];
    }
    loss /= static_cast<double>(data.size());
    if (m.meta.params.l2 > 0) {
        double sq = 0.0;
        for (double w : m.weights) sq += w * w;
        loss += 0.5 * m.meta.params.l2 * sq;
    }
    return loss;
}

struct ClassifierGradient {
    std::vector<double> weights;
    std::vector<double> bias;
};

inline ClassifierGradient classifier_gradient(const ClassifierModel& m, std::span<const LabeledExample> data) {
    const std::size_t k = m.classes();
    ClassifierGradient g{std::vector<double>(m.weights.size(), 0.0), std::vector<double>(k, 0.0)};
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (const auto& ex : data) {
        auto p = softmax(m.scores(ex.x));
        p[ex.label] -= 1.0;
        for (std::size_t c = 0; c < k; ++c) g.bias[c] += p[c] * inv_n;
        for (const auto& [idx, v] : ex.x.entries)
            for (std::size_t c = 0; c < k; ++c) g.weights[static_cast<std::size_t>(idx) * k + c] += p[c] * v * inv_n;
    }
    if (m.meta.params.l2 > 0)
        for (std::size_t i = 0; i < g.weights.size(); ++i) g.weights[i] += m.meta.params.l2 * m.weights[i];
    return g;
}

/// Mean of 0.5 * (score - target)^2 over the raw (unclamped) scores.
inline double regressor_loss(const RegressorModel& m, std::span<const LabeledExample> data) {
    double loss = 0.0;
    for (const auto& ex : data) {
        const double r = m.raw_score(ex.x) - ex.target;
        loss += 0.5 * r * r;
    }
    loss /= static_cast<double>(data.size());
    if (m.meta.params.l2 > 0) {
        double sq = 0.0;
        for (double w : m.weights) sq += w * w;
        loss += 0.5 * m.meta.params.l2 * sq;
    }
    return loss;
}

struct RegressorGradient {
    std::vector<double> weights;
    double bias = 0.0;
};

inline RegressorGradient regressor_gradient(const RegressorModel& m, std::span<const LabeledExample> data) {
    RegressorGradient g{std::vector<double>(m.weights.size(), 0.0), 0.0};
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (const auto& ex : data) {
        const double r = m.raw_score(ex.x) - ex.target;
        g.bias += r * inv_n;
        for (const auto& [idx, v] : ex.x.entries) g.weights[idx] += r * v * inv_n;
    }
    if (m.meta.params.l2 > 0)
        for (std::size_t i = 0; i < g.weights.size(); ++i) g.weights[i] += m.meta.params.l2 * m.weights[i];
    return g;
}

namespace detail {

/// Seed-determined Fisher-Yates permutation. Draws come straight from
/// mt19937_64, whose output sequence is fixed by the standard.
inline std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed, int epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(epoch + 1)));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    return order;
}

inline void check_params(const TrainingParams& p) {
    if (p.epochs <= 0) throw ContractError("epochs must be positive");
    if (!(p.learning_rate > 0) || !std::isfinite(p.learning_rate)) throw ContractError("learning rate must be positive");
    if (p.lr_decay < 0 || p.l2 < 0) throw ContractError("lr_decay and l2 must be non-negative");
    if (p.dimension == 0) throw ContractError("feature dimension must be positive");
}

inline double step_size(const TrainingParams& p, int epoch) { return p.learning_rate / (1.0 + p.lr_decay * epoch); }

inline constexpr int kMaxStepHalvings = 8;

/// Runs `pass(model, lr, epoch)` once per epoch. An epoch that raises the
/// full-set loss is undone and retried at half the step; the halving carries
/// over to later epochs. If no retry helps, the epoch leaves the model as is.
template <class Model, class Pass, class Loss>
void run_epochs(Model& m, const TrainingParams& params, Pass pass, Loss loss, const char* what) {
    double prev = loss(m);
    double scale = 1.0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        const Model before = m;
        double cur = prev, used = 0.0;
        for (int attempt = 0; attempt <= kMaxStepHalvings; ++attempt) {
            const double lr = scale * step_size(params, epoch);
            pass(m, lr, epoch);
            cur = loss(m);
            if (!std::isfinite(cur))
                throw ContractError(std::string(what) + " loss became non-finite at epoch " + std::to_string(epoch + 1) +
                                    "; lower the learning rate");
            if (cur <= prev) {
                used = lr;
                break;
            }
            m = before;
            cur = prev;
            scale *= 0.5;
        }
        m.meta.epoch_losses.push_back(cur);
        m.meta.epoch_steps.push_back(used);
        prev = cur;
    }
}

}  // namespace detail

inline std::vector<LabeledExample> featurize_for_training(std::span<const FactRecord> train, const DurationTaxonomy* tax,
                                                          std::uint32_t dimension) {
    if (train.empty()) throw ContractError("training set is empty");
    std::vector<LabeledExample> data;
    data.reserve(train.size());
    for (const auto& f : train) {
        if (!f.gold_duration) throw ValidationError("training record '" + f.id + "' has no gold duration");
        LabeledExample ex;
        ex.x = hash_features(f.statement, dimension);
        ex.target = f.gold_duration->log_seconds();
        if (tax) ex.label = nearest_class(*f.gold_duration, *tax);
        data.push_back(std::move(ex));
    }
    return data;
}

/// Cross-entropy SGD against the nearest-class pseudo-gold label.
inline ClassifierModel train_classifier(std::span<const LabeledExample> data, TaxonomyPtr tax,
                                        const TrainingParams& params) {
    detail::check_params(params);
    if (data.empty()) throw ContractError("training set is empty");
    ClassifierModel m;
    m.taxonomy = std::move(tax);
    m.dimension = params.dimension;
    const std::size_t k = m.classes();
    m.weights.assign(static_cast<std::size_t>(params.dimension) * k, 0.0);
    m.bias.assign(k, 0.0);
    m.meta.params = params;
    m.meta.examples = data.size();

    auto pass = [&](ClassifierModel& mm, double lr, int epoch) {
        for (std::size_t i : detail::shuffled_order(data.size(), params.seed, epoch)) {
            const auto& ex = data[i];
            auto p = softmax(mm.scores(ex.x));
            p[ex.label] -= 1.0;
            for (std::size_t c = 0; c < k; ++c) mm.bias[c] -= lr * p[c];
            for (const auto& [idx, v] : ex.x.entries) {
                double* row = &mm.weights[static_cast<std::size_t>(idx) * k];
                for (std::size_t c = 0; c < k; ++c) row[c] -= lr * (p[c] * v + params.l2 * row[c]);
            }
        }
    };
    detail::run_epochs(m, params, pass, [&](const ClassifierModel& mm) { return classifier_loss(mm, data); },
                       "classifier");
    return m;
}

inline ClassifierModel train_classifier(std::span<const FactRecord> train, TaxonomyPtr tax,
                                        const TrainingParams& params) {
    detail::check_params(params);
    const auto data = featurize_for_training(train, tax.get(), params.dimension);
    return train_classifier(std::span<const LabeledExample>(data), std::move(tax), params);
}

/// Squared-error SGD on log-seconds. The bias starts at the mean target.
inline RegressorModel train_regressor(std::span<const LabeledExample> data, const TrainingParams& params) {
    detail::check_params(params);
    if (data.empty()) throw ContractError("training set is empty");
    RegressorModel m;
    m.dimension = params.dimension;
    m.weights.assign(params.dimension, 0.0);
    m.meta.params = params;
    m.meta.examples = data.size();
    double mean = 0.0;
    for (const auto& ex : data) mean += ex.target;
    m.bias = mean / static_cast<double>(data.size());

    auto pass = [&](RegressorModel& mm, double lr, int epoch) {
        for (std::size_t i : detail::shuffled_order(data.size(), params.seed, epoch)) {
            const auto& ex = data[i];
            const double r = mm.raw_score(ex.x) - ex.target;
            mm.bias -= lr * r;
            for (const auto& [idx, v] : ex.x.entries) mm.weights[idx] -= lr * (r * v + params.l2 * mm.weights[idx]);
        }
    };
    detail::run_epochs(m, params, pass, [&](const RegressorModel& mm) { return regressor_loss(mm, data); },
                       "regressor");
    return m;
}

inline RegressorModel train_regressor(std::span<const FactRecord> train, const TrainingParams& params) {
    detail::check_params(params);
    const auto data = featurize_for_training(train, nullptr, params.dimension);
    return train_regressor(std::span<const LabeledExample>(data), params);
}

inline DurationDistribution predict_classifier(const ClassifierModel& m, const FeatureVector& x) {
    return {m.taxonomy, softmax(m.scores(x))};
}

inline DurationDistribution predict_classifier(const ClassifierModel& m, const FactRecord& f) {
    return predict_classifier(m, hash_features(f.statement, m.dimension));
}

inline Duration predict_regressor(const RegressorModel& m, const FeatureVector& x) {
    return Duration::from_log_seconds(std::clamp(m.raw_score(x), 0.0, regression_max_log_seconds()));
}

inline Duration predict_regressor(const RegressorModel& m, const FactRecord& f) {
    return predict_regressor(m, hash_features(f.statement, m.dimension));
}

// ---------------------------------------------------------------------------
// Predictions and baselines

using DurationPrediction = std::variant<DurationDistribution, Duration>;

/// Point estimate of a prediction: the argmax class canonical for a
/// distribution.
inline Duration point_estimate(const DurationPrediction& p) {
    if (const auto* d = std::get_if<Duration>(&p)) return *d;
    const auto& dist = std::get<DurationDistribution>(p);
    return dist.taxonomy().canonical(argmax_class(dist));
}

/// Samples a gold duration uniformly from a reference split.
class RandomBaseline {
public:
    RandomBaseline(std::span<const FactRecord> reference, std::uint64_t seed) : rng_(seed) {
        for (const auto& f : reference)
            if (f.gold_duration) pool_.push_back(*f.gold_duration);
        if (pool_.empty()) throw ContractError("random baseline needs a non-empty reference split with gold durations");
    }

    Duration predict(const FactRecord&) { return pool_[rng_() % pool_.size()]; }

private:
    std::vector<Duration> pool_;
    std::mt19937_64 rng_;
};

enum class AverageMode { kLogSpace, kArithmetic };

/// Constant predictor at the mean reference duration (geometric mean by
/// default, which minimizes log-second MSE among constants).
class AverageBaseline {
public:
    explicit AverageBaseline(std::span<const FactRecord> reference, AverageMode mode = AverageMode::kLogSpace) {
        double acc = 0.0;
        std::size_t n = 0;
        for (const auto& f : reference) {
            if (!f.gold_duration) continue;
            acc += mode == AverageMode::kLogSpace ? f.gold_duration->log_seconds() : f.gold_duration->count();
            ++n;
        }
        if (n == 0) throw ContractError("average baseline needs a non-empty reference split with gold durations");
        const double mean = acc / static_cast<double>(n);
        value_ = mode == AverageMode::kLogSpace ? Duration::from_log_seconds(mean) : Duration(mean);
    }

    Duration predict(const FactRecord&) const { return value_; }
    Duration value() const { return value_; }

private:
    Duration value_;
};

/// Point mass on the class nearest each record's gold duration.
inline std::vector<DurationDistribution> classification_upperbound(std::span<const FactRecord> records, TaxonomyPtr tax) {
    std::vector<DurationDistribution> out;
    out.reserve(records.size());
    for (const auto& f : records) {
        if (!f.gold_duration) throw ValidationError("record '" + f.id + "' has no gold duration");
        out.push_back(DurationDistribution::point_mass(tax, nearest_class(*f.gold_duration, *tax)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prediction interchange

inline constexpr double kImportSumTolerance = 1e-6;

inline DurationPrediction prediction_from_json(const json& obj, const TaxonomyPtr& tax, ParseMode mode) {
    const bool has_point = obj.contains("point_log_seconds") && !obj["point_log_seconds"].is_null();
    const bool has_dist = obj.contains("distribution") && !obj["distribution"].is_null();
    if (has_point && has_dist) throw ValidationError("record has both 'point_log_seconds' and 'distribution'");
    if (!has_point && !has_dist) throw ValidationError("record needs 'point_log_seconds' or 'distribution'");
    if (has_point) {
        const double ls = require_number(obj, "point_log_seconds");
        if (!std::isfinite(ls)) throw ValidationError("'point_log_seconds' must be finite");
        return Duration::from_log_seconds(ls);
    }
    const json& d = obj["distribution"];
    if (!d.is_array()) throw ValidationError("'distribution' must be a list");
    std::vector<double> probs(tax->size(), 0.0);
    std::vector<bool> seen(tax->size(), false);
    auto add = [&](const std::string& label, const json& p) {
        auto idx = tax->index_of(label);
        if (!idx) throw ValidationError("unknown duration class '" + label + "'");
        if (seen[*idx]) throw ValidationError("duration class '" + label + "' listed twice");
        if (!p.is_number()) throw ValidationError("probability for '" + label + "' must be a number");
        seen[*idx] = true;
        probs[*idx] = p.get<double>();
    };
    for (const auto& e : d) {
        if (!e.is_object()) throw ValidationError("distribution entries must be objects");
        if (e.contains("class")) {
            if (!e["class"].is_string()) throw ValidationError("distribution 'class' must be a string");
            add(e["class"].get<std::string>(), require_field(e, "p"));
        } else {
            for (const auto& [label, p] : e.items()) add(label, p);
        }
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0) || !std::isfinite(p)) throw ValidationError("probabilities must be finite and non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kImportSumTolerance) {
        if (mode == ParseMode::kStrict || !(sum > 0))
            throw ValidationError("probabilities sum to " + std::to_string(sum) + ", expected 1");
    }
    if (std::abs(sum - 1.0) > DurationDistribution::kSumTolerance)
        for (auto& p : probs) p /= sum;
    return DurationDistribution(tax, std::move(probs));
}

inline json prediction_to_json(const std::string& id, const DurationPrediction& p) {
    json obj;
    obj["id"] = id;
    if (const auto* d = std::get_if<Duration>(&p)) {
        obj["point_log_seconds"] = d->log_seconds();
        return obj;
    }
    const auto& dist = std::get<DurationDistribution>(p);
    json arr = json::array();
    for (std::size_t i = 0; i < dist.size(); ++i) arr.push_back({{"class", dist.taxonomy()[i].label}, {"p", dist[i]}});
    obj["distribution"] = std::move(arr);
    return obj;
}

/// Reads a duration-prediction file keyed by id. Lenient mode renormalizes
/// distributions whose mass is off by more than the tolerance.
inline std::map<std::string, DurationPrediction> import_predictions(std::istream& in, const TaxonomyPtr& tax,
                                                                    ParseMode mode = ParseMode::kStrict,
                                                                    std::string source = {},
                                                                    std::vector<Diagnostic>* diagnostics = nullptr) {
    DiagnosticSink sink(mode, std::move(source));
    std::map<std::string, DurationPrediction> out;
    for_each_json_line(
        in,
        [&](std::size_t line, const json& obj) {
            std::string id;
            try {
                id = require_string(obj, "id");
                if (id.empty()) throw ValidationError("field 'id' must be non-empty");
                auto pred = prediction_from_json(obj, tax, mode);
                if (!out.emplace(id, std::move(pred)).second) sink.fatal({line, "duplicate id '" + id + "'"});
            } catch (const ValidationError& e) {
                sink.report({line, e.what()});
            }
        },
        [&](Diagnostic d) { sink.report(std::move(d)); });
    if (diagnostics) *diagnostics = sink.take();
    return out;
}

// ---------------------------------------------------------------------------
// Model artifacts

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline json taxonomy_to_json(const DurationTaxonomy& tax) {
    json arr = json::array();
    for (const auto& c : tax.classes()) arr.push_back({{"label", c.label}, {"seconds", c.canonical.count()}});
    return arr;
}

inline TaxonomyPtr taxonomy_from_json(const json& arr) {
    if (!arr.is_array()) throw ValidationError("taxonomy must be a list of {label, seconds}");
    std::vector<DurationClass> classes;
    for (const auto& c : arr) {
        if (!c.is_object()) throw ValidationError("taxonomy must be a list of {label, seconds}");
        classes.push_back({require_string(c, "label"), Duration(require_number(c, "seconds"))});
    }
    return std::make_shared<const DurationTaxonomy>(std::move(classes));
}

inline json meta_to_json(const TrainingMetadata& m) {
    return {{"seed", m.params.seed},
            {"epochs", m.params.epochs},
            {"learning_rate", m.params.learning_rate},
            {"lr_decay", m.params.lr_decay},
            {"l2", m.params.l2},
            {"dimension", m.params.dimension},
            {"examples", m.examples},
            {"epoch_losses", m.epoch_losses},
            {"epoch_steps", m.epoch_steps}};
}

inline TrainingMetadata meta_from_json(const json& j) {
    TrainingMetadata m;
    m.params.seed = j.at("seed").get<std::uint64_t>();
    m.params.epochs = j.at("epochs").get<int>();
    m.params.learning_rate = j.at("learning_rate").get<double>();
    m.params.lr_decay = j.at("lr_decay").get<double>();
    m.params.l2 = j.at("l2").get<double>();
    m.params.dimension = j.at("dimension").get<std::uint32_t>();
    m.examples = j.at("examples").get<std::size_t>();
    m.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
    m.epoch_steps = j.at("epoch_steps").get<std::vector<double>>();
    return m;
}

inline void check_header(const json& j, const char* kind) {
    if (!j.is_object() || j.value("format", "") != "chronocal-model")
        throw ValidationError("not a chronocal model artifact");
    if (j.value("version", 0) != kModelFormatVersion)
        throw ValidationError("unsupported model artifact version " + std::to_string(j.value("version", 0)));
    if (j.value("kind", "") != kind) throw ValidationError(std::string("model artifact is not a ") + kind);
}

}  // namespace detail

/// Text artifact. Only non-zero weight rows are stored; doubles are written
/// in shortest round-trip form so loading reproduces predictions exactly.
inline json model_to_json(const ClassifierModel& m) {
    json rows = json::array();
    const std::size_t k = m.classes();
    for (std::size_t f = 0; f < m.dimension; ++f) {
        const double* row = &m.weights[f * k];
        if (std::all_of(row, row + k, [](double w) { return w == 0.0; })) continue;
        rows.push_back({f, std::vector<double>(row, row + k)});
    }
    return {{"format", "chronocal-model"}, {"version", kModelFormatVersion}, {"kind", "classifier"},
            {"taxonomy", detail::taxonomy_to_json(*m.taxonomy)}, {"dimension", m.dimension},
            {"training", detail::meta_to_json(m.meta)}, {"bias", m.bias}, {"weights", std::move(rows)}};
}

inline json model_to_json(const RegressorModel& m) {
    json rows = json::array();
    for (std::size_t f = 0; f < m.dimension; ++f)
        if (m.weights[f] != 0.0) rows.push_back({f, m.weights[f]});
    return {{"format", "chronocal-model"}, {"version", kModelFormatVersion}, {"kind", "regressor"},
            {"dimension", m.dimension}, {"training", detail::meta_to_json(m.meta)}, {"bias", m.bias},
            {"weights", std::move(rows)}};
}

inline std::string model_kind(const json& j) {
    if (!j.is_object() || j.value("format", "") != "chronocal-model") throw ValidationError("not a chronocal model artifact");
    return j.value("kind", "");
}

inline ClassifierModel classifier_from_json(const json& j) {
    detail::check_header(j, "classifier");
    try {
        ClassifierModel m;
        m.taxonomy = detail::taxonomy_from_json(j.at("taxonomy"));
        m.dimension = j.at("dimension").get<std::uint32_t>();
        m.meta = detail::meta_from_json(j.at("training"));
        m.bias = j.at("bias").get<std::vector<double>>();
        const std::size_t k = m.classes();
        if (m.bias.size() != k) throw ValidationError("bias length does not match taxonomy");
        m.weights.assign(static_cast<std::size_t>(m.dimension) * k, 0.0);
        for (const auto& row : j.at("weights")) {
            const auto f = row.at(0).get<std::size_t>();
            const auto w = row.at(1).get<std::vector<double>>();
            if (f >= m.dimension || w.size() != k) throw ValidationError("malformed weight row");
            std::copy(w.begin(), w.end(), m.weights.begin() + static_cast<std::ptrdiff_t>(f * k));
        }
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed classifier artifact: ") + e.what());
    }
}

inline RegressorModel regressor_from_json(const json& j) {
    detail::check_header(j, "regressor");
    try {
        RegressorModel m;
        m.dimension = j.at("dimension").get<std::uint32_t>();
        m.meta = detail::meta_from_json(j.at("training"));
        m.bias = j.at("bias").get<double>();
        m.weights.assign(m.dimension, 0.0);
        for (const auto& row : j.at("weights")) {
            const auto f = row.at(0).get<std::size_t>();
            if (f >= m.dimension) throw ValidationError("malformed weight row");
            m.weights[f] = row.at(1).get<double>();
        }
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed regressor artifact: ") + e.what());
    }
}

}  // namespace chronocal
