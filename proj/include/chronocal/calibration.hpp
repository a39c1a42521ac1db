#pragma once

// Misalignment-aware confidence adjustment. A base confidence c(q, a) is
// discounted using a predicted duration for the (question, answer) fact and
// the misalignment m between training and query dates.

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "chronocal/core.hpp"
#include "chronocal/duration_predict.hpp"
#include "chronocal/jsonl.hpp"

namespace chronocal {

struct QAPrediction {
    std::string id;
    std::string answer;
    double confidence = 0.0;
    std::vector<std::string> gold_at_training;
    std::vector<std::string> gold_at_query;
    std::optional<bool> changed;
    /// Fields not interpreted here, echoed back on output.
    json extra = json::object();
};

enum class Strategy { kCdf, kBinary, kExpectation, kArgmax, kUniform, kOracle, kNone };

/// `kSurvival` keeps the probability mass of the fact still holding;
/// `kLiteral` applies the displayed formulas verbatim.
enum class DiscountMode { kSurvival, kLiteral };

inline std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::kCdf: return "cdf";
        case Strategy::kBinary: return "binary";
        case Strategy::kExpectation: return "expectation";
        case Strategy::kArgmax: return "argmax";
        case Strategy::kUniform: return "uniform";
        case Strategy::kOracle: return "oracle";
        case Strategy::kNone: return "none";
    }
    return "none";
}

inline Strategy parse_strategy(std::string_view s) {
    for (auto v : {Strategy::kCdf, Strategy::kBinary, Strategy::kExpectation, Strategy::kArgmax, Strategy::kUniform,
                   Strategy::kOracle, Strategy::kNone})
        if (to_string(v) == s) return v;
    throw ValidationError("unknown adjustment strategy '" + std::string(s) + "'");
}

inline std::string_view to_string(DiscountMode m) { return m == DiscountMode::kSurvival ? "survival" : "literal"; }

inline DiscountMode parse_discount_mode(std::string_view s) {
    if (s == "survival") return DiscountMode::kSurvival;
    if (s == "literal") return DiscountMode::kLiteral;
    throw ValidationError("unknown discount mode '" + std::string(s) + "' (expected survival or literal)");
}

struct AdjustedPrediction {
    QAPrediction base;
    double adjusted_confidence = 0.0;
    Strategy strategy = Strategy::kNone;
    DiscountMode mode = DiscountMode::kSurvival;
    std::optional<DurationPrediction> duration;
    std::optional<Misalignment> misalignment;
    /// Multiplicative factor for cdf/binary-style strategies, or the uniform
    /// offset for `kUniform`.
    double discount = 1.0;
};

namespace detail {

inline AdjustedPrediction make_adjusted(const QAPrediction& p, double adjusted, Strategy s, DiscountMode mode,
                                        std::optional<DurationPrediction> d, std::optional<Misalignment> m,
                                        double discount) {
    return {p, adjusted, s, mode, std::move(d), m, discount};
}

inline double keep_if(bool keep, double c) { return keep ? c : 0.0; }

}  // namespace detail

inline AdjustedPrediction adjust_none(const QAPrediction& p) {
    return detail::make_adjusted(p, p.confidence, Strategy::kNone, DiscountMode::kSurvival, std::nullopt, std::nullopt, 1.0);
}

/// Survival: c * (1 - P(d <= m)). Literal: c * P(d <= m).
inline AdjustedPrediction adjust_cdf(const QAPrediction& p, const DurationDistribution& dist, Misalignment m,
                                     DiscountMode mode = DiscountMode::kSurvival) {
    const double cdf = cdf_at(dist, m);
    const double changed_mass = p.confidence * cdf;
    const double adjusted = mode == DiscountMode::kLiteral ? changed_mass : p.confidence - changed_mass;
    const double factor = mode == DiscountMode::kLiteral ? cdf : 1.0 - cdf;
    return detail::make_adjusted(p, adjusted, Strategy::kCdf, mode, dist, m, factor);
}

/// Survival keeps c while the predicted duration covers m (d >= m).
/// Literal keeps c only when d < m.
inline AdjustedPrediction adjust_binary(const QAPrediction& p, Duration predicted, Misalignment m,
                                        DiscountMode mode = DiscountMode::kSurvival) {
    const bool survives = predicted.count() >= m.count();
    const bool keep = mode == DiscountMode::kSurvival ? survives : !survives;
    return detail::make_adjusted(p, detail::keep_if(keep, p.confidence), Strategy::kBinary, mode, predicted, m,
                                 keep ? 1.0 : 0.0);
}

/// Zeroes the confidence once m exceeds the expected (log-space) duration.
inline AdjustedPrediction adjust_expectation(const QAPrediction& p, const DurationDistribution& dist, Misalignment m) {
    auto a = adjust_binary(p, expectation_log_seconds(dist), m);
    a.strategy = Strategy::kExpectation;
    a.duration = dist;
    return a;
}

/// Binary adjustment at the canonical duration of the most probable class.
inline AdjustedPrediction adjust_argmax(const QAPrediction& p, const DurationDistribution& dist, Misalignment m) {
    auto a = adjust_binary(p, dist.taxonomy().canonical(argmax_class(dist)), m);
    a.strategy = Strategy::kArgmax;
    a.duration = dist;
    return a;
}

/// Zeroes the confidence of predictions whose answer changed.
inline AdjustedPrediction adjust_oracle(const QAPrediction& p) {
    if (!p.changed) throw ValidationError("oracle adjustment needs the 'changed' flag (prediction '" + p.id + "')");
    return detail::make_adjusted(p, *p.changed ? 0.0 : p.confidence, Strategy::kOracle, DiscountMode::kSurvival,
                                 std::nullopt, std::nullopt, *p.changed ? 0.0 : 1.0);
}

struct UniformAdjustment {
    double offset = 0.0;  // the common decrease applied to every confidence
    std::vector<AdjustedPrediction> predictions;
};

inline constexpr int kUniformMaxIterations = 200;

/// Finds one offset u >= 0 so that sum(max(c_i - u, 0)) matches the total
/// adjusted confidence of `per_example` within `tol`, by bisection.
inline UniformAdjustment adjust_uniform(std::span<const QAPrediction> preds,
                                        std::span<const AdjustedPrediction> per_example, double tol = 1e-9) {
    if (preds.size() != per_example.size())
        throw ValidationError("uniform adjustment needs aligned lists (" + std::to_string(preds.size()) + " vs " +
                              std::to_string(per_example.size()) + ")");
    double base_total = 0.0, target = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].id != per_example[i].base.id)
            throw ValidationError("uniform adjustment: id mismatch at position " + std::to_string(i) + " ('" +
                                  preds[i].id + "' vs '" + per_example[i].base.id + "')");
        base_total += preds[i].confidence;
        target += per_example[i].adjusted_confidence;
        hi = std::max(hi, preds[i].confidence);
    }
    if (target > base_total + tol)
        throw ContractError("uniform adjustment target total exceeds the base total; the offset would be negative");

    auto total_at = [&](double u) {
        double s = 0.0;
        for (const auto& p : preds) s += std::max(p.confidence - u, 0.0);
        return s;
    };
    double offset = 0.0;
    if (base_total - target <= tol) {
        offset = 0.0;
    } else if (target <= tol) {
        offset = hi;
    } else {
        double lo = 0.0;
        for (int it = 0; it < kUniformMaxIterations; ++it) {
            offset = 0.5 * (lo + hi);
            const double total = total_at(offset);
            if (std::abs(total - target) <= tol) break;
            (total > target ? lo : hi) = offset;
        }
    }

    UniformAdjustment out;
    out.offset = offset;
    out.predictions.reserve(preds.size());
    for (const auto& p : preds)
        out.predictions.push_back(detail::make_adjusted(p, std::max(p.confidence - offset, 0.0), Strategy::kUniform,
                                                        DiscountMode::kSurvival, std::nullopt, std::nullopt, offset));
    return out;
}

// ---------------------------------------------------------------------------
// Scalar-feature base calibrator

struct CalibrationFeatures {
    double likelihood = 0.0;
    double answer_tokens = 0.0;
    std::optional<double> retrieval_score;
};

struct CalibrationExample {
    CalibrationFeatures features;
    bool correct = false;
};

struct CalibratorParams {
    int iterations = 2000;
    double learning_rate = 0.5;
    double l2 = 1e-4;
};

/// Logistic model over standardized scalar features.
struct CalibratorModel {
    bool uses_retrieval = false;
    std::vector<double> mean;
    std::vector<double> scale;
    std::vector<double> weights;
    double bias = 0.0;
};

namespace detail {

inline std::vector<double> calibration_vector(const CalibrationFeatures& f, bool uses_retrieval) {
    std::vector<double> x{f.likelihood, f.answer_tokens};
    if (uses_retrieval) {
        if (!f.retrieval_score) throw ValidationError("calibrator expects a retrieval score");
        x.push_back(*f.retrieval_score);
    }
    return x;
}

inline double sigmoid(double z) {
    constexpr double kEdge = 1e-12;
    const double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    return std::clamp(s, kEdge, 1.0 - kEdge);
}

}  // namespace detail

/// Full-batch gradient descent on the mean logistic loss. The retrieval
/// score is used only when every example carries one.
inline CalibratorModel fit_calibrator(std::span<const CalibrationExample> examples, const CalibratorParams& params = {}) {
    if (examples.size() < 2) throw ContractError("calibrator needs at least two examples");
    const bool any_pos = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return e.correct; });
    const bool any_neg = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return !e.correct; });
    if (!any_pos || !any_neg) throw ContractError("calibrator needs both correct and incorrect examples");

    CalibratorModel m;
    m.uses_retrieval = std::all_of(examples.begin(), examples.end(),
                                   [](const auto& e) { return e.features.retrieval_score.has_value(); });
    std::vector<std::vector<double>> xs;
    for (const auto& e : examples) xs.push_back(detail::calibration_vector(e.features, m.uses_retrieval));
    const std::size_t dim = xs.front().size();
    const double n = static_cast<double>(xs.size());
    m.mean.assign(dim, 0.0);
    m.scale.assign(dim, 0.0);
    for (const auto& x : xs)
        for (std::size_t j = 0; j < dim; ++j) m.mean[j] += x[j] / n;
    for (const auto& x : xs)
        for (std::size_t j = 0; j < dim; ++j) m.scale[j] += (x[j] - m.mean[j]) * (x[j] - m.mean[j]) / n;
    for (auto& s : m.scale) s = s > 0 ? std::sqrt(s) : 1.0;
    for (auto& x : xs)
        for (std::size_t j = 0; j < dim; ++j) x[j] = (x[j] - m.mean[j]) / m.scale[j];

    m.weights.assign(dim, 0.0);
    std::vector<double> gw(dim);
    for (int it = 0; it < params.iterations; ++it) {
        std::fill(gw.begin(), gw.end(), 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double z = m.bias;
            for (std::size_t j = 0; j < dim; ++j) z += m.weights[j] * xs[i][j];
            const double r = detail::sigmoid(z) - (examples[i].correct ? 1.0 : 0.0);
            gb += r / n;
            for (std::size_t j = 0; j < dim; ++j) gw[j] += r * xs[i][j] / n;
        }
        m.bias -= params.learning_rate * gb;
        for (std::size_t j = 0; j < dim; ++j) m.weights[j] -= params.learning_rate * (gw[j] + params.l2 * m.weights[j]);
    }
    return m;
}

inline double apply_calibrator(const CalibratorModel& m, const CalibrationFeatures& f) {
    const auto x = detail::calibration_vector(f, m.uses_retrieval);
    double z = m.bias;
    for (std::size_t j = 0; j < x.size(); ++j) z += m.weights[j] * (x[j] - m.mean[j]) / m.scale[j];
    return detail::sigmoid(z);
}

// ---------------------------------------------------------------------------
// QA prediction files

inline QAPrediction qa_from_json(const json& obj) {
    QAPrediction p;
    p.id = require_string(obj, "id");
    if (p.id.empty()) throw ValidationError("field 'id' must be non-empty");
    p.answer = require_string(obj, "answer");
    p.confidence = require_number(obj, "confidence");
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) throw ValidationError("field 'confidence' must lie in [0, 1]");
    p.gold_at_training = require_string_list(obj, "gold_at_training");
    p.gold_at_query = require_string_list(obj, "gold_at_query");
    if (auto it = obj.find("changed"); it != obj.end() && !it->is_null()) {
        if (!it->is_boolean()) throw ValidationError("field 'changed' must be a boolean");
        p.changed = it->get<bool>();
    }
    static const std::unordered_set<std::string> known = {"id", "answer", "confidence", "gold_at_training",
                                                          "gold_at_query", "changed"};
    for (const auto& [k, v] : obj.items())
        if (!known.contains(k)) p.extra[k] = v;
    return p;
}

inline json qa_to_json(const QAPrediction& p) {
    json obj;
    obj["id"] = p.id;
    obj["answer"] = p.answer;
    obj["confidence"] = p.confidence;
    obj["gold_at_training"] = p.gold_at_training;
    obj["gold_at_query"] = p.gold_at_query;
    if (p.changed) obj["changed"] = *p.changed;
    for (const auto& [k, v] : p.extra.items()) obj[k] = v;
    return obj;
}

inline json adjusted_to_json(const AdjustedPrediction& a) {
    json obj = qa_to_json(a.base);
    obj["adjusted_confidence"] = a.adjusted_confidence;
    obj["strategy"] = std::string(to_string(a.strategy));
    json d;
    d["mode"] = std::string(to_string(a.mode));
    d["factor"] = a.discount;
    if (a.misalignment) d["misalignment_seconds"] = a.misalignment->count();
    if (a.duration) {
        if (const auto* pt = std::get_if<Duration>(&*a.duration)) {
            d["predicted_log_seconds"] = pt->log_seconds();
        } else {
            d["distribution"] = prediction_to_json(a.base.id, *a.duration)["distribution"];
        }
    }
    obj["discount"] = std::move(d);
    return obj;
}

inline std::vector<QAPrediction> parse_qa_predictions(std::istream& in, ParseMode mode = ParseMode::kStrict,
                                                      std::string source = {},
                                                      std::vector<Diagnostic>* diagnostics = nullptr) {
    DiagnosticSink sink(mode, std::move(source));
    std::vector<QAPrediction> out;
    std::unordered_set<std::string> seen;
    for_each_json_line(
        in,
        [&](std::size_t line, const json& obj) {
            QAPrediction p;
            try {
                p = qa_from_json(obj);
            } catch (const ValidationError& e) {
                sink.report({line, e.what()});
                return;
            }
            if (!seen.insert(p.id).second) sink.fatal({line, "duplicate id '" + p.id + "'"});
            out.push_back(std::move(p));
        },
        [&](Diagnostic d) { sink.report(std::move(d)); });
    if (diagnostics) *diagnostics = sink.take();
    return out;
}

}  // namespace chronocal
