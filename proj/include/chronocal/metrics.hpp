#pragma once

// Intrinsic duration metrics (Year-MAE, Log-Sec MSE, MC-TACO strict
// accuracy / F1) and calibration metrics over QA predictions (EM, AUCROC,
// 10-bucket ECE, RC@XX, average confidence change).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "chronocal/core.hpp"
#include "chronocal/ingest.hpp"

namespace chronocal {

namespace detail {

inline void check_aligned(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw ValidationError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
    if (a == 0) throw ContractError(std::string(what) + ": empty input");
}

}  // namespace detail

inline double year_mae(std::span<const Duration> preds, std::span<const Duration> golds) {
    detail::check_aligned(preds.size(), golds.size(), "year_mae");
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) acc += std::abs(preds[i].in_years() - golds[i].in_years());
    return acc / static_cast<double>(preds.size());
}

inline double logsec_mse(std::span<const Duration> preds, std::span<const Duration> golds) {
    detail::check_aligned(preds.size(), golds.size(), "logsec_mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double r = preds[i].log_seconds() - golds[i].log_seconds();
        acc += r * r;
    }
    return acc / static_cast<double>(preds.size());
}

// ---------------------------------------------------------------------------
// Exact match

/// Lowercase, strip ASCII punctuation, drop the articles a/an/the and
/// collapse whitespace.
inline std::string normalize_answer(std::string_view s) {
    std::string cleaned;
    cleaned.reserve(s.size());
    for (unsigned char c : s) {
        if (std::ispunct(c)) continue;
        cleaned.push_back(std::isspace(c) ? ' ' : static_cast<char>(std::tolower(c)));
    }
    std::string out;
    std::size_t i = 0;
    while (i < cleaned.size()) {
        while (i < cleaned.size() && cleaned[i] == ' ') ++i;
        std::size_t j = i;
        while (j < cleaned.size() && cleaned[j] != ' ') ++j;
        if (j > i) {
            const std::string_view word(cleaned.data() + i, j - i);
            if (word != "a" && word != "an" && word != "the") {
                if (!out.empty()) out.push_back(' ');
                out.append(word);
            }
        }
        i = j;
    }
    return out;
}

inline bool exact_match(std::string_view answer, std::span<const std::string> golds) {
    const std::string a = normalize_answer(answer);
    return std::any_of(golds.begin(), golds.end(), [&](const std::string& g) { return normalize_answer(g) == a; });
}

// ---------------------------------------------------------------------------
// AUCROC

/// Probability that a random positive outscores a random negative, ties
/// counting one half. O(n log n) via tie groups over the sorted scores.
inline double auc_roc(std::span<const double> scores, const std::vector<bool>& labels) {
    detail::check_aligned(scores.size(), labels.size(), "auc_roc");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::int64_t pos = 0, neg = 0, twice_pairs = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::int64_t gp = 0, gn = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] ? gp : gn) += 1;
            ++j;
        }
        twice_pairs += 2 * gp * neg + gp * gn;
        pos += gp;
        neg += gn;
        i = j;
    }
    if (pos == 0 || neg == 0) throw ContractError("auc_roc needs both positive and negative labels");
    return static_cast<double>(twice_pairs) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

// ---------------------------------------------------------------------------
// ECE

inline constexpr std::size_t kEceBuckets = 10;

/// Sizes of the equal-count ECE buckets for n items: floor(n / 10) each, with
/// the remainder given one apiece to the last buckets.
inline std::vector<std::size_t> ece_bucket_sizes(std::size_t n) {
    std::vector<std::size_t> sizes(kEceBuckets, n / kEceBuckets);
    const std::size_t r = n % kEceBuckets;
    for (std::size_t b = kEceBuckets - r; b < kEceBuckets; ++b) ++sizes[b];
    return sizes;
}

/// Macro average over non-empty buckets of |mean confidence - accuracy|,
/// buckets taken in ascending confidence order (stable on ties).
inline double ece(std::span<const double> confidences, const std::vector<bool>& correct) {
    detail::check_aligned(confidences.size(), correct.size(), "ece");
    std::vector<std::size_t> order(confidences.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return confidences[a] < confidences[b]; });
    double total = 0.0;
    std::size_t nonempty = 0, pos = 0;
    for (std::size_t size : ece_bucket_sizes(order.size())) {
        if (size == 0) continue;
        double conf = 0.0, acc = 0.0;
        for (std::size_t k = 0; k < size; ++k, ++pos) {
            conf += confidences[order[pos]];
            acc += correct[order[pos]] ? 1.0 : 0.0;
        }
        total += std::abs(conf / static_cast<double>(size) - acc / static_cast<double>(size));
        ++nonempty;
    }
    return total / static_cast<double>(nonempty);
}

// ---------------------------------------------------------------------------
// Risk control

struct ScoredOutcome {
    double confidence = 0.0;
    bool correct = false;
};

struct RiskControlResult {
    double target = 0.0;                // XX, percent
    double tau = 0.0;                   // +inf when the target is unattainable on the calibration set
    std::optional<double> achieved;     // percent accuracy on eval predictions with confidence >= tau
    std::optional<double> delta;        // |achieved - target|
    std::size_t eval_kept = 0;
};

/// Picks the smallest calibration confidence tau whose retained set
/// (confidence >= tau) reaches `target_pct` accuracy, then measures accuracy
/// of the evaluation predictions retained by the same tau.
inline RiskControlResult risk_control(std::span<const ScoredOutcome> calib, std::span<const ScoredOutcome> eval,
                                      double target_pct) {
    if (calib.empty()) throw ContractError("risk_control: calibration set is empty");
    if (!(target_pct >= 0.0 && target_pct <= 100.0)) throw ContractError("risk_control: target must lie in [0, 100]");
    std::vector<ScoredOutcome> sorted(calib.begin(), calib.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.confidence > b.confidence; });

    RiskControlResult r;
    r.target = target_pct;
    r.tau = std::numeric_limits<double>::infinity();
    std::size_t kept = 0, kept_correct = 0, i = 0;
    while (i < sorted.size()) {
        const double level = sorted[i].confidence;
        while (i < sorted.size() && sorted[i].confidence == level) {
            ++kept;
            kept_correct += sorted[i].correct ? 1 : 0;
            ++i;
        }
        if (100.0 * static_cast<double>(kept_correct) >= target_pct * static_cast<double>(kept)) r.tau = level;
    }
    if (std::isinf(r.tau)) return r;

    std::size_t eval_correct = 0;
    for (const auto& e : eval) {
        if (e.confidence >= r.tau) {
            ++r.eval_kept;
            eval_correct += e.correct ? 1 : 0;
        }
    }
    if (r.eval_kept > 0) {
        r.achieved = 100.0 * static_cast<double>(eval_correct) / static_cast<double>(r.eval_kept);
        r.delta = std::abs(*r.achieved - target_pct);
    }
    return r;
}

// ---------------------------------------------------------------------------
// MC-TACO

/// Indices of options within `threshold` log-seconds of the prediction.
inline std::vector<std::size_t> mctaco_select(Duration pred, std::span<const MCTacoOption> options, double threshold) {
    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < options.size(); ++i)
        if (std::abs(options[i].duration.log_seconds() - pred.log_seconds()) <= threshold) selected.push_back(i);
    return selected;
}

/// Set F1 with the empty-set conventions: both empty -> 1, one empty -> 0.
inline double set_f1(const std::set<std::size_t>& predicted, const std::set<std::size_t>& gold) {
    if (predicted.empty() && gold.empty()) return 1.0;
    if (predicted.empty() || gold.empty()) return 0.0;
    std::size_t overlap = 0;
    for (auto i : predicted) overlap += gold.count(i);
    if (overlap == 0) return 0.0;
    const double p = static_cast<double>(overlap) / static_cast<double>(predicted.size());
    const double r = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * p * r / (p + r);
}

struct MCTacoScore {
    double strict_acc = 0.0;  // percent
    double f1 = 0.0;          // percent
};

inline MCTacoScore mctaco_eval(std::span<const MCTacoRecord> records, const std::map<std::string, Duration>& preds,
                               double threshold) {
    if (records.empty()) throw ContractError("mctaco_eval: no records");
    double strict = 0.0, f1 = 0.0;
    for (const auto& rec : records) {
        auto it = preds.find(rec.id);
        if (it == preds.end()) throw ValidationError("no duration prediction for MC-TACO record '" + rec.id + "'");
        const auto sel = mctaco_select(it->second, rec.options, threshold);
        const std::set<std::size_t> selected(sel.begin(), sel.end());
        std::set<std::size_t> gold;
        for (std::size_t i = 0; i < rec.options.size(); ++i)
            if (rec.options[i].gold_label) gold.insert(i);
        strict += selected == gold ? 1.0 : 0.0;
        f1 += set_f1(selected, gold);
    }
    const double n = static_cast<double>(records.size());
    return {100.0 * strict / n, 100.0 * f1 / n};
}

/// 0.0, 0.05, ..., 10.0 log-seconds.
inline std::vector<double> default_mctaco_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 200; ++i) grid.push_back(i * 0.05);
    return grid;
}

/// Grid threshold maximizing dev F1; ties go to the smallest threshold.
inline double tune_mctaco_threshold(std::span<const MCTacoRecord> dev, const std::map<std::string, Duration>& preds,
                                    std::span<const double> grid) {
    if (grid.empty()) throw ContractError("tune_mctaco_threshold: empty threshold grid");
    std::vector<double> sorted(grid.begin(), grid.end());
    std::sort(sorted.begin(), sorted.end());
    double best_t = sorted.front();
    double best_f1 = -1.0;
    for (double t : sorted) {
        const double f1 = mctaco_eval(dev, preds, t).f1;
        if (f1 > best_f1) {
            best_f1 = f1;
            best_t = t;
        }
    }
    return best_t;
}

// ---------------------------------------------------------------------------

/// Percent change of total confidence.
inline double avg_conf_delta(std::span<const double> base, std::span<const double> adjusted) {
    detail::check_aligned(base.size(), adjusted.size(), "avg_conf_delta");
    const double b = std::accumulate(base.begin(), base.end(), 0.0);
    const double a = std::accumulate(adjusted.begin(), adjusted.end(), 0.0);
    if (b <= 0.0) throw ContractError("avg_conf_delta: base confidences sum to zero");
    return 100.0 * (a - b) / b;
}

}  // namespace chronocal
