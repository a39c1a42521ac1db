#pragma once

// Adaptive inference with duration predictions: a closed/open-book gate
// that retrieves only when the closed-book answer has probably changed, and
// recency-vs-relevancy re-ranking of answers drawn from corpora of
// different dates.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "chronocal/calibration.hpp"
#include "chronocal/core.hpp"
#include "chronocal/metrics.hpp"

namespace chronocal {

struct GateDecision {
    std::string answer;
    bool used_retrieval = false;
    double change_probability = 0.0;
};

/// Retrieve (take the open-book answer) when P(d <= m) >= p_star.
inline GateDecision hybrid_gate(const QAPrediction& closed, const DurationDistribution& dist_for_closed_answer,
                                Misalignment m, const QAPrediction& open, double p_star = 0.5) {
    const double changed = cdf_at(dist_for_closed_answer, m);
    if (changed >= p_star) return {open.answer, true, changed};
    return {closed.answer, false, changed};
}

struct CorpusAnswer {
    std::string id;
    std::string answer;
    double confidence = 0.0;
    Date corpus_date;
};

struct RerankDecision {
    CorpusAnswer chosen;
    std::size_t chosen_index = 0;
    std::vector<double> adjusted;  // aligned with the candidates
};

/// Scores each candidate by confidence * (1 - P(d <= m_i)) with m_i measured
/// from its corpus date. Ties prefer the newer corpus, then the smaller id.
inline RerankDecision two_corpus_rerank(std::span<const CorpusAnswer> candidates,
                                        const std::map<std::string, DurationDistribution>& dists, const Date& query_date) {
    if (candidates.empty()) throw ContractError("two_corpus_rerank: no candidates");
    RerankDecision out;
    for (const auto& c : candidates) {
        if (!(c.confidence >= 0.0 && c.confidence <= 1.0))
            throw ValidationError("candidate '" + c.id + "' confidence outside [0, 1]");
        auto it = dists.find(c.id);
        if (it == dists.end()) throw ValidationError("no duration distribution for candidate '" + c.id + "'");
        const Misalignment m = misalignment_between(c.corpus_date, query_date);
        out.adjusted.push_back(c.confidence * (1.0 - cdf_at(it->second, m)));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (out.adjusted[i] > out.adjusted[best]) {
            best = i;
        } else if (out.adjusted[i] == out.adjusted[best]) {
            const double newer = span_seconds(candidates[best].corpus_date, candidates[i].corpus_date);
            if (newer > 0 || (newer == 0 && candidates[i].id < candidates[best].id)) best = i;
        }
    }
    out.chosen = candidates[best];
    out.chosen_index = best;
    return out;
}

struct EnsembleDecision {
    std::string id;
    std::string answer;
    bool used_updated_path = false;
    std::vector<std::string> gold_at_query;
};

struct EnsembleSummary {
    double em_pct = 0.0;
    double updated_path_pct = 0.0;
    std::size_t count = 0;
};

inline EnsembleSummary ensemble_report(std::span<const EnsembleDecision> decisions) {
    if (decisions.empty()) throw ContractError("ensemble_report: no decisions");
    std::size_t correct = 0, updated = 0;
    for (const auto& d : decisions) {
        correct += exact_match(d.answer, d.gold_at_query) ? 1 : 0;
        updated += d.used_updated_path ? 1 : 0;
    }
    const double n = static_cast<double>(decisions.size());
    return {100.0 * static_cast<double>(correct) / n, 100.0 * static_cast<double>(updated) / n, decisions.size()};
}

}  // namespace chronocal
