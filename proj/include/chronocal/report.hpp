#pragma once

// Metric bundles and their machine-readable / fixed-width table forms.

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chronocal/jsonl.hpp"
#include "chronocal/metrics.hpp"

namespace chronocal {

struct EvalReport {
    std::optional<double> em;  // percent
    std::optional<double> aucroc;
    std::optional<double> ece;
    std::optional<RiskControlResult> rc;
    std::optional<double> y_mae;
    std::optional<double> ls_mse;
    std::optional<double> mctaco_strict;  // percent
    std::optional<double> mctaco_f1;      // percent
    std::optional<double> mctaco_threshold;
    std::optional<double> avg_conf_delta_pct;
    std::map<std::string, std::size_t> counts;
};

inline json report_to_json(const EvalReport& r) {
    json j = json::object();
    if (r.em) j["em"] = *r.em;
    if (r.aucroc) j["aucroc"] = *r.aucroc;
    if (r.ece) j["ece"] = *r.ece;
    if (r.rc) {
        j["rc_target"] = r.rc->target;
        j["tau"] = std::isinf(r.rc->tau) ? json(nullptr) : json(r.rc->tau);
        j["rc_achieved"] = r.rc->achieved ? json(*r.rc->achieved) : json(nullptr);
        j["rc_delta"] = r.rc->delta ? json(*r.rc->delta) : json(nullptr);
        j["rc_kept"] = r.rc->eval_kept;
    }
    if (r.y_mae) j["y_mae"] = *r.y_mae;
    if (r.ls_mse) j["ls_mse"] = *r.ls_mse;
    if (r.mctaco_strict) j["mctaco_strict"] = *r.mctaco_strict;
    if (r.mctaco_f1) j["mctaco_f1"] = *r.mctaco_f1;
    if (r.mctaco_threshold) j["mctaco_threshold"] = *r.mctaco_threshold;
    if (r.avg_conf_delta_pct) j["avg_conf_delta_pct"] = *r.avg_conf_delta_pct;
    if (!r.counts.empty()) {
        json c = json::object();
        for (const auto& [k, v] : r.counts) c[k] = v;
        j["counts"] = std::move(c);
    }
    return j;
}

namespace detail {

inline std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string pad(const std::string& s, std::size_t w, bool left) {
    if (s.size() >= w) return s;
    return left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
}

}  // namespace detail

/// Plain-text table: one row per system/strategy, one column per metric
/// present in at least one row.
inline std::string render_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
    struct Column {
        std::string head;
        std::function<std::optional<std::string>(const EvalReport&)> cell;
    };
    auto num = [](const std::optional<double>& v, const char* spec) -> std::optional<std::string> {
        if (!v) return std::nullopt;
        return detail::fmt(spec, *v);
    };
    std::string rc_head = "RC";
    for (const auto& [_, r] : rows)
        if (r.rc) rc_head = "RC@" + detail::fmt("%g", r.rc->target) + " (|D|)";
    const std::vector<Column> all = {
        {"EM", [&](const EvalReport& r) { return num(r.em, "%.1f"); }},
        {"AUCROC", [&](const EvalReport& r) { return num(r.aucroc, "%.3f"); }},
        {"ECE", [&](const EvalReport& r) { return num(r.ece, "%.3f"); }},
        {rc_head,
         [&](const EvalReport& r) -> std::optional<std::string> {
             if (!r.rc) return std::nullopt;
             if (!r.rc->achieved) return std::string("n/a");
             return detail::fmt("%.1f", *r.rc->achieved) + " (" + detail::fmt("%.1f", *r.rc->delta) + ")";
         }},
        {"AvgConf%D", [&](const EvalReport& r) { return num(r.avg_conf_delta_pct, "%.1f"); }},
        {"Y-MAE", [&](const EvalReport& r) { return num(r.y_mae, "%.2f"); }},
        {"LS-MSE", [&](const EvalReport& r) { return num(r.ls_mse, "%.2f"); }},
        {"Strict", [&](const EvalReport& r) { return num(r.mctaco_strict, "%.1f"); }},
        {"F1", [&](const EvalReport& r) { return num(r.mctaco_f1, "%.1f"); }},
    };
    std::vector<const Column*> cols;
    for (const auto& c : all)
        for (const auto& [_, r] : rows)
            if (c.cell(r)) {
                cols.push_back(&c);
                break;
            }

    std::vector<std::vector<std::string>> cells;
    cells.push_back({"System"});
    for (const auto* c : cols) cells.back().push_back(c->head);
    for (const auto& [name, r] : rows) {
        cells.push_back({name});
        for (const auto* c : cols) cells.back().push_back(c->cell(r).value_or("-"));
    }
    std::vector<std::size_t> widths(cols.size() + 1, 0);
    for (const auto& row : cells)
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());

    std::string out;
    auto rule = [&] {
        std::size_t total = 0;
        for (auto w : widths) total += w + 2;
        out += std::string(total - 2, '-') + "\n";
    };
    for (std::size_t r = 0; r < cells.size(); ++r) {
        std::string line;
        for (std::size_t i = 0; i < cells[r].size(); ++i) {
            if (i > 0) line += "  ";
            line += detail::pad(cells[r][i], widths[i], i == 0);
        }
        out += line + "\n";
        if (r == 0) rule();
    }
    return out;
}

}  // namespace chronocal
