#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "splitrec/common.hpp"
#include "splitrec/metrics.hpp"

namespace splitrec {

namespace detail {

// Merge sort counting strict inversions; equal keys never count.
inline std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf,
                                      std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
    std::size_t a = lo, b = mid, o = lo;
    while (a < mid && b < hi) {
        if (v[b] < v[a]) {
            buf[o++] = v[b++];
            inv += mid - a;
        } else {
            buf[o++] = v[a++];
        }
    }
    while (a < mid) buf[o++] = v[a++];
    while (b < hi) buf[o++] = v[b++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
              buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

template <typename Key>
std::uint64_t tie_pair_count(const std::vector<Key>& sorted) {
    std::uint64_t total = 0, run = 1;
    for (std::size_t i = 1; i <= sorted.size(); i++) {
        if (i < sorted.size() && !(sorted[i - 1] < sorted[i]) && !(sorted[i] < sorted[i - 1])) {
            run++;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    return total;
}

}  // namespace detail

// Tie-aware Kendall tau_b via Knight's O(n log n) scheme:
// tau_b = (C - D) / sqrt((C + D + Tx)(C + D + Ty)). The unit tests pin this
// against a quadratic pair-scan oracle.
inline double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ConfigError("kendall: size mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw ConfigError("kendall: need at least 2 points");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; i++) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
    });

    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::uint64_t n1 = 0, n3 = 0;
    {
        std::uint64_t xrun = 1, xyrun = 1;
        for (std::size_t i = 1; i <= n; i++) {
            bool xtie = i < n && x[order[i - 1]] == x[order[i]];
            bool xytie = xtie && y[order[i - 1]] == y[order[i]];
            if (xtie) xrun++;
            else {
                n1 += xrun * (xrun - 1) / 2;
                xrun = 1;
            }
            if (xytie) xyrun++;
            else {
                n3 += xyrun * (xyrun - 1) / 2;
                xyrun = 1;
            }
        }
    }

    std::vector<double> ys(n), buf(n);
    for (std::size_t i = 0; i < n; i++) ys[i] = y[order[i]];
    std::uint64_t discordant = detail::count_inversions(ys, buf, 0, n);
    std::uint64_t n2 = detail::tie_pair_count(ys);  // ys now sorted

    if (n1 == n0) throw DataError("degenerate ranking: all x values tied");
    if (n2 == n0) throw DataError("degenerate ranking: all y values tied");

    double s = static_cast<double>(n0) - static_cast<double>(n1) - static_cast<double>(n2) +
               static_cast<double>(n3) - 2.0 * static_cast<double>(discordant);
    double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
    return s / denom;
}

// Average ranks (ties get the mean rank), 1-based.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; i++) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) j++;
        double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; k++) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

// Spearman rho: Pearson correlation of average ranks.
inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ConfigError("spearman: size mismatch");
    if (x.size() < 2) throw ConfigError("spearman: need at least 2 points");
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < rx.size(); i++) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); i++) {
        double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DataError("degenerate ranking: zero rank variance");
    return sxy / std::sqrt(sxx * syy);
}

// One run's metric values across configurations, for one (split, metric, K).
struct RunVector {
    std::string label;
    std::vector<std::pair<std::string, double>> points;  // (configuration id, value)
};

struct CorrelationResult {
    double kendall_tau = 0.0;
    double spearman_rho = 0.0;
    std::uint64_t n = 0;
};

struct ScatterPair {
    std::string config_id;
    double a = 0.0;
    double b = 0.0;
};

// Aligns two run vectors on configuration id and computes both coefficients.
// Mismatched id sets are fatal and the difference is listed.
inline CorrelationResult correlate_runs(const RunVector& a, const RunVector& b,
                                        std::vector<ScatterPair>* scatter = nullptr) {
    std::map<std::string, double> ma, mb;
    for (const auto& [id, v] : a.points)
        if (!ma.emplace(id, v).second) throw DataError("duplicate configuration id: " + id);
    for (const auto& [id, v] : b.points)
        if (!mb.emplace(id, v).second) throw DataError("duplicate configuration id: " + id);

    std::vector<std::string> only_a, only_b;
    for (const auto& [id, v] : ma)
        if (!mb.count(id)) only_a.push_back(id);
    for (const auto& [id, v] : mb)
        if (!ma.count(id)) only_b.push_back(id);
    if (!only_a.empty() || !only_b.empty()) {
        std::string msg = "configuration id sets differ;";
        if (!only_a.empty()) {
            msg += " only in " + (a.label.empty() ? "A" : a.label) + ":";
            for (std::size_t i = 0; i < only_a.size() && i < 10; i++) msg += " " + only_a[i];
        }
        if (!only_b.empty()) {
            msg += " only in " + (b.label.empty() ? "B" : b.label) + ":";
            for (std::size_t i = 0; i < only_b.size() && i < 10; i++) msg += " " + only_b[i];
        }
        throw DataError(msg);
    }

    std::vector<double> va, vb;
    va.reserve(ma.size());
    vb.reserve(ma.size());
    for (const auto& [id, v] : ma) {
        va.push_back(v);
        vb.push_back(mb.at(id));
        if (scatter) scatter->push_back(ScatterPair{id, v, mb.at(id)});
    }
    CorrelationResult r;
    r.n = va.size();
    r.kendall_tau = kendall_tau_b(va, vb);
    r.spearman_rho = spearman_rho(va, vb);
    return r;
}

// Unweighted mean of per-dataset correlations (the Table 6/7 aggregation).
inline CorrelationResult mean_correlation(const std::vector<CorrelationResult>& per_dataset) {
    if (per_dataset.empty()) throw DataError("mean_correlation over zero datasets");
    CorrelationResult m;
    for (const auto& r : per_dataset) {
        m.kendall_tau += r.kendall_tau;
        m.spearman_rho += r.spearman_rho;
    }
    m.kendall_tau /= static_cast<double>(per_dataset.size());
    m.spearman_rho /= static_cast<double>(per_dataset.size());
    m.n = per_dataset.size();
    return m;
}

// ---- model ranking tables -------------------------------------------------

// A scored run: one model under one configuration on one split.
struct RunPoint {
    std::string split;
    std::string model;
    std::string config;
    double value = 0.0;
};

struct RankEntry {
    std::string model;
    double best_value = 0.0;
    std::size_t rank = 0;  // 1-based
    bool tied = false;
};

struct RankingTable {
    std::vector<std::string> splits;                       // first-seen order
    std::map<std::string, std::vector<RankEntry>> by_split;
    std::map<std::string, std::map<std::string, std::size_t>> ranks;  // model -> split -> rank
};

// Sorts models by their best value per split (ties broken by model label and
// flagged) and tracks how positions shift across splits.
inline RankingTable model_ranking(const std::vector<RunPoint>& points) {
    if (points.empty()) throw DataError("model_ranking over zero reports");
    RankingTable table;
    std::map<std::string, std::map<std::string, double>> best;  // split -> model -> value
    for (const auto& p : points) {
        if (std::find(table.splits.begin(), table.splits.end(), p.split) == table.splits.end())
            table.splits.push_back(p.split);
        auto& row = best[p.split];
        auto it = row.find(p.model);
        if (it == row.end() || p.value > it->second) row[p.model] = p.value;
    }
    for (const auto& split : table.splits) {
        std::vector<RankEntry> entries;
        for (const auto& [model, value] : best[split])
            entries.push_back(RankEntry{model, value, 0, false});
        std::sort(entries.begin(), entries.end(), [](const RankEntry& a, const RankEntry& b) {
            return a.best_value != b.best_value ? a.best_value > b.best_value
                                                : a.model < b.model;
        });
        for (std::size_t i = 0; i < entries.size(); i++) {
            entries[i].rank = i + 1;
            bool tie_prev = i > 0 && entries[i - 1].best_value == entries[i].best_value;
            bool tie_next = i + 1 < entries.size() &&
                            entries[i + 1].best_value == entries[i].best_value;
            entries[i].tied = tie_prev || tie_next;
            table.ranks[entries[i].model][split] = i + 1;
        }
        table.by_split[split] = std::move(entries);
    }
    return table;
}

// ---- report file plumbing --------------------------------------------------

// The slice of a MetricReport file the analysis commands need.
struct ReportSummary {
    RunLabels labels;
    std::map<std::string, double> global;  // "ndcg@10" -> value
};

inline ReportSummary read_report_summary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open report: " + path);
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(in);
    ReportSummary s;
    const auto& labels = j.at("labels");
    s.labels.model = labels.value("model", "");
    s.labels.config = labels.value("config", "");
    s.labels.split = labels.value("split", "");
    s.labels.dataset = labels.value("dataset", "");
    for (const auto& [key, value] : j.at("global").items()) s.global[key] = value.get<double>();
    return s;
}

inline RunVector build_run_vector(const std::vector<ReportSummary>& reports,
                                  const std::string& metric_key, const std::string& label) {
    RunVector rv;
    rv.label = label;
    for (const auto& r : reports) {
        auto it = r.global.find(metric_key);
        if (it == r.global.end())
            throw DataError("report lacks metric " + metric_key + " (labels: " + r.labels.model +
                            "/" + r.labels.config + ")");
        rv.points.emplace_back(r.labels.model + "/" + r.labels.config, it->second);
    }
    return rv;
}

}  // namespace splitrec
