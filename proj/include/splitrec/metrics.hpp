#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "splitrec/common.hpp"
#include "splitrec/dataset.hpp"
#include "splitrec/parse.hpp"
#include "splitrec/split.hpp"

namespace splitrec {

// A model's output for one instance: distinct items, best first.
struct RankedList {
    std::uint64_t instance_id = 0;
    std::vector<ItemId> items;
};

enum class MetricKind { hr, mrr, ndcg };

inline const char* to_string(MetricKind m) {
    switch (m) {
        case MetricKind::hr: return "hr";
        case MetricKind::mrr: return "mrr";
        case MetricKind::ndcg: return "ndcg";
    }
    return "?";
}

inline MetricKind metric_from_string(std::string_view s) {
    if (s == "hr") return MetricKind::hr;
    if (s == "mrr") return MetricKind::mrr;
    if (s == "ndcg") return MetricKind::ndcg;
    throw ConfigError("unknown metric: " + std::string(s));
}

namespace detail {

// Duplicate target items (possible under the All target) count once:
// ranked lists are duplicate-free, so a repeat could never be hit anyway.
inline std::vector<ItemId> distinct_targets(std::span<const ItemId> targets) {
    std::vector<ItemId> t(targets.begin(), targets.end());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

inline bool is_target(const std::vector<ItemId>& sorted_targets, ItemId item) {
    return std::binary_search(sorted_targets.begin(), sorted_targets.end(), item);
}

}  // namespace detail

// 1 if any target shows up in the top K, else 0.
inline double hr_at_k(std::span<const ItemId> targets, std::span<const ItemId> ranked,
                      std::size_t k) {
    if (k < 1) throw ConfigError("K must be >= 1");
    auto t = detail::distinct_targets(targets);
    std::size_t limit = std::min(k, ranked.size());
    for (std::size_t p = 0; p < limit; p++)
        if (detail::is_target(t, ranked[p])) return 1.0;
    return 0.0;
}

// Reciprocal rank of the first target within the top K; 0 if none.
inline double mrr_at_k(std::span<const ItemId> targets, std::span<const ItemId> ranked,
                       std::size_t k) {
    if (k < 1) throw ConfigError("K must be >= 1");
    auto t = detail::distinct_targets(targets);
    std::size_t limit = std::min(k, ranked.size());
    for (std::size_t p = 0; p < limit; p++)
        if (detail::is_target(t, ranked[p])) return 1.0 / static_cast<double>(p + 1);
    return 0.0;
}

// Binary-relevance NDCG: DCG over hit positions, ideal DCG packs the
// distinct targets into the top ranks.
inline double ndcg_at_k(std::span<const ItemId> targets, std::span<const ItemId> ranked,
                        std::size_t k) {
    if (k < 1) throw ConfigError("K must be >= 1");
    auto t = detail::distinct_targets(targets);
    std::size_t limit = std::min(k, ranked.size());
    double dcg = 0.0;
    for (std::size_t p = 0; p < limit; p++)
        if (detail::is_target(t, ranked[p])) dcg += 1.0 / std::log2(static_cast<double>(p + 2));
    if (dcg == 0.0) return 0.0;
    double idcg = 0.0;
    std::size_t ideal = std::min(k, t.size());
    for (std::size_t i = 0; i < ideal; i++) idcg += 1.0 / std::log2(static_cast<double>(i + 2));
    return dcg / idcg;
}

// Drops already-seen items, keeping order. Seen = the instance's prefix, so
// this can never touch a target that is not also in the prefix.
inline std::vector<ItemId> apply_filter_seen(std::span<const ItemId> ranked,
                                             const std::unordered_set<ItemId>& seen) {
    std::vector<ItemId> out;
    out.reserve(ranked.size());
    for (ItemId i : ranked)
        if (!seen.count(i)) out.push_back(i);
    return out;
}

enum class Averaging { user, flat };

inline const char* to_string(Averaging a) { return a == Averaging::user ? "user" : "flat"; }

inline Averaging averaging_from_string(std::string_view s) {
    if (s == "user") return Averaging::user;
    if (s == "flat") return Averaging::flat;
    throw ConfigError("unknown averaging mode: " + std::string(s));
}

// Free-form strings identifying a run; the analysis module keys on these.
struct RunLabels {
    std::string model;
    std::string config;
    std::string split;
    std::string dataset;
};

struct EvalConfig {
    std::vector<std::size_t> ks{5, 10, 20, 50, 100};
    std::vector<MetricKind> metrics{MetricKind::hr, MetricKind::mrr, MetricKind::ndcg};
    Averaging averaging = Averaging::user;
    bool filter_seen = false;
    // Score cold targets (absent from the catalog) as misses by default;
    // exclude_cold instead drops those instances and reports the count.
    bool exclude_cold = false;
    std::vector<bool> catalog;  // item presence by dense id; used by exclude_cold
    unsigned threads = 1;
    RunLabels labels;
};

struct ScoreRow {
    std::uint64_t instance_id = 0;
    UserId user = 0;
    std::vector<double> values;  // metrics-major: [m * |ks| + ki]
};

struct UserRow {
    UserId user = 0;
    std::uint64_t instances = 0;
    std::vector<double> values;
};

struct MetricReport {
    std::vector<std::size_t> ks;
    std::vector<MetricKind> metrics;
    Averaging averaging = Averaging::user;
    bool filter_seen = false;
    RunLabels labels;
    std::uint64_t provenance_checksum = 0;
    std::uint64_t excluded_cold = 0;
    std::uint64_t empty_rankings = 0;
    std::vector<ScoreRow> per_instance;  // instance-id order
    std::vector<UserRow> per_user;       // user-id order
    std::vector<double> global;

    std::size_t value_index(MetricKind m, std::size_t k) const {
        std::size_t mi = 0, ki = 0;
        while (mi < metrics.size() && metrics[mi] != m) mi++;
        while (ki < ks.size() && ks[ki] != k) ki++;
        if (mi == metrics.size() || ki == ks.size())
            throw ConfigError(std::string("metric ") + to_string(m) + "@" + std::to_string(k) +
                              " not in report");
        return mi * ks.size() + ki;
    }
    double global_at(MetricKind m, std::size_t k) const { return global[value_index(m, k)]; }
};

inline double score_one(MetricKind m, std::span<const ItemId> targets,
                        std::span<const ItemId> ranked, std::size_t k) {
    switch (m) {
        case MetricKind::hr: return hr_at_k(targets, ranked, k);
        case MetricKind::mrr: return mrr_at_k(targets, ranked, k);
        case MetricKind::ndcg: return ndcg_at_k(targets, ranked, k);
    }
    return 0.0;
}

// Scores every instance, averages per user, then aggregates globally: mean
// over users (each user equally weighted) or mean over instances (flat).
// Deterministic and bit-stable for any thread count: rows are written into
// fixed slots and reduced in index order.
inline MetricReport evaluate_run(const std::vector<EvalInstance>& instances,
                                 const std::vector<RankedList>& rankings, const EvalConfig& cfg) {
    if (cfg.ks.empty() || cfg.metrics.empty()) throw ConfigError("no metrics or Ks configured");
    for (auto k : cfg.ks)
        if (k < 1) throw ConfigError("K must be >= 1");

    std::unordered_map<std::uint64_t, const RankedList*> by_id;
    by_id.reserve(rankings.size());
    for (const auto& r : rankings)
        if (!by_id.emplace(r.instance_id, &r).second)
            throw DataError("duplicate instance_id in rankings: " + std::to_string(r.instance_id));

    std::unordered_set<std::uint64_t> instance_ids;
    instance_ids.reserve(instances.size());
    for (const auto& inst : instances) instance_ids.insert(inst.instance_id);
    for (const auto& r : rankings)
        if (!instance_ids.count(r.instance_id))
            throw DataError("ranking for unknown instance_id " + std::to_string(r.instance_id));

    std::vector<std::uint64_t> missing;
    for (const auto& inst : instances)
        if (!by_id.count(inst.instance_id)) missing.push_back(inst.instance_id);
    if (!missing.empty()) {
        std::string msg = "rankings missing for " + std::to_string(missing.size()) + " instance(s):";
        for (std::size_t i = 0; i < missing.size() && i < 10; i++)
            msg += " " + std::to_string(missing[i]);
        throw DataError(msg);
    }

    MetricReport rep;
    rep.ks = cfg.ks;
    rep.metrics = cfg.metrics;
    rep.averaging = cfg.averaging;
    rep.filter_seen = cfg.filter_seen;
    rep.labels = cfg.labels;
    const std::size_t width = cfg.ks.size() * cfg.metrics.size();

    // pick the scored instances first so slots are stable
    std::vector<const EvalInstance*> scored;
    scored.reserve(instances.size());
    for (const auto& inst : instances) {
        if (cfg.exclude_cold && !cfg.catalog.empty()) {
            bool any = false;
            for (ItemId t : inst.targets)
                if (t < cfg.catalog.size() && cfg.catalog[t]) any = true;
            if (!any) {
                rep.excluded_cold++;
                continue;
            }
        }
        scored.push_back(&inst);
    }

    rep.per_instance.assign(scored.size(), {});
    std::atomic<std::uint64_t> empty_count{0};
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; idx++) {
            const EvalInstance& inst = *scored[idx];
            const RankedList& rl = *by_id.at(inst.instance_id);
            std::span<const ItemId> ranked(rl.items);
            std::vector<ItemId> filtered;
            if (cfg.filter_seen) {
                std::unordered_set<ItemId> seen(inst.prefix.begin(), inst.prefix.end());
                filtered = apply_filter_seen(ranked, seen);
                ranked = filtered;
            }
            if (ranked.empty()) empty_count.fetch_add(1, std::memory_order_relaxed);
            ScoreRow row;
            row.instance_id = inst.instance_id;
            row.user = inst.user;
            row.values.resize(width);
            for (std::size_t m = 0; m < cfg.metrics.size(); m++)
                for (std::size_t ki = 0; ki < cfg.ks.size(); ki++)
                    row.values[m * cfg.ks.size() + ki] =
                        score_one(cfg.metrics[m], inst.targets, ranked, cfg.ks[ki]);
            rep.per_instance[idx] = std::move(row);
        }
    };

    unsigned n_threads = std::max(1u, cfg.threads);
    if (n_threads <= 1 || scored.size() < 2 * n_threads) {
        worker(0, scored.size());
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (scored.size() + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; t++) {
            std::size_t b = t * chunk, e = std::min(scored.size(), b + chunk);
            if (b >= e) break;
            pool.emplace_back(worker, b, e);
        }
        for (auto& th : pool) th.join();
    }
    rep.empty_rankings = empty_count.load();

    // per-user means in dense user-id order; compensated sums keep long
    // successive runs exact
    std::map<UserId, std::pair<std::uint64_t, std::vector<KahanSum>>> users;
    for (const auto& row : rep.per_instance) {
        auto& [count, sums] = users[row.user];
        if (count == 0) sums.assign(width, {});
        count++;
        for (std::size_t i = 0; i < width; i++) sums[i].add(row.values[i]);
    }
    rep.per_user.reserve(users.size());
    for (auto& [uid, acc] : users) {
        UserRow row;
        row.user = uid;
        row.instances = acc.first;
        row.values.resize(width);
        for (std::size_t i = 0; i < width; i++)
            row.values[i] = acc.second[i].value() / static_cast<double>(acc.first);
        rep.per_user.push_back(std::move(row));
    }

    rep.global.assign(width, 0.0);
    std::vector<KahanSum> total(width);
    if (cfg.averaging == Averaging::user) {
        for (const auto& u : rep.per_user)
            for (std::size_t i = 0; i < width; i++) total[i].add(u.values[i]);
        if (!rep.per_user.empty())
            for (std::size_t i = 0; i < width; i++)
                rep.global[i] = total[i].value() / static_cast<double>(rep.per_user.size());
    } else {
        for (const auto& row : rep.per_instance)
            for (std::size_t i = 0; i < width; i++) total[i].add(row.values[i]);
        if (!rep.per_instance.empty())
            for (std::size_t i = 0; i < width; i++)
                rep.global[i] = total[i].value() / static_cast<double>(rep.per_instance.size());
    }
    return rep;
}

// ---- rankings and report files ------------------------------------------

// Rankings come either as JSON lines {"instance_id":N,"items":[...]} or as
// text rows "id<TAB>item,item,...". Items are interned into `items`.
inline std::vector<RankedList> read_rankings_file(const std::string& path, Vocab& items) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open rankings: " + path);
    std::vector<RankedList> out;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        RankedList rl;
        if (line.front() == '{') {
            auto j = nlohmann::ordered_json::parse(line);
            rl.instance_id = j.at("instance_id").get<std::uint64_t>();
            for (const auto& s : j.at("items")) rl.items.push_back(items.intern(s.get<std::string>()));
        } else {
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw DataError("malformed ranking row at line " + std::to_string(lineno));
            std::int64_t id = 0;
            if (!detail::parse_int(std::string_view(line).substr(0, tab), id) || id < 0)
                throw DataError("malformed instance id at line " + std::to_string(lineno));
            rl.instance_id = static_cast<std::uint64_t>(id);
            for (const auto& tok : split_string(std::string_view(line).substr(tab + 1), ","))
                if (!tok.empty()) rl.items.push_back(items.intern(tok));
        }
        std::unordered_set<ItemId> uniq(rl.items.begin(), rl.items.end());
        if (uniq.size() != rl.items.size())
            throw DataError("duplicate items in ranking at line " + std::to_string(lineno));
        out.push_back(std::move(rl));
    }
    if (out.empty()) throw DataError("no rankings in " + path);
    return out;
}

inline void write_rankings_file(const std::vector<RankedList>& rankings, const Vocab& items,
                                const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    for (const auto& rl : rankings) {
        nlohmann::ordered_json j;
        j["instance_id"] = rl.instance_id;
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (ItemId i : rl.items) arr.push_back(items.name(i));
        j["items"] = std::move(arr);
        out << j.dump() << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

inline std::string metric_key(MetricKind m, std::size_t k) {
    return std::string(to_string(m)) + "@" + std::to_string(k);
}

inline nlohmann::ordered_json metric_report_json(const MetricReport& rep, const Vocab& users,
                                                 bool include_per_instance = true) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json cfg;
    cfg["ks"] = rep.ks;
    nlohmann::ordered_json mnames = nlohmann::ordered_json::array();
    for (auto m : rep.metrics) mnames.push_back(to_string(m));
    cfg["metrics"] = std::move(mnames);
    cfg["averaging"] = to_string(rep.averaging);
    cfg["filter_seen"] = rep.filter_seen;
    j["config"] = std::move(cfg);
    nlohmann::ordered_json labels;
    labels["model"] = rep.labels.model;
    labels["config"] = rep.labels.config;
    labels["split"] = rep.labels.split;
    labels["dataset"] = rep.labels.dataset;
    j["labels"] = std::move(labels);
    j["provenance_checksum"] = to_hex(rep.provenance_checksum);
    j["n_instances"] = rep.per_instance.size();
    j["n_users"] = rep.per_user.size();
    j["excluded_cold"] = rep.excluded_cold;
    j["empty_rankings"] = rep.empty_rankings;

    auto values_obj = [&](const std::vector<double>& values) {
        nlohmann::ordered_json o;
        for (std::size_t m = 0; m < rep.metrics.size(); m++)
            for (std::size_t ki = 0; ki < rep.ks.size(); ki++)
                o[metric_key(rep.metrics[m], rep.ks[ki])] = values[m * rep.ks.size() + ki];
        return o;
    };
    j["global"] = values_obj(rep.global);
    nlohmann::ordered_json per_user = nlohmann::ordered_json::array();
    for (const auto& u : rep.per_user) {
        nlohmann::ordered_json row;
        row["user_id"] = users.name(u.user);
        row["instances"] = u.instances;
        row["values"] = values_obj(u.values);
        per_user.push_back(std::move(row));
    }
    j["per_user"] = std::move(per_user);
    if (include_per_instance) {
        nlohmann::ordered_json per_inst = nlohmann::ordered_json::array();
        for (const auto& row : rep.per_instance) {
            nlohmann::ordered_json r;
            r["instance_id"] = row.instance_id;
            r["user_id"] = users.name(row.user);
            r["values"] = values_obj(row.values);
            per_inst.push_back(std::move(r));
        }
        j["per_instance"] = std::move(per_inst);
    }
    return j;
}

}  // namespace splitrec
