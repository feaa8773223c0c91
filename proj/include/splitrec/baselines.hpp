#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <json.hpp>

#include "splitrec/dataset.hpp"
#include "splitrec/metrics.hpp"
#include "splitrec/split.hpp"

namespace splitrec {

enum class ModelKind { pop, markov, knn };

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::pop: return "pop";
        case ModelKind::markov: return "markov";
        case ModelKind::knn: return "knn";
    }
    return "?";
}

inline ModelKind model_kind_from_string(std::string_view s) {
    if (s == "pop") return ModelKind::pop;
    if (s == "markov") return ModelKind::markov;
    if (s == "knn") return ModelKind::knn;
    throw ConfigError("unknown model kind: " + std::string(s));
}

struct ModelParams {
    std::size_t knn_neighbors = 100;      // top-M similar items kept per item
    std::uint64_t markov_min_count = 1;   // transitions below this are dropped
    double pop_window = 1.0;              // trailing fraction of the train period counted

    bool operator==(const ModelParams&) const = default;
};

struct FitInfo {
    std::uint64_t train_events = 0;
    std::uint64_t train_users = 0;
    std::uint64_t train_checksum = 0;
};

// Popularity: interaction counts, optionally over only the trailing
// pop_window fraction of the training period. Ranking is count desc, then
// dense item id asc.
struct PopModel {
    std::vector<std::uint64_t> counts;   // by dense item id
    std::vector<ItemId> ranking;         // items with count >= 1

    static PopModel fit(const std::vector<UserSequence>& train, std::size_t n_items,
                        double window) {
        if (!(window > 0.0 && window <= 1.0)) throw ConfigError("pop_window must be in (0,1]");
        PopModel m;
        m.counts.assign(n_items, 0);
        Timestamp lo = 0, hi = 0;
        bool first = true;
        for (const auto& s : train)
            for (const auto& e : s.events) {
                if (first || e.ts < lo) lo = e.ts;
                if (first || e.ts > hi) hi = e.ts;
                first = false;
            }
        Timestamp from = lo;
        if (window < 1.0 && hi > lo)
            from = hi - static_cast<Timestamp>(window * static_cast<double>(hi - lo));
        for (const auto& s : train)
            for (const auto& e : s.events)
                if (e.ts >= from) m.counts[e.item]++;
        for (ItemId i = 0; i < n_items; i++)
            if (m.counts[i] > 0) m.ranking.push_back(i);
        std::sort(m.ranking.begin(), m.ranking.end(), [&](ItemId a, ItemId b) {
            return m.counts[a] != m.counts[b] ? m.counts[a] > m.counts[b] : a < b;
        });
        return m;
    }
};

// First-order transitions from consecutive training pairs; popularity fills
// whatever the transition row cannot.
struct MarkovModel {
    std::vector<std::vector<std::pair<ItemId, std::uint64_t>>> rows;  // by last item
    PopModel fallback;

    static MarkovModel fit(const std::vector<UserSequence>& train, std::size_t n_items,
                           const ModelParams& params) {
        MarkovModel m;
        m.fallback = PopModel::fit(train, n_items, 1.0);
        std::vector<std::unordered_map<ItemId, std::uint64_t>> acc(n_items);
        for (const auto& s : train)
            for (std::size_t i = 1; i < s.events.size(); i++)
                acc[s.events[i - 1].item][s.events[i].item]++;
        m.rows.resize(n_items);
        for (std::size_t i = 0; i < n_items; i++) {
            for (auto [item, count] : acc[i])
                if (count >= params.markov_min_count) m.rows[i].emplace_back(item, count);
            std::sort(m.rows[i].begin(), m.rows[i].end(), [](const auto& a, const auto& b) {
                return a.second != b.second ? a.second > b.second : a.first < b.first;
            });
        }
        return m;
    }
};

// Sequential item-kNN: within-user co-occurrence cosine, scoring by
// similarity to the prefix's last item. Neighbor lists keep the top-M items
// (self excluded), similarity desc then item id asc.
struct ItemKnnModel {
    std::vector<std::vector<std::pair<ItemId, double>>> neighbors;  // by dense item id
    PopModel fallback;

    static ItemKnnModel fit(const std::vector<UserSequence>& train, std::size_t n_items,
                            const ModelParams& params) {
        if (params.knn_neighbors < 1) throw ConfigError("knn_neighbors must be >= 1");
        ItemKnnModel m;
        m.fallback = PopModel::fit(train, n_items, 1.0);

        std::vector<std::uint64_t> occ(n_items, 0);  // users per item
        std::unordered_map<std::uint64_t, std::uint64_t> co;
        for (const auto& s : train) {
            std::vector<ItemId> items;
            items.reserve(s.events.size());
            for (const auto& e : s.events) items.push_back(e.item);
            std::sort(items.begin(), items.end());
            items.erase(std::unique(items.begin(), items.end()), items.end());
            for (ItemId i : items) occ[i]++;
            for (std::size_t a = 0; a < items.size(); a++)
                for (std::size_t b = a + 1; b < items.size(); b++)
                    co[(static_cast<std::uint64_t>(items[a]) << 32) | items[b]]++;
        }
        m.neighbors.resize(n_items);
        for (auto [key, n_ij] : co) {
            auto i = static_cast<ItemId>(key >> 32);
            auto j = static_cast<ItemId>(key & 0xffffffffU);
            double sim = static_cast<double>(n_ij) /
                         std::sqrt(static_cast<double>(occ[i]) * static_cast<double>(occ[j]));
            m.neighbors[i].emplace_back(j, sim);
            m.neighbors[j].emplace_back(i, sim);
        }
        for (auto& row : m.neighbors) {
            std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) {
                return a.second != b.second ? a.second > b.second : a.first < b.first;
            });
            if (row.size() > params.knn_neighbors) row.resize(params.knn_neighbors);
        }
        return m;
    }
};

struct BaselineModel {
    ModelKind kind = ModelKind::pop;
    ModelParams params;
    FitInfo info;
    std::variant<PopModel, MarkovModel, ItemKnnModel> impl;
};

inline std::uint64_t sequences_checksum(const std::vector<UserSequence>& seqs) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& s : seqs) {
        h = fnv1a64_u64(s.user, h);
        for (const auto& e : s.events) {
            h = fnv1a64_u64(e.item, h);
            h = fnv1a64_u64(static_cast<std::uint64_t>(e.ts), h);
        }
    }
    return h;
}

inline BaselineModel fit(ModelKind kind, const std::vector<UserSequence>& train,
                         std::size_t n_items, const ModelParams& params = {}) {
    if (train.empty()) throw DataError("cannot fit on an empty training set");
    BaselineModel m;
    m.kind = kind;
    m.params = params;
    m.info.train_users = train.size();
    for (const auto& s : train) m.info.train_events += s.events.size();
    m.info.train_checksum = sequences_checksum(train);
    switch (kind) {
        case ModelKind::pop: m.impl = PopModel::fit(train, n_items, params.pop_window); break;
        case ModelKind::markov: m.impl = MarkovModel::fit(train, n_items, params); break;
        case ModelKind::knn: m.impl = ItemKnnModel::fit(train, n_items, params); break;
    }
    return m;
}

// Models never see holdout events: refitting uses the split's recorded
// train-plus-validation union (for GTS, everything at or before T_test).
inline BaselineModel refit_on_train_plus_valid(ModelKind kind, const SplitResult& split,
                                               std::size_t n_items,
                                               const ModelParams& params = {}) {
    return fit(kind, split.train_plus_valid, n_items, params);
}

namespace detail {

inline void emit_from_ranking(const std::vector<ItemId>& ranking, std::size_t k,
                              const std::unordered_set<ItemId>* skip,
                              std::vector<ItemId>& out, std::vector<bool>& emitted) {
    for (ItemId i : ranking) {
        if (out.size() >= k) return;
        if (emitted[i]) continue;
        if (skip && skip->count(i)) continue;
        out.push_back(i);
        emitted[i] = true;
    }
}

}  // namespace detail

// Top-K recommendation for one prefix. Deterministic; K distinct items
// unless the reachable catalog is smaller. `seen` is honored only when
// filter_seen is set.
inline std::vector<ItemId> recommend(const BaselineModel& model, std::span<const ItemId> prefix,
                                     std::size_t k, const std::unordered_set<ItemId>& seen,
                                     bool filter_seen) {
    if (prefix.empty()) throw DataError("recommend requires a non-empty prefix");
    const std::unordered_set<ItemId>* skip = filter_seen ? &seen : nullptr;
    std::vector<ItemId> out;
    out.reserve(k);

    const PopModel* fallback = nullptr;
    std::size_t n_items = 0;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PopModel>) {
                fallback = &m;
                n_items = m.counts.size();
            } else {
                fallback = &m.fallback;
                n_items = m.fallback.counts.size();
            }
        },
        model.impl);
    std::vector<bool> emitted(n_items, false);
    ItemId last = prefix.back();

    auto emit = [&](ItemId item) {
        if (item >= emitted.size() || emitted[item]) return;
        if (skip && skip->count(item)) return;
        out.push_back(item);
        emitted[item] = true;
    };
    if (model.kind == ModelKind::markov) {
        const auto& mm = std::get<MarkovModel>(model.impl);
        if (last < mm.rows.size())
            for (const auto& [item, count] : mm.rows[last]) {
                if (out.size() >= k) break;
                emit(item);
            }
    } else if (model.kind == ModelKind::knn) {
        const auto& km = std::get<ItemKnnModel>(model.impl);
        if (last < km.neighbors.size())
            for (const auto& [item, sim] : km.neighbors[last]) {
                if (out.size() >= k) break;
                emit(item);
            }
    }
    if (out.size() < k) detail::emit_from_ranking(fallback->ranking, k, skip, out, emitted);
    return out;
}

inline std::vector<RankedList> recommend_batch(const BaselineModel& model,
                                               const std::vector<EvalInstance>& instances,
                                               std::size_t k, bool filter_seen) {
    std::vector<RankedList> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) {
        std::unordered_set<ItemId> seen;
        if (filter_seen) seen.insert(inst.prefix.begin(), inst.prefix.end());
        RankedList rl;
        rl.instance_id = inst.instance_id;
        rl.items = recommend(model, inst.prefix, k, seen, filter_seen);
        out.push_back(std::move(rl));
    }
    return out;
}

// ---- save / load ----------------------------------------------------------

inline void save_model(const BaselineModel& model, const Vocab& items, const std::string& path) {
    nlohmann::ordered_json j;
    j["format"] = "splitrec.model";
    j["version"] = 1;
    j["kind"] = to_string(model.kind);
    j["params"] = {{"knn_neighbors", model.params.knn_neighbors},
                   {"markov_min_count", model.params.markov_min_count},
                   {"pop_window", model.params.pop_window}};
    j["fit"] = {{"train_events", model.info.train_events},
                {"train_users", model.info.train_users},
                {"train_checksum", to_hex(model.info.train_checksum)}};

    nlohmann::ordered_json data;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PopModel>) {
                nlohmann::ordered_json counts = nlohmann::ordered_json::array();
                for (ItemId i : m.ranking) counts.push_back({items.name(i), m.counts[i]});
                data["counts"] = std::move(counts);
            } else if constexpr (std::is_same_v<T, MarkovModel>) {
                nlohmann::ordered_json rows = nlohmann::ordered_json::array();
                for (ItemId i = 0; i < m.rows.size(); i++) {
                    if (m.rows[i].empty()) continue;
                    nlohmann::ordered_json row = nlohmann::ordered_json::array();
                    for (auto [item, count] : m.rows[i]) row.push_back({items.name(item), count});
                    rows.push_back({items.name(i), std::move(row)});
                }
                data["transitions"] = std::move(rows);
                nlohmann::ordered_json counts = nlohmann::ordered_json::array();
                for (ItemId i : m.fallback.ranking)
                    counts.push_back({items.name(i), m.fallback.counts[i]});
                data["counts"] = std::move(counts);
            } else {
                nlohmann::ordered_json rows = nlohmann::ordered_json::array();
                for (ItemId i = 0; i < m.neighbors.size(); i++) {
                    if (m.neighbors[i].empty()) continue;
                    nlohmann::ordered_json row = nlohmann::ordered_json::array();
                    for (auto [item, sim] : m.neighbors[i]) row.push_back({items.name(item), sim});
                    rows.push_back({items.name(i), std::move(row)});
                }
                data["neighbors"] = std::move(rows);
                nlohmann::ordered_json counts = nlohmann::ordered_json::array();
                for (ItemId i : m.fallback.ranking)
                    counts.push_back({items.name(i), m.fallback.counts[i]});
                data["counts"] = std::move(counts);
            }
        },
        model.impl);
    j["data"] = std::move(data);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

inline BaselineModel load_model(const std::string& path, Vocab& items) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(in);
    if (j.value("format", "") != "splitrec.model")
        throw DataError("not a splitrec model file: " + path);
    if (j.value("version", 0) != 1) throw DataError("unsupported model version in " + path);

    BaselineModel m;
    m.kind = model_kind_from_string(j.at("kind").get<std::string>());
    m.params.knn_neighbors = j["params"].value("knn_neighbors", std::size_t{100});
    m.params.markov_min_count = j["params"].value("markov_min_count", std::uint64_t{1});
    m.params.pop_window = j["params"].value("pop_window", 1.0);
    m.info.train_events = j["fit"].value("train_events", std::uint64_t{0});
    m.info.train_users = j["fit"].value("train_users", std::uint64_t{0});
    m.info.train_checksum = std::stoull(j["fit"].value("train_checksum", "0"), nullptr, 16);

    auto load_pop = [&](const nlohmann::ordered_json& data) {
        PopModel pm;
        for (const auto& entry : data.at("counts")) {
            ItemId i = items.intern(entry[0].get<std::string>());
            if (i >= pm.counts.size()) pm.counts.resize(i + 1, 0);
            pm.counts[i] = entry[1].get<std::uint64_t>();
            pm.ranking.push_back(i);
        }
        return pm;
    };
    const auto& data = j.at("data");
    if (m.kind == ModelKind::pop) {
        m.impl = load_pop(data);
    } else if (m.kind == ModelKind::markov) {
        MarkovModel mm;
        mm.fallback = load_pop(data);
        for (const auto& rowj : data.at("transitions")) {
            ItemId i = items.intern(rowj[0].get<std::string>());
            if (i >= mm.rows.size()) mm.rows.resize(i + 1);
            for (const auto& entry : rowj[1])
                mm.rows[i].emplace_back(items.intern(entry[0].get<std::string>()),
                                        entry[1].get<std::uint64_t>());
        }
        mm.rows.resize(std::max(mm.rows.size(), mm.fallback.counts.size()));
        m.impl = std::move(mm);
    } else {
        ItemKnnModel km;
        km.fallback = load_pop(data);
        for (const auto& rowj : data.at("neighbors")) {
            ItemId i = items.intern(rowj[0].get<std::string>());
            if (i >= km.neighbors.size()) km.neighbors.resize(i + 1);
            for (const auto& entry : rowj[1])
                km.neighbors[i].emplace_back(items.intern(entry[0].get<std::string>()),
                                             entry[1].get<double>());
        }
        km.neighbors.resize(std::max(km.neighbors.size(), km.fallback.counts.size()));
        m.impl = std::move(km);
    }
    return m;
}

}  // namespace splitrec
