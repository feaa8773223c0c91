#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "splitrec/dataset.hpp"
#include "splitrec/rng.hpp"

namespace splitrec {

struct PreprocessConfig {
    int p_core = 5;  // 0 disables, otherwise must be >= 2
    bool dedup_consecutive = true;
    std::optional<std::uint64_t> sample_users;
    std::uint64_t seed = 0;
};

struct PreprocessReport {
    std::uint64_t removed_dedup = 0;
    std::uint64_t removed_pcore = 0;
    std::uint64_t pcore_iterations = 0;
    std::uint64_t removed_sampling = 0;
    std::uint64_t fixpoint_rounds = 0;
};

namespace detail {

inline Dataset filter_events(const Dataset& ds, const std::vector<bool>& keep) {
    std::vector<Interaction> kept;
    kept.reserve(ds.events().size());
    for (std::size_t i = 0; i < ds.events().size(); i++)
        if (keep[i]) kept.push_back(ds.events()[i]);
    return Dataset(std::move(kept), ds.users_ptr(), ds.items_ptr(), ds.skipped_rows());
}

}  // namespace detail

// Collapses each run of equal consecutive items inside a user's
// (ts, ingest)-ordered history to the run's first event. The surviving events
// keep their original cross-user ingest order.
inline Dataset dedup_consecutive(const Dataset& ds) {
    // Sort event indices by (user, ts, ingest); runs are adjacent there.
    std::vector<std::uint32_t> order(ds.events().size());
    for (std::uint32_t i = 0; i < order.size(); i++) order[i] = i;
    const auto& ev = ds.events();
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (ev[a].user != ev[b].user) return ev[a].user < ev[b].user;
        if (ev[a].ts != ev[b].ts) return ev[a].ts < ev[b].ts;
        return ev[a].ingest < ev[b].ingest;
    });

    std::vector<bool> keep(ev.size(), true);
    for (std::size_t k = 1; k < order.size(); k++) {
        const auto& prev = ev[order[k - 1]];
        const auto& cur = ev[order[k]];
        if (cur.user == prev.user && cur.item == prev.item) keep[order[k]] = false;
    }
    return detail::filter_events(ds, keep);
}

// Iteratively removes users and items with fewer than p interactions
// (simultaneous recount per round) until every survivor has >= p. An empty
// result is returned as-is; callers decide whether to warn.
inline Dataset pcore_filter(const Dataset& ds, int p) {
    if (p < 2) throw ConfigError("p-core requires p >= 2");
    Dataset cur = ds;
    std::uint64_t threshold = static_cast<std::uint64_t>(p);
    while (!cur.empty()) {
        std::vector<std::uint64_t> ucnt(cur.users().size(), 0), icnt(cur.items().size(), 0);
        for (const auto& e : cur.events()) {
            ucnt[e.user]++;
            icnt[e.item]++;
        }
        std::vector<bool> keep(cur.events().size(), true);
        bool removed = false;
        for (std::size_t i = 0; i < cur.events().size(); i++) {
            const auto& e = cur.events()[i];
            if (ucnt[e.user] < threshold || icnt[e.item] < threshold) {
                keep[i] = false;
                removed = true;
            }
        }
        if (!removed) break;
        cur = detail::filter_events(cur, keep);
    }
    return cur;
}

// Keeps all interactions of min(n, user_count) users drawn uniformly without
// replacement. Selection is a partial Fisher-Yates over the present users in
// dense-id order, seeded; fixed seed => identical result.
inline Dataset sample_users(const Dataset& ds, std::uint64_t n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("sample_users requires n >= 1");
    if (n >= ds.user_count()) return ds;

    std::vector<UserId> pool;
    {
        std::vector<bool> seen(ds.users().size(), false);
        for (const auto& e : ds.events())
            if (!seen[e.user]) {
                seen[e.user] = true;
            }
        for (UserId u = 0; u < seen.size(); u++)
            if (seen[u]) pool.push_back(u);
    }
    auto chosen = sample_without_replacement(std::move(pool), static_cast<std::size_t>(n),
                                             stream_seed(seed, "sample_users"));
    std::vector<bool> keep_user(ds.users().size(), false);
    for (UserId u : chosen) keep_user[u] = true;

    std::vector<bool> keep(ds.events().size(), true);
    for (std::size_t i = 0; i < ds.events().size(); i++)
        keep[i] = keep_user[ds.events()[i].user];
    return detail::filter_events(ds, keep);
}

// Fixed pipeline: dedup, then p-core, alternating until the result is a
// fixpoint of both passes (deleting an item can make two equal items
// adjacent, so one round is not always enough), then user sampling last.
// After sampling the p-core guarantee may no longer hold for items; that is
// the documented trade-off of sampling last.
inline Dataset preprocess(const Dataset& ds, const PreprocessConfig& cfg,
                          PreprocessReport* report = nullptr) {
    if (cfg.p_core != 0 && cfg.p_core < 2) throw ConfigError("p_core must be 0 or >= 2");

    PreprocessReport rep;
    Dataset cur = ds;
    while (true) {
        rep.fixpoint_rounds++;
        std::size_t before = cur.interaction_count();
        if (cfg.dedup_consecutive) {
            cur = splitrec::dedup_consecutive(cur);
            rep.removed_dedup += before - cur.interaction_count();
        }
        std::size_t after_dedup = cur.interaction_count();
        if (cfg.p_core >= 2 && !cur.empty()) {
            cur = pcore_filter(cur, cfg.p_core);
            rep.removed_pcore += after_dedup - cur.interaction_count();
        }
        // A round that removed nothing ran both passes as no-ops: fixpoint.
        if (cur.interaction_count() == before || cur.empty()) break;
    }
    if (cfg.sample_users && !cur.empty()) {
        std::size_t before = cur.interaction_count();
        cur = splitrec::sample_users(cur, *cfg.sample_users, cfg.seed);
        rep.removed_sampling = before - cur.interaction_count();
    }
    if (report) *report = rep;
    return cur;
}

}  // namespace splitrec
