#pragma once

// Shared fixtures and independent oracles. The oracles deliberately use
// different algorithms (exhaustive scans, O(n^2) pair counting) than the
// library so a shared bug cannot hide.

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <tuple>
#include <vector>

#include "splitrec/splitrec.hpp"

namespace testutil {

using namespace splitrec;

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        static std::atomic<std::uint64_t> counter{0};
        path = base / ("splitrec_test_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

using Row = std::tuple<std::string, std::string, Timestamp>;

inline Dataset make_dataset(const std::vector<Row>& rows) {
    auto users = std::make_shared<Vocab>();
    auto items = std::make_shared<Vocab>();
    std::vector<Interaction> events;
    for (std::size_t i = 0; i < rows.size(); i++) {
        const auto& [u, it, ts] = rows[i];
        events.push_back(Interaction{users->intern(u), items->intern(it), ts, i});
    }
    return Dataset(std::move(events), users, items);
}

inline std::string write_file(const TempDir& dir, const std::string& name,
                              const std::string& content) {
    auto path = dir.file(name);
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

// Random log with timestamp ties and occasional repeated items.
inline Dataset random_log(std::uint64_t seed, std::size_t n_users, std::size_t max_len,
                          std::size_t n_items, Timestamp horizon) {
    SplitMix64 g(seed);
    std::vector<Row> rows;
    for (std::size_t u = 0; u < n_users; u++) {
        std::size_t len = 2 + g.next_below(max_len > 2 ? max_len - 1 : 1);
        for (std::size_t e = 0; e < len; e++) {
            std::string item = "i" + std::to_string(g.next_below(n_items));
            auto ts = static_cast<Timestamp>(g.next_below(static_cast<std::uint64_t>(horizon)));
            rows.emplace_back("u" + std::to_string(u), item, ts);
        }
    }
    return make_dataset(rows);
}

// Session-structured log: per user, `sessions` bursts one day apart,
// `per_session` events `in_gap` seconds apart, users staggered by `stagger`.
inline Dataset session_log(std::size_t n_users, std::size_t sessions, std::size_t per_session,
                           Timestamp in_gap, Timestamp between_gap, Timestamp stagger,
                           std::size_t n_items = 50, std::uint64_t seed = 7) {
    SplitMix64 g(seed);
    std::vector<Row> rows;
    for (std::size_t u = 0; u < n_users; u++) {
        for (std::size_t s = 0; s < sessions; s++) {
            Timestamp start = static_cast<Timestamp>(s) * between_gap +
                              static_cast<Timestamp>(u) * stagger;
            for (std::size_t e = 0; e < per_session; e++) {
                std::string item = "i" + std::to_string(g.next_below(n_items));
                rows.emplace_back("u" + std::to_string(u), item,
                                  start + static_cast<Timestamp>(e) * in_gap);
            }
        }
    }
    return make_dataset(rows);
}

// ---- metric oracles (exhaustive scans) -------------------------------------

inline bool oracle_contains(const std::vector<ItemId>& targets, ItemId item) {
    for (ItemId t : targets)
        if (t == item) return true;
    return false;
}

inline double oracle_hr(const std::vector<ItemId>& targets, const std::vector<ItemId>& ranked,
                        std::size_t k) {
    for (std::size_t p = 0; p < ranked.size() && p < k; p++)
        if (oracle_contains(targets, ranked[p])) return 1.0;
    return 0.0;
}

inline double oracle_mrr(const std::vector<ItemId>& targets, const std::vector<ItemId>& ranked,
                         std::size_t k) {
    for (std::size_t p = 0; p < ranked.size() && p < k; p++)
        if (oracle_contains(targets, ranked[p])) return 1.0 / static_cast<double>(p + 1);
    return 0.0;
}

inline double oracle_ndcg(const std::vector<ItemId>& targets, const std::vector<ItemId>& ranked,
                          std::size_t k) {
    // distinct relevant set, computed by scanning instead of sort/unique
    std::vector<ItemId> distinct;
    for (ItemId t : targets)
        if (!oracle_contains(distinct, t)) distinct.push_back(t);
    double dcg = 0.0;
    for (std::size_t p = 0; p < ranked.size() && p < k; p++)
        if (oracle_contains(distinct, ranked[p]))
            dcg += 1.0 / (std::log(static_cast<double>(p + 2)) / std::log(2.0));
    double idcg = 0.0;
    for (std::size_t i = 0; i < distinct.size() && i < k; i++)
        idcg += 1.0 / (std::log(static_cast<double>(i + 2)) / std::log(2.0));
    return idcg == 0.0 ? 0.0 : dcg / idcg;
}

// ---- correlation oracles ----------------------------------------------------

// Quadratic pair scan, straight from the tau_b definition.
inline double oracle_kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    std::uint64_t c = 0, d = 0, tx = 0, ty = 0;
    for (std::size_t i = 0; i < x.size(); i++)
        for (std::size_t j = i + 1; j < x.size(); j++) {
            double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) continue;
            if (dx == 0.0) tx++;
            else if (dy == 0.0) ty++;
            else if (dx * dy > 0.0) c++;
            else d++;
        }
    double num = static_cast<double>(c) - static_cast<double>(d);
    double den = std::sqrt(static_cast<double>(c + d + tx) * static_cast<double>(c + d + ty));
    return num / den;
}

// Fractional ranks via per-element counting (not sorting), then Pearson.
inline double oracle_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto rank_of = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); i++) {
            std::size_t less = 0, equal = 0;
            for (std::size_t j = 0; j < v.size(); j++) {
                if (v[j] < v[i]) less++;
                if (v[j] == v[i]) equal++;
            }
            r[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
        }
        return r;
    };
    auto rx = rank_of(x), ry = rank_of(y);
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); i++) {
        sx += rx[i];
        sy += ry[i];
        sxy += rx[i] * ry[i];
        sxx += rx[i] * rx[i];
        syy += ry[i] * ry[i];
    }
    double cov = sxy - sx * sy / n;
    double vx = sxx - sx * sx / n;
    double vy = syy - sy * sy / n;
    return cov / std::sqrt(vx * vy);
}

// The documented selection contract of sample_without_replacement,
// re-implemented verbatim so the library cannot drift from it unnoticed.
template <typename T>
std::vector<T> oracle_partial_fisher_yates(std::vector<T> pool, std::size_t k, std::uint64_t seed) {
    if (k > pool.size()) k = pool.size();
    std::uint64_t state = seed;
    auto next = [&]() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    for (std::size_t i = 0; i < k; i++) {
        std::size_t j = i + static_cast<std::size_t>(next() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace testutil
