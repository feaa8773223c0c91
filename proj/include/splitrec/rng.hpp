#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "splitrec/common.hpp"

namespace splitrec {

// splitmix64 (Steele/Lea/Flood; Vigna's fixed-increment variant). Used instead
// of std::mt19937 + std::uniform_int_distribution because the latter's output
// is implementation-defined and splits must be byte-reproducible everywhere.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Modulo draw; bias is < n/2^64 which is irrelevant at the n used here.
    std::uint64_t next_below(std::uint64_t n) { return next() % n; }
};

// Distinct named streams off one user-facing seed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view tag) {
    return fnv1a64(tag) ^ SplitMix64(seed).next();
}

// Stateless per-key draw in [0, n). Keyed by the subject's stable name so that
// adding or removing other users never perturbs this user's draw.
inline std::uint64_t keyed_draw(std::uint64_t seed, std::string_view key, std::uint64_t n) {
    SplitMix64 g(fnv1a64(key) ^ SplitMix64(seed).next());
    return g.next_below(n);
}

// Partial Fisher-Yates: deterministically selects k entries from pool.
// Contract (tests re-derive it independently): walk i = 0..k-1, swap pool[i]
// with pool[i + g.next() % (size - i)], take the first k.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k, std::uint64_t seed) {
    if (k > pool.size()) k = pool.size();
    SplitMix64 g(seed);
    for (std::size_t i = 0; i < k; i++) {
        std::size_t j = i + static_cast<std::size_t>(g.next_below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace splitrec
