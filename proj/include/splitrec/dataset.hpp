#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "splitrec/common.hpp"

namespace splitrec {

using UserId = std::uint32_t;  // dense index into the user vocab
using ItemId = std::uint32_t;  // dense index into the item vocab
using Timestamp = std::int64_t;

constexpr double kSecondsPerDay = 86400.0;

// One (user, item, time) event. ingest is the 0-based position among the
// accepted rows of the source file and breaks timestamp ties everywhere.
struct Interaction {
    UserId user;
    ItemId item;
    Timestamp ts;
    std::uint64_t ingest;

    bool operator==(const Interaction&) const = default;
};

// Original string ids interned to dense indices in first-appearance order.
class Vocab {
  public:
    std::uint32_t intern(std::string_view name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(names_.size());
        names_.emplace_back(name);
        index_.emplace(names_.back(), id);
        return id;
    }

    std::optional<std::uint32_t> find(std::string_view name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(std::uint32_t id) const { return names_[id]; }
    std::size_t size() const { return names_.size(); }

  private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
    };

    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> index_;
};

// Immutable event log. Events are stored in ingest order; filtering operations
// build new Datasets that share the vocabs, so dense ids stay stable across
// the whole pipeline and present-counts are recomputed per instance.
class Dataset {
  public:
    Dataset() : users_(std::make_shared<Vocab>()), items_(std::make_shared<Vocab>()) {}

    Dataset(std::vector<Interaction> events, std::shared_ptr<const Vocab> users,
            std::shared_ptr<const Vocab> items, std::uint64_t skipped_rows = 0)
        : events_(std::move(events)),
          users_(std::move(users)),
          items_(std::move(items)),
          skipped_rows_(skipped_rows) {
        recount();
    }

    const std::vector<Interaction>& events() const { return events_; }
    const Vocab& users() const { return *users_; }
    const Vocab& items() const { return *items_; }
    std::shared_ptr<const Vocab> users_ptr() const { return users_; }
    std::shared_ptr<const Vocab> items_ptr() const { return items_; }

    std::size_t interaction_count() const { return events_.size(); }
    std::size_t user_count() const { return user_count_; }
    std::size_t item_count() const { return item_count_; }
    std::uint64_t skipped_rows() const { return skipped_rows_; }
    bool empty() const { return events_.empty(); }

    Timestamp min_ts() const { return min_ts_; }
    Timestamp max_ts() const { return max_ts_; }
    double span_days() const {
        return empty() ? 0.0 : static_cast<double>(max_ts_ - min_ts_) / kSecondsPerDay;
    }

    // Same-content datasets hash equal regardless of how they were reached.
    std::uint64_t checksum() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& e : events_) {
            h = fnv1a64(users_->name(e.user), h);
            h = fnv1a64("\x1f", h);
            h = fnv1a64(items_->name(e.item), h);
            h = fnv1a64("\x1f", h);
            h = fnv1a64_u64(static_cast<std::uint64_t>(e.ts), h);
        }
        return h;
    }

  private:
    void recount() {
        std::vector<bool> useen(users_->size(), false), iseen(items_->size(), false);
        user_count_ = item_count_ = 0;
        min_ts_ = 0;
        max_ts_ = 0;
        bool first = true;
        for (const auto& e : events_) {
            if (!useen[e.user]) {
                useen[e.user] = true;
                user_count_++;
            }
            if (!iseen[e.item]) {
                iseen[e.item] = true;
                item_count_++;
            }
            if (first || e.ts < min_ts_) min_ts_ = e.ts;
            if (first || e.ts > max_ts_) max_ts_ = e.ts;
            first = false;
        }
    }

    std::vector<Interaction> events_;
    std::shared_ptr<const Vocab> users_;
    std::shared_ptr<const Vocab> items_;
    std::size_t user_count_ = 0;
    std::size_t item_count_ = 0;
    Timestamp min_ts_ = 0;
    Timestamp max_ts_ = 0;
    std::uint64_t skipped_rows_ = 0;
};

struct SeqEvent {
    ItemId item;
    Timestamp ts;
    std::uint64_t ingest;

    bool operator==(const SeqEvent&) const = default;
};

// A user's history sorted by (timestamp, ingest).
struct UserSequence {
    UserId user = 0;
    std::vector<SeqEvent> events;
};

// One sequence per present user, ordered by dense user id. Lossless: the
// (user, item, ts) multiset is exactly the dataset's.
inline std::vector<UserSequence> to_user_sequences(const Dataset& ds) {
    std::vector<std::uint32_t> count(ds.users().size(), 0);
    for (const auto& e : ds.events()) count[e.user]++;

    std::vector<UserSequence> seqs;
    std::vector<std::int64_t> slot(ds.users().size(), -1);
    seqs.reserve(ds.user_count());
    for (UserId u = 0; u < count.size(); u++) {
        if (count[u] == 0) continue;
        slot[u] = static_cast<std::int64_t>(seqs.size());
        seqs.push_back(UserSequence{u, {}});
        seqs.back().events.reserve(count[u]);
    }
    for (const auto& e : ds.events())
        seqs[static_cast<std::size_t>(slot[e.user])].events.push_back(SeqEvent{e.item, e.ts, e.ingest});
    for (auto& s : seqs)
        std::sort(s.events.begin(), s.events.end(), [](const SeqEvent& a, const SeqEvent& b) {
            return a.ts != b.ts ? a.ts < b.ts : a.ingest < b.ingest;
        });
    return seqs;
}

}  // namespace splitrec
