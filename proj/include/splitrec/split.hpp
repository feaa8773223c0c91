#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "splitrec/dataset.hpp"
#include "splitrec/rng.hpp"

namespace splitrec {

enum class Strategy { loo, gts };

// Ground-truth selection over a holdout sequence. All bundles the whole
// holdout into one instance; the others yield one target per instance.
enum class Target { last, first, random, successive, all };

// Validation construction. `implied` is what LOO produces by itself
// (second-to-last item); gt/lti/ub apply to the train side of a GTS split.
enum class Validation { implied, gt, lti, ub, none };

inline const char* to_string(Strategy s) { return s == Strategy::loo ? "loo" : "gts"; }

inline const char* to_string(Target t) {
    switch (t) {
        case Target::last: return "last";
        case Target::first: return "first";
        case Target::random: return "random";
        case Target::successive: return "successive";
        case Target::all: return "all";
    }
    return "?";
}

inline const char* to_string(Validation v) {
    switch (v) {
        case Validation::implied: return "implied";
        case Validation::gt: return "gt";
        case Validation::lti: return "lti";
        case Validation::ub: return "ub";
        case Validation::none: return "none";
    }
    return "?";
}

inline Strategy strategy_from_string(std::string_view s) {
    if (s == "loo") return Strategy::loo;
    if (s == "gts") return Strategy::gts;
    throw ConfigError("unknown strategy: " + std::string(s));
}

inline Target target_from_string(std::string_view s) {
    if (s == "last") return Target::last;
    if (s == "first") return Target::first;
    if (s == "random") return Target::random;
    if (s == "successive") return Target::successive;
    if (s == "all") return Target::all;
    throw ConfigError("unknown target: " + std::string(s));
}

inline Validation validation_from_string(std::string_view s) {
    if (s == "implied") return Validation::implied;
    if (s == "gt") return Validation::gt;
    if (s == "lti") return Validation::lti;
    if (s == "ub") return Validation::ub;
    if (s == "none") return Validation::none;
    throw ConfigError("unknown validation scheme: " + std::string(s));
}

struct SplitSpec {
    Strategy strategy = Strategy::gts;
    std::optional<double> test_quantile;  // interaction quantile in (0,1)
    std::optional<Timestamp> t_test;      // explicit cutoff, overrides quantile
    Target target = Target::last;
    Validation validation = Validation::gt;
    double val_quantile = 0.9;  // GT: interaction quantile over the train side
    Target val_target = Target::last;
    std::uint64_t ub_user_count = 1024;
    std::uint64_t seed = 0;
    std::size_t min_seq_len = 2;

    void validate() const {
        if (min_seq_len < 2) throw ConfigError("min_seq_len must be >= 2");
        if (strategy == Strategy::loo) {
            if (validation != Validation::implied && validation != Validation::none)
                throw ConfigError("LOO defines its own validation; use validation=implied");
            return;
        }
        if (!test_quantile && !t_test)
            throw ConfigError("GTS requires a test quantile or an explicit cutoff");
        if (test_quantile && !(*test_quantile > 0.0 && *test_quantile < 1.0))
            throw ConfigError("test quantile must be in (0,1)");
        if (validation == Validation::implied)
            throw ConfigError("implied validation is only valid for LOO");
        if (validation == Validation::gt && !(val_quantile > 0.0 && val_quantile < 1.0))
            throw ConfigError("validation quantile must be in (0,1)");
        if (validation == Validation::ub && ub_user_count < 1)
            throw ConfigError("ub_user_count must be >= 1");
        if (validation == Validation::ub && val_target == Target::all)
            throw ConfigError("All target needs a cutoff; UB validation reserves whole histories");
    }
};

// One scoring unit. The prefix is the user's entire history before the first
// target (post-cutoff events included); length capping happens at scoring
// time, never here.
struct EvalInstance {
    std::uint64_t instance_id = 0;
    UserId user = 0;
    std::vector<ItemId> prefix;
    std::vector<ItemId> targets;  // singleton except for Target::all
    std::vector<Timestamp> target_ts;
    Timestamp prev_ts = 0;  // ts of the event immediately before targets[0]
};

struct SplitCounts {
    std::uint64_t short_sequences_dropped = 0;  // below min_seq_len entirely
    std::uint64_t loo_test_only_users = 0;      // length 2: test yes, valid no
    std::uint64_t train_users_dropped = 0;      // train side below min_seq_len
    std::uint64_t test_users_dropped = 0;       // holdout produced no instance
    std::uint64_t val_users_dropped = 0;

    bool operator==(const SplitCounts&) const = default;
};

struct SplitResult {
    std::vector<UserSequence> train;             // final training sequences
    std::vector<UserSequence> train_plus_valid;  // refit union (GTS: all <= T_test)
    std::vector<EvalInstance> validation_instances;
    std::vector<EvalInstance> test_instances;
    std::optional<Timestamp> t_test;
    std::optional<Timestamp> t_val;
    SplitSpec spec;          // provenance
    std::uint64_t dataset_checksum = 0;
    SplitCounts counts;
};

namespace detail {

inline Timestamp kth_smallest_ts(std::vector<std::pair<Timestamp, std::uint64_t>>& keys,
                                 std::size_t k_1based) {
    auto nth = keys.begin() + static_cast<std::ptrdiff_t>(k_1based - 1);
    std::nth_element(keys.begin(), nth, keys.end());
    return nth->first;
}

inline std::size_t quantile_index(double q, std::size_t n) {
    // 1-based ceil(q*n). Products that are integers up to double rounding
    // (0.9 * 5000, 0.8 * 20M, ...) must not land one index high, so snap to
    // the nearest integer when within the accumulated error bound.
    double x = q * static_cast<double>(n);
    double r = std::round(x);
    double k = std::abs(x - r) <= static_cast<double>(n) * 1e-12 ? r : std::ceil(x);
    if (k < 1.0) return 1;
    if (k > static_cast<double>(n)) return n;
    return static_cast<std::size_t>(k);
}

}  // namespace detail

// Timestamp of the ceil(q*N)-th interaction (1-based) in global
// (ts, ingest) order. Train side is everything with ts <= T; ties at T past
// the quantile index deliberately stay on the train side.
inline Timestamp gts_cutoff(const Dataset& ds, double q) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile must be in (0,1)");
    if (ds.empty()) throw DataError("cutoff of empty dataset");
    std::vector<std::pair<Timestamp, std::uint64_t>> keys;
    keys.reserve(ds.interaction_count());
    for (const auto& e : ds.events()) keys.emplace_back(e.ts, e.ingest);
    return detail::kth_smallest_ts(keys, detail::quantile_index(q, keys.size()));
}

// Builds the evaluation instances of one user. holdout_start indexes the
// first event after the cutoff. A sequence that starts after the cutoff
// never yields its first event as a target (the model must get at least one
// input element), and yields no All instance at all.
inline std::vector<EvalInstance> select_targets(const UserSequence& seq, std::size_t holdout_start,
                                                Target target, std::uint64_t seed,
                                                std::string_view user_name) {
    const auto& ev = seq.events;
    const std::size_t n = ev.size();
    std::vector<EvalInstance> out;
    if (holdout_start >= n) return out;  // empty holdout
    const bool started_after = holdout_start == 0;

    auto items_of = [&](std::size_t b, std::size_t e) {
        std::vector<ItemId> v;
        v.reserve(e - b);
        for (std::size_t i = b; i < e; i++) v.push_back(ev[i].item);
        return v;
    };

    if (target == Target::all) {
        if (started_after) return out;
        EvalInstance inst;
        inst.user = seq.user;
        inst.prefix = items_of(0, holdout_start);
        inst.targets = items_of(holdout_start, n);
        inst.target_ts.reserve(n - holdout_start);
        for (std::size_t i = holdout_start; i < n; i++) inst.target_ts.push_back(ev[i].ts);
        inst.prev_ts = ev[holdout_start - 1].ts;
        out.push_back(std::move(inst));
        return out;
    }

    const std::size_t first_eligible = started_after ? 1 : holdout_start;
    if (first_eligible >= n) return out;  // single-event post-cutoff sequence

    auto single = [&](std::size_t t) {
        EvalInstance inst;
        inst.user = seq.user;
        inst.prefix = items_of(0, t);
        inst.targets = {ev[t].item};
        inst.target_ts = {ev[t].ts};
        inst.prev_ts = ev[t - 1].ts;
        return inst;
    };

    switch (target) {
        case Target::last:
            out.push_back(single(n - 1));
            break;
        case Target::first:
            out.push_back(single(first_eligible));
            break;
        case Target::random: {
            std::size_t pick =
                first_eligible +
                static_cast<std::size_t>(keyed_draw(seed, user_name, n - first_eligible));
            out.push_back(single(pick));
            break;
        }
        case Target::successive:
            for (std::size_t t = first_eligible; t < n; t++) out.push_back(single(t));
            break;
        case Target::all:
            break;  // handled above
    }
    return out;
}

namespace detail {

inline void assign_instance_ids(SplitResult& r) {
    std::uint64_t id = 0;
    for (auto& inst : r.validation_instances) inst.instance_id = id++;
    for (auto& inst : r.test_instances) inst.instance_id = id++;
}

struct ValidationCarve {
    std::vector<UserSequence> train;
    std::vector<EvalInstance> instances;
    std::optional<Timestamp> t_val;
    std::uint64_t users_dropped = 0;
    std::uint64_t train_users_dropped = 0;
};

// Carves a validation set out of the train side of the test split. No event
// later than T_test is visible in here.
inline ValidationCarve make_validation(const std::vector<UserSequence>& base_train,
                                       const SplitSpec& spec, const Vocab& users) {
    ValidationCarve out;
    const std::uint64_t val_seed = stream_seed(spec.seed, "validation_targets");

    switch (spec.validation) {
        case Validation::none:
        case Validation::implied:
            out.train = base_train;
            return out;

        case Validation::gt: {
            std::vector<std::pair<Timestamp, std::uint64_t>> keys;
            for (const auto& s : base_train)
                for (const auto& e : s.events) keys.emplace_back(e.ts, e.ingest);
            if (keys.empty()) throw DataError("empty train side");
            Timestamp t_val =
                kth_smallest_ts(keys, quantile_index(spec.val_quantile, keys.size()));
            out.t_val = t_val;
            for (const auto& s : base_train) {
                auto it = std::partition_point(s.events.begin(), s.events.end(),
                                               [&](const SeqEvent& e) { return e.ts <= t_val; });
                auto h = static_cast<std::size_t>(it - s.events.begin());
                if (h >= spec.min_seq_len) {
                    UserSequence tr{s.user, {s.events.begin(), it}};
                    out.train.push_back(std::move(tr));
                } else if (h > 0) {
                    out.train_users_dropped++;
                }
                if (h < s.events.size()) {
                    auto insts = select_targets(s, h, spec.val_target, val_seed,
                                                users.name(s.user));
                    if (insts.empty()) out.users_dropped++;
                    for (auto& inst : insts) out.instances.push_back(std::move(inst));
                }
            }
            if (out.instances.empty()) throw DataError("empty validation holdout");
            return out;
        }

        case Validation::lti: {
            for (const auto& s : base_train) {
                const std::size_t n = s.events.size();
                // base_train sequences have >= min_seq_len >= 2 events
                EvalInstance inst;
                inst.user = s.user;
                inst.prefix.reserve(n - 1);
                for (std::size_t i = 0; i + 1 < n; i++) inst.prefix.push_back(s.events[i].item);
                inst.targets = {s.events[n - 1].item};
                inst.target_ts = {s.events[n - 1].ts};
                inst.prev_ts = s.events[n - 2].ts;
                out.instances.push_back(std::move(inst));
                if (n - 1 >= spec.min_seq_len) {
                    UserSequence tr{s.user, {s.events.begin(), s.events.end() - 1}};
                    out.train.push_back(std::move(tr));
                } else {
                    out.train_users_dropped++;
                }
            }
            if (out.instances.empty()) throw DataError("empty validation holdout");
            return out;
        }

        case Validation::ub: {
            if (spec.ub_user_count >= base_train.size())
                throw DataError("ub_user_count must be below the train user count (" +
                                std::to_string(base_train.size()) + ")");
            std::vector<std::size_t> pool(base_train.size());
            for (std::size_t i = 0; i < pool.size(); i++) pool[i] = i;
            auto chosen = sample_without_replacement(std::move(pool),
                                                     static_cast<std::size_t>(spec.ub_user_count),
                                                     stream_seed(spec.seed, "ub_validation"));
            std::sort(chosen.begin(), chosen.end());
            std::vector<bool> reserved(base_train.size(), false);
            for (auto i : chosen) reserved[i] = true;
            for (std::size_t i = 0; i < base_train.size(); i++) {
                const auto& s = base_train[i];
                if (!reserved[i]) {
                    out.train.push_back(s);
                    continue;
                }
                // Whole history is holdout; first item only ever serves as input.
                auto insts = select_targets(s, 0, spec.val_target, val_seed, users.name(s.user));
                if (insts.empty()) out.users_dropped++;
                for (auto& inst : insts) out.instances.push_back(std::move(inst));
            }
            if (out.instances.empty()) throw DataError("empty validation holdout");
            return out;
        }
    }
    return out;
}

}  // namespace detail

// Leave-one-out: last item is the test target, second-to-last the validation
// target, the rest is training data. Length-2 users keep a test instance but
// contribute neither validation nor training events.
inline SplitResult loo_split(const std::vector<UserSequence>& sequences, const SplitSpec& spec,
                             std::uint64_t dataset_checksum) {
    SplitResult r;
    r.spec = spec;
    r.dataset_checksum = dataset_checksum;
    for (const auto& s : sequences) {
        const std::size_t n = s.events.size();
        if (n < spec.min_seq_len) {
            r.counts.short_sequences_dropped++;
            continue;
        }
        auto items_of = [&](std::size_t b, std::size_t e) {
            std::vector<ItemId> v;
            v.reserve(e - b);
            for (std::size_t i = b; i < e; i++) v.push_back(s.events[i].item);
            return v;
        };
        EvalInstance test;
        test.user = s.user;
        test.prefix = items_of(0, n - 1);
        test.targets = {s.events[n - 1].item};
        test.target_ts = {s.events[n - 1].ts};
        test.prev_ts = s.events[n - 2].ts;
        r.test_instances.push_back(std::move(test));

        if (n == 2) {
            r.counts.loo_test_only_users++;
        } else {
            EvalInstance valid;
            valid.user = s.user;
            valid.prefix = items_of(0, n - 2);
            valid.targets = {s.events[n - 2].item};
            valid.target_ts = {s.events[n - 2].ts};
            valid.prev_ts = s.events[n - 3].ts;
            r.validation_instances.push_back(std::move(valid));
            r.train.push_back(UserSequence{s.user, {s.events.begin(), s.events.end() - 2}});
        }
        // Refit union: everything but the test target.
        r.train_plus_valid.push_back(UserSequence{s.user, {s.events.begin(), s.events.end() - 1}});
    }
    if (r.test_instances.empty()) throw DataError("no test instances after LOO filtering");
    detail::assign_instance_ids(r);
    return r;
}

// Global temporal split at T_test (explicit or from the interaction
// quantile), then the configured validation carve over the train side.
inline SplitResult gts_split(const std::vector<UserSequence>& sequences, Timestamp t_test,
                             const SplitSpec& spec, const Vocab& users,
                             std::uint64_t dataset_checksum) {
    SplitResult r;
    r.spec = spec;
    r.dataset_checksum = dataset_checksum;
    r.t_test = t_test;

    const std::uint64_t test_seed = stream_seed(spec.seed, "test_targets");
    std::vector<UserSequence> base_train;
    bool any_holdout_event = false;
    for (const auto& s : sequences) {
        // sequences of length one (or below a raised min_seq_len) are
        // filtered from every subset
        if (s.events.size() < spec.min_seq_len) {
            r.counts.short_sequences_dropped++;
            continue;
        }
        auto it = std::partition_point(s.events.begin(), s.events.end(),
                                       [&](const SeqEvent& e) { return e.ts <= t_test; });
        auto h = static_cast<std::size_t>(it - s.events.begin());
        if (h >= spec.min_seq_len) {
            base_train.push_back(UserSequence{s.user, {s.events.begin(), it}});
        } else if (h > 0) {
            r.counts.train_users_dropped++;
        }
        if (h < s.events.size()) {
            any_holdout_event = true;
            auto insts = select_targets(s, h, spec.target, test_seed, users.name(s.user));
            if (insts.empty())
                r.counts.test_users_dropped++;
            else
                for (auto& inst : insts) r.test_instances.push_back(std::move(inst));
        }
    }
    if (!any_holdout_event) throw DataError("cutoff too late: empty holdout");
    if (base_train.empty()) throw DataError("cutoff too early: empty train");
    if (r.test_instances.empty()) throw DataError("holdout produced no test instances");

    auto carve = detail::make_validation(base_train, spec, users);
    r.train = std::move(carve.train);
    r.train_plus_valid = std::move(base_train);
    r.validation_instances = std::move(carve.instances);
    r.t_val = carve.t_val;
    r.counts.val_users_dropped = carve.users_dropped;
    r.counts.train_users_dropped += carve.train_users_dropped;
    detail::assign_instance_ids(r);
    return r;
}

// Front door: sequences, cutoff, target selection, validation carve.
inline SplitResult make_split(const Dataset& ds, const SplitSpec& spec) {
    spec.validate();
    auto sequences = to_user_sequences(ds);
    if (spec.strategy == Strategy::loo)
        return loo_split(sequences, spec, ds.checksum());

    Timestamp t_test = spec.t_test ? *spec.t_test : gts_cutoff(ds, *spec.test_quantile);
    if (t_test < ds.min_ts()) throw DataError("cutoff too early: empty train");
    if (t_test >= ds.max_ts()) throw DataError("cutoff too late: empty holdout");
    return gts_split(sequences, t_test, spec, ds.users(), ds.checksum());
}

}  // namespace splitrec
