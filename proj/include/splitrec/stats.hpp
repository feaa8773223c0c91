#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "splitrec/dataset.hpp"
#include "splitrec/split.hpp"

namespace splitrec {

struct DatasetStats {
    std::uint64_t interactions = 0;
    std::uint64_t users = 0;
    std::uint64_t items = 0;
    double avg_len = 0.0;
    double density_pct = 0.0;
    double span_days = 0.0;    // real; comparisons use this
    std::uint64_t days = 0;    // ceil(span_days), display value
    double lifetime_pct = 0.0; // median user activity period / span * 100
};

inline DatasetStats dataset_stats(const Dataset& ds) {
    if (ds.empty()) throw DataError("stats of empty dataset");
    DatasetStats st;
    st.interactions = ds.interaction_count();
    st.users = ds.user_count();
    st.items = ds.item_count();
    st.avg_len = static_cast<double>(st.interactions) / static_cast<double>(st.users);
    st.density_pct = 100.0 * static_cast<double>(st.interactions) /
                     (static_cast<double>(st.users) * static_cast<double>(st.items));
    st.span_days = ds.span_days();
    st.days = static_cast<std::uint64_t>(std::ceil(st.span_days));

    // user lifetime: median over users of (last ts - first ts)
    std::vector<Timestamp> first(ds.users().size(), -1), last(ds.users().size(), -1);
    for (const auto& e : ds.events()) {
        auto& f = first[e.user];
        auto& l = last[e.user];
        if (f < 0 || e.ts < f) f = e.ts;
        if (l < 0 || e.ts > l) l = e.ts;
    }
    std::vector<Timestamp> spans;
    spans.reserve(ds.user_count());
    for (std::size_t u = 0; u < first.size(); u++)
        if (first[u] >= 0) spans.push_back(last[u] - first[u]);
    if (ds.span_days() > 0)
        st.lifetime_pct = 100.0 * static_cast<double>(lower_median(std::move(spans))) /
                          (st.span_days * kSecondsPerDay);
    return st;
}

// One holdout subset (Table 3 row): period, user share, mean holdout length.
struct SubsetStats {
    std::uint64_t users = 0;
    std::uint64_t instances = 0;
    double users_pct = 0.0;
    double days = 0.0;  // real days of the holdout period
    double days_pct = 0.0;
    double holdout_len = 0.0;  // mean held-out events per subset user
};

// Table 3/4 shape: test subset stats plus the training-side aggregates.
struct SplitStats {
    SubsetStats test;
    std::optional<SubsetStats> valid;
    double lifetime_pct = 0.0;
    double avg_train_len = 0.0;
    std::uint64_t train_events = 0;
    std::uint64_t train_users = 0;
    std::uint64_t instances = 0;  // validation + test
};

namespace detail {

inline std::vector<bool> user_mask(const std::vector<EvalInstance>& instances, std::size_t n_users) {
    std::vector<bool> mask(n_users, false);
    for (const auto& inst : instances) mask[inst.user] = true;
    return mask;
}

inline std::uint64_t count_mask(const std::vector<bool>& mask) {
    std::uint64_t n = 0;
    for (bool b : mask)
        if (b) n++;
    return n;
}

// Span of the instances' first-target timestamps, in days. The holdout
// period definition for subsets without a cutoff of their own (LOO, LTI, UB).
inline double target_span_days(const std::vector<EvalInstance>& instances) {
    bool first = true;
    Timestamp lo = 0, hi = 0;
    for (const auto& inst : instances) {
        for (Timestamp t : inst.target_ts) {
            if (first || t < lo) lo = t;
            if (first || t > hi) hi = t;
            first = false;
        }
    }
    return first ? 0.0 : static_cast<double>(hi - lo) / kSecondsPerDay;
}

// Mean count of a user's events strictly after `cutoff`, over masked users.
inline double mean_holdout_len(const std::vector<UserSequence>& seqs, const std::vector<bool>& mask,
                               Timestamp cutoff) {
    std::uint64_t events = 0, users = 0;
    for (const auto& s : seqs) {
        if (s.user >= mask.size() || !mask[s.user]) continue;
        auto it = std::partition_point(s.events.begin(), s.events.end(),
                                       [&](const SeqEvent& e) { return e.ts <= cutoff; });
        events += static_cast<std::uint64_t>(s.events.end() - it);
        users++;
    }
    return users == 0 ? 0.0 : static_cast<double>(events) / static_cast<double>(users);
}

}  // namespace detail

// Test-subset statistics. For GTS the holdout period runs from T_test to the
// end of the dataset; for LOO it is the span of the test-target timestamps.
inline SplitStats split_stats(const SplitResult& split, const Dataset& ds) {
    SplitStats st;
    auto base = dataset_stats(ds);
    st.lifetime_pct = base.lifetime_pct;

    for (const auto& s : split.train) {
        st.train_events += s.events.size();
        st.train_users++;
    }
    st.avg_train_len = st.train_users == 0
                           ? 0.0
                           : static_cast<double>(st.train_events) / static_cast<double>(st.train_users);
    st.instances = split.validation_instances.size() + split.test_instances.size();

    auto sequences = to_user_sequences(ds);
    double span = ds.span_days();

    auto fill = [&](SubsetStats& sub, const std::vector<EvalInstance>& instances,
                    std::optional<Timestamp> cutoff_from, std::optional<Timestamp> cutoff_to) {
        auto mask = detail::user_mask(instances, ds.users().size());
        sub.users = detail::count_mask(mask);
        sub.instances = instances.size();
        sub.users_pct = ds.user_count() == 0
                            ? 0.0
                            : 100.0 * static_cast<double>(sub.users) /
                                  static_cast<double>(ds.user_count());
        if (cutoff_from) {
            Timestamp hi = cutoff_to ? *cutoff_to : ds.max_ts();
            sub.days = static_cast<double>(hi - *cutoff_from) / kSecondsPerDay;
            sub.holdout_len = detail::mean_holdout_len(sequences, mask, *cutoff_from);
        } else {
            sub.days = detail::target_span_days(instances);
            sub.holdout_len = 1.0;  // single held-out target per user
        }
        sub.days_pct = span > 0 ? 100.0 * sub.days / span : 0.0;
    };

    if (split.spec.strategy == Strategy::gts) {
        fill(st.test, split.test_instances, split.t_test, std::nullopt);
        if (!split.validation_instances.empty()) {
            SubsetStats v;
            if (split.spec.validation == Validation::gt) {
                fill(v, split.validation_instances, split.t_val, split.t_test);
                // holdout is bounded by T_test on the validation side
                auto mask = detail::user_mask(split.validation_instances, ds.users().size());
                std::uint64_t events = 0, users = 0;
                for (const auto& s : split.train_plus_valid) {
                    if (!mask[s.user]) continue;
                    auto it = std::partition_point(
                        s.events.begin(), s.events.end(),
                        [&](const SeqEvent& e) { return e.ts <= *split.t_val; });
                    events += static_cast<std::uint64_t>(s.events.end() - it);
                    users++;
                }
                v.holdout_len =
                    users == 0 ? 0.0 : static_cast<double>(events) / static_cast<double>(users);
            } else {
                fill(v, split.validation_instances, std::nullopt, std::nullopt);
                if (split.spec.validation == Validation::ub) {
                    // whole reserved histories are held out
                    auto mask = detail::user_mask(split.validation_instances, ds.users().size());
                    std::uint64_t events = 0, users = 0;
                    for (const auto& s : split.train_plus_valid) {
                        if (!mask[s.user]) continue;
                        events += s.events.size();
                        users++;
                    }
                    v.holdout_len =
                        users == 0 ? 0.0 : static_cast<double>(events) / static_cast<double>(users);
                }
            }
            st.valid = v;
        }
    } else {
        fill(st.test, split.test_instances, std::nullopt, std::nullopt);
        if (!split.validation_instances.empty()) {
            SubsetStats v;
            fill(v, split.validation_instances, std::nullopt, std::nullopt);
            st.valid = v;
        }
    }
    return st;
}

struct SweepRow {
    double quantile = 0.0;
    bool flagged = false;       // empty holdout (or otherwise unusable cutoff)
    std::string flag_reason;
    std::optional<Timestamp> t_test;
    SplitStats stats;
};

// Table 4: the same GTS split across ascending quantiles. Asserts the
// structural monotonicities (train grows with q; for single-target options
// the test-user count shrinks) on every run.
inline std::vector<SweepRow> quantile_sweep(const Dataset& ds, const std::vector<double>& quantiles,
                                            Target target, std::uint64_t seed = 0) {
    for (std::size_t i = 1; i < quantiles.size(); i++)
        if (!(quantiles[i] > quantiles[i - 1]))
            throw ConfigError("quantiles must be strictly ascending");

    std::vector<SweepRow> rows;
    for (double q : quantiles) {
        SweepRow row;
        row.quantile = q;
        SplitSpec spec;
        spec.strategy = Strategy::gts;
        spec.test_quantile = q;
        spec.target = target;
        spec.validation = Validation::none;
        spec.seed = seed;
        try {
            auto split = make_split(ds, spec);
            row.t_test = split.t_test;
            row.stats = split_stats(split, ds);
        } catch (const DataError& e) {
            row.flagged = true;
            row.flag_reason = e.what();
        }
        rows.push_back(std::move(row));
    }

    const SweepRow* prev = nullptr;
    for (const auto& row : rows) {
        if (row.flagged) continue;
        if (prev) {
            if (row.stats.train_events < prev->stats.train_events)
                throw DataError("quantile sweep: train events decreased with q");
            if (target != Target::all && row.stats.test.users > prev->stats.test.users)
                throw DataError("quantile sweep: test users increased with q");
        }
        prev = &row;
    }
    return rows;
}

// Time gap between each target and the user's immediately preceding event.
struct GapReport {
    std::vector<std::int64_t> per_target_deltas;  // instance order
    std::int64_t median_delta = 0;
    std::optional<std::int64_t> full_data_median;
    std::vector<std::pair<int, std::uint64_t>> histogram;  // (log10 bin, count); -1 holds zeros
};

inline GapReport target_time_gaps(const std::vector<EvalInstance>& instances,
                                  const std::vector<UserSequence>& sequences,
                                  bool full_data_baseline = true) {
    if (instances.empty()) throw DataError("no instances for time-gap analysis");
    GapReport rep;
    rep.per_target_deltas.reserve(instances.size());
    for (const auto& inst : instances)
        rep.per_target_deltas.push_back(inst.target_ts.front() - inst.prev_ts);
    rep.median_delta = lower_median(rep.per_target_deltas);

    if (full_data_baseline) {
        std::vector<std::int64_t> all;
        for (const auto& s : sequences)
            for (std::size_t i = 1; i < s.events.size(); i++)
                all.push_back(s.events[i].ts - s.events[i - 1].ts);
        if (!all.empty()) rep.full_data_median = lower_median(std::move(all));
    }

    std::map<int, std::uint64_t> bins;
    for (auto d : rep.per_target_deltas) {
        int bin = d <= 0 ? -1 : static_cast<int>(std::floor(std::log10(static_cast<double>(d))));
        bins[bin]++;
    }
    rep.histogram.assign(bins.begin(), bins.end());
    return rep;
}

// ---- JSON report shapes -------------------------------------------------

inline nlohmann::ordered_json dataset_stats_json(const DatasetStats& st) {
    nlohmann::ordered_json j;
    j["interactions"] = st.interactions;
    j["users"] = st.users;
    j["items"] = st.items;
    j["avg_len"] = st.avg_len;
    j["density_pct"] = st.density_pct;
    j["days"] = st.days;
    j["span_days"] = st.span_days;
    j["lifetime_pct"] = st.lifetime_pct;
    return j;
}

inline nlohmann::ordered_json subset_stats_json(const SubsetStats& s) {
    nlohmann::ordered_json j;
    j["users"] = s.users;
    j["users_pct"] = s.users_pct;
    j["days"] = s.days;
    j["days_pct"] = s.days_pct;
    j["holdout_len"] = s.holdout_len;
    j["instances"] = s.instances;
    return j;
}

inline nlohmann::ordered_json split_stats_json(const SplitStats& st) {
    nlohmann::ordered_json j;
    j["test"] = subset_stats_json(st.test);
    j["valid"] = st.valid ? subset_stats_json(*st.valid) : nlohmann::ordered_json(nullptr);
    j["train"] = {{"events", st.train_events},
                  {"users", st.train_users},
                  {"avg_len", st.avg_train_len}};
    j["lifetime_pct"] = st.lifetime_pct;
    j["instances"] = st.instances;
    return j;
}

inline nlohmann::ordered_json sweep_json(const std::vector<SweepRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["quantile"] = r.quantile;
        j["flagged"] = r.flagged;
        if (r.flagged) {
            j["flag_reason"] = r.flag_reason;
        } else {
            if (r.t_test) j["t_test"] = *r.t_test;
            j["holdout_len"] = r.stats.test.holdout_len;
            j["users"] = r.stats.test.users;
            j["users_pct"] = r.stats.test.users_pct;
            j["days"] = r.stats.test.days;
            j["train_events"] = r.stats.train_events;
        }
        arr.push_back(std::move(j));
    }
    return arr;
}

inline nlohmann::ordered_json gap_report_json(const GapReport& rep) {
    nlohmann::ordered_json j;
    j["n"] = rep.per_target_deltas.size();
    j["median_delta"] = rep.median_delta;
    j["full_data_median"] =
        rep.full_data_median ? nlohmann::ordered_json(*rep.full_data_median)
                             : nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json hist = nlohmann::ordered_json::array();
    for (auto [bin, count] : rep.histogram) hist.push_back({bin, count});
    j["histogram"] = std::move(hist);
    return j;
}

}  // namespace splitrec
