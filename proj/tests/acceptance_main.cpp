// Acceptance suite: one line per criterion, PASS / FAIL / SKIP.
// Criteria 1-3 reproduce published ML-1M numbers and need the raw ratings
// file; point ML1M_RATINGS at ml-1m/ratings.dat to enable them. Everything
// else runs on synthetic data and must always pass.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "testutil.hpp"

using namespace splitrec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    enum Kind { pass, fail, skip } kind = pass;
    std::string detail;
};

Outcome ok(std::string detail = "") { return {Outcome::pass, std::move(detail)}; }
Outcome bad(std::string detail) { return {Outcome::fail, std::move(detail)}; }
Outcome skipped(std::string detail) { return {Outcome::skip, std::move(detail)}; }

struct Check {
    bool good = true;
    std::ostringstream why;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            if (!good) why << "; ";
            good = false;
            why << what;
        }
    }
    Outcome done(const std::string& detail = "") {
        return good ? ok(detail) : bad(why.str());
    }
};

std::string fmt(double v, int prec = 3) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

const char* ml1m_path() { return std::getenv("ML1M_RATINGS"); }

Dataset load_ml1m(const std::string& path) {
    ParseSchema schema;
    schema.delimiter = "::";
    schema.user = {0, {}};
    schema.item = {1, {}};
    schema.time = {3, {}};
    schema.time_format = TimeFormat::epoch_seconds;
    return parse_event_log_file(path, schema);
}

Dataset preprocess_ml1m(const Dataset& raw) {
    PreprocessConfig cfg;
    cfg.p_core = 5;
    cfg.dedup_consecutive = true;
    return preprocess(raw, cfg);
}

// ---- criterion 1: ML-1M preprocessing reproduction --------------------------

Outcome criterion1() {
    const char* path = ml1m_path();
    if (!path) return skipped("ML-1M not present; set ML1M_RATINGS=<ml-1m/ratings.dat>");
    auto t0 = std::chrono::steady_clock::now();
    auto ds = preprocess_ml1m(load_ml1m(path));
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto st = dataset_stats(ds);

    Check c;
    c.expect(st.interactions == 999611, "interactions " + std::to_string(st.interactions) +
                                            " != 999611");
    c.expect(st.users == 6040, "users " + std::to_string(st.users) + " != 6040");
    c.expect(st.items == 3416, "items " + std::to_string(st.items) + " != 3416");
    c.expect(std::abs(st.avg_len - 165.5) <= 0.1, "avg_len " + fmt(st.avg_len) + " != 165.5±0.1");
    c.expect(std::abs(static_cast<double>(st.days) - 1038.0) <= 1.0,
             "days " + std::to_string(st.days) + " != 1038±1");
    c.expect(elapsed < 60.0, "runtime " + fmt(elapsed, 1) + "s >= 60s");
    return c.done("999611/6040/3416, avg " + fmt(st.avg_len, 1) + ", " +
                  std::to_string(st.days) + " days, " + fmt(elapsed, 1) + "s");
}

// ---- criterion 2: ML-1M GTS quantile statistics -----------------------------

Outcome criterion2() {
    const char* path = ml1m_path();
    if (!path) return skipped("ML-1M not present; set ML1M_RATINGS=<ml-1m/ratings.dat>");
    auto ds = preprocess_ml1m(load_ml1m(path));
    auto rows = quantile_sweep(ds, {0.8, 0.9, 0.95, 0.975}, Target::last);

    // Table 4, ML-1M row
    struct Expected {
        double q, holdout_len, users, days;
    };
    const std::vector<Expected> expected{{0.8, 112.0, 1780.0, 818.0},
                                         {0.9, 82.7, 1210.0, 790.0},
                                         {0.95, 61.5, 810.0, 617.0},
                                         {0.975, 45.6, 550.0, 400.0}};
    Check c;
    for (std::size_t i = 0; i < expected.size(); i++) {
        const auto& e = expected[i];
        const auto& row = rows[i];
        c.expect(!row.flagged, "q" + fmt(e.q, 3) + " flagged: " + row.flag_reason);
        if (row.flagged) continue;
        std::string tag = "q" + fmt(e.q, 3) + " ";
        c.expect(std::abs(row.stats.test.holdout_len - e.holdout_len) <= 0.5,
                 tag + "holdout_len " + fmt(row.stats.test.holdout_len, 1) + " != " +
                     fmt(e.holdout_len, 1) + "±0.5");
        c.expect(std::abs(static_cast<double>(row.stats.test.users) - e.users) <= 15.0,
                 tag + "users " + std::to_string(row.stats.test.users) + " != " +
                     fmt(e.users, 0) + "±15");
        c.expect(std::abs(row.stats.test.days - e.days) <= 5.0,
                 tag + "days " + fmt(row.stats.test.days, 1) + " != " + fmt(e.days, 0) + "±5");
    }
    const auto& q09 = rows[1].stats.test;
    return c.done("q0.9: holdout " + fmt(q09.holdout_len, 1) + ", users " +
                  std::to_string(q09.users) + ", days " + fmt(q09.days, 0));
}

// ---- criterion 3: LOO covers 100% of retained users --------------------------

Outcome criterion3() {
    SplitSpec loo;
    loo.strategy = Strategy::loo;
    loo.validation = Validation::implied;

    const char* path = ml1m_path();
    if (path) {
        auto ds = preprocess_ml1m(load_ml1m(path));
        auto split = make_split(ds, loo);
        auto st = split_stats(split, ds);
        Check c;
        c.expect(st.test.users_pct == 100.0,
                 "users_pct " + fmt(st.test.users_pct, 6) + " != 100 exactly");
        c.expect(st.test.users == ds.user_count(), "test users != dataset users");
        return c.done("ML-1M: " + std::to_string(st.test.users) + "/" +
                      std::to_string(ds.user_count()) + " users = 100%");
    }
    // synthetic stand-in: every sequence passes min-length filtering
    auto deduped = dedup_consecutive(testutil::random_log(1234, 500, 10, 40, 100000));
    std::vector<std::uint64_t> per_user(deduped.users().size(), 0);
    for (const auto& e : deduped.events()) per_user[e.user]++;
    std::vector<Interaction> kept;
    for (const auto& e : deduped.events())
        if (per_user[e.user] >= 2) kept.push_back(e);
    Dataset ds(std::move(kept), deduped.users_ptr(), deduped.items_ptr());
    auto split = make_split(ds, loo);
    auto st = split_stats(split, ds);
    Check c;
    c.expect(st.test.users_pct == 100.0, "users_pct " + fmt(st.test.users_pct, 6) + " != 100");
    auto out = c.done("synthetic stand-in (ML-1M not present): 100% of " +
                      std::to_string(st.test.users) + " users");
    if (out.kind == Outcome::pass) return skipped(out.detail + " — PASSED, but ML-1M row unverified");
    return out;
}

// ---- criterion 4: leakage freedom over 200 randomized logs -------------------

Outcome criterion4() {
    Check c;
    std::size_t logs_checked = 0;
    for (std::uint64_t seed = 0; seed < 200; seed++) {
        auto ds = testutil::random_log(seed * 31 + 7, 30 + seed % 40, 9, 15, 50000);

        SplitSpec spec;
        spec.strategy = Strategy::gts;
        spec.test_quantile = 0.75 + 0.2 * ((seed % 10) / 10.0);
        spec.target = static_cast<Target>(seed % 5);
        spec.validation = Validation::gt;
        spec.val_quantile = 0.8;
        spec.val_target = Target::last;
        spec.seed = seed;
        SplitResult split;
        try {
            split = make_split(ds, spec);
        } catch (const DataError&) {
            continue;  // degenerate cutoff on this draw; not a violation
        }
        logs_checked++;
        for (const auto& s : split.train)
            for (const auto& e : s.events) {
                c.expect(e.ts <= *split.t_test, "train event after T_test (seed " +
                                                    std::to_string(seed) + ")");
                c.expect(e.ts <= *split.t_val,
                         "GT train event after T_val (seed " + std::to_string(seed) + ")");
            }
        for (const auto& s : split.train_plus_valid)
            for (const auto& e : s.events)
                c.expect(e.ts <= *split.t_test,
                         "refit event after T_test (seed " + std::to_string(seed) + ")");
        for (const auto& inst : split.validation_instances)
            for (Timestamp t : inst.target_ts)
                c.expect(t > *split.t_val && t <= *split.t_test,
                         "validation target outside (T_val, T_test] (seed " +
                             std::to_string(seed) + ")");

        // LOO partition reconstruction on the same log
        SplitSpec loo;
        loo.strategy = Strategy::loo;
        loo.validation = Validation::implied;
        auto ls = make_split(ds, loo);
        std::map<UserId, const UserSequence*> train;
        for (const auto& s : ls.train) train[s.user] = &s;
        std::map<UserId, const EvalInstance*> valid, test;
        for (const auto& i : ls.validation_instances) valid[i.user] = &i;
        for (const auto& i : ls.test_instances) test[i.user] = &i;
        for (const auto& s : to_user_sequences(ds)) {
            if (s.events.size() < 2) continue;
            std::vector<ItemId> rebuilt;
            if (s.events.size() == 2) {
                c.expect(!train.count(s.user) && !valid.count(s.user) && test.count(s.user),
                         "length-2 user not test-only (seed " + std::to_string(seed) + ")");
                if (!test.count(s.user)) continue;
                rebuilt = test[s.user]->prefix;
            } else {
                c.expect(train.count(s.user) && valid.count(s.user) && test.count(s.user),
                         "user missing a partition (seed " + std::to_string(seed) + ")");
                if (!train.count(s.user) || !valid.count(s.user) || !test.count(s.user)) continue;
                for (const auto& e : train[s.user]->events) rebuilt.push_back(e.item);
                rebuilt.push_back(valid[s.user]->targets[0]);
            }
            rebuilt.push_back(test[s.user]->targets[0]);
            std::vector<ItemId> original;
            for (const auto& e : s.events) original.push_back(e.item);
            c.expect(rebuilt == original,
                     "LOO reconstruction mismatch (seed " + std::to_string(seed) + ")");
        }
        if (!c.good) break;
    }
    c.expect(logs_checked >= 150, "too many degenerate draws: " + std::to_string(logs_checked));
    return c.done(std::to_string(logs_checked) + " randomized logs, zero violations");
}

// ---- criterion 5: metric oracle equivalence ----------------------------------

Outcome criterion5() {
    const std::vector<std::size_t> ks{5, 10, 20, 50, 100};
    SplitMix64 g(20240601);
    Check c;
    std::size_t multi = 0;
    for (int trial = 0; trial < 1000 && c.good; trial++) {
        std::size_t catalog = 5 + g.next_below(16);  // <= 20
        std::vector<ItemId> ranked(catalog);
        std::iota(ranked.begin(), ranked.end(), 0);
        for (std::size_t i = ranked.size() - 1; i > 0; i--)
            std::swap(ranked[i], ranked[g.next_below(i + 1)]);
        ranked.resize(1 + g.next_below(catalog));
        std::size_t n_targets = 1 + g.next_below(5);
        if (n_targets > 1) multi++;
        std::vector<ItemId> targets;
        for (std::size_t t = 0; t < n_targets; t++)
            targets.push_back(static_cast<ItemId>(g.next_below(catalog)));
        for (std::size_t k : ks) {
            c.expect(std::abs(hr_at_k(targets, ranked, k) -
                              testutil::oracle_hr(targets, ranked, k)) <= 1e-12,
                     "hr@" + std::to_string(k) + " differs (trial " + std::to_string(trial) + ")");
            c.expect(std::abs(mrr_at_k(targets, ranked, k) -
                              testutil::oracle_mrr(targets, ranked, k)) <= 1e-12,
                     "mrr@" + std::to_string(k) + " differs (trial " + std::to_string(trial) + ")");
            c.expect(std::abs(ndcg_at_k(targets, ranked, k) -
                              testutil::oracle_ndcg(targets, ranked, k)) <= 1e-12,
                     "ndcg@" + std::to_string(k) + " differs (trial " + std::to_string(trial) + ")");
        }
    }
    c.expect(multi > 200, "not enough multi-target draws");
    return c.done("1000 instances x {5,10,20,50,100}, " + std::to_string(multi) +
                  " multi-target, max err <= 1e-12");
}

// ---- criterion 6: correlation oracle equivalence ------------------------------

Outcome criterion6() {
    Check c;
    std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
    std::vector<double> rev(x.rbegin(), x.rend());
    c.expect(kendall_tau_b(x, x) == 1.0, "identity tau != 1.0 exactly");
    c.expect(kendall_tau_b(x, rev) == -1.0, "reversal tau != -1.0 exactly");
    c.expect(spearman_rho(x, x) == 1.0, "identity rho != 1.0 exactly");
    c.expect(spearman_rho(x, rev) == -1.0, "reversal rho != -1.0 exactly");

    SplitMix64 g(424242);
    int used = 0;
    while (used < 500 && c.good) {
        std::size_t n = 3 + g.next_below(80);
        std::vector<double> a(n), b(n);
        for (auto& v : a) v = static_cast<double>(g.next_below(1 + n / 2));
        for (auto& v : b) v = static_cast<double>(g.next_below(1 + n / 2));
        double tau, rho;
        try {
            tau = kendall_tau_b(a, b);
            rho = spearman_rho(a, b);
        } catch (const DataError&) {
            continue;
        }
        used++;
        c.expect(std::abs(tau - testutil::oracle_kendall_tau_b(a, b)) <= 1e-12,
                 "tau differs from pair-scan oracle (vector " + std::to_string(used) + ")");
        c.expect(std::abs(rho - testutil::oracle_spearman(a, b)) <= 1e-12,
                 "rho differs from rank-Pearson oracle (vector " + std::to_string(used) + ")");
    }
    return c.done("500 tied vectors within 1e-12; identity/reversal exact");
}

// ---- criterion 7: first-target session-boundary bias ---------------------------

Outcome criterion7() {
    auto ds = testutil::session_log(50, 10, 11, 60, 86400, 600);
    auto seqs = to_user_sequences(ds);
    auto median_for = [&](Target t) {
        SplitSpec spec;
        spec.strategy = Strategy::gts;
        spec.test_quantile = 0.9;
        spec.target = t;
        spec.validation = Validation::none;
        spec.seed = 11;
        auto split = make_split(ds, spec);
        return target_time_gaps(split.test_instances, seqs, false).median_delta;
    };
    auto first = static_cast<double>(median_for(Target::first));
    auto succ = static_cast<double>(median_for(Target::successive));
    auto last = static_cast<double>(median_for(Target::last));
    auto rnd = static_cast<double>(median_for(Target::random));

    Check c;
    c.expect(first >= 100.0 * succ, "first median " + fmt(first, 0) + " < 100x successive " +
                                        fmt(succ, 0));
    c.expect(last <= 5.0 * succ && last >= succ / 5.0,
             "last median " + fmt(last, 0) + " not within 5x of successive");
    c.expect(rnd <= 5.0 * succ && rnd >= succ / 5.0,
             "random median " + fmt(rnd, 0) + " not within 5x of successive");
    return c.done("medians: first " + fmt(first, 0) + ", successive " + fmt(succ, 0) +
                  ", last " + fmt(last, 0) + ", random " + fmt(rnd, 0));
}

// ---- criterion 8: successive scheme structure ----------------------------------

Outcome criterion8() {
    Check c;
    std::size_t users_checked = 0;
    for (std::uint64_t seed = 0; users_checked < 100 && seed < 50; seed++) {
        auto ds = testutil::random_log(seed + 9000, 40, 10, 12, 40000);
        SplitSpec spec;
        spec.strategy = Strategy::gts;
        spec.test_quantile = 0.8;
        spec.target = Target::successive;
        spec.validation = Validation::none;
        SplitResult split;
        try {
            split = make_split(ds, spec);
        } catch (const DataError&) {
            continue;
        }
        std::map<UserId, std::vector<const EvalInstance*>> by_user;
        for (const auto& inst : split.test_instances) by_user[inst.user].push_back(&inst);
        for (const auto& s : to_user_sequences(ds)) {
            if (s.events.size() < 2) continue;
            std::size_t h = 0;
            while (h < s.events.size() && s.events[h].ts <= *split.t_test) h++;
            std::size_t holdout = s.events.size() - h;
            if (holdout == 0) continue;
            users_checked++;
            std::size_t expected = holdout - (h == 0 ? 1 : 0);
            auto it = by_user.find(s.user);
            std::size_t got = it == by_user.end() ? 0 : it->second.size();
            c.expect(got == expected, "instance count " + std::to_string(got) + " != " +
                                          std::to_string(expected) + " (user " +
                                          ds.users().name(s.user) + ")");
            if (it == by_user.end()) continue;
            const auto& insts = it->second;
            for (std::size_t i = 1; i < insts.size(); i++) {
                auto grow = insts[i - 1]->prefix;
                grow.push_back(insts[i - 1]->targets[0]);
                c.expect(insts[i]->prefix == grow,
                         "prefix does not grow by one target (user " + ds.users().name(s.user) +
                             ")");
            }
        }
    }
    c.expect(users_checked >= 100, "only " + std::to_string(users_checked) + " users checked");
    return c.done(std::to_string(users_checked) + " users verified");
}

// ---- criterion 9: end-to-end determinism ----------------------------------------

struct TempTree {
    fs::path path;
    explicit TempTree(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("splitrec_accept_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempTree() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
    std::string cmd = std::string(SPLITREC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<unreadable:" + path + ">";
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion9() {
    TempTree tree("det");
    // shared raw log
    std::ostringstream os;
    SplitMix64 g(555);
    for (int u = 0; u < 40; u++) {
        int len = 4 + static_cast<int>(g.next_below(8));
        for (int e = 0; e < len; e++)
            os << "u" << u << ",i" << g.next_below(25) << "," << (u * 3600 + e * 300) << "\n";
    }
    auto raw = tree.sub("raw.csv");
    std::ofstream(raw) << os.str();

    auto pipeline = [&](const std::string& tag) -> std::string {
        auto prep = tree.sub(tag + "_prep");
        auto split = tree.sub(tag + "_split");
        auto split2 = tree.sub(tag + "_split2");
        auto corr = tree.sub(tag + "_corr");
        if (run_cli("preprocess --input " + raw + " --out " + prep + " --p-core 2 --seed 77"))
            return "";
        if (run_cli("split --input " + prep + "/dataset.csv --out " + split +
                    " --strategy gts --quantile 0.8 --target random --validation ub"
                    " --ub-users 5 --seed 77"))
            return "";
        if (run_cli("split --input " + prep + "/dataset.csv --out " + split2 +
                    " --strategy gts --quantile 0.8 --target last --validation none --seed 77"))
            return "";
        std::string reports_a, reports_b;
        std::vector<std::string> files{prep + "/dataset.csv", prep + "/stats.json",
                                       split + "/manifest.jsonl", split + "/train.csv",
                                       split + "/train_full.csv", split + "/split_stats.json"};
        for (const std::string model : {"markov", "pop"}) {
            auto eva = tree.sub(tag + "_eva_" + model);
            auto evb = tree.sub(tag + "_evb_" + model);
            std::string labels = " --label-model " + model + " --label-config c1";
            if (run_cli("evaluate --manifest " + split + " --model " + model + " --out " + eva +
                        " --ks 5,10 --label-split a" + labels))
                return "";
            if (run_cli("evaluate --manifest " + split2 + " --model " + model + " --out " + evb +
                        " --ks 5,10 --label-split b" + labels))
                return "";
            reports_a += (reports_a.empty() ? "" : ",") + eva + "/report.json";
            reports_b += (reports_b.empty() ? "" : ",") + evb + "/report.json";
            files.push_back(eva + "/report.json");
            files.push_back(evb + "/report.json");
        }
        if (run_cli("correlate --reports-a " + reports_a + " --reports-b " + reports_b +
                    " --metric ndcg --k 10 --out " + corr))
            return "";
        files.push_back(corr + "/correlation.json");
        files.push_back(corr + "/scatter.csv");
        std::string blob;
        for (const auto& f : files)
            blob += "==== " + fs::path(f).filename().string() + "\n" + slurp(f);
        return blob;
    };

    auto a = pipeline("run1");
    auto b = pipeline("run2");
    Check c;
    c.expect(!a.empty(), "pipeline run failed");
    c.expect(a == b, "outputs differ between identical-seed runs");
    auto files = std::count(a.begin(), a.end(), '=') / 4;
    return c.done("two full pipeline runs byte-identical (" + std::to_string(files) +
                  " files compared)");
}

// ---- criterion 10: baseline grid correlation pipeline ----------------------------

Outcome criterion10() {
    auto ds = dedup_consecutive(testutil::random_log(31337, 120, 12, 30, 200000));

    SplitSpec sucv;
    sucv.strategy = Strategy::gts;
    sucv.test_quantile = 0.85;
    sucv.target = Target::successive;
    sucv.validation = Validation::none;
    sucv.seed = 5;
    SplitSpec last = sucv;
    last.target = Target::last;
    SplitSpec loo;
    loo.strategy = Strategy::loo;
    loo.validation = Validation::implied;
    loo.seed = 5;

    struct GridPoint {
        ModelKind kind;
        std::string config;
        ModelParams params;
    };
    std::vector<GridPoint> grid;
    for (double w : {1.0, 0.5, 0.25}) {
        ModelParams p;
        p.pop_window = w;
        grid.push_back({ModelKind::pop, "w" + fmt(w, 2), p});
    }
    for (std::uint64_t m : {1, 2}) {
        ModelParams p;
        p.markov_min_count = m;
        grid.push_back({ModelKind::markov, "m" + std::to_string(m), p});
    }
    for (std::size_t n : {5, 20, 100}) {
        ModelParams p;
        p.knn_neighbors = n;
        grid.push_back({ModelKind::knn, "n" + std::to_string(n), p});
    }

    const std::vector<std::size_t> ks{5, 10, 20};
    const std::vector<MetricKind> metrics{MetricKind::hr, MetricKind::mrr, MetricKind::ndcg};

    auto run_grid = [&](const SplitSpec& spec, const std::string& label) {
        auto split = make_split(ds, spec);
        std::vector<MetricReport> reports;
        for (const auto& gp : grid) {
            auto model = fit(gp.kind, split.train, ds.items().size(), gp.params);
            auto rankings = recommend_batch(model, split.test_instances, 20, true);
            EvalConfig cfg;
            cfg.ks = ks;
            cfg.metrics = metrics;
            cfg.filter_seen = true;
            cfg.labels = {to_string(gp.kind), gp.config, label, "synthetic"};
            reports.push_back(evaluate_run(split.test_instances, rankings, cfg));
        }
        return reports;
    };

    auto ra = run_grid(sucv, "gts-successive");
    auto rb = run_grid(last, "gts-last");
    auto rc = run_grid(loo, "loo");

    Check c;
    std::size_t cells = 0;
    auto correlate_pair = [&](const std::vector<MetricReport>& a,
                              const std::vector<MetricReport>& b) {
        for (auto m : metrics)
            for (auto k : ks) {
                RunVector va{"a", {}}, vb{"b", {}};
                std::vector<double> xs, ys;
                for (std::size_t i = 0; i < a.size(); i++) {
                    std::string id = a[i].labels.model + "/" + a[i].labels.config;
                    va.points.emplace_back(id, a[i].global_at(m, k));
                    vb.points.emplace_back(id, b[i].global_at(m, k));
                    xs.push_back(a[i].global_at(m, k));
                    ys.push_back(b[i].global_at(m, k));
                }
                CorrelationResult r;
                try {
                    r = correlate_runs(va, vb);
                } catch (const DataError& e) {
                    c.expect(false, std::string("degenerate cell ") + to_string(m) + "@" +
                                        std::to_string(k) + ": " + e.what());
                    continue;
                }
                cells++;
                c.expect(std::isfinite(r.kendall_tau) && std::abs(r.kendall_tau) <= 1.0,
                         "tau out of range");
                c.expect(std::isfinite(r.spearman_rho) && std::abs(r.spearman_rho) <= 1.0,
                         "rho out of range");
                c.expect(std::abs(r.kendall_tau - testutil::oracle_kendall_tau_b(xs, ys)) <= 1e-12,
                         "tau differs from oracle");
                c.expect(std::abs(r.spearman_rho - testutil::oracle_spearman(xs, ys)) <= 1e-12,
                         "rho differs from oracle");
                c.expect(r.n == grid.size(), "incomplete run vector");
            }
    };
    correlate_pair(ra, rb);
    correlate_pair(ra, rc);
    c.expect(cells == 2 * metrics.size() * ks.size(),
             "correlation matrix incomplete: " + std::to_string(cells) + " cells");

    // ranking tables across the three splits, twice (stability)
    std::vector<RunPoint> points;
    for (const auto* batch : {&ra, &rb, &rc})
        for (const auto& rep : *batch)
            points.push_back(RunPoint{rep.labels.split, rep.labels.model, rep.labels.config,
                                      rep.global_at(MetricKind::ndcg, 10)});
    auto t1 = model_ranking(points);
    auto t2 = model_ranking(points);
    c.expect(t1.splits.size() == 3, "ranking table missing splits");
    for (const auto& [split, entries] : t1.by_split) {
        c.expect(entries.size() == 3, "ranking for " + split + " missing models");
        for (const auto& e : entries)
            c.expect(t2.ranks.at(e.model).at(split) == e.rank, "unstable ranking");
    }
    return c.done(std::to_string(cells) + " correlation cells over 3 splits x 8 configs, " +
                  "rankings stable");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "ML-1M preprocessing reproduction", criterion1},
        {2, "ML-1M GTS quantile statistics", criterion2},
        {3, "LOO test coverage is 100% of retained users", criterion3},
        {4, "leakage freedom + LOO partition on 200 random logs", criterion4},
        {5, "metric oracle equivalence at K in {5,10,20,50,100}", criterion5},
        {6, "correlation oracle equivalence on 500 tied vectors", criterion6},
        {7, "first-target session-boundary bias", criterion7},
        {8, "successive scheme structure on 100+ users", criterion8},
        {9, "end-to-end determinism of the CLI pipeline", criterion9},
        {10, "baseline-grid correlation and ranking pipeline", criterion10},
    };

    int failures = 0;
    for (const auto& crit : criteria) {
        Outcome outcome;
        try {
            outcome = crit.run();
        } catch (const std::exception& e) {
            outcome = bad(std::string("unexpected exception: ") + e.what());
        }
        const char* tag = outcome.kind == Outcome::pass ? "PASS"
                          : outcome.kind == Outcome::skip ? "SKIP"
                                                          : "FAIL";
        if (outcome.kind == Outcome::fail) failures++;
        std::printf("[%2d] %s  %s%s%s\n", crit.id, tag, crit.name,
                    outcome.detail.empty() ? "" : " — ", outcome.detail.c_str());
    }
    if (failures) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    return 0;
}
