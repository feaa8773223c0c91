// splitrec command line: preprocess, split, evaluate, correlate, rank,
// timegaps. Every command is a pure function of its input files and options;
// rerunning with the same seed yields byte-identical outputs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splitrec/splitrec.hpp"

namespace fs = std::filesystem;
using namespace splitrec;
using nlohmann::ordered_json;

namespace {

std::string out_dir_or_default(std::string out, const std::string& command) {
    if (!out.empty()) return out;
    if (const char* cache = std::getenv("SPLITREC_CACHE_DIR"))
        return (fs::path(cache) / command).string();
    throw ConfigError("--out is required (or set SPLITREC_CACHE_DIR)");
}

void write_json_file(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failed: " + path.string());
}

void persist_run_config(const fs::path& dir, const std::string& command, ordered_json options) {
    ordered_json j;
    j["command"] = command;
    j["options"] = std::move(options);
    write_json_file(dir / "run_config.json", j);
}

// ---- preprocess ------------------------------------------------------------

struct PreprocessArgs {
    std::string input;
    std::string out;
    std::string delimiter = ",";
    bool header = false;
    std::string user_col = "0";
    std::string item_col = "1";
    std::string time_col = "2";
    std::string time_format = "auto";
    bool strict = false;
    int p_core = 5;
    bool no_dedup = false;
    std::uint64_t sample_users_n = 0;  // 0 = no sampling
    std::uint64_t seed = 0;
};

ColumnRef column_ref(const std::string& value) {
    ColumnRef ref;
    std::int64_t pos = 0;
    if (detail::parse_int(value, pos) && pos >= 0)
        ref.position = static_cast<int>(pos);
    else
        ref.name = value;
    return ref;
}

int cmd_preprocess(const PreprocessArgs& a) {
    ParseSchema schema;
    schema.delimiter = a.delimiter;
    schema.header = a.header;
    schema.user = column_ref(a.user_col);
    schema.item = column_ref(a.item_col);
    schema.time = column_ref(a.time_col);
    schema.strict = a.strict;
    if (a.time_format == "auto")
        schema.time_format = TimeFormat::automatic;
    else if (a.time_format == "epoch")
        schema.time_format = TimeFormat::epoch_seconds;
    else if (a.time_format == "iso8601")
        schema.time_format = TimeFormat::iso8601;
    else
        throw ConfigError("unknown time format: " + a.time_format);

    PreprocessConfig cfg;
    cfg.p_core = a.p_core;
    cfg.dedup_consecutive = !a.no_dedup;
    if (a.sample_users_n > 0) cfg.sample_users = a.sample_users_n;
    cfg.seed = a.seed;

    auto raw = parse_event_log_file(a.input, schema);
    PreprocessReport prep;
    auto ds = preprocess(raw, cfg, &prep);
    if (ds.empty()) {
        std::cerr << "warning: preprocessing removed every interaction\n";
    }

    fs::path dir = out_dir_or_default(a.out, "preprocess");
    fs::create_directories(dir);
    write_canonical_file(ds, (dir / "dataset.csv").string());

    ordered_json stats_j;
    if (!ds.empty()) {
        auto st = dataset_stats(ds);
        stats_j = dataset_stats_json(st);
        std::cout << "interactions " << st.interactions << "\nusers        " << st.users
                  << "\nitems        " << st.items << "\navg_len      " << st.avg_len
                  << "\ndensity_pct  " << st.density_pct << "\ndays         " << st.days << "\n";
    } else {
        stats_j = {{"interactions", 0}, {"users", 0}, {"items", 0}};
    }
    stats_j["skipped_rows"] = raw.skipped_rows();
    stats_j["removed_dedup"] = prep.removed_dedup;
    stats_j["removed_pcore"] = prep.removed_pcore;
    stats_j["removed_sampling"] = prep.removed_sampling;
    stats_j["checksum"] = to_hex(ds.checksum());
    write_json_file(dir / "stats.json", stats_j);

    // sidecar mapping: dense index -> original id, in first-appearance order
    ordered_json map_j;
    ordered_json users_arr = ordered_json::array(), items_arr = ordered_json::array();
    for (std::uint32_t u = 0; u < ds.users().size(); u++) users_arr.push_back(ds.users().name(u));
    for (std::uint32_t i = 0; i < ds.items().size(); i++) items_arr.push_back(ds.items().name(i));
    map_j["users"] = std::move(users_arr);
    map_j["items"] = std::move(items_arr);
    write_json_file(dir / "id_map.json", map_j);

    persist_run_config(dir, "preprocess",
                       {{"input", a.input},
                        {"delimiter", a.delimiter},
                        {"header", a.header},
                        {"user_col", a.user_col},
                        {"item_col", a.item_col},
                        {"time_col", a.time_col},
                        {"time_format", a.time_format},
                        {"strict", a.strict},
                        {"p_core", a.p_core},
                        {"dedup", !a.no_dedup},
                        {"sample_users", a.sample_users_n},
                        {"seed", a.seed}});
    if (raw.skipped_rows() > 0)
        std::cerr << "skipped " << raw.skipped_rows() << " malformed row(s)\n";
    return 0;
}

// ---- split -----------------------------------------------------------------

struct SplitArgs {
    std::string input;
    std::string out;
    std::string strategy = "gts";
    double quantile = 0.9;
    std::int64_t t_test = 0;
    bool t_test_set = false;
    std::string target = "last";
    std::string validation;
    double val_quantile = 0.9;
    std::string val_target = "last";
    std::uint64_t ub_users = 1024;
    std::uint64_t min_seq_len = 2;
    std::uint64_t seed = 0;
    std::vector<double> sweep;  // extra GTS quantiles to tabulate
};

int cmd_split(const SplitArgs& a) {
    SplitSpec spec;
    spec.strategy = strategy_from_string(a.strategy);
    if (spec.strategy == Strategy::gts) {
        if (a.t_test_set)
            spec.t_test = a.t_test;
        else
            spec.test_quantile = a.quantile;
        spec.validation = a.validation.empty() ? Validation::gt
                                               : validation_from_string(a.validation);
    } else {
        spec.validation = a.validation.empty() ? Validation::implied
                                               : validation_from_string(a.validation);
    }
    spec.target = target_from_string(a.target);
    spec.val_quantile = a.val_quantile;
    spec.val_target = target_from_string(a.val_target);
    spec.ub_user_count = a.ub_users;
    spec.min_seq_len = a.min_seq_len;
    spec.seed = a.seed;

    auto ds = read_canonical_file(a.input);
    auto split = make_split(ds, spec);

    fs::path dir = out_dir_or_default(a.out, "split");
    write_manifest(split, ds.users(), ds.items(), dir.string());

    auto st = split_stats(split, ds);
    ordered_json stats_j = split_stats_json(st);
    stats_j["t_test"] = split.t_test ? ordered_json(*split.t_test) : ordered_json(nullptr);
    stats_j["t_val"] = split.t_val ? ordered_json(*split.t_val) : ordered_json(nullptr);
    stats_j["dataset_checksum"] = to_hex(split.dataset_checksum);
    write_json_file(dir / "split_stats.json", stats_j);

    if (!a.sweep.empty()) {
        if (spec.strategy != Strategy::gts)
            throw ConfigError("--sweep applies to GTS splits only");
        auto rows = quantile_sweep(ds, a.sweep, spec.target, spec.seed);
        write_json_file(dir / "sweep.json", sweep_json(rows));
        std::ofstream csv(dir / "sweep.csv", std::ios::binary);
        if (!csv) throw DataError("cannot open sweep.csv");
        csv << "quantile,flagged,holdout_len,users,users_pct,days,train_events\n";
        for (const auto& row : rows) {
            csv << row.quantile << ',' << (row.flagged ? 1 : 0) << ',';
            if (row.flagged)
                csv << ",,,,\n";
            else
                csv << row.stats.test.holdout_len << ',' << row.stats.test.users << ','
                    << row.stats.test.users_pct << ',' << row.stats.test.days << ','
                    << row.stats.train_events << "\n";
        }
    }

    persist_run_config(dir, "split",
                       {{"input", a.input},
                        {"sweep", a.sweep},
                        {"spec", spec_to_json(spec)}});

    std::cout << "test_users    " << st.test.users << "\ntest_instances " << st.test.instances
              << "\nusers_pct     " << st.test.users_pct << "\nholdout_len   "
              << st.test.holdout_len << "\ndays          " << st.test.days << "\ntrain_events  "
              << st.train_events << "\n";
    return 0;
}

// ---- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
    std::string manifest;
    std::string out;
    std::string rankings;
    std::string model;
    std::string load_model;
    std::string role = "test";
    std::vector<std::size_t> ks{5, 10, 20, 50, 100};
    std::vector<std::string> metrics{"hr", "mrr", "ndcg"};
    std::string averaging = "user";
    bool filter_seen = false;
    bool exclude_cold = false;
    unsigned threads = 1;
    std::size_t knn_neighbors = 100;
    std::uint64_t markov_min_count = 1;
    double pop_window = 1.0;
    bool refit = false;
    std::string emit_rankings;
    std::string save_model;
    bool no_per_instance = false;
    std::string label_model, label_config, label_split, label_dataset;
};

int cmd_evaluate(const EvaluateArgs& a) {
    int sources = (!a.rankings.empty()) + (!a.model.empty()) + (!a.load_model.empty());
    if (sources != 1)
        throw ConfigError("exactly one of --rankings, --model or --load-model is required");

    auto loaded = read_manifest(a.manifest);
    const auto& split = loaded.split;
    const std::vector<EvalInstance>* instances = nullptr;
    if (a.role == "test")
        instances = &split.test_instances;
    else if (a.role == "valid")
        instances = &split.validation_instances;
    else
        throw ConfigError("--role must be test or valid");
    if (instances->empty()) throw DataError("manifest has no " + a.role + " instances");

    EvalConfig cfg;
    cfg.ks = a.ks;
    if (cfg.ks.empty()) throw ConfigError("--ks must not be empty");
    cfg.metrics.clear();
    for (const auto& m : a.metrics) cfg.metrics.push_back(metric_from_string(m));
    cfg.averaging = averaging_from_string(a.averaging);
    cfg.filter_seen = a.filter_seen;
    cfg.exclude_cold = a.exclude_cold;
    cfg.threads = a.threads;

    const auto& fit_sequences = a.refit ? split.train_plus_valid : split.train;
    cfg.catalog.assign(loaded.items->size(), false);
    for (const auto& s : fit_sequences)
        for (const auto& e : s.events) cfg.catalog[e.item] = true;

    cfg.labels.model = a.label_model;
    cfg.labels.config = a.label_config;
    cfg.labels.split = a.label_split;
    cfg.labels.dataset = a.label_dataset;
    if (cfg.labels.split.empty()) {
        cfg.labels.split = std::string(to_string(split.spec.strategy)) + "-" +
                           to_string(split.spec.target);
        if (a.role == "valid")
            cfg.labels.split += std::string("-valid-") + to_string(split.spec.validation);
    }

    std::vector<RankedList> rankings;
    if (!a.model.empty() || !a.load_model.empty()) {
        BaselineModel model;
        if (!a.load_model.empty()) {
            model = load_model(a.load_model, *loaded.items);
        } else {
            ModelKind kind = model_kind_from_string(a.model);
            ModelParams params;
            params.knn_neighbors = a.knn_neighbors;
            params.markov_min_count = a.markov_min_count;
            params.pop_window = a.pop_window;
            if (fit_sequences.empty()) throw DataError("manifest has no training sequences");
            model = fit(kind, fit_sequences, loaded.items->size(), params);
        }
        std::size_t depth = *std::max_element(cfg.ks.begin(), cfg.ks.end());
        rankings = recommend_batch(model, *instances, depth, cfg.filter_seen);
        if (!a.save_model.empty()) save_model(model, *loaded.items, a.save_model);
        if (cfg.labels.model.empty()) cfg.labels.model = to_string(model.kind);
        if (cfg.labels.config.empty()) {
            switch (model.kind) {
                case ModelKind::pop:
                    cfg.labels.config = "pop_window=" + std::to_string(model.params.pop_window);
                    break;
                case ModelKind::markov:
                    cfg.labels.config =
                        "markov_min_count=" + std::to_string(model.params.markov_min_count);
                    break;
                case ModelKind::knn:
                    cfg.labels.config =
                        "knn_neighbors=" + std::to_string(model.params.knn_neighbors);
                    break;
            }
        }
    } else {
        rankings = read_rankings_file(a.rankings, *loaded.items);
        if (cfg.labels.model.empty()) cfg.labels.model = "external";
    }

    auto report = evaluate_run(*instances, rankings, cfg);
    report.provenance_checksum = split.dataset_checksum;
    if (report.empty_rankings > 0)
        std::cerr << "warning: " << report.empty_rankings
                  << " instance(s) scored against an empty ranked list\n";

    fs::path dir = out_dir_or_default(a.out, "evaluate");
    fs::create_directories(dir);
    if (!a.emit_rankings.empty()) write_rankings_file(rankings, *loaded.items, a.emit_rankings);
    write_json_file(dir / "report.json", metric_report_json(report, *loaded.users,
                                                            !a.no_per_instance));

    ordered_json opts{{"manifest", a.manifest},
                      {"role", a.role},
                      {"rankings", a.rankings},
                      {"model", a.model},
                      {"ks", a.ks},
                      {"metrics", a.metrics},
                      {"averaging", a.averaging},
                      {"filter_seen", a.filter_seen},
                      {"exclude_cold", a.exclude_cold},
                      {"refit", a.refit},
                      {"knn_neighbors", a.knn_neighbors},
                      {"markov_min_count", a.markov_min_count},
                      {"pop_window", a.pop_window}};
    persist_run_config(dir, "evaluate", std::move(opts));

    for (std::size_t m = 0; m < report.metrics.size(); m++)
        for (std::size_t ki = 0; ki < report.ks.size(); ki++)
            std::cout << metric_key(report.metrics[m], report.ks[ki]) << " "
                      << report.global[m * report.ks.size() + ki] << "\n";
    return 0;
}

// ---- correlate ----------------------------------------------------------------

struct CorrelateArgs {
    std::vector<std::string> reports_a;
    std::vector<std::string> reports_b;
    std::vector<std::string> mean_inputs;
    std::string metric = "ndcg";
    std::size_t k = 10;
    std::string out;
    std::string label_a = "A";
    std::string label_b = "B";
    std::string dataset;
};

int cmd_correlate(const CorrelateArgs& a) {
    fs::path dir = out_dir_or_default(a.out, "correlate");
    fs::create_directories(dir);

    if (!a.mean_inputs.empty()) {
        // group per (comparison, metric, k) and average across datasets
        std::map<std::string, std::pair<ordered_json, std::vector<CorrelationResult>>> groups;
        for (const auto& path : a.mean_inputs) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw DataError("cannot open correlation file: " + path);
            ordered_json j = ordered_json::parse(in);
            CorrelationResult r;
            r.kendall_tau = j.at("kendall_tau").get<double>();
            r.spearman_rho = j.at("spearman_rho").get<double>();
            r.n = j.value("n", std::uint64_t{0});
            std::string key = j.at("metric_key").get<std::string>() + "|" +
                              j.at("comparison").at("a").get<std::string>() + "|" +
                              j.at("comparison").at("b").get<std::string>();
            auto& g = groups[key];
            if (g.second.empty()) {
                g.first = {{"metric_key", j.at("metric_key")}, {"comparison", j.at("comparison")}};
            }
            g.second.push_back(r);
        }
        ordered_json rows = ordered_json::array();
        for (auto& [key, g] : groups) {
            auto mean = mean_correlation(g.second);
            ordered_json row = g.first;
            row["kendall_mean"] = mean.kendall_tau;
            row["spearman_mean"] = mean.spearman_rho;
            row["n_datasets"] = mean.n;
            rows.push_back(std::move(row));
        }
        write_json_file(dir / "mean_correlation.json", rows);
        persist_run_config(dir, "correlate", {{"mean_inputs", a.mean_inputs}});
        return 0;
    }

    if (a.reports_a.empty() || a.reports_b.empty())
        throw ConfigError("correlate needs --reports-a and --reports-b (or --mean)");
    const std::string key = a.metric + "@" + std::to_string(a.k);

    std::vector<ReportSummary> sa, sb;
    for (const auto& p : a.reports_a) sa.push_back(read_report_summary(p));
    for (const auto& p : a.reports_b) sb.push_back(read_report_summary(p));
    auto rva = build_run_vector(sa, key, a.label_a);
    auto rvb = build_run_vector(sb, key, a.label_b);

    std::vector<ScatterPair> scatter;
    auto corr = correlate_runs(rva, rvb, &scatter);

    ordered_json j;
    j["comparison"] = {{"a", a.label_a}, {"b", a.label_b}};
    j["metric"] = a.metric;
    j["k"] = a.k;
    j["metric_key"] = key;
    j["dataset"] = a.dataset;
    j["kendall_tau"] = corr.kendall_tau;
    j["spearman_rho"] = corr.spearman_rho;
    j["n"] = corr.n;
    write_json_file(dir / "correlation.json", j);

    std::ofstream csv(dir / "scatter.csv", std::ios::binary);
    if (!csv) throw DataError("cannot open scatter.csv");
    csv << "config_id," << a.label_a << "," << a.label_b << "\n";
    for (const auto& p : scatter) csv << p.config_id << "," << p.a << "," << p.b << "\n";

    persist_run_config(dir, "correlate",
                       {{"reports_a", a.reports_a},
                        {"reports_b", a.reports_b},
                        {"metric", a.metric},
                        {"k", a.k},
                        {"label_a", a.label_a},
                        {"label_b", a.label_b},
                        {"dataset", a.dataset}});
    std::cout << "kendall_tau  " << corr.kendall_tau << "\nspearman_rho " << corr.spearman_rho
              << "\nn            " << corr.n << "\n";
    return 0;
}

// ---- rank ----------------------------------------------------------------

struct RankArgs {
    std::vector<std::string> reports;
    std::string metric = "ndcg";
    std::size_t k = 10;
    std::string out;
};

int cmd_rank(const RankArgs& a) {
    if (a.reports.empty()) throw ConfigError("rank needs --reports");
    const std::string key = a.metric + "@" + std::to_string(a.k);
    std::vector<RunPoint> points;
    for (const auto& path : a.reports) {
        auto s = read_report_summary(path);
        auto it = s.global.find(key);
        if (it == s.global.end()) throw DataError("report lacks metric " + key + ": " + path);
        points.push_back(RunPoint{s.labels.split, s.labels.model, s.labels.config, it->second});
    }
    auto table = model_ranking(points);

    ordered_json j;
    j["metric_key"] = key;
    j["splits"] = table.splits;
    ordered_json by_split;
    for (const auto& split : table.splits) {
        ordered_json rows = ordered_json::array();
        for (const auto& e : table.by_split.at(split)) {
            rows.push_back({{"model", e.model},
                            {"best_value", e.best_value},
                            {"rank", e.rank},
                            {"tied", e.tied}});
        }
        by_split[split] = std::move(rows);
    }
    j["by_split"] = std::move(by_split);
    ordered_json ranks;
    for (const auto& [model, per_split] : table.ranks) {
        ordered_json row;
        for (const auto& [split, rank] : per_split) row[split] = rank;
        ranks[model] = std::move(row);
    }
    j["ranks"] = std::move(ranks);

    fs::path dir = out_dir_or_default(a.out, "rank");
    fs::create_directories(dir);
    write_json_file(dir / "ranking.json", j);
    persist_run_config(dir, "rank",
                       {{"reports", a.reports}, {"metric", a.metric}, {"k", a.k}});

    for (const auto& split : table.splits) {
        std::cout << split << ":";
        for (const auto& e : table.by_split.at(split))
            std::cout << " " << e.rank << "." << e.model << (e.tied ? "(tie)" : "");
        std::cout << "\n";
    }
    return 0;
}

// ---- timegaps ----------------------------------------------------------------

struct TimegapsArgs {
    std::string manifest;
    std::string dataset;
    std::string role = "test";
    std::string out;
    bool include_deltas = false;
};

int cmd_timegaps(const TimegapsArgs& a) {
    auto loaded = read_manifest(a.manifest);
    const auto& split = loaded.split;
    const std::vector<EvalInstance>* instances = nullptr;
    if (a.role == "test")
        instances = &split.test_instances;
    else if (a.role == "valid")
        instances = &split.validation_instances;
    else
        throw ConfigError("--role must be test or valid");
    if (instances->empty()) throw DataError("manifest has no " + a.role + " instances");

    std::vector<UserSequence> sequences;
    bool have_full = !a.dataset.empty();
    if (have_full) {
        auto ds = read_canonical_file(a.dataset);
        if (!provenance_matches(split, ds))
            std::cerr << "warning: dataset checksum does not match manifest provenance\n";
        sequences = to_user_sequences(ds);
    }
    auto rep = target_time_gaps(*instances, sequences, have_full);

    ordered_json j = gap_report_json(rep);
    j["role"] = a.role;
    if (a.include_deltas) j["deltas"] = rep.per_target_deltas;

    fs::path dir = out_dir_or_default(a.out, "timegaps");
    fs::create_directories(dir);
    write_json_file(dir / "timegaps.json", j);
    persist_run_config(dir, "timegaps",
                       {{"manifest", a.manifest},
                        {"dataset", a.dataset},
                        {"role", a.role},
                        {"include_deltas", a.include_deltas}});
    std::cout << "median_delta " << rep.median_delta << "\n";
    if (rep.full_data_median) std::cout << "full_data_median " << *rep.full_data_median << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"splitrec: temporal splitting and next-item evaluation for interaction logs"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a config file (flags override)");

    PreprocessArgs pa;
    auto* pre = app.add_subcommand("preprocess", "normalize a raw log into the canonical format");
    pre->add_option("--input", pa.input, "raw event log")->required();
    pre->add_option("--out", pa.out, "output directory");
    pre->add_option("--delimiter", pa.delimiter, "field delimiter (default ,)");
    pre->add_flag("--header", pa.header, "first row is a header");
    pre->add_option("--user-col", pa.user_col, "user column (position or name)");
    pre->add_option("--item-col", pa.item_col, "item column (position or name)");
    pre->add_option("--time-col", pa.time_col, "time column (position or name)");
    pre->add_option("--time-format", pa.time_format, "auto|epoch|iso8601");
    pre->add_flag("--strict", pa.strict, "malformed rows are fatal");
    pre->add_option("--p-core", pa.p_core, "p-core threshold (0 disables)");
    pre->add_flag("--no-dedup", pa.no_dedup, "skip consecutive-duplicate removal");
    pre->add_option("--sample-users", pa.sample_users_n, "keep a random user subset");
    pre->add_option("--seed", pa.seed, "random seed");

    SplitArgs sa;
    auto* spl = app.add_subcommand("split", "build train/validation/test partitions");
    spl->add_option("--input", sa.input, "canonical dataset file")->required();
    spl->add_option("--out", sa.out, "output directory");
    spl->add_option("--strategy", sa.strategy, "loo|gts");
    spl->add_option("--quantile", sa.quantile, "GTS interaction quantile");
    auto* topt = spl->add_option("--t-test", sa.t_test, "explicit GTS cutoff timestamp");
    spl->add_option("--target", sa.target, "last|first|random|successive|all");
    spl->add_option("--validation", sa.validation, "gt|lti|ub|none (GTS) or implied (LOO)");
    spl->add_option("--val-quantile", sa.val_quantile, "GT validation quantile over train side");
    spl->add_option("--val-target", sa.val_target, "validation target option");
    spl->add_option("--ub-users", sa.ub_users, "users reserved by UB validation");
    spl->add_option("--min-seq-len", sa.min_seq_len, "minimum sequence length kept");
    spl->add_option("--seed", sa.seed, "random seed");
    spl->add_option("--sweep", sa.sweep, "also tabulate these GTS quantiles (ascending)")
        ->delimiter(',');

    EvaluateArgs ea;
    auto* ev = app.add_subcommand("evaluate", "score rankings or a builtin baseline");
    ev->add_option("--manifest", ea.manifest, "split directory")->required();
    ev->add_option("--out", ea.out, "output directory");
    ev->add_option("--rankings", ea.rankings, "externally produced rankings file");
    ev->add_option("--model", ea.model, "builtin baseline: pop|markov|knn");
    ev->add_option("--load-model", ea.load_model, "score with a previously saved model");
    ev->add_option("--role", ea.role, "test|valid");
    ev->add_option("--ks", ea.ks, "cutoff list")->delimiter(',');
    ev->add_option("--metrics", ea.metrics, "hr,mrr,ndcg subset")->delimiter(',');
    ev->add_option("--averaging", ea.averaging, "user|flat");
    ev->add_flag("--filter-seen", ea.filter_seen, "drop already-seen items before scoring");
    ev->add_flag("--exclude-cold", ea.exclude_cold,
                 "exclude instances whose targets are outside the training catalog");
    ev->add_option("--threads", ea.threads, "worker threads (output independent)");
    ev->add_option("--knn-neighbors", ea.knn_neighbors, "kNN neighbor list size");
    ev->add_option("--markov-min-count", ea.markov_min_count, "drop rarer transitions");
    ev->add_option("--pop-window", ea.pop_window, "trailing train-period fraction for pop");
    ev->add_flag("--refit", ea.refit, "fit on train+validation (train_full.csv)");
    ev->add_option("--emit-rankings", ea.emit_rankings, "write the produced rankings here");
    ev->add_option("--save-model", ea.save_model, "persist the fitted model");
    ev->add_flag("--no-per-instance", ea.no_per_instance, "omit per-instance rows from report");
    ev->add_option("--label-model", ea.label_model, "report label");
    ev->add_option("--label-config", ea.label_config, "report label");
    ev->add_option("--label-split", ea.label_split, "report label");
    ev->add_option("--label-dataset", ea.label_dataset, "report label");

    CorrelateArgs ca;
    auto* co = app.add_subcommand("correlate", "rank correlation between two report sets");
    co->add_option("--reports-a", ca.reports_a, "report files, side A")->delimiter(',');
    co->add_option("--reports-b", ca.reports_b, "report files, side B")->delimiter(',');
    co->add_option("--mean", ca.mean_inputs, "correlation files to average across datasets")
        ->delimiter(',');
    co->add_option("--metric", ca.metric, "hr|mrr|ndcg");
    co->add_option("--k", ca.k, "cutoff");
    co->add_option("--out", ca.out, "output directory");
    co->add_option("--label-a", ca.label_a, "name of side A");
    co->add_option("--label-b", ca.label_b, "name of side B");
    co->add_option("--dataset", ca.dataset, "dataset label for mean aggregation");

    RankArgs ra;
    auto* rk = app.add_subcommand("rank", "best-configuration model ranking per split");
    rk->add_option("--reports", ra.reports, "report files")->delimiter(',');
    rk->add_option("--metric", ra.metric, "hr|mrr|ndcg");
    rk->add_option("--k", ra.k, "cutoff");
    rk->add_option("--out", ra.out, "output directory");

    TimegapsArgs ta;
    auto* tg = app.add_subcommand("timegaps", "target time-gap analysis");
    tg->add_option("--manifest", ta.manifest, "split directory")->required();
    tg->add_option("--dataset", ta.dataset, "canonical dataset for the full-data baseline");
    tg->add_option("--role", ta.role, "test|valid");
    tg->add_option("--out", ta.out, "output directory");
    tg->add_flag("--include-deltas", ta.include_deltas, "embed raw deltas in the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (pre->parsed()) return cmd_preprocess(pa);
        if (spl->parsed()) {
            sa.t_test_set = topt->count() > 0;
            return cmd_split(sa);
        }
        if (ev->parsed()) return cmd_evaluate(ea);
        if (co->parsed()) return cmd_correlate(ca);
        if (rk->parsed()) return cmd_rank(ra);
        if (tg->parsed()) return cmd_timegaps(ta);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
