#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "splitrec/parse.hpp"
#include "splitrec/split.hpp"

namespace splitrec {

using ordered_json = nlohmann::ordered_json;

inline ordered_json spec_to_json(const SplitSpec& spec) {
    ordered_json j;
    j["strategy"] = to_string(spec.strategy);
    if (spec.test_quantile) j["test_quantile"] = *spec.test_quantile;
    if (spec.t_test) j["t_test"] = *spec.t_test;
    j["target"] = to_string(spec.target);
    j["validation"] = to_string(spec.validation);
    j["val_quantile"] = spec.val_quantile;
    j["val_target"] = to_string(spec.val_target);
    j["ub_user_count"] = spec.ub_user_count;
    j["seed"] = spec.seed;
    j["min_seq_len"] = spec.min_seq_len;
    return j;
}

inline SplitSpec spec_from_json(const ordered_json& j) {
    SplitSpec spec;
    spec.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    if (j.contains("test_quantile")) spec.test_quantile = j["test_quantile"].get<double>();
    if (j.contains("t_test")) spec.t_test = j["t_test"].get<Timestamp>();
    spec.target = target_from_string(j.at("target").get<std::string>());
    spec.validation = validation_from_string(j.at("validation").get<std::string>());
    spec.val_quantile = j.value("val_quantile", 0.9);
    spec.val_target = target_from_string(j.value("val_target", "last"));
    spec.ub_user_count = j.value("ub_user_count", std::uint64_t{1024});
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.min_seq_len = j.value("min_seq_len", std::size_t{2});
    return spec;
}

namespace detail {

inline void write_sequences_csv(const std::vector<UserSequence>& seqs, const Vocab& users,
                                const Vocab& items, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    out << "user_id,item_id,timestamp\n";
    for (const auto& s : seqs)
        for (const auto& e : s.events)
            out << users.name(s.user) << ',' << items.name(e.item) << ',' << e.ts << '\n';
    if (!out) throw DataError("write failed: " + path);
}

inline ordered_json counts_to_json(const SplitCounts& c) {
    ordered_json j;
    j["short_sequences_dropped"] = c.short_sequences_dropped;
    j["loo_test_only_users"] = c.loo_test_only_users;
    j["train_users_dropped"] = c.train_users_dropped;
    j["test_users_dropped"] = c.test_users_dropped;
    j["val_users_dropped"] = c.val_users_dropped;
    return j;
}

inline SplitCounts counts_from_json(const ordered_json& j) {
    SplitCounts c;
    c.short_sequences_dropped = j.value("short_sequences_dropped", std::uint64_t{0});
    c.loo_test_only_users = j.value("loo_test_only_users", std::uint64_t{0});
    c.train_users_dropped = j.value("train_users_dropped", std::uint64_t{0});
    c.test_users_dropped = j.value("test_users_dropped", std::uint64_t{0});
    c.val_users_dropped = j.value("val_users_dropped", std::uint64_t{0});
    return c;
}

}  // namespace detail

// On-disk layout under `dir`:
//   manifest.jsonl   provenance header + one JSON record per instance
//   train.csv        final training sequences, canonical text format
//   train_full.csv   train plus validation events (refit input)
// All ids are the original strings.
inline void write_manifest(const SplitResult& split, const Vocab& users, const Vocab& items,
                           const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::string mpath = dir + "/manifest.jsonl";
    std::ofstream out(mpath, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + mpath);

    ordered_json prov;
    prov["type"] = "provenance";
    prov["format"] = "splitrec.manifest";
    prov["version"] = 1;
    prov["dataset_checksum"] = to_hex(split.dataset_checksum);
    if (split.t_test) prov["t_test"] = *split.t_test;
    if (split.t_val) prov["t_val"] = *split.t_val;
    prov["spec"] = spec_to_json(split.spec);
    prov["counts"] = detail::counts_to_json(split.counts);
    out << prov.dump() << '\n';

    auto emit = [&](const EvalInstance& inst, const char* role) {
        ordered_json j;
        j["type"] = "instance";
        j["instance_id"] = inst.instance_id;
        j["role"] = role;
        j["user_id"] = users.name(inst.user);
        ordered_json prefix = ordered_json::array();
        for (ItemId it : inst.prefix) prefix.push_back(items.name(it));
        j["prefix"] = std::move(prefix);
        ordered_json targets = ordered_json::array();
        for (ItemId it : inst.targets) targets.push_back(items.name(it));
        j["targets"] = std::move(targets);
        j["target_timestamps"] = inst.target_ts;
        j["prev_timestamp"] = inst.prev_ts;
        out << j.dump() << '\n';
    };
    for (const auto& inst : split.validation_instances) emit(inst, "valid");
    for (const auto& inst : split.test_instances) emit(inst, "test");
    if (!out) throw DataError("write failed: " + mpath);

    detail::write_sequences_csv(split.train, users, items, dir + "/train.csv");
    detail::write_sequences_csv(split.train_plus_valid, users, items, dir + "/train_full.csv");
}

// A SplitResult re-read from disk, with its own vocabs. The vocabs are
// mutable so externally supplied rankings can intern previously unseen items.
struct LoadedSplit {
    SplitResult split;
    std::shared_ptr<Vocab> users;
    std::shared_ptr<Vocab> items;
};

inline LoadedSplit read_manifest(const std::string& dir) {
    LoadedSplit out;
    out.users = std::make_shared<Vocab>();
    out.items = std::make_shared<Vocab>();

    auto load_csv = [&](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot open manifest part: " + path);
        std::string line;
        if (!std::getline(in, line)) throw DataError("empty manifest part: " + path);
        std::vector<UserSequence> seqs;
        std::int64_t last_user = -1;
        std::uint64_t ingest = 0;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto fields = split_string(line, ",");
            if (fields.size() != 3) throw DataError("malformed row in " + path + ": " + line);
            UserId u = out.users->intern(fields[0]);
            ItemId i = out.items->intern(fields[1]);
            std::int64_t ts = 0;
            if (!detail::parse_int(fields[2], ts))
                throw DataError("malformed timestamp in " + path + ": " + line);
            if (last_user != static_cast<std::int64_t>(u)) {
                seqs.push_back(UserSequence{u, {}});
                last_user = u;
            }
            seqs.back().events.push_back(SeqEvent{i, ts, ingest++});
        }
        return seqs;
    };

    const std::string mpath = dir + "/manifest.jsonl";
    std::ifstream in(mpath, std::ios::binary);
    if (!in) throw DataError("cannot open manifest: " + mpath);
    std::string line;
    bool saw_provenance = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, true);
        const std::string type = j.value("type", "");
        if (type == "provenance") {
            saw_provenance = true;
            out.split.spec = spec_from_json(j.at("spec"));
            out.split.dataset_checksum = std::stoull(j.at("dataset_checksum").get<std::string>(),
                                                     nullptr, 16);
            if (j.contains("t_test")) out.split.t_test = j["t_test"].get<Timestamp>();
            if (j.contains("t_val")) out.split.t_val = j["t_val"].get<Timestamp>();
            if (j.contains("counts")) out.split.counts = detail::counts_from_json(j["counts"]);
        } else if (type == "instance") {
            EvalInstance inst;
            inst.instance_id = j.at("instance_id").get<std::uint64_t>();
            inst.user = out.users->intern(j.at("user_id").get<std::string>());
            for (const auto& s : j.at("prefix"))
                inst.prefix.push_back(out.items->intern(s.get<std::string>()));
            for (const auto& s : j.at("targets"))
                inst.targets.push_back(out.items->intern(s.get<std::string>()));
            inst.target_ts = j.at("target_timestamps").get<std::vector<Timestamp>>();
            inst.prev_ts = j.at("prev_timestamp").get<Timestamp>();
            const std::string role = j.at("role").get<std::string>();
            if (role == "valid")
                out.split.validation_instances.push_back(std::move(inst));
            else if (role == "test")
                out.split.test_instances.push_back(std::move(inst));
            else
                throw DataError("unknown instance role: " + role);
        } else {
            throw DataError("unknown manifest record type: " + type);
        }
    }
    if (!saw_provenance) throw DataError("manifest has no provenance record: " + mpath);
    if (out.split.validation_instances.empty() && out.split.test_instances.empty())
        throw DataError("manifest has no instances: " + mpath);

    out.split.train = load_csv(dir + "/train.csv");
    out.split.train_plus_valid = load_csv(dir + "/train_full.csv");
    return out;
}

// True when the manifest was produced from exactly this dataset.
inline bool provenance_matches(const SplitResult& split, const Dataset& ds) {
    return split.dataset_checksum == ds.checksum();
}

}  // namespace splitrec
