#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "splitrec/dataset.hpp"

namespace splitrec {

// A column picked either by 0-based position or, when the file has a header,
// by column name.
struct ColumnRef {
    int position = -1;
    std::string name;
};

enum class TimeFormat { automatic, epoch_seconds, iso8601 };

struct ParseSchema {
    std::string delimiter = ",";
    bool header = false;
    ColumnRef user{0, {}};
    ColumnRef item{1, {}};
    ColumnRef time{2, {}};
    TimeFormat time_format = TimeFormat::automatic;
    bool strict = false;  // malformed row: throw instead of skip-and-count
};

namespace detail {

inline bool parse_int(std::string_view s, std::int64_t& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm);
// avoids timegm and any locale/TZ dependence.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// Accepts YYYY-MM-DD with optional [T| ]HH:MM[:SS], optional fractional
// seconds (truncated) and optional Z or +-HH:MM offset.
inline bool parse_iso8601(std::string_view s, std::int64_t& out) {
    auto num = [&](std::size_t pos, std::size_t len, std::int64_t& v) {
        if (pos + len > s.size()) return false;
        return parse_int(s.substr(pos, len), v);
    };
    std::int64_t y, mo, d;
    if (!num(0, 4, y) || s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
    if (!num(5, 2, mo) || !num(8, 2, d)) return false;
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return false;

    std::int64_t h = 0, mi = 0, sec = 0, off = 0;
    std::size_t pos = 10;
    if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
        pos++;
        if (!num(pos, 2, h) || pos + 2 >= s.size() || s[pos + 2] != ':') return false;
        if (!num(pos + 3, 2, mi)) return false;
        pos += 5;
        if (pos < s.size() && s[pos] == ':') {
            if (!num(pos + 1, 2, sec)) return false;
            pos += 3;
        }
        if (pos < s.size() && s[pos] == '.') {
            pos++;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') pos++;
        }
        if (h > 23 || mi > 59 || sec > 60) return false;
    }
    if (pos < s.size()) {
        if (s[pos] == 'Z' && pos + 1 == s.size()) {
            pos++;
        } else if (s[pos] == '+' || s[pos] == '-') {
            std::int64_t oh, om;
            if (!num(pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' || !num(pos + 4, 2, om))
                return false;
            off = (oh * 3600 + om * 60) * (s[pos] == '+' ? 1 : -1);
            pos += 6;
        }
        if (pos != s.size()) return false;
    }
    out = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
          h * 3600 + mi * 60 + sec - off;
    return true;
}

inline bool parse_time(std::string_view s, TimeFormat fmt, std::int64_t& out) {
    switch (fmt) {
        case TimeFormat::epoch_seconds:
            return parse_int(s, out);
        case TimeFormat::iso8601:
            return parse_iso8601(s, out);
        case TimeFormat::automatic:
            return parse_int(s, out) || parse_iso8601(s, out);
    }
    return false;
}

// Splits `line` on `delim` into `fields` without allocating.
inline void split_fields(std::string_view line, std::string_view delim,
                         std::vector<std::string_view>& fields) {
    fields.clear();
    std::size_t pos = 0;
    while (true) {
        std::size_t next = line.find(delim, pos);
        if (next == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            return;
        }
        fields.push_back(line.substr(pos, next - pos));
        pos = next + delim.size();
    }
}

inline int resolve_column(const ColumnRef& ref, const std::vector<std::string_view>& header,
                          const char* what) {
    if (!ref.name.empty()) {
        for (std::size_t i = 0; i < header.size(); i++)
            if (header[i] == ref.name) return static_cast<int>(i);
        throw ConfigError(std::string("column '") + ref.name + "' for " + what + " not in header");
    }
    if (ref.position < 0) throw ConfigError(std::string("no column given for ") + what);
    return ref.position;
}

}  // namespace detail

// Reads a delimited event log into a Dataset. One Interaction per accepted
// row, ingest = accepted-row order. Malformed rows (missing fields,
// unparseable or negative time) are skipped and counted, or fatal in strict
// mode. Zero accepted rows is always fatal.
inline Dataset parse_event_log(std::istream& in, const ParseSchema& schema) {
    if (!in) throw DataError("unreadable input stream");
    if (schema.delimiter.empty()) throw ConfigError("empty delimiter");

    auto users = std::make_shared<Vocab>();
    auto items = std::make_shared<Vocab>();
    std::vector<Interaction> events;
    std::vector<std::string_view> fields;
    std::string line;
    std::uint64_t skipped = 0, lineno = 0;

    int ucol = schema.user.position, icol = schema.item.position, tcol = schema.time.position;
    if (schema.header) {
        if (!std::getline(in, line)) throw DataError("zero valid rows");
        lineno++;
        std::string_view hline = line;
        if (!hline.empty() && hline.back() == '\r') hline.remove_suffix(1);
        detail::split_fields(hline, schema.delimiter, fields);
        ucol = detail::resolve_column(schema.user, fields, "user");
        icol = detail::resolve_column(schema.item, fields, "item");
        tcol = detail::resolve_column(schema.time, fields, "time");
    } else {
        if (ucol < 0 || icol < 0 || tcol < 0)
            throw ConfigError("named columns require a header row");
    }
    int max_col = std::max(ucol, std::max(icol, tcol));

    while (std::getline(in, line)) {
        lineno++;
        std::string_view row = line;
        if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
        if (row.empty()) continue;

        detail::split_fields(row, schema.delimiter, fields);
        std::int64_t ts = 0;
        bool ok = static_cast<int>(fields.size()) > max_col;
        if (ok) {
            auto u = fields[static_cast<std::size_t>(ucol)];
            auto i = fields[static_cast<std::size_t>(icol)];
            auto t = fields[static_cast<std::size_t>(tcol)];
            ok = !u.empty() && !i.empty() &&
                 detail::parse_time(t, schema.time_format, ts) && ts >= 0;
            if (ok) {
                events.push_back(Interaction{users->intern(u), items->intern(i), ts,
                                             static_cast<std::uint64_t>(events.size())});
            }
        }
        if (!ok) {
            if (schema.strict)
                throw DataError("malformed row at line " + std::to_string(lineno));
            skipped++;
        }
    }
    if (events.empty()) throw DataError("zero valid rows");
    return Dataset(std::move(events), std::move(users), std::move(items), skipped);
}

inline Dataset parse_event_log_file(const std::string& path, const ParseSchema& schema = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input file: " + path);
    return parse_event_log(in, schema);
}

// Canonical dataset text format: header + comma-separated original ids and
// integer timestamps, rows in ingest order.
inline void write_canonical(const Dataset& ds, std::ostream& out) {
    out << "user_id,item_id,timestamp\n";
    for (const auto& e : ds.events())
        out << ds.users().name(e.user) << ',' << ds.items().name(e.item) << ',' << e.ts << '\n';
    if (!out) throw DataError("write failed for canonical dataset");
}

inline void write_canonical_file(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    write_canonical(ds, out);
}

inline ParseSchema canonical_schema() {
    ParseSchema s;
    s.header = true;
    s.user = {-1, "user_id"};
    s.item = {-1, "item_id"};
    s.time = {-1, "timestamp"};
    s.time_format = TimeFormat::epoch_seconds;
    return s;
}

inline Dataset read_canonical_file(const std::string& path) {
    return parse_event_log_file(path, canonical_schema());
}

}  // namespace splitrec
