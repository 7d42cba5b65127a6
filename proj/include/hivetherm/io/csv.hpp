#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hivetherm/errors.hpp"
#include "hivetherm/time_series.hpp"

namespace hivetherm::io {

enum class SensorLocation { Core, Peripheral, External };

inline const char* to_string(SensorLocation l) {
    switch (l) {
    case SensorLocation::Core:       return "core";
    case SensorLocation::Peripheral: return "peripheral";
    case SensorLocation::External:   return "external";
    }
    return "?";
}

inline std::optional<SensorLocation> parse_location(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "core") return SensorLocation::Core;
    if (s == "peripheral") return SensorLocation::Peripheral;
    if (s == "external") return SensorLocation::External;
    return std::nullopt;
}

struct SensorCsvRow {
    TimePoint timestamp{};
    std::string hive_id;
    SensorLocation location = SensorLocation::Core;
    std::optional<double> temperature_c; // empty field means no reading
};

inline constexpr const char* kCsvHeader = "timestamp,hive_id,sensor_location,temperature_c";

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace detail

/// Parses one sensor CSV stream. Malformed rows abort with ParseError naming
/// the 1-based line; source_name is used in messages only.
inline std::vector<SensorCsvRow> parse_sensor_csv(std::istream& in,
                                                  const std::string& source_name = "<stream>") {
    std::vector<SensorCsvRow> rows;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    auto bad = [&](const std::string& why) {
        fail(Err::ParseError, source_name + ":" + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (!saw_header) {
            std::string squashed;
            for (char c : t)
                if (c != ' ') squashed += static_cast<char>(std::tolower(c));
            if (squashed != kCsvHeader) bad("expected header '" + std::string(kCsvHeader) + "'");
            saw_header = true;
            continue;
        }
        const auto fields = detail::split_csv(t);
        if (fields.size() != 4) bad("expected 4 comma-separated fields");
        SensorCsvRow row;
        const auto ts = parse_iso8601(detail::trim(fields[0]));
        if (!ts) bad("bad timestamp '" + fields[0] + "'");
        row.timestamp = *ts;
        row.hive_id = detail::trim(fields[1]);
        if (row.hive_id.empty()) bad("empty hive_id");
        const auto loc = parse_location(detail::trim(fields[2]));
        if (!loc) bad("unknown sensor_location '" + fields[2] + "'");
        row.location = *loc;
        const std::string temp = detail::trim(fields[3]);
        if (!temp.empty()) {
            char* end = nullptr;
            const double v = std::strtod(temp.c_str(), &end);
            if (end == temp.c_str() || *end != '\0') bad("bad temperature '" + temp + "'");
            if (!(v >= kMinSaneTempC && v <= kMaxSaneTempC))
                bad("temperature " + temp + " outside the sanity band");
            row.temperature_c = v;
        }
        rows.push_back(std::move(row));
    }
    if (!saw_header) fail(Err::ParseError, source_name + ": empty file (no header)");
    return rows;
}

struct IngestOptions {
    int utc_offset_hours = 0;                    // day boundaries at this local midnight
    std::map<std::string, HiveType> hive_types;  // unlisted hives default to Control
};

/// Groups rows by hive, buckets sub-hourly readings into hourly means, aligns
/// the three sensor streams on one grid and computes day boundaries.
inline std::vector<HiveDataset> ingest_rows(const std::vector<SensorCsvRow>& rows,
                                            const IngestOptions& options = {},
                                            std::vector<std::string>* warnings = nullptr) {
    struct Bucket {
        double sum = 0.0;
        std::size_t count = 0;
    };
    struct HiveAccum {
        std::map<std::int64_t, Bucket> buckets[3]; // by SensorLocation index
        bool has_rows[3] = {false, false, false};
        std::int64_t min_hour = 0, max_hour = 0;
        bool any = false;
        std::set<std::pair<int, std::int64_t>> seen; // (location, epoch seconds)
        std::size_t duplicates = 0;
    };
    std::map<std::string, HiveAccum> hives;
    for (const auto& row : rows) {
        auto& acc = hives[row.hive_id];
        const int loc = static_cast<int>(row.location);
        const std::int64_t sec = row.timestamp.time_since_epoch().count();
        const std::int64_t hour = sec >= 0 ? sec / 3600 : (sec - 3599) / 3600;
        acc.has_rows[loc] = true;
        if (!acc.seen.insert({loc, sec}).second) ++acc.duplicates;
        if (!acc.any) {
            acc.min_hour = acc.max_hour = hour;
            acc.any = true;
        }
        acc.min_hour = std::min(acc.min_hour, hour);
        acc.max_hour = std::max(acc.max_hour, hour);
        if (row.temperature_c) {
            auto& b = acc.buckets[loc][hour];
            b.sum += *row.temperature_c;
            b.count += 1;
        }
    }

    std::vector<HiveDataset> out;
    for (auto& [hive_id, acc] : hives) {
        require(acc.has_rows[static_cast<int>(SensorLocation::Core)] &&
                    acc.has_rows[static_cast<int>(SensorLocation::External)],
                Err::MisalignedSensors,
                "hive '" + hive_id + "' lacks a core or external stream");
        if (acc.duplicates > 0 && warnings)
            warnings->push_back("hive '" + hive_id + "': " + std::to_string(acc.duplicates) +
                                " duplicate timestamp rows were averaged");
        const std::size_t n = static_cast<std::size_t>(acc.max_hour - acc.min_hour + 1);
        HiveDataset ds;
        ds.hive_id = hive_id;
        const auto type_it = options.hive_types.find(hive_id);
        ds.hive_type = type_it != options.hive_types.end() ? type_it->second : HiveType::Control;
        const TimePoint start{std::chrono::seconds(acc.min_hour * 3600)};
        for (TemperatureSeries* s : {&ds.ext, &ds.peri, &ds.core}) {
            s->start_time = start;
            s->values.assign(n, missing());
        }
        auto fill = [&](SensorLocation loc, TemperatureSeries& series) {
            for (const auto& [hour, b] : acc.buckets[static_cast<int>(loc)])
                if (b.count > 0)
                    series.values[static_cast<std::size_t>(hour - acc.min_hour)] =
                        b.sum / static_cast<double>(b.count);
        };
        fill(SensorLocation::External, ds.ext);
        fill(SensorLocation::Peripheral, ds.peri);
        fill(SensorLocation::Core, ds.core);
        ds.day_boundaries = hourly_day_boundaries(start, n, options.utc_offset_hours);
        for (const TemperatureSeries* s : {&ds.ext, &ds.peri, &ds.core})
            s->check_sensor_range();
        ds.validate();
        out.push_back(std::move(ds));
    }
    return out;
}

inline std::vector<HiveDataset> ingest(const std::vector<std::string>& paths,
                                       const IngestOptions& options = {},
                                       std::vector<std::string>* warnings = nullptr) {
    std::vector<SensorCsvRow> rows;
    for (const auto& path : paths) {
        std::ifstream in(path);
        require(in.good(), Err::ParseError, "cannot open '" + path + "'");
        auto r = parse_sensor_csv(in, path);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return ingest_rows(rows, options, warnings);
}

inline std::string format_temp(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Canonical hourly dump: one row per tick and location, empty temperature
/// for missing values. Re-ingesting reproduces the dataset exactly.
inline void write_dataset_csv(const HiveDataset& ds, std::ostream& out) {
    out << kCsvHeader << "\n";
    const auto emit = [&](const TemperatureSeries& s, SensorLocation loc) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << format_iso8601(s.time_at(i)) << ',' << ds.hive_id << ',' << to_string(loc)
                << ',';
            if (!is_missing(s.values[i])) out << format_temp(s.values[i]);
            out << "\n";
        }
    };
    emit(ds.ext, SensorLocation::External);
    emit(ds.peri, SensorLocation::Peripheral);
    emit(ds.core, SensorLocation::Core);
}

inline void write_dataset_csv(const HiveDataset& ds, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), Err::ParseError, "cannot write '" + path + "'");
    write_dataset_csv(ds, out);
}

} // namespace hivetherm::io
