#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hivetherm/errors.hpp"

namespace hivetherm {

using TimePoint = std::chrono::time_point<std::chrono::system_clock, std::chrono::seconds>;

constexpr std::chrono::seconds kHour{3600};

inline double missing() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

// Sensor sanity band; readings outside are rejected at ingest.
constexpr double kMinSaneTempC = -50.0;
constexpr double kMaxSaneTempC = 70.0;

namespace detail {

// Civil-calendar <-> day-count conversions (proleptic Gregorian, epoch 1970-01-01).
constexpr std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate { int year; unsigned month; unsigned day; };

constexpr CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : static_cast<unsigned>(-9));
    return {static_cast<int>(y + (m <= 2)), m, d};
}

} // namespace detail

inline TimePoint make_utc(int year, unsigned month, unsigned day,
                          unsigned hour = 0, unsigned minute = 0, unsigned second = 0) {
    const std::int64_t days = detail::days_from_civil(year, month, day);
    return TimePoint(std::chrono::seconds(days * 86400 + hour * 3600 + minute * 60 + second));
}

/// Parses "YYYY-MM-DDTHH:MM[:SS][Z|+HH:MM|-HH:MM|+HHMM|-HHMM]" into a UTC time point.
inline std::optional<TimePoint> parse_iso8601(const std::string& s) {
    auto digit = [&](std::size_t i) -> int {
        if (i >= s.size() || s[i] < '0' || s[i] > '9') return -1;
        return s[i] - '0';
    };
    auto num = [&](std::size_t i, int n) -> long {
        long v = 0;
        for (int k = 0; k < n; ++k) {
            int d = digit(i + k);
            if (d < 0) return -1;
            v = v * 10 + d;
        }
        return v;
    };
    if (s.size() < 16) return std::nullopt;
    long y = num(0, 4), mo = num(5, 2), da = num(8, 2), ho = num(11, 2), mi = num(14, 2);
    if (y < 0 || mo < 1 || mo > 12 || da < 1 || da > 31 || ho > 23 || ho < 0 || mi < 0 || mi > 59)
        return std::nullopt;
    if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':')
        return std::nullopt;
    std::size_t pos = 16;
    long se = 0;
    if (pos < s.size() && s[pos] == ':') {
        se = num(pos + 1, 2);
        if (se < 0 || se > 60) return std::nullopt;
        pos += 3;
    }
    long offset_sec = 0;
    if (pos < s.size()) {
        char c = s[pos];
        if (c == 'Z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            long oh = num(pos + 1, 2);
            long om = 0;
            std::size_t opos = pos + 3;
            if (opos < s.size() && s[opos] == ':') ++opos;
            if (opos + 1 < s.size()) om = num(opos, 2);
            if (om < 0) om = 0;
            if (oh < 0 || oh > 14 || om > 59) return std::nullopt;
            offset_sec = (oh * 3600 + om * 60) * (c == '+' ? 1 : -1);
            pos = s.size();
        } else {
            return std::nullopt;
        }
    }
    if (pos != s.size()) return std::nullopt;
    const std::int64_t days = detail::days_from_civil(static_cast<int>(y),
                                                      static_cast<unsigned>(mo),
                                                      static_cast<unsigned>(da));
    return TimePoint(std::chrono::seconds(days * 86400 + ho * 3600 + mi * 60 + se - offset_sec));
}

inline std::string format_iso8601(TimePoint tp) {
    std::int64_t t = tp.time_since_epoch().count();
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) { rem += 86400; --days; }
    const auto cd = detail::civil_from_days(days);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ",
                  cd.year, cd.month, cd.day,
                  static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem % 3600) / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

/// Hourly-gridded temperature sequence in absolute degrees C.
/// NaN marks a missing observation; the grid step is fixed at one hour.
struct TemperatureSeries {
    TimePoint start_time{};
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }

    bool present(std::size_t i) const { return !is_missing(values[i]); }

    std::optional<double> at(std::size_t i) const {
        if (i >= values.size() || is_missing(values[i])) return std::nullopt;
        return values[i];
    }

    TimePoint time_at(std::size_t i) const {
        return start_time + kHour * static_cast<std::int64_t>(i);
    }

    std::size_t present_count() const {
        std::size_t n = 0;
        for (double v : values)
            if (!is_missing(v)) ++n;
        return n;
    }

    /// First index with a present value, or nullopt.
    std::optional<std::size_t> first_present() const {
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!is_missing(values[i])) return i;
        return std::nullopt;
    }

    std::optional<std::size_t> last_present() const {
        for (std::size_t i = values.size(); i-- > 0;)
            if (!is_missing(values[i])) return i;
        return std::nullopt;
    }

    /// Copy of ticks [start, end) with the start time shifted accordingly.
    TemperatureSeries slice(std::size_t start, std::size_t end) const {
        require(start <= end && end <= values.size(), Err::InvalidArgument,
                "slice out of range");
        TemperatureSeries out;
        out.start_time = time_at(start);
        out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(start),
                          values.begin() + static_cast<std::ptrdiff_t>(end));
        return out;
    }

    /// Enforces the sensor sanity band on present values. Ingest-side check:
    /// relative (deviation) series legitimately fall outside it.
    void check_sensor_range() const {
        for (std::size_t i = 0; i < values.size(); ++i) {
            double v = values[i];
            if (is_missing(v)) continue;
            require(std::isfinite(v) && v >= kMinSaneTempC && v <= kMaxSaneTempC,
                    Err::InvalidArgument,
                    "temperature out of sanity range at tick " + std::to_string(i));
        }
    }
};

enum class HiveType { Control, Treated };

inline const char* to_string(HiveType t) {
    return t == HiveType::Control ? "control" : "treated";
}

inline std::optional<HiveType> parse_hive_type(const std::string& s) {
    if (s == "control" || s == "Control") return HiveType::Control;
    if (s == "treated" || s == "Treated") return HiveType::Treated;
    return std::nullopt;
}

/// Per-segment controller parameters: cooling/heating strength (per-hour
/// rates) and the ideal core temperature all deviations are measured from.
struct HiveParams {
    double s_c = 0.0;
    double s_h = 0.0;
    double theta_ideal = 34.5;

    bool operator==(const HiveParams&) const = default;
};

// Ideal-core search band, degrees C.
constexpr double kThetaIdealMin = 31.0;
constexpr double kThetaIdealMax = 38.0;

enum class SignConvention {
    Stabilized,   // both branches damp: d(theta)/dt = F - (2 + s) * theta
    SignedEffort, // heating effort opposes the damping: d(theta)/dt = F - (2 - s_h) * theta
};

enum class Integrator {
    ExponentialExact, // closed-form update, exact for piecewise-constant forcing
    EulerFine,        // explicit Euler with substeps; cross-check oracle
};

struct ModelConfig {
    double s_inf = 100.0;
    SignConvention sign_convention = SignConvention::Stabilized;
    Integrator integrator = Integrator::ExponentialExact;
    int euler_substeps = 128;   // per hour, EulerFine only
    int gap_reseed_hours = 6;   // forcing outage length that forces a state re-seed

    void validate() const {
        require(s_inf > 50.0, Err::InvalidConfig, "s_inf must exceed 50");
        require(euler_substeps >= 1, Err::InvalidConfig, "euler_substeps must be >= 1");
        require(gap_reseed_hours >= 1, Err::InvalidConfig, "gap_reseed_hours must be >= 1");
    }

    void validate_params(const HiveParams& p) const {
        require(p.s_c >= 0.0 && p.s_c <= s_inf, Err::InvalidArgument, "s_c outside [0, s_inf]");
        require(p.s_h >= 0.0 && p.s_h <= s_inf, Err::InvalidArgument, "s_h outside [0, s_inf]");
        require(p.theta_ideal >= kThetaIdealMin && p.theta_ideal <= kThetaIdealMax,
                Err::InvalidArgument, "theta_ideal outside band");
    }
};

/// Aligned external/peripheral/core series for one hive, plus the day grid.
/// day_boundaries holds the start tick of every day; the first entry is 0.
struct HiveDataset {
    std::string hive_id;
    HiveType hive_type = HiveType::Control;
    TemperatureSeries ext;
    TemperatureSeries peri;
    TemperatureSeries core;
    std::vector<std::size_t> day_boundaries;

    std::size_t size() const { return core.size(); }
    std::size_t num_days() const { return day_boundaries.size(); }

    /// Tick range [start, end) of day d.
    std::pair<std::size_t, std::size_t> day_range(std::size_t d) const {
        require(d < day_boundaries.size(), Err::InvalidArgument, "day index out of range");
        std::size_t start = day_boundaries[d];
        std::size_t end = d + 1 < day_boundaries.size() ? day_boundaries[d + 1] : size();
        return {start, end};
    }

    /// Day index owning a tick (day_boundaries is sorted).
    std::size_t day_of_tick(std::size_t tick) const {
        require(tick < size(), Err::InvalidArgument, "tick out of range");
        std::size_t lo = 0, hi = day_boundaries.size();
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (day_boundaries[mid] <= tick) lo = mid; else hi = mid;
        }
        return lo;
    }

    bool is_day_boundary(std::size_t tick) const {
        if (tick == size()) return true;
        for (std::size_t b : day_boundaries)
            if (b == tick) return true;
        return false;
    }

    void validate() const {
        require(!core.empty(), Err::InvalidArgument, "empty dataset");
        require(ext.size() == core.size() && peri.size() == core.size(),
                Err::MisalignedSensors, "series lengths differ");
        require(ext.start_time == core.start_time && peri.start_time == core.start_time,
                Err::MisalignedSensors, "series start times differ");
        require(!day_boundaries.empty() && day_boundaries.front() == 0,
                Err::InvalidArgument, "day boundaries must begin at 0");
        for (std::size_t i = 1; i < day_boundaries.size(); ++i)
            require(day_boundaries[i] > day_boundaries[i - 1] && day_boundaries[i] < size(),
                    Err::InvalidArgument, "day boundaries must be strictly increasing interior indices");
    }
};

/// Day boundary list for an hourly grid: tick 0 plus every local-midnight tick.
inline std::vector<std::size_t> hourly_day_boundaries(TimePoint start, std::size_t n_ticks,
                                                      int utc_offset_hours = 0) {
    std::vector<std::size_t> out;
    const std::int64_t start_hour = start.time_since_epoch().count() / 3600;
    for (std::size_t i = 0; i < n_ticks; ++i) {
        const std::int64_t h = start_hour + static_cast<std::int64_t>(i) + utc_offset_hours;
        const bool midnight = ((h % 24) + 24) % 24 == 0;
        if (i == 0 || midnight) {
            if (out.empty() || out.back() != i) out.push_back(i);
        }
    }
    return out;
}

} // namespace hivetherm
