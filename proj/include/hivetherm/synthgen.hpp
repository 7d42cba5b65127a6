#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hivetherm/model.hpp"
#include "hivetherm/time_series.hpp"

namespace hivetherm {

/// Daily sinusoid (peak at 14:00) plus hotter days where the amplitude is
/// raised so the daily maximum hits heatwave_peak_c.
struct ExtProfile {
    double mean_c = 30.0;
    double daily_amplitude_c = 8.0;
    std::vector<std::size_t> heatwave_days;
    double heatwave_peak_c = 42.0;
};

struct Regime {
    std::size_t start_day = 0;
    HiveParams params;
};

struct GapSpec {
    std::size_t start_tick = 0;
    std::size_t length = 0;
};

struct ScenarioSpec {
    std::string hive_id = "synth-hive";
    std::size_t num_days = 10;
    HiveType hive_type = HiveType::Control;
    std::vector<Regime> regimes;       // first entry must start at day 0
    ExtProfile ext;
    double noise_sigma = 0.0;          // i.i.d. Gaussian on observed core only
    std::vector<GapSpec> core_gaps;    // masked after noise
    double treated_ice_offset_c = 8.0; // peri = ext - offset on heatwave days
    std::uint64_t seed = 0;
    TimePoint start_time = make_utc(2021, 8, 1);

    void validate(const ModelConfig& config) const {
        require(num_days >= 1, Err::InvalidArgument, "num_days must be >= 1");
        require(!regimes.empty() && regimes.front().start_day == 0, Err::InvalidArgument,
                "regimes must start at day 0");
        for (std::size_t i = 0; i < regimes.size(); ++i) {
            if (i > 0)
                require(regimes[i].start_day > regimes[i - 1].start_day &&
                            regimes[i].start_day < num_days,
                        Err::InvalidArgument, "regime start days must be strictly increasing");
            config.validate_params(regimes[i].params);
        }
        require(noise_sigma >= 0.0, Err::InvalidArgument, "noise_sigma must be >= 0");
        for (const auto& g : core_gaps)
            require(g.start_tick + g.length <= num_days * 24, Err::InvalidArgument,
                    "gap exceeds grid");
    }
};

struct GroundTruth {
    std::vector<Regime> regimes;
    std::vector<std::size_t> cut_days;   // regime switch days (excludes day 0)
    std::vector<double> clean_core;      // noiseless, gapless core trajectory
};

namespace detail {

inline bool contains(const std::vector<std::size_t>& v, std::size_t x) {
    for (std::size_t e : v)
        if (e == x) return true;
    return false;
}

} // namespace detail

/// Generates an aligned dataset whose core follows the model exactly under
/// the given regimes, plus the ground truth for scoring recovery.
inline std::pair<HiveDataset, GroundTruth> generate(const ScenarioSpec& spec,
                                                    const ModelConfig& config) {
    config.validate();
    spec.validate(config);
    const std::size_t n = spec.num_days * 24;

    HiveDataset ds;
    ds.hive_id = spec.hive_id;
    ds.hive_type = spec.hive_type;
    ds.ext.start_time = ds.peri.start_time = ds.core.start_time = spec.start_time;
    ds.ext.values.resize(n);
    ds.peri.values.assign(n, missing());
    ds.core.values.resize(n);
    for (std::size_t d = 0; d < spec.num_days; ++d)
        ds.day_boundaries.push_back(d * 24);

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t day = i / 24;
        const double hour = static_cast<double>(i % 24);
        const bool hot = detail::contains(spec.ext.heatwave_days, day);
        const double amp = hot ? spec.ext.heatwave_peak_c - spec.ext.mean_c
                               : spec.ext.daily_amplitude_c;
        ds.ext.values[i] =
            spec.ext.mean_c + amp * std::sin(2.0 * std::numbers::pi * (hour - 8.0) / 24.0);
        if (spec.hive_type == HiveType::Treated)
            ds.peri.values[i] = ds.ext.values[i] - (hot ? spec.treated_ice_offset_c : 0.0);
    }

    GroundTruth truth;
    truth.regimes = spec.regimes;
    for (std::size_t i = 1; i < spec.regimes.size(); ++i)
        truth.cut_days.push_back(spec.regimes[i].start_day);
    truth.clean_core.resize(n);

    // Exact model trajectory in absolute degrees, continuous across regime
    // switches. Uses the same stepper as reconstruct so noiseless round trips
    // are exact.
    std::size_t regime_idx = 0;
    double state_abs = spec.regimes[0].params.theta_ideal;
    detail::HourlyStepper stepper(spec.regimes[0].params, config);
    double ideal = spec.regimes[0].params.theta_ideal;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t day = i / 24;
        if (regime_idx + 1 < spec.regimes.size() &&
            day >= spec.regimes[regime_idx + 1].start_day) {
            ++regime_idx;
            stepper = detail::HourlyStepper(spec.regimes[regime_idx].params, config);
            ideal = spec.regimes[regime_idx].params.theta_ideal;
        }
        truth.clean_core[i] = state_abs;
        const double adj = spec.hive_type == HiveType::Control ? ds.ext.values[i]
                                                               : ds.peri.values[i];
        const double next_rel =
            stepper.advance(state_abs - ideal, ds.ext.values[i] - ideal, adj - ideal);
        state_abs = ideal + next_rel;
    }

    std::mt19937_64 rng(spec.seed);
    if (spec.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (std::size_t i = 0; i < n; ++i)
            ds.core.values[i] = truth.clean_core[i] + noise(rng);
    } else {
        ds.core.values = truth.clean_core;
    }
    for (const auto& g : spec.core_gaps)
        for (std::size_t i = g.start_tick; i < g.start_tick + g.length; ++i)
            ds.core.values[i] = missing();

    ds.validate();
    return {std::move(ds), std::move(truth)};
}

} // namespace hivetherm
