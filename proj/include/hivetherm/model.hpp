#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hivetherm/errors.hpp"
#include "hivetherm/time_series.hpp"

namespace hivetherm {

// Reconstruction results above this magnitude (relative degrees) abort the
// integration; only the SignedEffort heating branch can grow this far.
constexpr double kOverflowLimitC = 1e6;

/// Subtracts theta_ideal from every present value; missing ticks stay missing.
inline TemperatureSeries relative(const TemperatureSeries& series, double theta_ideal) {
    require(std::isfinite(theta_ideal), Err::InvalidArgument, "theta_ideal must be finite");
    TemperatureSeries out = series;
    for (double& v : out.values)
        if (!is_missing(v)) v -= theta_ideal;
    return out;
}

/// Second-surface forcing series: external for control hives, peripheral for
/// treated ones. Missing peripheral ticks of a treated hive fall back to the
/// external reading so integration can proceed.
inline TemperatureSeries adjunct_series(const HiveDataset& dataset) {
    if (dataset.hive_type == HiveType::Control) return dataset.ext;
    require(dataset.peri.present_count() > 0, Err::TreatedPeriFullyMissing,
            "treated hive '" + dataset.hive_id + "' has no peripheral data");
    TemperatureSeries out = dataset.peri;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (is_missing(out.values[i])) out.values[i] = dataset.ext.values[i];
    return out;
}

namespace detail {

inline double controller_rate(double theta_ext, const HiveParams& p, const ModelConfig& cfg) {
    if (theta_ext >= 0.0) return 2.0 + p.s_c;
    return cfg.sign_convention == SignConvention::Stabilized ? 2.0 + p.s_h : 2.0 - p.s_h;
}

inline double advance_exact(double theta, double forcing, double k, double dt) {
    if (std::abs(k) < 1e-12) return theta + forcing * dt;
    const double decay = std::exp(-k * dt);
    return theta * decay + forcing * ((1.0 - decay) / k);
}

inline double advance_euler(double theta, double forcing, double k, double dt, int substeps) {
    const double h = dt / substeps;
    for (int j = 0; j < substeps; ++j)
        theta += h * (forcing - k * theta);
    return theta;
}

inline void check_overflow(double theta) {
    require(std::abs(theta) <= kOverflowLimitC, Err::NumericalOverflow,
            "integration diverged (SignedEffort heating branch is unstable)");
}

/// Precomputed one-hour update for fixed params. theta' = theta*decay + F*gain
/// with the branch picked by the sign of theta_ext. Euler mode keeps the
/// literal substep loop so it stays an independent cross-check.
class HourlyStepper {
public:
    HourlyStepper(const HiveParams& p, const ModelConfig& cfg) : params_(p), config_(cfg) {
        const double kc = 2.0 + p.s_c;
        const double kh = cfg.sign_convention == SignConvention::Stabilized ? 2.0 + p.s_h
                                                                            : 2.0 - p.s_h;
        exact_ = cfg.integrator == Integrator::ExponentialExact;
        kc_ = kc;
        kh_ = kh;
        if (exact_) {
            decay_c_ = std::exp(-kc);
            gain_c_ = (1.0 - decay_c_) / kc; // kc >= 2, never zero
            if (std::abs(kh) < 1e-12) {
                decay_h_ = 1.0;
                gain_h_ = 1.0;
            } else {
                decay_h_ = std::exp(-kh);
                gain_h_ = (1.0 - decay_h_) / kh;
            }
        }
    }

    double advance(double theta, double theta_ext, double theta_adj) const {
        const double forcing = theta_ext + theta_adj;
        double next;
        if (exact_) {
            if (theta_ext >= 0.0)
                next = theta * decay_c_ + forcing * gain_c_;
            else
                next = theta * decay_h_ + forcing * gain_h_;
        } else {
            const double k = theta_ext >= 0.0 ? kc_ : kh_;
            next = advance_euler(theta, forcing, k, 1.0, config_.euler_substeps);
        }
        check_overflow(next);
        return next;
    }

private:
    HiveParams params_;
    ModelConfig config_;
    bool exact_ = true;
    double kc_ = 2.0, kh_ = 2.0;
    double decay_c_ = 0.0, gain_c_ = 0.0, decay_h_ = 0.0, gain_h_ = 0.0;
};

/// Raw views of one dataset's absolute-degree series (adj already resolved).
struct SeriesFrame {
    std::span<const double> ext;
    std::span<const double> adj;
    std::span<const double> core;
};

inline SeriesFrame make_frame(const HiveDataset& ds, const TemperatureSeries& adj) {
    return {std::span<const double>(ds.ext.values),
            std::span<const double>(adj.values),
            std::span<const double>(ds.core.values)};
}

/// Walks model state across [start, end) under the seeding and gap policy and
/// reports the absolute reconstruction value (or missing) for every tick.
///
/// State seeds at the first present core observation, holds frozen through
/// short forcing outages, and is dropped after `gap_reseed_hours` consecutive
/// missing-forcing ticks (the next core observation re-seeds it). Ticks
/// without a defined state yield missing.
template <class Sink>
void integrate_segment(const SeriesFrame& f, std::size_t start, std::size_t end,
                       const HiveParams& params, const ModelConfig& config, Sink&& sink) {
    const HourlyStepper stepper(params, config);
    const double ideal = params.theta_ideal;
    std::optional<double> state; // relative theta, valid at the tick it was computed for
    bool live = false;           // state corresponds to the current tick
    int gap = 0;

    for (std::size_t i = start; i < end; ++i) {
        if (state && live) {
            sink(i, ideal + *state);
        } else if (!state && !is_missing(f.core[i])) {
            state = f.core[i] - ideal;
            live = true;
            gap = 0;
            sink(i, ideal + *state);
        } else {
            sink(i, missing());
        }
        if (!state || i + 1 >= end) continue;

        const double e = f.ext[i];
        const double a = f.adj[i];
        if (!is_missing(e) && !is_missing(a)) {
            state = stepper.advance(*state, e - ideal, a - ideal);
            live = true;
            gap = 0;
        } else {
            ++gap;
            live = false;
            if (gap >= config.gap_reseed_hours) {
                state.reset();
                gap = 0;
            }
        }
    }
}

inline bool segment_has_core(const SeriesFrame& f, std::size_t start, std::size_t end) {
    for (std::size_t i = start; i < end; ++i)
        if (!is_missing(f.core[i])) return true;
    return false;
}

} // namespace detail

/// One integration step of the split controller over dt hours under
/// piecewise-constant forcing. All temperatures are relative to theta_ideal.
inline double step(double theta, double theta_ext, double theta_adj,
                   const HiveParams& params, const ModelConfig& config, double dt_hours) {
    require(dt_hours > 0.0, Err::InvalidArgument, "dt must be positive");
    const double forcing = theta_ext + theta_adj;
    const double k = detail::controller_rate(theta_ext, params, config);
    double next;
    if (config.integrator == Integrator::ExponentialExact)
        next = detail::advance_exact(theta, forcing, k, dt_hours);
    else
        next = detail::advance_euler(theta, forcing, k, dt_hours, config.euler_substeps);
    detail::check_overflow(next);
    return next;
}

struct SegmentSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - start; }
    bool operator==(const SegmentSpan&) const = default;
};

/// Reconstruction of one span written into out (other ticks untouched).
inline void reconstruct_span(const HiveDataset& dataset, SegmentSpan span,
                             const HiveParams& params, const ModelConfig& config,
                             TemperatureSeries& out) {
    require(out.values.size() == dataset.size(), Err::InvalidArgument, "output misaligned");
    const TemperatureSeries adj = adjunct_series(dataset);
    const auto frame = detail::make_frame(dataset, adj);
    detail::integrate_segment(frame, span.start, span.end, params, config,
                              [&](std::size_t i, double v) { out.values[i] = v; });
}

/// Model reconstruction of the core series on the full grid, one parameter
/// triple per segment. Segments must tile [0, N) on day boundaries.
inline TemperatureSeries reconstruct(const HiveDataset& dataset,
                                     const std::vector<std::pair<SegmentSpan, HiveParams>>& segments,
                                     const ModelConfig& config) {
    config.validate();
    require(!segments.empty(), Err::InvalidArgument, "no segments given");
    std::size_t expect = 0;
    for (const auto& [span, params] : segments) {
        require(span.start == expect && span.end > span.start, Err::InvalidArgument,
                "segments must tile the grid without gaps or overlap");
        require(dataset.is_day_boundary(span.start) && dataset.is_day_boundary(span.end),
                Err::InvalidArgument, "segment edges must be day boundaries");
        config.validate_params(params);
        expect = span.end;
    }
    require(expect == dataset.size(), Err::InvalidArgument, "segments must cover the grid");

    const TemperatureSeries adj = adjunct_series(dataset);
    const auto frame = detail::make_frame(dataset, adj);

    TemperatureSeries out;
    out.start_time = dataset.core.start_time;
    out.values.assign(dataset.size(), missing());
    for (const auto& [span, params] : segments) {
        require(detail::segment_has_core(frame, span.start, span.end), Err::EmptySegment,
                "segment [" + std::to_string(span.start) + ", " + std::to_string(span.end) +
                    ") has no core observations");
        detail::integrate_segment(frame, span.start, span.end, params, config,
                                  [&](std::size_t i, double v) { out.values[i] = v; });
    }
    return out;
}

} // namespace hivetherm
