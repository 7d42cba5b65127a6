#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hivetherm/baselines.hpp"
#include "hivetherm/fitting.hpp"
#include "hivetherm/model.hpp"

namespace hivetherm {

struct ForecastRequest {
    SegmentSpan fit_window;                    // whole days; end == forecast origin
    std::size_t horizon = 7 * 24;              // ticks
    TemperatureSeries future_ext;              // length == horizon
    std::optional<TemperatureSeries> future_adj; // treated hives; absent -> ext fallback
};

struct ForecastResult {
    TemperatureSeries forecast;                // absolute degrees over the horizon
    HiveParams params_used;
    bool adjunct_fallback = false;             // treated hive forecast without future_adj
    std::optional<double> rmse;                // set when actuals were supplied
    std::vector<double> per_day_rmse;
};

/// Root mean squared error over ticks where both series are present.
inline double rmse(const TemperatureSeries& actual, const TemperatureSeries& predicted) {
    require(actual.size() == predicted.size(), Err::InvalidArgument,
            "series must be aligned");
    double sse = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (is_missing(actual.values[i]) || is_missing(predicted.values[i])) continue;
        const double d = actual.values[i] - predicted.values[i];
        sse += d * d;
        ++n;
    }
    require(n > 0, Err::NoOverlap, "no tick has both values present");
    return std::sqrt(sse / static_cast<double>(n));
}

/// Fits one parameter triple on the trailing window, seeds the state from the
/// last core observation, and integrates forward over the horizon driven by
/// the supplied external (and optional adjunct) forcing.
inline ForecastResult forecast(const HiveDataset& dataset, const ForecastRequest& request,
                               const SearchSpace& space, const ModelConfig& config,
                               const FitOptions& fit_options = {},
                               const TemperatureSeries* actuals = nullptr) {
    require(request.fit_window.end <= dataset.size() &&
                request.fit_window.end > request.fit_window.start,
            Err::InvalidArgument, "bad fit window");
    require(request.future_ext.size() == request.horizon, Err::InvalidArgument,
            "future_ext length must equal the horizon");

    const Fitter fitter(dataset, space, config, fit_options);
    const FitResult fit = fitter.fit(request.fit_window);
    const double ideal = fit.params.theta_ideal;

    ForecastResult out;
    out.params_used = fit.params;

    // bring the state from the last core observation to the forecast origin
    // using observed forcing
    std::optional<std::size_t> seed;
    for (std::size_t i = request.fit_window.end; i-- > request.fit_window.start;) {
        if (!is_missing(dataset.core.values[i])) {
            seed = i;
            break;
        }
    }
    require(seed.has_value(), Err::TooFewObservations, "fit window has no core observations");

    const TemperatureSeries adj = adjunct_series(dataset);
    const detail::HourlyStepper stepper(fit.params, config);
    double state = dataset.core.values[*seed] - ideal;
    int gap = 0;
    for (std::size_t i = *seed; i < request.fit_window.end; ++i) {
        const double e = dataset.ext.values[i];
        const double a = adj.values[i];
        if (is_missing(e) || is_missing(a)) {
            ++gap;
            require(gap < config.gap_reseed_hours, Err::HorizonForcingMissing,
                    "forcing outage at the window tail loses the forecast state");
            continue; // hold the state across a short outage
        }
        gap = 0;
        state = stepper.advance(state, e - ideal, a - ideal);
    }

    // horizon forcing: treated hives use the supplied adjunct or fall back to ext
    const TemperatureSeries* fadj = &request.future_ext;
    if (dataset.hive_type == HiveType::Treated) {
        if (request.future_adj.has_value()) {
            require(request.future_adj->size() == request.horizon, Err::InvalidArgument,
                    "future_adj must align with future_ext");
            fadj = &*request.future_adj;
        } else {
            out.adjunct_fallback = true;
        }
    }

    out.forecast.start_time = dataset.core.time_at(0) +
                              kHour * static_cast<std::int64_t>(request.fit_window.end);
    out.forecast.values.resize(request.horizon);
    gap = 0;
    double held_ext = 0.0, held_adj = 0.0;
    bool have_held = false;
    for (std::size_t k = 0; k < request.horizon; ++k) {
        out.forecast.values[k] = ideal + state;
        if (k + 1 >= request.horizon) break;
        double e = request.future_ext.values[k];
        double a = fadj->values[k];
        if (is_missing(a)) a = e; // per-tick adjunct fallback
        if (is_missing(e)) {
            ++gap;
            require(gap < config.gap_reseed_hours, Err::HorizonForcingMissing,
                    "future_ext has a missing run longer than the gap policy");
            require(have_held, Err::HorizonForcingMissing, "future_ext starts missing");
            e = held_ext;
            if (is_missing(a)) a = held_adj;
        } else {
            gap = 0;
            held_ext = e;
            held_adj = a;
            have_held = true;
        }
        state = stepper.advance(state, e - ideal, a - ideal);
    }

    if (actuals) {
        require(actuals->size() == request.horizon, Err::InvalidArgument,
                "actuals must align with the horizon");
        out.rmse = rmse(*actuals, out.forecast);
        for (std::size_t d = 0; d * 24 < request.horizon; ++d) {
            const std::size_t a = d * 24, b = std::min(request.horizon, a + 24);
            try {
                out.per_day_rmse.push_back(rmse(actuals->slice(a, b), out.forecast.slice(a, b)));
            } catch (const Error&) {
                out.per_day_rmse.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
    }
    return out;
}

struct EvalRow {
    std::size_t origin_day = 0; // first forecast day
    std::string method;
    double rmse_value = 0.0;
};

struct EvalSkip {
    std::size_t origin_day = 0;
    std::string reason;
};

struct MethodSummary {
    std::string method;
    double mean_rmse = 0.0;
    double std_rmse = 0.0;
    std::size_t n_origins = 0;
};

struct EvaluationTable {
    std::size_t fit_days = 3;
    std::size_t horizon_days = 7;
    std::vector<EvalRow> rows;
    std::vector<EvalSkip> skips;
    std::vector<MethodSummary> summary; // model first, then baselines in request order
};

/// Name used for the split-controller model in evaluation tables.
inline const char* kModelMethodName = "split_controller";

/// Slides the (fit_days, horizon_days) protocol across the dataset one day at
/// a time and scores the model against each baseline on identical splits.
inline EvaluationTable rolling_evaluation(const HiveDataset& dataset, const SearchSpace& space,
                                          const ModelConfig& config,
                                          const std::vector<BaselineId>& baselines,
                                          std::size_t fit_days = 3, std::size_t horizon_days = 7,
                                          const FitOptions& fit_options = {}) {
    require(fit_days >= 1 && horizon_days >= 1, Err::InvalidArgument, "bad windows");
    require(dataset.num_days() >= fit_days + horizon_days, Err::InsufficientDays,
            "dataset shorter than fit + horizon");

    EvaluationTable table;
    table.fit_days = fit_days;
    table.horizon_days = horizon_days;

    std::vector<std::string> methods{kModelMethodName};
    for (BaselineId id : baselines) methods.emplace_back(to_string(id));
    std::vector<std::vector<double>> scores(methods.size());

    for (std::size_t o = 0; o + fit_days + horizon_days <= dataset.num_days(); ++o) {
        const std::size_t fit_start = dataset.day_boundaries[o];
        const std::size_t fit_end = dataset.day_boundaries[o + fit_days];
        const std::size_t hor_days_end = o + fit_days + horizon_days;
        const std::size_t hor_end = hor_days_end < dataset.num_days()
                                        ? dataset.day_boundaries[hor_days_end]
                                        : dataset.size();
        const std::size_t horizon = hor_end - fit_end;
        const TemperatureSeries actual = dataset.core.slice(fit_end, hor_end);

        try {
            ForecastRequest req;
            req.fit_window = {fit_start, fit_end};
            req.horizon = horizon;
            req.future_ext = dataset.ext.slice(fit_end, hor_end);
            if (dataset.hive_type == HiveType::Treated) {
                TemperatureSeries fp = dataset.peri.slice(fit_end, hor_end);
                if (fp.present_count() > 0) req.future_adj = std::move(fp);
            }
            const ForecastResult fc =
                forecast(dataset, req, space, config, fit_options, &actual);

            std::vector<double> origin_scores{*fc.rmse};
            const TemperatureSeries hist_core = dataset.core.slice(fit_start, fit_end);
            const TemperatureSeries hist_ext = dataset.ext.slice(fit_start, fit_end);
            for (BaselineId id : baselines) {
                auto model = make_baseline(id);
                model->fit(hist_core, hist_ext);
                origin_scores.push_back(rmse(actual, model->predict(horizon, req.future_ext)));
            }
            for (std::size_t m = 0; m < methods.size(); ++m) {
                table.rows.push_back({o + fit_days, methods[m], origin_scores[m]});
                scores[m].push_back(origin_scores[m]);
            }
        } catch (const Error& e) {
            table.skips.push_back({o + fit_days, e.what()});
        }
    }

    for (std::size_t m = 0; m < methods.size(); ++m) {
        MethodSummary s;
        s.method = methods[m];
        s.n_origins = scores[m].size();
        if (s.n_origins > 0) {
            double sum = 0.0;
            for (double v : scores[m]) sum += v;
            s.mean_rmse = sum / static_cast<double>(s.n_origins);
            double ss = 0.0;
            for (double v : scores[m]) ss += (v - s.mean_rmse) * (v - s.mean_rmse);
            s.std_rmse = std::sqrt(ss / static_cast<double>(s.n_origins));
        }
        table.summary.push_back(std::move(s));
    }
    return table;
}

} // namespace hivetherm
