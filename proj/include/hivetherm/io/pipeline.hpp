#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hivetherm/forecasting.hpp"
#include "hivetherm/io/artifacts.hpp"
#include "hivetherm/io/config.hpp"
#include "hivetherm/io/csv.hpp"
#include "hivetherm/segmentation.hpp"
#include "hivetherm/synthgen.hpp"

namespace hivetherm::io {

enum class Command { Simulate, Fit, Segment, Forecast, Evaluate };

inline const char* to_string(Command c) {
    switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Fit:      return "fit";
    case Command::Segment:  return "segment";
    case Command::Forecast: return "forecast";
    case Command::Evaluate: return "evaluate";
    }
    return "?";
}

struct PipelineOptions {
    std::vector<std::string> inputs;
    std::string out_dir = ".";
    std::optional<std::string> hive_filter;
    std::optional<std::uint64_t> seed_override; // simulate only
    bool no_plots = false;
};

struct PipelineSummary {
    std::vector<std::string> artifacts;
    std::vector<std::string> warnings;
};

namespace detail {

class PipelineRun {
public:
    PipelineRun(Command cmd, const RunConfig& config, const PipelineOptions& options)
        : cmd_(cmd), cfg_(config), opt_(options), hash_(config_hash(config)) {
        cfg_.validate();
        std::filesystem::create_directories(opt_.out_dir);
    }

    PipelineSummary run() {
        switch (cmd_) {
        case Command::Simulate: simulate(); break;
        case Command::Fit:      for_each_hive([&](const HiveDataset& ds) { fit_one(ds); }); break;
        case Command::Segment:  for_each_hive([&](const HiveDataset& ds) { segment_one(ds); }); break;
        case Command::Forecast: for_each_hive([&](const HiveDataset& ds) { forecast_one(ds); }); break;
        case Command::Evaluate: evaluate_all(); break;
        }
        write_manifest();
        return summary_;
    }

private:
    json base_json(const std::string& schema) const {
        json j;
        j["schema"] = "hivetherm." + schema + ".v1";
        j["config_hash"] = hash_;
        return j;
    }

    std::string out_path(const std::string& name) {
        const auto p = std::filesystem::path(opt_.out_dir) / name;
        summary_.artifacts.push_back(p.string());
        return p.string();
    }

    std::vector<HiveDataset> load_inputs() {
        require(!opt_.inputs.empty(), Err::InvalidArgument,
                "this command needs at least one --input CSV");
        IngestOptions ing;
        ing.utc_offset_hours = cfg_.utc_offset_hours;
        ing.hive_types = cfg_.hive_types;
        auto datasets = ingest(opt_.inputs, ing, &summary_.warnings);
        if (opt_.hive_filter) {
            std::erase_if(datasets, [&](const HiveDataset& d) {
                return d.hive_id != *opt_.hive_filter;
            });
            require(!datasets.empty(), Err::InvalidArgument,
                    "no hive matches --hive " + *opt_.hive_filter);
        }
        return datasets;
    }

    template <class Fn>
    void for_each_hive(Fn&& fn) {
        for (const auto& ds : load_inputs()) fn(ds);
    }

    void plot(const std::string& name, const std::string& title,
              const std::vector<SvgSeries>& series, const std::vector<std::size_t>& cuts = {}) {
        if (opt_.no_plots || !cfg_.plots) return;
        write_series_svg(out_path(name), title, series, cuts);
    }

    void simulate() {
        require(cfg_.scenario.has_value(), Err::InvalidConfig,
                "simulate needs a 'scenario' block in the config");
        ScenarioSpec spec = *cfg_.scenario;
        if (opt_.seed_override) spec.seed = *opt_.seed_override;
        auto [ds, truth] = generate(spec, cfg_.model);

        write_dataset_csv(ds, out_path(ds.hive_id + "_dataset.csv"));

        json truth_json = base_json("truth");
        truth_json["hive_id"] = ds.hive_id;
        truth_json["seed"] = spec.seed;
        truth_json["cut_days"] = truth.cut_days;
        truth_json["cut_ticks"] = json::array();
        for (std::size_t d : truth.cut_days) truth_json["cut_ticks"].push_back(d * 24);
        truth_json["regimes"] = json::array();
        for (const auto& r : truth.regimes) {
            json rj = params_to_json(r.params);
            rj["start_day"] = r.start_day;
            truth_json["regimes"].push_back(rj);
        }
        write_json(out_path(ds.hive_id + "_truth.json"), truth_json);

        plot(ds.hive_id + "_input.svg", "simulated hive " + ds.hive_id,
             {{&ds.ext, "#7f7f7f", "external"}, {&ds.core, "#1f77b4", "core"}});
    }

    void fit_one(const HiveDataset& ds) {
        const auto days = fit_per_day(ds, cfg_.search_space(), cfg_.model, cfg_.fit);

        json j = base_json("fit");
        j["hive_id"] = ds.hive_id;
        j["hive_type"] = hivetherm::to_string(ds.hive_type);
        j["days"] = json::array();
        TemperatureSeries recon;
        recon.start_time = ds.core.start_time;
        recon.values.assign(ds.size(), missing());
        for (const auto& day : days) {
            json dj;
            dj["day"] = day.day;
            const auto [start, end] = ds.day_range(day.day);
            dj["date"] = format_iso8601(ds.core.time_at(start));
            if (day.result) {
                dj["fit"] = fit_result_to_json(*day.result);
                reconstruct_span(ds, {start, end}, day.result->params, cfg_.model, recon);
            } else {
                dj["error"] = day.error;
            }
            j["days"].push_back(std::move(dj));
        }
        write_json(out_path(ds.hive_id + "_fit.json"), j);
        write_series_csv(out_path(ds.hive_id + "_fit_reconstruction.csv"), ds.core, recon,
                         "core_reconstructed");
        plot(ds.hive_id + "_fit.svg", "per-day fit, hive " + ds.hive_id,
             {{&ds.core, "#1f77b4", "observed"}, {&recon, "#d62728", "fitted"}});
    }

    void segment_one(const HiveDataset& ds) {
        const auto result = segment(ds, cfg_.search_space(), cfg_.model, cfg_.likelihood(),
                                    cfg_.segmentation, cfg_.fit);

        json j = base_json("segmentation");
        j["hive_id"] = ds.hive_id;
        j["hive_type"] = hivetherm::to_string(ds.hive_type);
        j["aic"] = result.aic;
        j["sigma_mle"] = result.sigma_mle;
        j["cut_points"] = json::array();
        for (std::size_t tick : result.cut_points)
            j["cut_points"].push_back(
                {{"tick", tick}, {"date", format_iso8601(ds.core.time_at(tick))}});
        j["segments"] = json::array();
        std::size_t start = 0;
        for (std::size_t i = 0; i < result.segment_fits.size(); ++i) {
            const std::size_t end =
                i < result.cut_points.size() ? result.cut_points[i] : ds.size();
            json sj = fit_result_to_json(result.segment_fits[i]);
            sj["start_tick"] = start;
            sj["end_tick"] = end;
            sj["start_date"] = format_iso8601(ds.core.time_at(start));
            j["segments"].push_back(std::move(sj));
            start = end;
        }
        j["aic_trace"] = json::array();
        for (const auto& t : result.aic_trace)
            j["aic_trace"].push_back({{"num_cuts", t.num_cuts}, {"aic", t.aic}});
        write_json(out_path(ds.hive_id + "_segmentation.json"), j);

        write_series_csv(out_path(ds.hive_id + "_segmentation_reconstruction.csv"), ds.core,
                         result.reconstruction, "core_reconstructed");
        plot(ds.hive_id + "_segmentation.svg", "segmentation, hive " + ds.hive_id,
             {{&ds.core, "#1f77b4", "observed"}, {&result.reconstruction, "#d62728", "fitted"}},
             result.cut_points);
    }

    void forecast_one(const HiveDataset& ds) {
        const std::size_t fit_days = cfg_.forecast_fit_days;
        const std::size_t horizon_days = cfg_.forecast_horizon_days;
        require(ds.num_days() >= fit_days + horizon_days, Err::InsufficientDays,
                "dataset shorter than fit + horizon");
        const std::size_t origin_day = ds.num_days() - horizon_days;
        const std::size_t origin = ds.day_boundaries[origin_day];
        const std::size_t fit_start = ds.day_boundaries[origin_day - fit_days];

        ForecastRequest req;
        req.fit_window = {fit_start, origin};
        req.horizon = ds.size() - origin;
        req.future_ext = ds.ext.slice(origin, ds.size());
        if (ds.hive_type == HiveType::Treated) {
            TemperatureSeries fp = ds.peri.slice(origin, ds.size());
            if (fp.present_count() > 0) req.future_adj = std::move(fp);
        }
        const TemperatureSeries actual = ds.core.slice(origin, ds.size());
        const auto result = forecast(ds, req, cfg_.search_space(), cfg_.model, cfg_.fit,
                                     actual.present_count() > 0 ? &actual : nullptr);

        json j = base_json("forecast");
        j["hive_id"] = ds.hive_id;
        j["origin"] = format_iso8601(ds.core.time_at(origin));
        j["fit_days"] = fit_days;
        j["horizon_ticks"] = req.horizon;
        j["params_used"] = params_to_json(result.params_used);
        j["adjunct_fallback"] = result.adjunct_fallback;
        if (result.rmse) {
            j["rmse"] = *result.rmse;
            j["per_day_rmse"] = json::array();
            for (double v : result.per_day_rmse)
                j["per_day_rmse"].push_back(std::isnan(v) ? json() : json(v));
        }
        write_json(out_path(ds.hive_id + "_forecast.json"), j);
        write_series_csv(out_path(ds.hive_id + "_forecast.csv"), actual, result.forecast,
                         "core_forecast");
        plot(ds.hive_id + "_forecast.svg", "forecast, hive " + ds.hive_id,
             {{&actual, "#1f77b4", "actual"}, {&result.forecast, "#d62728", "forecast"}});
    }

    void evaluate_all() {
        json all = base_json("evaluation_summary");
        all["per_hive"] = json::array();
        std::vector<std::string> methods{kModelMethodName};
        for (BaselineId id : cfg_.baselines) methods.emplace_back(hivetherm::to_string(id));
        std::vector<std::vector<double>> pooled(methods.size());

        for_each_hive([&](const HiveDataset& ds) {
            const auto table =
                rolling_evaluation(ds, cfg_.search_space(), cfg_.model, cfg_.baselines,
                                   cfg_.forecast_fit_days, cfg_.forecast_horizon_days, cfg_.fit);

            json j = base_json("evaluation");
            j["hive_id"] = ds.hive_id;
            j["fit_days"] = table.fit_days;
            j["horizon_days"] = table.horizon_days;
            j["rows"] = json::array();
            for (const auto& row : table.rows) {
                j["rows"].push_back({{"origin_day", row.origin_day},
                                     {"method", row.method},
                                     {"rmse", row.rmse_value}});
                for (std::size_t m = 0; m < methods.size(); ++m)
                    if (methods[m] == row.method) pooled[m].push_back(row.rmse_value);
            }
            j["skips"] = json::array();
            for (const auto& s : table.skips)
                j["skips"].push_back({{"origin_day", s.origin_day}, {"reason", s.reason}});
            j["summary"] = json::array();
            for (const auto& s : table.summary)
                j["summary"].push_back({{"method", s.method},
                                        {"mean_rmse", s.mean_rmse},
                                        {"std_rmse", s.std_rmse},
                                        {"n_origins", s.n_origins}});
            write_json(out_path(ds.hive_id + "_evaluation.json"), j);

            std::ofstream csv(out_path(ds.hive_id + "_evaluation.csv"));
            csv << "origin_day,method,rmse\n";
            for (const auto& row : table.rows)
                csv << row.origin_day << ',' << row.method << ',' << format_temp(row.rmse_value)
                    << "\n";

            json hj;
            hj["hive_id"] = ds.hive_id;
            hj["summary"] = j["summary"];
            all["per_hive"].push_back(std::move(hj));
        });

        all["pooled"] = json::array();
        for (std::size_t m = 0; m < methods.size(); ++m) {
            double mean = 0.0, sd = 0.0;
            for (double v : pooled[m]) mean += v;
            if (!pooled[m].empty()) mean /= static_cast<double>(pooled[m].size());
            for (double v : pooled[m]) sd += (v - mean) * (v - mean);
            if (!pooled[m].empty()) sd = std::sqrt(sd / static_cast<double>(pooled[m].size()));
            all["pooled"].push_back({{"method", methods[m]},
                                     {"mean_rmse", mean},
                                     {"std_rmse", sd},
                                     {"n", pooled[m].size()}});
        }
        write_json(out_path("evaluation_summary.json"), all);
    }

    void write_manifest() {
        json j = base_json("manifest");
        j["command"] = io::to_string(cmd_);
        j["artifacts"] = json::array();
        for (const auto& a : summary_.artifacts)
            j["artifacts"].push_back(std::filesystem::path(a).filename().string());
        j["warnings"] = summary_.warnings;
        const auto p = std::filesystem::path(opt_.out_dir) / "manifest.json";
        write_json(p.string(), j);
        summary_.artifacts.push_back(p.string());
    }

    Command cmd_;
    RunConfig cfg_;
    PipelineOptions opt_;
    std::string hash_;
    PipelineSummary summary_;
};

} // namespace detail

/// Runs one subcommand end to end, writing artifacts under out_dir. Throws
/// Error on any failure; never mutates input files.
inline PipelineSummary run_pipeline(Command cmd, const RunConfig& config,
                                    const PipelineOptions& options) {
    return detail::PipelineRun(cmd, config, options).run();
}

} // namespace hivetherm::io
