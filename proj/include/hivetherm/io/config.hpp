#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hivetherm/baselines.hpp"
#include "hivetherm/fitting.hpp"
#include "hivetherm/segmentation.hpp"
#include "hivetherm/synthgen.hpp"

namespace hivetherm::io {

using nlohmann::json;

/// Everything a pipeline run needs, loadable from one JSON file. Unknown keys
/// are rejected so typos surface instead of silently applying defaults.
struct RunConfig {
    ModelConfig model;
    std::optional<double> fixed_sigma;          // likelihood: MLE when absent
    SegmentOptions segmentation;
    FitOptions fit;
    std::pair<double, double> theta_ideal_range{kThetaIdealMin, kThetaIdealMax};
    std::size_t forecast_fit_days = 3;
    std::size_t forecast_horizon_days = 7;
    std::vector<BaselineId> baselines{BaselineId::Persistence, BaselineId::SeasonalNaive24,
                                      BaselineId::ARX, BaselineId::HoltWintersAdditive};
    std::map<std::string, HiveType> hive_types;
    int utc_offset_hours = 0;
    bool plots = true;
    std::optional<ScenarioSpec> scenario;

    SearchSpace search_space() const {
        SearchSpace s = SearchSpace::defaults(model);
        if (theta_ideal_range != std::pair<double, double>{kThetaIdealMin, kThetaIdealMax}) {
            s.theta_ideal_range = theta_ideal_range;
            s.multistart_grid.clear();
            for (double sc : {0.0, 0.5 * model.s_inf, model.s_inf})
                for (double sh : {0.0, 0.5 * model.s_inf, model.s_inf})
                    for (double ti : {theta_ideal_range.first,
                                      0.5 * (theta_ideal_range.first + theta_ideal_range.second),
                                      theta_ideal_range.second})
                        s.multistart_grid.push_back({sc, sh, ti});
        }
        return s;
    }

    LikelihoodSpec likelihood() const {
        LikelihoodSpec l;
        if (fixed_sigma) {
            l.policy = LikelihoodSpec::SigmaPolicy::Fixed;
            l.fixed_sigma = *fixed_sigma;
        }
        return l;
    }

    void validate() const {
        model.validate();
        segmentation.validate();
        likelihood().validate();
        search_space().validate(model);
        require(forecast_fit_days >= 1 && forecast_horizon_days >= 1, Err::InvalidConfig,
                "forecast windows must be positive");
        if (scenario) scenario->validate(model);
    }
};

namespace detail {

inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const auto& a : allowed)
            if (key == a) ok = true;
        require(ok, Err::InvalidConfig, "unknown key '" + key + "' in " + where);
    }
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline ScenarioSpec scenario_from_json(const json& j) {
    check_keys(j,
               {"hive_id", "num_days", "hive_type", "regimes", "ext", "noise_sigma", "core_gaps",
                "treated_ice_offset_c", "seed", "start_time"},
               "scenario");
    ScenarioSpec s;
    maybe(j, "hive_id", s.hive_id);
    maybe(j, "num_days", s.num_days);
    if (j.contains("hive_type")) {
        const auto t = parse_hive_type(j.at("hive_type").get<std::string>());
        require(t.has_value(), Err::InvalidConfig, "bad hive_type");
        s.hive_type = *t;
    }
    require(j.contains("regimes") && j.at("regimes").is_array() && !j.at("regimes").empty(),
            Err::InvalidConfig, "scenario needs a non-empty regimes array");
    for (const auto& r : j.at("regimes")) {
        check_keys(r, {"start_day", "s_c", "s_h", "theta_ideal"}, "regime");
        Regime reg;
        maybe(r, "start_day", reg.start_day);
        reg.params.s_c = r.at("s_c").get<double>();
        reg.params.s_h = r.at("s_h").get<double>();
        reg.params.theta_ideal = r.at("theta_ideal").get<double>();
        s.regimes.push_back(reg);
    }
    if (j.contains("ext")) {
        const auto& e = j.at("ext");
        check_keys(e, {"mean_c", "daily_amplitude_c", "heatwave_days", "heatwave_peak_c"}, "ext");
        maybe(e, "mean_c", s.ext.mean_c);
        maybe(e, "daily_amplitude_c", s.ext.daily_amplitude_c);
        maybe(e, "heatwave_days", s.ext.heatwave_days);
        maybe(e, "heatwave_peak_c", s.ext.heatwave_peak_c);
    }
    maybe(j, "noise_sigma", s.noise_sigma);
    if (j.contains("core_gaps"))
        for (const auto& g : j.at("core_gaps"))
            s.core_gaps.push_back({g.at(0).get<std::size_t>(), g.at(1).get<std::size_t>()});
    maybe(j, "treated_ice_offset_c", s.treated_ice_offset_c);
    maybe(j, "seed", s.seed);
    if (j.contains("start_time")) {
        const auto tp = parse_iso8601(j.at("start_time").get<std::string>());
        require(tp.has_value(), Err::InvalidConfig, "bad scenario start_time");
        s.start_time = *tp;
    }
    return s;
}

inline json scenario_to_json(const ScenarioSpec& s) {
    json j;
    j["hive_id"] = s.hive_id;
    j["num_days"] = s.num_days;
    j["hive_type"] = to_string(s.hive_type);
    j["regimes"] = json::array();
    for (const auto& r : s.regimes)
        j["regimes"].push_back({{"start_day", r.start_day},
                                {"s_c", r.params.s_c},
                                {"s_h", r.params.s_h},
                                {"theta_ideal", r.params.theta_ideal}});
    j["ext"] = {{"mean_c", s.ext.mean_c},
                {"daily_amplitude_c", s.ext.daily_amplitude_c},
                {"heatwave_days", s.ext.heatwave_days},
                {"heatwave_peak_c", s.ext.heatwave_peak_c}};
    j["noise_sigma"] = s.noise_sigma;
    j["core_gaps"] = json::array();
    for (const auto& g : s.core_gaps) j["core_gaps"].push_back({g.start_tick, g.length});
    j["treated_ice_offset_c"] = s.treated_ice_offset_c;
    j["seed"] = s.seed;
    j["start_time"] = format_iso8601(s.start_time);
    return j;
}

} // namespace detail

inline RunConfig config_from_json(const json& j) {
    detail::check_keys(j,
                       {"model", "likelihood", "segmentation", "fit", "theta_ideal_range",
                        "forecast", "baselines", "hives", "utc_offset_hours", "plots", "scenario"},
                       "config");
    RunConfig c;
    if (j.contains("model")) {
        const auto& m = j.at("model");
        detail::check_keys(
            m, {"s_inf", "sign_convention", "integrator", "euler_substeps", "gap_reseed_hours"},
            "model");
        detail::maybe(m, "s_inf", c.model.s_inf);
        if (m.contains("sign_convention")) {
            const auto s = m.at("sign_convention").get<std::string>();
            require(s == "stabilized" || s == "signed_effort", Err::InvalidConfig,
                    "sign_convention must be stabilized|signed_effort");
            c.model.sign_convention =
                s == "stabilized" ? SignConvention::Stabilized : SignConvention::SignedEffort;
        }
        if (m.contains("integrator")) {
            const auto s = m.at("integrator").get<std::string>();
            require(s == "exponential_exact" || s == "euler_fine", Err::InvalidConfig,
                    "integrator must be exponential_exact|euler_fine");
            c.model.integrator =
                s == "exponential_exact" ? Integrator::ExponentialExact : Integrator::EulerFine;
        }
        detail::maybe(m, "euler_substeps", c.model.euler_substeps);
        detail::maybe(m, "gap_reseed_hours", c.model.gap_reseed_hours);
    }
    if (j.contains("likelihood")) {
        const auto& l = j.at("likelihood");
        detail::check_keys(l, {"sigma_policy", "sigma"}, "likelihood");
        const std::string policy =
            l.contains("sigma_policy") ? l.at("sigma_policy").get<std::string>() : "mle";
        if (policy == "fixed") {
            require(l.contains("sigma"), Err::InvalidConfig, "fixed policy needs sigma");
            c.fixed_sigma = l.at("sigma").get<double>();
        } else {
            require(policy == "mle", Err::InvalidConfig, "sigma_policy must be mle|fixed");
        }
    }
    if (j.contains("segmentation")) {
        const auto& s = j.at("segmentation");
        detail::check_keys(s, {"relaxation", "score_window_days", "exact_top_k", "use_cache"},
                           "segmentation");
        detail::maybe(s, "relaxation", c.segmentation.relaxation);
        detail::maybe(s, "score_window_days", c.segmentation.score_window_days);
        detail::maybe(s, "exact_top_k", c.segmentation.exact_top_k);
        detail::maybe(s, "use_cache", c.segmentation.use_cache);
    }
    if (j.contains("fit")) {
        const auto& f = j.at("fit");
        detail::check_keys(f, {"rel_tol", "max_iter", "fd_step", "constant_core_band",
                               "min_present"},
                           "fit");
        detail::maybe(f, "rel_tol", c.fit.rel_tol);
        detail::maybe(f, "max_iter", c.fit.max_iter);
        detail::maybe(f, "fd_step", c.fit.fd_step);
        detail::maybe(f, "constant_core_band", c.fit.constant_core_band);
        detail::maybe(f, "min_present", c.fit.min_present);
    }
    if (j.contains("theta_ideal_range")) {
        const auto& r = j.at("theta_ideal_range");
        c.theta_ideal_range = {r.at(0).get<double>(), r.at(1).get<double>()};
    }
    if (j.contains("forecast")) {
        const auto& f = j.at("forecast");
        detail::check_keys(f, {"fit_days", "horizon_days"}, "forecast");
        detail::maybe(f, "fit_days", c.forecast_fit_days);
        detail::maybe(f, "horizon_days", c.forecast_horizon_days);
    }
    if (j.contains("baselines")) {
        c.baselines.clear();
        for (const auto& b : j.at("baselines")) {
            const auto id = parse_baseline(b.get<std::string>());
            require(id.has_value(), Err::InvalidConfig,
                    "unknown baseline '" + b.get<std::string>() + "'");
            c.baselines.push_back(*id);
        }
    }
    if (j.contains("hives")) {
        for (const auto& h : j.at("hives")) {
            detail::check_keys(h, {"id", "type"}, "hives[]");
            const auto t = parse_hive_type(h.at("type").get<std::string>());
            require(t.has_value(), Err::InvalidConfig, "bad hive type");
            c.hive_types[h.at("id").get<std::string>()] = *t;
        }
    }
    detail::maybe(j, "utc_offset_hours", c.utc_offset_hours);
    detail::maybe(j, "plots", c.plots);
    if (j.contains("scenario")) c.scenario = detail::scenario_from_json(j.at("scenario"));
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Err::InvalidConfig, "cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(Err::InvalidConfig, "config '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

/// Canonical JSON image of the configuration (every effective value, sorted
/// keys); the provenance hash is computed over its dump.
inline json config_to_canonical_json(const RunConfig& c) {
    json j;
    j["model"] = {{"s_inf", c.model.s_inf},
                  {"sign_convention", c.model.sign_convention == SignConvention::Stabilized
                                          ? "stabilized"
                                          : "signed_effort"},
                  {"integrator", c.model.integrator == Integrator::ExponentialExact
                                     ? "exponential_exact"
                                     : "euler_fine"},
                  {"euler_substeps", c.model.euler_substeps},
                  {"gap_reseed_hours", c.model.gap_reseed_hours}};
    j["likelihood"] = c.fixed_sigma
                          ? json{{"sigma_policy", "fixed"}, {"sigma", *c.fixed_sigma}}
                          : json{{"sigma_policy", "mle"}};
    j["segmentation"] = {{"relaxation", c.segmentation.relaxation},
                         {"score_window_days", c.segmentation.score_window_days},
                         {"exact_top_k", c.segmentation.exact_top_k},
                         {"use_cache", c.segmentation.use_cache}};
    j["fit"] = {{"rel_tol", c.fit.rel_tol},
                {"max_iter", c.fit.max_iter},
                {"fd_step", c.fit.fd_step},
                {"constant_core_band", c.fit.constant_core_band},
                {"min_present", c.fit.min_present}};
    j["theta_ideal_range"] = {c.theta_ideal_range.first, c.theta_ideal_range.second};
    j["forecast"] = {{"fit_days", c.forecast_fit_days}, {"horizon_days", c.forecast_horizon_days}};
    j["baselines"] = json::array();
    for (BaselineId b : c.baselines) j["baselines"].push_back(to_string(b));
    j["hives"] = json::array();
    for (const auto& [id, type] : c.hive_types)
        j["hives"].push_back({{"id", id}, {"type", to_string(type)}});
    j["utc_offset_hours"] = c.utc_offset_hours;
    j["plots"] = c.plots;
    if (c.scenario) j["scenario"] = detail::scenario_to_json(*c.scenario);
    return j;
}

inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string config_hash(const RunConfig& c) {
    return fnv1a_hex(config_to_canonical_json(c).dump());
}

} // namespace hivetherm::io
