#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hivetherm/errors.hpp"
#include "hivetherm/fitting.hpp"
#include "hivetherm/forecasting.hpp"
#include "hivetherm/io/csv.hpp"
#include "hivetherm/segmentation.hpp"
#include "hivetherm/time_series.hpp"

namespace hivetherm::io {

using nlohmann::json;

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    require(out.good(), Err::ParseError, "cannot write '" + path + "'");
    out << content;
}

inline void write_json(const std::string& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

inline json params_to_json(const HiveParams& p) {
    return {{"s_c", p.s_c}, {"s_h", p.s_h}, {"theta_ideal", p.theta_ideal}};
}

inline json fit_result_to_json(const FitResult& f) {
    json j = params_to_json(f.params);
    j["rmse"] = f.rmse;
    j["n_used"] = f.n_used;
    j["degenerate"] = to_string(f.degenerate);
    j["s_c_unidentified"] = f.s_c_unidentified;
    j["s_h_unidentified"] = f.s_h_unidentified;
    return j;
}

/// Aligned observed/fitted series as CSV; empty cells mark missing values.
inline void write_series_csv(const std::string& path, const TemperatureSeries& observed,
                             const TemperatureSeries& modeled, const std::string& modeled_name) {
    require(observed.size() == modeled.size(), Err::InvalidArgument, "series misaligned");
    std::ofstream out(path);
    require(out.good(), Err::ParseError, "cannot write '" + path + "'");
    out << "timestamp,core_observed," << modeled_name << "\n";
    for (std::size_t i = 0; i < observed.size(); ++i) {
        out << format_iso8601(observed.time_at(i)) << ',';
        if (observed.present(i)) out << format_temp(observed.values[i]);
        out << ',';
        if (modeled.present(i)) out << format_temp(modeled.values[i]);
        out << "\n";
    }
}

struct SvgSeries {
    const TemperatureSeries* data = nullptr;
    std::string color;
    std::string label;
};

/// Minimal static plot: polylines (split on gaps), optional cut markers,
/// hourly x-axis labelled by date. No rendering dependencies.
inline void write_series_svg(const std::string& path, const std::string& title,
                             const std::vector<SvgSeries>& series,
                             const std::vector<std::size_t>& cut_ticks = {}) {
    require(!series.empty() && series[0].data, Err::InvalidArgument, "nothing to plot");
    const std::size_t n = series[0].data->size();
    const double width = 960, height = 320;
    const double ml = 52, mr = 16, mt = 28, mb = 34;

    double lo = 1e300, hi = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.data->size(); ++i)
            if (s.data->present(i)) {
                lo = std::min(lo, s.data->values[i]);
                hi = std::max(hi, s.data->values[i]);
            }
    if (lo > hi) { lo = 0; hi = 1; }
    if (hi - lo < 1e-9) { hi += 0.5; lo -= 0.5; }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const auto x_of = [&](double i) {
        return ml + (width - ml - mr) * (n > 1 ? i / static_cast<double>(n - 1) : 0.5);
    };
    const auto y_of = [&](double v) { return mt + (height - mt - mb) * (hi - v) / (hi - lo); };

    std::string svg;
    char buf[256];
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"320\" "
           "viewBox=\"0 0 960 320\">\n";
    svg += "<rect width=\"960\" height=\"320\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.0f\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">",
                  ml);
    svg += buf;
    svg += title + "</text>\n";

    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                      "<text x=\"4\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\">"
                      "%.1f</text>\n",
                      ml, y_of(v), width - mr, y_of(v), y_of(v) + 3, v);
        svg += buf;
    }
    for (std::size_t i = 0; i < n; i += 24 * std::max<std::size_t>(1, n / (24 * 8))) {
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"9\">",
                      x_of(static_cast<double>(i)), height - 12.0);
        svg += buf;
        svg += format_iso8601(series[0].data->time_at(i)).substr(5, 5) + "</text>\n";
    }

    for (std::size_t cut : cut_ticks) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#8c564b\" "
                      "stroke-width=\"1.5\" stroke-dasharray=\"5,3\"/>\n",
                      x_of(static_cast<double>(cut)), mt, x_of(static_cast<double>(cut)),
                      height - mb);
        svg += buf;
    }

    double legend_x = ml + 8;
    for (const auto& s : series) {
        std::string points;
        bool open = false;
        for (std::size_t i = 0; i < s.data->size(); ++i) {
            if (!s.data->present(i)) {
                if (open) {
                    svg += "<polyline fill=\"none\" stroke=\"" + s.color +
                           "\" stroke-width=\"1.2\" points=\"" + points + "\"/>\n";
                    points.clear();
                    open = false;
                }
                continue;
            }
            std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", x_of(static_cast<double>(i)),
                          y_of(s.data->values[i]));
            points += buf;
            open = true;
        }
        if (open)
            svg += "<polyline fill=\"none\" stroke=\"" + s.color +
                   "\" stroke-width=\"1.2\" points=\"" + points + "\"/>\n";
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.1f\" y=\"%.1f\" width=\"10\" height=\"3\" fill=\"%s\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" "
                      "font-size=\"10\">%s</text>\n",
                      legend_x, mt + 4.0, s.color.c_str(), legend_x + 14, mt + 9.0,
                      s.label.c_str());
        svg += buf;
        legend_x += 16.0 + 7.0 * static_cast<double>(s.label.size()) + 14.0;
    }
    svg += "</svg>\n";
    write_text(path, svg);
}

} // namespace hivetherm::io
