#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hivetherm/model.hpp"
#include "hivetherm/time_series.hpp"

namespace hivetherm {

/// Box constraints and deterministic multistart seeds for the parameter fit.
struct SearchSpace {
    std::pair<double, double> s_c_range{0.0, 100.0};
    std::pair<double, double> s_h_range{0.0, 100.0};
    std::pair<double, double> theta_ideal_range{kThetaIdealMin, kThetaIdealMax};
    std::vector<HiveParams> multistart_grid;

    /// 3x3x3 grid over box corners and centers, fixed lexicographic order.
    static SearchSpace defaults(const ModelConfig& config) {
        SearchSpace s;
        s.s_c_range = {0.0, config.s_inf};
        s.s_h_range = {0.0, config.s_inf};
        s.theta_ideal_range = {kThetaIdealMin, kThetaIdealMax};
        auto levels = [](std::pair<double, double> r) {
            return std::array<double, 3>{r.first, 0.5 * (r.first + r.second), r.second};
        };
        for (double sc : levels(s.s_c_range))
            for (double sh : levels(s.s_h_range))
                for (double ti : levels(s.theta_ideal_range))
                    s.multistart_grid.push_back({sc, sh, ti});
        return s;
    }

    void validate(const ModelConfig& config) const {
        require(s_c_range.first == 0.0 && s_c_range.second == config.s_inf,
                Err::InvalidConfig, "s_c range must be [0, s_inf]");
        require(s_h_range.first == 0.0 && s_h_range.second == config.s_inf,
                Err::InvalidConfig, "s_h range must be [0, s_inf]");
        require(theta_ideal_range.first >= kThetaIdealMin &&
                    theta_ideal_range.second <= kThetaIdealMax &&
                    theta_ideal_range.first < theta_ideal_range.second,
                Err::InvalidConfig, "theta_ideal range must lie inside the ideal band");
        require(!multistart_grid.empty(), Err::InvalidConfig, "multistart grid is empty");
        for (const auto& p : multistart_grid)
            require(contains(p), Err::InvalidConfig, "multistart seed outside box");
    }

    bool contains(const HiveParams& p) const {
        return p.s_c >= s_c_range.first && p.s_c <= s_c_range.second &&
               p.s_h >= s_h_range.first && p.s_h <= s_h_range.second &&
               p.theta_ideal >= theta_ideal_range.first &&
               p.theta_ideal <= theta_ideal_range.second;
    }

    HiveParams clamp(HiveParams p) const {
        p.s_c = std::clamp(p.s_c, s_c_range.first, s_c_range.second);
        p.s_h = std::clamp(p.s_h, s_h_range.first, s_h_range.second);
        p.theta_ideal = std::clamp(p.theta_ideal, theta_ideal_range.first,
                                   theta_ideal_range.second);
        return p;
    }
};

enum class Degenerate { None, ConstantCore, OneSidedExt };

inline const char* to_string(Degenerate d) {
    switch (d) {
    case Degenerate::None:         return "none";
    case Degenerate::ConstantCore: return "constant_core";
    case Degenerate::OneSidedExt:  return "one_sided_ext";
    }
    return "none";
}

struct FitResult {
    HiveParams params;
    double rmse = 0.0;
    double sse = 0.0;
    std::vector<std::pair<std::size_t, double>> residuals; // (tick, observed - reconstructed)
    std::size_t n_used = 0;
    Degenerate degenerate = Degenerate::None;
    bool s_c_unidentified = false;
    bool s_h_unidentified = false;
};

struct FitOptions {
    double rel_tol = 1e-6;            // stop when relative RMSE improvement falls below
    int max_iter = 200;
    double fd_step = 1e-4;            // central-difference step, natural units
    double constant_core_band = 0.3;  // core range below this flags ConstantCore
    std::size_t min_present = 12;     // minimum present core ticks per segment
};

namespace detail {

// Solves the 3x3 system A x = b by Gaussian elimination with partial
// pivoting. Returns false when A is numerically singular.
inline bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b,
                   std::array<double, 3>& x) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) return false;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

inline std::array<double, 3> to_array(const HiveParams& p) {
    return {p.s_c, p.s_h, p.theta_ideal};
}

inline HiveParams from_array(const std::array<double, 3>& a) {
    return {a[0], a[1], a[2]};
}

} // namespace detail

/// Reusable fitting context over one dataset. The dataset must outlive the
/// Fitter; all methods are const and safe to call concurrently.
class Fitter {
public:
    Fitter(const HiveDataset& dataset, SearchSpace space, ModelConfig config,
           FitOptions options = {})
        : dataset_(&dataset),
          adj_(adjunct_series(dataset)),
          space_(std::move(space)),
          config_(config),
          options_(options) {
        config_.validate();
        space_.validate(config_);
        dataset.validate();
    }

    const SearchSpace& space() const { return space_; }
    const ModelConfig& config() const { return config_; }
    const FitOptions& options() const { return options_; }
    const HiveDataset& dataset() const { return *dataset_; }

    /// Best-RMSE parameters over the span; damped least squares launched from
    /// every multistart seed, ties broken by (s_c, s_h, theta_ideal).
    FitResult fit(SegmentSpan span) const {
        check_span(span);
        const auto frame = frame_view();
        const SegmentStats stats = segment_stats(frame, span);
        require(stats.n_present >= options_.min_present, Err::TooFewObservations,
                "segment has " + std::to_string(stats.n_present) + " present core ticks (need " +
                    std::to_string(options_.min_present) + ")");
        if (stats.range < options_.constant_core_band)
            return pinned_constant_core(span, stats);

        std::optional<Candidate> best;
        for (const auto& seed : space_.multistart_grid)
            consider(best, run_lm(span, seed));
        // rmse of the best constant predictor; the model must at least halve
        // the gap to count as converged
        const double const_rmse = std::sqrt(stats.variance);
        FitResult out = finalize(span, best->params);
        require(out.rmse < 2.0 * const_rmse, Err::NoConvergence,
                "no seed beat twice the constant-predictor RMSE");
        flag_one_sided(out, frame, span);
        return out;
    }

    /// Cheap fit used for candidate scoring in the segmentation search:
    /// every grid seed is screened by objective value, then the best seed and
    /// the warm-start point are polished. Skips the convergence gate.
    FitResult fit_screened(SegmentSpan span, const HiveParams& warm) const {
        check_span(span);
        const auto frame = frame_view();
        const SegmentStats stats = segment_stats(frame, span);
        require(stats.n_present >= options_.min_present, Err::TooFewObservations,
                "segment too short for scoring");
        if (stats.range < options_.constant_core_band)
            return pinned_constant_core(span, stats);

        std::optional<HiveParams> best_seed;
        double best_seed_sse = 0.0;
        std::vector<double> scratch;
        for (const auto& seed : space_.multistart_grid) {
            const double sse = eval(span, seed, scratch);
            if (!best_seed || sse < best_seed_sse) {
                best_seed = seed;
                best_seed_sse = sse;
            }
        }
        std::optional<Candidate> best;
        consider(best, run_lm(span, *best_seed));
        consider(best, run_lm(span, space_.clamp(warm)));
        FitResult out = finalize(span, best->params);
        flag_one_sided(out, frame, span);
        return out;
    }

private:
    struct Candidate {
        HiveParams params;
        double sse = 0.0;
    };

    struct SegmentStats {
        std::size_t n_present = 0;
        double range = 0.0;
        double mean = 0.0;
        double variance = 0.0;
    };

    detail::SeriesFrame frame_view() const { return detail::make_frame(*dataset_, adj_); }

    void check_span(SegmentSpan span) const {
        require(span.end > span.start && span.end <= dataset_->size(), Err::InvalidArgument,
                "bad segment span");
        require(dataset_->is_day_boundary(span.start) && dataset_->is_day_boundary(span.end),
                Err::InvalidArgument, "segment must start and end on day boundaries");
    }

    static SegmentStats segment_stats(const detail::SeriesFrame& f, SegmentSpan span) {
        SegmentStats s;
        double lo = 0.0, hi = 0.0, sum = 0.0;
        for (std::size_t i = span.start; i < span.end; ++i) {
            const double v = f.core[i];
            if (is_missing(v)) continue;
            if (s.n_present == 0) { lo = hi = v; }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
            ++s.n_present;
        }
        if (s.n_present == 0) return s;
        s.range = hi - lo;
        s.mean = sum / static_cast<double>(s.n_present);
        double ss = 0.0;
        for (std::size_t i = span.start; i < span.end; ++i) {
            const double v = f.core[i];
            if (is_missing(v)) continue;
            ss += (v - s.mean) * (v - s.mean);
        }
        s.variance = ss / static_cast<double>(s.n_present);
        return s;
    }

    // Sum of squared residuals at present ticks; residual vector in tick order.
    double eval(SegmentSpan span, const HiveParams& p, std::vector<double>& r) const {
        r.clear();
        double sse = 0.0;
        const auto frame = frame_view();
        detail::integrate_segment(frame, span.start, span.end, p, config_,
                                  [&](std::size_t i, double v) {
                                      if (is_missing(v) || is_missing(frame.core[i])) return;
                                      const double res = frame.core[i] - v;
                                      r.push_back(res);
                                      sse += res * res;
                                  });
        return sse;
    }

    Candidate run_lm(SegmentSpan span, HiveParams seed) const {
        std::vector<double> r, r_try, r_hi, r_lo;
        std::array<double, 3> p = detail::to_array(space_.clamp(seed));
        double sse = eval(span, detail::from_array(p), r);
        const std::size_t n = r.size();
        std::array<std::vector<double>, 3> jac;
        const std::array<std::pair<double, double>, 3> box{
            space_.s_c_range, space_.s_h_range, space_.theta_ideal_range};

        double lambda = 1e-3;
        for (int iter = 0; iter < options_.max_iter; ++iter) {
            if (sse <= 0.0) break;
            // central-difference Jacobian of the residual vector, clamped to box
            for (int j = 0; j < 3; ++j) {
                const double hi = std::min(p[j] + options_.fd_step, box[j].second);
                const double lo = std::max(p[j] - options_.fd_step, box[j].first);
                jac[j].assign(n, 0.0);
                if (hi <= lo) continue;
                auto ph = p, pl = p;
                ph[j] = hi;
                pl[j] = lo;
                eval(span, detail::from_array(ph), r_hi);
                eval(span, detail::from_array(pl), r_lo);
                const double inv = 1.0 / (hi - lo);
                for (std::size_t k = 0; k < n; ++k)
                    jac[j][k] = (r_hi[k] - r_lo[k]) * inv;
            }
            std::array<std::array<double, 3>, 3> jtj{};
            std::array<double, 3> jtr{};
            for (int a = 0; a < 3; ++a) {
                for (int b = a; b < 3; ++b) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < n; ++k) s += jac[a][k] * jac[b][k];
                    jtj[a][b] = jtj[b][a] = s;
                }
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += jac[a][k] * r[k];
                jtr[a] = s;
            }

            bool accepted = false;
            double new_sse = sse;
            std::array<double, 3> p_new = p;
            while (lambda <= 1e8) {
                auto damped = jtj;
                for (int d = 0; d < 3; ++d)
                    damped[d][d] += lambda * std::max(jtj[d][d], 1e-12);
                std::array<double, 3> delta{};
                if (detail::solve3(damped, {-jtr[0], -jtr[1], -jtr[2]}, delta)) {
                    auto trial = p;
                    for (int d = 0; d < 3; ++d)
                        trial[d] = std::clamp(trial[d] + delta[d], box[d].first, box[d].second);
                    if (trial != p) {
                        const double trial_sse = eval(span, detail::from_array(trial), r_try);
                        if (trial_sse < sse) {
                            p_new = trial;
                            new_sse = trial_sse;
                            std::swap(r, r_try);
                            accepted = true;
                            lambda = std::max(lambda / 3.0, 1e-12);
                            break;
                        }
                    }
                }
                lambda *= 4.0;
            }
            if (!accepted) break;
            const double old_rmse = std::sqrt(sse / static_cast<double>(n));
            const double cur_rmse = std::sqrt(new_sse / static_cast<double>(n));
            p = p_new;
            sse = new_sse;
            if (old_rmse - cur_rmse < options_.rel_tol * std::max(old_rmse, 1e-30)) break;
        }
        return {detail::from_array(p), sse};
    }

    static void consider(std::optional<Candidate>& best, Candidate c) {
        if (!best) {
            best = std::move(c);
            return;
        }
        if (c.sse < best->sse) {
            best = std::move(c);
            return;
        }
        if (c.sse == best->sse) {
            const auto key = [](const HiveParams& p) {
                return std::array<double, 3>{p.s_c, p.s_h, p.theta_ideal};
            };
            if (key(c.params) < key(best->params)) best = std::move(c);
        }
    }

    FitResult finalize(SegmentSpan span, const HiveParams& params) const {
        FitResult out;
        out.params = params;
        const auto frame = frame_view();
        detail::integrate_segment(frame, span.start, span.end, params, config_,
                                  [&](std::size_t i, double v) {
                                      if (is_missing(v) || is_missing(frame.core[i])) return;
                                      const double res = frame.core[i] - v;
                                      out.residuals.emplace_back(i, res);
                                      out.sse += res * res;
                                  });
        out.n_used = out.residuals.size();
        out.rmse = out.n_used ? std::sqrt(out.sse / static_cast<double>(out.n_used)) : 0.0;
        return out;
    }

    // Case 1: nearly constant core pins both strengths at the box top and the
    // ideal at the core mean; the values are placeholders for interpolation.
    FitResult pinned_constant_core(SegmentSpan span, const SegmentStats& stats) const {
        HiveParams p{space_.s_c_range.second, space_.s_h_range.second,
                     std::clamp(stats.mean, space_.theta_ideal_range.first,
                                space_.theta_ideal_range.second)};
        FitResult out = finalize(span, p);
        out.degenerate = Degenerate::ConstantCore;
        out.s_c_unidentified = true;
        out.s_h_unidentified = true;
        return out;
    }

    // Case 2: external forcing never crosses the fitted ideal, so one branch
    // of the controller was never exercised.
    static void flag_one_sided(FitResult& out, const detail::SeriesFrame& f, SegmentSpan span) {
        bool any_cool = false, any_heat = false;
        for (std::size_t i = span.start; i < span.end; ++i) {
            const double e = f.ext[i];
            if (is_missing(e)) continue;
            (e - out.params.theta_ideal >= 0.0 ? any_cool : any_heat) = true;
        }
        if (any_cool && any_heat) return;
        out.degenerate = Degenerate::OneSidedExt;
        if (!any_heat) out.s_h_unidentified = true;
        if (!any_cool) out.s_c_unidentified = true;
    }

    const HiveDataset* dataset_;
    TemperatureSeries adj_;
    SearchSpace space_;
    ModelConfig config_;
    FitOptions options_;
};

/// One-shot segment fit (builds a Fitter internally).
inline FitResult fit_segment(const HiveDataset& dataset, SegmentSpan span,
                             const SearchSpace& space, const ModelConfig& config,
                             const FitOptions& options = {}) {
    return Fitter(dataset, space, config, options).fit(span);
}

/// Replaces unidentified strengths by linear interpolation between the
/// nearest identified days; boundary days take the nearest identified value.
inline std::vector<FitResult> fill_unidentified(std::vector<FitResult> fits) {
    auto fill = [&](auto member, auto flag) {
        std::vector<std::size_t> known;
        for (std::size_t i = 0; i < fits.size(); ++i)
            if (!(fits[i].*flag)) known.push_back(i);
        require(!known.empty(), Err::AllDegenerate,
                "strength unidentified on every day");
        for (std::size_t i = 0; i < fits.size(); ++i) {
            if (!(fits[i].*flag)) continue;
            auto next = std::lower_bound(known.begin(), known.end(), i);
            if (next == known.begin()) {
                fits[i].params.*member = fits[*next].params.*member; // backward fill
            } else if (next == known.end()) {
                fits[i].params.*member = fits[*(next - 1)].params.*member; // forward fill
            } else {
                const std::size_t a = *(next - 1), b = *next;
                const double va = fits[a].params.*member, vb = fits[b].params.*member;
                const double w = static_cast<double>(i - a) / static_cast<double>(b - a);
                fits[i].params.*member = va + w * (vb - va);
            }
        }
    };
    fill(&HiveParams::s_c, &FitResult::s_c_unidentified);
    fill(&HiveParams::s_h, &FitResult::s_h_unidentified);
    return fits;
}

struct DayFit {
    std::size_t day = 0;
    std::optional<FitResult> result;
    std::string error; // set when result is absent
};

/// Independent fit per daily sequence followed by strength interpolation.
/// Failing days are recorded and skipped; the rest proceed.
inline std::vector<DayFit> fit_per_day(const HiveDataset& dataset, const SearchSpace& space,
                                       const ModelConfig& config,
                                       const FitOptions& options = {}) {
    require(dataset.num_days() >= 1, Err::InvalidArgument, "dataset has no days");
    const Fitter fitter(dataset, space, config, options);
    std::vector<DayFit> out(dataset.num_days());
    std::vector<FitResult> ok;
    std::vector<std::size_t> ok_days;
    for (std::size_t d = 0; d < dataset.num_days(); ++d) {
        out[d].day = d;
        const auto [start, end] = dataset.day_range(d);
        try {
            ok.push_back(fitter.fit({start, end}));
            ok_days.push_back(d);
        } catch (const Error& e) {
            out[d].error = e.what();
        }
    }
    if (!ok.empty()) {
        try {
            ok = fill_unidentified(std::move(ok));
        } catch (const Error&) {
            // a strength unidentified everywhere: leave the flags standing
        }
        for (std::size_t k = 0; k < ok.size(); ++k)
            out[ok_days[k]].result = std::move(ok[k]);
    }
    return out;
}

} // namespace hivetherm
