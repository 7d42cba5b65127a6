#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "hivetherm/fitting.hpp"
#include "hivetherm/model.hpp"

namespace hivetherm {

struct LikelihoodSpec {
    enum class SigmaPolicy { MLE, Fixed };
    SigmaPolicy policy = SigmaPolicy::MLE;
    double fixed_sigma = 1.0;

    void validate() const {
        if (policy == SigmaPolicy::Fixed)
            require(fixed_sigma > 0.0, Err::InvalidConfig, "fixed sigma must be positive");
    }
};

struct LogLik {
    double value = 0.0;
    bool zero_variance = false; // all residuals exactly zero under MLE
};

namespace detail {

inline LogLik loglik_from_sse(double sse, std::size_t n, const LikelihoodSpec& spec) {
    const double dn = static_cast<double>(n);
    if (spec.policy == LikelihoodSpec::SigmaPolicy::Fixed) {
        const double s2 = spec.fixed_sigma * spec.fixed_sigma;
        return {-0.5 * dn * std::log(2.0 * std::numbers::pi * s2) - sse / (2.0 * s2), false};
    }
    if (sse == 0.0) return {std::numeric_limits<double>::infinity(), true};
    const double s2 = sse / dn;
    return {-0.5 * dn * (std::log(2.0 * std::numbers::pi * s2) + 1.0), false};
}

} // namespace detail

/// Gaussian log-likelihood of the residuals. Under the MLE policy the
/// variance is the biased mean of squares; exactly-zero residuals yield the
/// +infinity sentinel with zero_variance set.
inline LogLik log_likelihood(std::span<const double> residuals, const LikelihoodSpec& spec = {}) {
    spec.validate();
    require(residuals.size() >= 2, Err::InvalidArgument, "need at least 2 residuals");
    double sse = 0.0;
    for (double r : residuals) sse += r * r;
    return detail::loglik_from_sse(sse, residuals.size(), spec);
}

/// AIC = -2 ln L + 2 (m + (m+1) p) for m cut points and p params per segment.
inline double aic(double log_lik, std::size_t num_cuts, std::size_t params_per_segment = 3) {
    require(params_per_segment >= 1, Err::InvalidArgument, "p must be >= 1");
    const double m = static_cast<double>(num_cuts);
    const double p = static_cast<double>(params_per_segment);
    return -2.0 * log_lik + 2.0 * (m + (m + 1.0) * p);
}

struct SegmentOptions {
    double relaxation = 1.10;  // pick the smallest m with AIC <= min + (relaxation-1)*|min|
    int score_window_days = 7;  // candidate scoring looks this many days around the cut
    int exact_top_k = 2;        // candidates promoted to exact evaluation per round
    bool use_cache = true;

    void validate() const {
        require(relaxation >= 1.0, Err::InvalidConfig, "relaxation must be >= 1");
        require(score_window_days >= 1 && exact_top_k >= 1, Err::InvalidConfig,
                "bad segmentation options");
    }
};

struct AicTracePoint {
    std::size_t num_cuts = 0;
    double aic = 0.0;
    std::vector<std::size_t> cut_points;
};

struct SegmentationResult {
    std::vector<std::size_t> cut_points;       // interior day-boundary ticks
    std::vector<HiveParams> params;            // one per segment (cuts + 1)
    std::vector<FitResult> segment_fits;       // aligned with params
    TemperatureSeries reconstruction;
    double aic = 0.0;
    std::vector<AicTracePoint> aic_trace;
    double sigma_mle = 0.0;                    // fixed sigma when that policy is active
};

namespace detail {

class GreedySegmenter {
public:
    GreedySegmenter(const HiveDataset& dataset, const SearchSpace& space,
                    const ModelConfig& config, const LikelihoodSpec& lik,
                    const SegmentOptions& options, const FitOptions& fit_options)
        : ds_(dataset), fitter_(dataset, space, config, fit_options), lik_(lik), opt_(options) {
        lik_.validate();
        opt_.validate();
        require(dataset.num_days() >= 2, Err::InsufficientDays,
                "segmentation needs at least 2 days");
    }

    SegmentationResult run() {
        const std::size_t n = ds_.size();
        std::vector<std::size_t> cuts; // committed, sorted
        double total_sse = 0.0;
        std::size_t total_n = 0;
        {
            const FitResult& whole = exact_fit({0, n});
            total_sse = whole.sse;
            total_n = whole.n_used;
        }
        LogLik ll = loglik_from_sse(total_sse, total_n, lik_);
        double current_aic = model_aic(ll, 0);
        std::vector<AicTracePoint> trace{{0, current_aic, {}}};

        while (!ll.zero_variance) {
            std::vector<std::pair<double, std::size_t>> scored;
            for (std::size_t c : ds_.day_boundaries) {
                if (c == 0 || committed(cuts, c)) continue;
                scored.emplace_back(score_candidate(cuts, c), c);
            }
            if (scored.empty()) break;
            std::sort(scored.begin(), scored.end());

            std::optional<std::pair<double, std::size_t>> best; // (aic, cut)
            const int k = std::min<std::size_t>(opt_.exact_top_k, scored.size());
            for (int i = 0; i < k; ++i) {
                const auto [delta, cut] = scored[i];
                if (!std::isfinite(delta)) break;
                const auto [a, b] = parent_span(cuts, cut);
                try {
                    const FitResult& left = exact_fit({a, cut});
                    const FitResult& right = exact_fit({cut, b});
                    const FitResult& parent = exact_fit({a, b});
                    const double sse = total_sse - parent.sse + left.sse + right.sse;
                    const std::size_t nn = total_n - parent.n_used + left.n_used + right.n_used;
                    const double cand_aic =
                        model_aic(loglik_from_sse(sse, nn, lik_), cuts.size() + 1);
                    if (!best || cand_aic < best->first ||
                        (cand_aic == best->first && cut < best->second))
                        best = {cand_aic, cut};
                } catch (const Error&) {
                    // unfit-table half (e.g. a day of missing data): skip candidate
                }
            }
            if (!best || best->first >= current_aic) break;

            const std::size_t cut = best->second;
            const auto [a, b] = parent_span(cuts, cut);
            total_sse += exact_fit({a, cut}).sse + exact_fit({cut, b}).sse - exact_fit({a, b}).sse;
            total_n += exact_fit({a, cut}).n_used + exact_fit({cut, b}).n_used -
                       exact_fit({a, b}).n_used;
            cuts.insert(std::lower_bound(cuts.begin(), cuts.end(), cut), cut);
            current_aic = best->first;
            ll = loglik_from_sse(total_sse, total_n, lik_);
            trace.push_back({cuts.size(), current_aic, cuts});
        }

        return assemble(pick_from_trace(trace), trace);
    }

private:
    static bool committed(const std::vector<std::size_t>& cuts, std::size_t c) {
        return std::binary_search(cuts.begin(), cuts.end(), c);
    }

    std::pair<std::size_t, std::size_t> parent_span(const std::vector<std::size_t>& cuts,
                                                    std::size_t c) const {
        std::size_t a = 0, b = ds_.size();
        for (std::size_t cp : cuts) {
            if (cp <= c) a = cp;
            if (cp > c) { b = cp; break; }
        }
        return {a, b};
    }

    const FitResult& exact_fit(SegmentSpan span) {
        const auto key = std::make_pair(span.start, span.end);
        if (opt_.use_cache) {
            const auto it = exact_cache_.find(key);
            if (it != exact_cache_.end()) return it->second;
        }
        return exact_cache_.insert_or_assign(key, fitter_.fit(span)).first->second;
    }

    // Split-versus-unsplit refit gain inside a window of score_window_days
    // on each side of the candidate (a windowed likelihood-ratio statistic).
    // Comparing against a refit of the same window, rather than the parent's
    // residuals, keeps the score focused on the cut itself when the parent
    // params misfit a whole region. Negative is better; +inf means the
    // candidate cannot be evaluated.
    double score_candidate(const std::vector<std::size_t>& cuts, std::size_t c) {
        const auto [a, b] = parent_span(cuts, c);
        const std::size_t day_c = ds_.day_of_tick(c);
        const std::size_t day_a = ds_.day_of_tick(a);
        const std::size_t w = static_cast<std::size_t>(opt_.score_window_days);
        const std::size_t wa_day = day_c > day_a + w ? day_c - w : day_a;
        const std::size_t wa = ds_.day_boundaries[wa_day];
        std::size_t wb = b;
        if (day_c + w < ds_.num_days()) wb = std::min(b, ds_.day_boundaries[day_c + w]);

        const FitResult& parent = exact_fit({a, b});
        try {
            const double left = scored_sse({wa, c}, {a, b}, parent.params);
            const double right = scored_sse({c, wb}, {a, b}, parent.params);
            const double whole = scored_sse({wa, wb}, {a, b}, parent.params);
            return left + right - whole;
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    }

    double scored_sse(SegmentSpan span, SegmentSpan parent, const HiveParams& warm) {
        const auto key = std::make_tuple(span.start, span.end, parent.start, parent.end);
        if (opt_.use_cache) {
            const auto it = score_cache_.find(key);
            if (it != score_cache_.end()) return it->second;
        }
        return score_cache_.insert_or_assign(key, fitter_.fit_screened(span, warm).sse)
            .first->second;
    }

    double model_aic(const LogLik& ll, std::size_t num_cuts) const {
        return aic(ll.value, num_cuts);
    }

    // Smallest m whose AIC stays within the 10% band above the trace minimum.
    const AicTracePoint& pick_from_trace(const std::vector<AicTracePoint>& trace) const {
        double min_aic = trace.front().aic;
        for (const auto& t : trace) min_aic = std::min(min_aic, t.aic);
        if (std::isinf(min_aic)) {
            for (const auto& t : trace)
                if (std::isinf(t.aic)) return t;
        }
        const double threshold = min_aic + (opt_.relaxation - 1.0) * std::abs(min_aic);
        for (const auto& t : trace)
            if (t.aic <= threshold) return t;
        return trace.back(); // unreachable: the minimum always qualifies
    }

    SegmentationResult assemble(const AicTracePoint& chosen,
                                const std::vector<AicTracePoint>& trace) {
        SegmentationResult out;
        out.cut_points = chosen.cut_points;
        out.aic_trace = trace;
        out.aic = chosen.aic;

        std::vector<std::size_t> edges{0};
        edges.insert(edges.end(), chosen.cut_points.begin(), chosen.cut_points.end());
        edges.push_back(ds_.size());
        std::vector<std::pair<SegmentSpan, HiveParams>> spans;
        double sse = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            const FitResult& fit = exact_fit({edges[i], edges[i + 1]});
            out.params.push_back(fit.params);
            out.segment_fits.push_back(fit);
            spans.emplace_back(SegmentSpan{edges[i], edges[i + 1]}, fit.params);
            sse += fit.sse;
            n += fit.n_used;
        }
        out.sigma_mle = lik_.policy == LikelihoodSpec::SigmaPolicy::Fixed
                            ? lik_.fixed_sigma
                            : std::sqrt(n ? sse / static_cast<double>(n) : 0.0);
        out.reconstruction = reconstruct(ds_, spans, fitter_.config());
        return out;
    }

    const HiveDataset& ds_;
    Fitter fitter_;
    LikelihoodSpec lik_;
    SegmentOptions opt_;
    std::map<std::pair<std::size_t, std::size_t>, FitResult> exact_cache_;
    std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, double> score_cache_;
};

} // namespace detail

/// Greedy forward cut-point selection over interior day boundaries,
/// minimizing the model AIC, with the parsimony relaxation applied to the
/// descent trace. Candidates are ranked by a windowed refit score; the top
/// few are evaluated exactly, and committed models always carry exact
/// multistart fits.
inline SegmentationResult segment(const HiveDataset& dataset, const SearchSpace& space,
                                  const ModelConfig& config, const LikelihoodSpec& lik = {},
                                  const SegmentOptions& options = {},
                                  const FitOptions& fit_options = {}) {
    return detail::GreedySegmenter(dataset, space, config, lik, options, fit_options).run();
}

} // namespace hivetherm
