#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hivetherm/errors.hpp"
#include "hivetherm/time_series.hpp"

namespace hivetherm {

enum class BaselineId { Persistence, SeasonalNaive24, ARX, HoltWintersAdditive };

inline const char* to_string(BaselineId id) {
    switch (id) {
    case BaselineId::Persistence:         return "persistence";
    case BaselineId::SeasonalNaive24:     return "seasonal_naive24";
    case BaselineId::ARX:                 return "arx";
    case BaselineId::HoltWintersAdditive: return "holt_winters_additive";
    }
    return "?";
}

inline std::optional<BaselineId> parse_baseline(const std::string& s) {
    if (s == "persistence") return BaselineId::Persistence;
    if (s == "seasonal_naive24") return BaselineId::SeasonalNaive24;
    if (s == "arx") return BaselineId::ARX;
    if (s == "holt_winters_additive" || s == "holt_winters") return BaselineId::HoltWintersAdditive;
    return std::nullopt;
}

namespace detail {

// Missing ticks bridged by last observation carried forward (leading gaps
// take the first present value). Baseline-only: the model path never fills.
inline std::vector<double> locf(const TemperatureSeries& s) {
    require(s.present_count() > 0, Err::InsufficientHistory, "series entirely missing");
    std::vector<double> out(s.values);
    const std::size_t first = *s.first_present();
    for (std::size_t i = 0; i < first; ++i) out[i] = out[first];
    for (std::size_t i = first + 1; i < out.size(); ++i)
        if (is_missing(out[i])) out[i] = out[i - 1];
    return out;
}

// Dense Gaussian elimination with partial pivoting; false when singular.
inline bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                        std::vector<double>& x) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-250) return false;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

} // namespace detail

/// Common surface for the reference forecasters. All are deterministic.
class BaselineForecaster {
public:
    virtual ~BaselineForecaster() = default;
    virtual void fit(const TemperatureSeries& core, const TemperatureSeries& ext) = 0;
    virtual TemperatureSeries predict(std::size_t horizon,
                                      const TemperatureSeries& future_ext) const = 0;
    virtual std::string name() const = 0;

protected:
    static TemperatureSeries make_output(const TemperatureSeries& history, std::size_t horizon) {
        TemperatureSeries out;
        out.start_time = history.start_time + kHour * static_cast<std::int64_t>(history.size());
        out.values.assign(horizon, missing());
        return out;
    }
};

class PersistenceForecaster final : public BaselineForecaster {
public:
    void fit(const TemperatureSeries& core, const TemperatureSeries&) override {
        auto last = core.last_present();
        require(last.has_value(), Err::InsufficientHistory, "no core observations");
        last_value_ = core.values[*last];
        history_len_ = core.size();
        origin_ = core.start_time;
        fitted_ = true;
    }

    TemperatureSeries predict(std::size_t horizon, const TemperatureSeries&) const override {
        require(fitted_, Err::InvalidArgument, "predict before fit");
        TemperatureSeries out;
        out.start_time = origin_ + kHour * static_cast<std::int64_t>(history_len_);
        out.values.assign(horizon, last_value_);
        return out;
    }

    std::string name() const override { return to_string(BaselineId::Persistence); }

private:
    bool fitted_ = false;
    double last_value_ = 0.0;
    std::size_t history_len_ = 0;
    TimePoint origin_{};
};

class SeasonalNaiveForecaster final : public BaselineForecaster {
public:
    static constexpr std::size_t kSeason = 24;

    void fit(const TemperatureSeries& core, const TemperatureSeries&) override {
        require(core.size() >= 2 * kSeason, Err::InsufficientHistory,
                "seasonal naive needs at least 2 full days");
        const auto bridged = detail::locf(core);
        history_len_ = core.size();
        origin_ = core.start_time;
        last_day_.assign(bridged.end() - kSeason, bridged.end());
        fitted_ = true;
    }

    TemperatureSeries predict(std::size_t horizon, const TemperatureSeries&) const override {
        require(fitted_, Err::InvalidArgument, "predict before fit");
        TemperatureSeries out;
        out.start_time = origin_ + kHour * static_cast<std::int64_t>(history_len_);
        out.values.resize(horizon);
        for (std::size_t k = 0; k < horizon; ++k) out.values[k] = last_day_[k % kSeason];
        return out;
    }

    std::string name() const override { return to_string(BaselineId::SeasonalNaive24); }

private:
    bool fitted_ = false;
    std::vector<double> last_day_;
    std::size_t history_len_ = 0;
    TimePoint origin_{};
};

/// Autoregression with exogenous external-temperature terms, ordinary least
/// squares. Orders picked by AIC over q, r in {1..6} unless fixed at
/// construction; exogenous lags are contemporaneous-first (x[t] .. x[t-r+1]).
class ArxForecaster final : public BaselineForecaster {
public:
    ArxForecaster() = default;
    ArxForecaster(int q, int r) : fixed_q_(q), fixed_r_(r) {
        require(q >= 1 && r >= 0, Err::InvalidArgument, "bad ARX order");
    }

    void fit(const TemperatureSeries& core, const TemperatureSeries& ext) override {
        require(core.size() == ext.size(), Err::InvalidArgument, "core/ext misaligned");
        y_ = detail::locf(core);
        x_ = detail::locf(ext);
        history_len_ = core.size();
        origin_ = core.start_time;
        if (fixed_q_) {
            fit_order(*fixed_q_, *fixed_r_);
        } else {
            bool any = false;
            for (int q = 1; q <= 6; ++q) {
                for (int r = 1; r <= 6; ++r) {
                    Model m;
                    if (!try_fit_order(q, r, m)) continue;
                    if (!any || m.aic < model_.aic) {
                        model_ = m;
                        any = true;
                    }
                }
            }
            require(any, Err::InsufficientHistory, "no ARX order fits the history");
        }
        fitted_ = true;
    }

    TemperatureSeries predict(std::size_t horizon,
                              const TemperatureSeries& future_ext) const override {
        require(fitted_, Err::InvalidArgument, "predict before fit");
        require(future_ext.size() >= horizon || model_.r == 0, Err::InvalidArgument,
                "ARX prediction needs future external values");
        // recursive multi-step: predictions feed back as lags
        std::vector<double> y = y_;
        std::vector<double> x = x_;
        double last_x = x.empty() ? 0.0 : x.back();
        for (std::size_t k = 0; k < horizon; ++k) {
            double v = last_x;
            if (k < future_ext.size() && !is_missing(future_ext.values[k]))
                v = future_ext.values[k];
            last_x = v;
            x.push_back(v);
        }
        TemperatureSeries out;
        out.start_time = origin_ + kHour * static_cast<std::int64_t>(history_len_);
        out.values.resize(horizon);
        for (std::size_t k = 0; k < horizon; ++k) {
            const std::size_t t = history_len_ + k;
            double v = model_.coef[0];
            for (int i = 1; i <= model_.q; ++i) v += model_.coef[i] * y[t - i];
            for (int j = 0; j < model_.r; ++j) v += model_.coef[1 + model_.q + j] * x[t - j];
            y.push_back(v);
            out.values[k] = v;
        }
        return out;
    }

    std::string name() const override { return to_string(BaselineId::ARX); }

    int order_q() const { return model_.q; }
    int order_r() const { return model_.r; }
    double aic() const { return model_.aic; }
    bool ridge_fallback() const { return model_.ridge; }
    const std::vector<double>& coefficients() const { return model_.coef; }
    const std::vector<double>& residuals() const { return model_.residuals; }

private:
    struct Model {
        int q = 0, r = 0;
        std::vector<double> coef; // [intercept, a_1..a_q, b_0..b_{r-1}]
        std::vector<double> residuals;
        double aic = 0.0;
        bool ridge = false;
    };

    void fit_order(int q, int r) {
        Model m;
        require(try_fit_order(q, r, m), Err::InsufficientHistory,
                "history too short for ARX(" + std::to_string(q) + "," + std::to_string(r) + ")");
        model_ = m;
    }

    bool try_fit_order(int q, int r, Model& m) const {
        const std::size_t n = y_.size();
        const std::size_t t0 = std::max<std::size_t>(q, r > 0 ? r - 1 : 0);
        const std::size_t k = 1 + q + r;
        if (n < t0 + k + 2) return false;
        const std::size_t rows = n - t0;

        std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
        std::vector<double> xty(k, 0.0);
        std::vector<double> row(k);
        auto fill_row = [&](std::size_t t) {
            row[0] = 1.0;
            for (int i = 1; i <= q; ++i) row[i] = y_[t - i];
            for (int j = 0; j < r; ++j) row[1 + q + j] = x_[t - j];
        };
        for (std::size_t t = t0; t < n; ++t) {
            fill_row(t);
            for (std::size_t a = 0; a < k; ++a) {
                xty[a] += row[a] * y_[t];
                for (std::size_t b = a; b < k; ++b) xtx[a][b] += row[a] * row[b];
            }
        }
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < a; ++b) xtx[a][b] = xtx[b][a];

        std::vector<double> coef;
        bool ridge = false;
        if (!detail::solve_dense(xtx, xty, coef)) {
            for (std::size_t d = 0; d < k; ++d) xtx[d][d] += 1e-6;
            if (!detail::solve_dense(xtx, xty, coef)) return false;
            ridge = true;
        }

        double sse = 0.0;
        std::vector<double> residuals(rows);
        for (std::size_t t = t0; t < n; ++t) {
            fill_row(t);
            double pred = 0.0;
            for (std::size_t a = 0; a < k; ++a) pred += coef[a] * row[a];
            residuals[t - t0] = y_[t] - pred;
            sse += residuals[t - t0] * residuals[t - t0];
        }
        const double dn = static_cast<double>(rows);
        m.q = q;
        m.r = r;
        m.coef = std::move(coef);
        m.residuals = std::move(residuals);
        m.aic = dn * std::log(std::max(sse / dn, 1e-300)) + 2.0 * static_cast<double>(k + 1);
        m.ridge = ridge;
        return true;
    }

    std::optional<int> fixed_q_, fixed_r_;
    bool fitted_ = false;
    std::vector<double> y_, x_;
    std::size_t history_len_ = 0;
    TimePoint origin_{};
    Model model_;
};

/// Additive Holt-Winters with a 24-tick season. Smoothing weights are picked
/// by grid search over {0.05..0.95 step 0.05}^3 on in-sample one-step RMSE.
class HoltWintersForecaster final : public BaselineForecaster {
public:
    static constexpr std::size_t kSeason = 24;

    void fit(const TemperatureSeries& core, const TemperatureSeries&) override {
        require(core.size() >= 2 * kSeason, Err::InsufficientHistory,
                "Holt-Winters needs at least 2 full days");
        const auto y = detail::locf(core);
        history_len_ = core.size();
        origin_ = core.start_time;

        double best_rmse = 0.0;
        bool any = false;
        for (int ia = 1; ia <= 19; ++ia) {
            for (int ib = 1; ib <= 19; ++ib) {
                for (int ig = 1; ig <= 19; ++ig) {
                    const double a = 0.05 * ia, b = 0.05 * ib, g = 0.05 * ig;
                    State st;
                    const double rmse = run(y, a, b, g, st);
                    if (!any || rmse < best_rmse) {
                        best_rmse = rmse;
                        alpha_ = a;
                        beta_ = b;
                        gamma_ = g;
                        state_ = st;
                        any = true;
                    }
                }
            }
        }
        in_sample_rmse_ = best_rmse;
        fitted_ = true;
    }

    TemperatureSeries predict(std::size_t horizon, const TemperatureSeries&) const override {
        require(fitted_, Err::InvalidArgument, "predict before fit");
        TemperatureSeries out;
        out.start_time = origin_ + kHour * static_cast<std::int64_t>(history_len_);
        out.values.resize(horizon);
        for (std::size_t k = 0; k < horizon; ++k) {
            const double h = static_cast<double>(k + 1);
            out.values[k] = state_.level + h * state_.trend +
                            state_.season[(history_len_ + k) % kSeason];
        }
        return out;
    }

    std::string name() const override { return to_string(BaselineId::HoltWintersAdditive); }

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double gamma() const { return gamma_; }
    double in_sample_rmse() const { return in_sample_rmse_; }

private:
    struct State {
        double level = 0.0;
        double trend = 0.0;
        std::array<double, kSeason> season{};
    };

    // Runs the recursion; returns one-step RMSE past the initialization span.
    static double run(const std::vector<double>& y, double alpha, double beta, double gamma,
                      State& st) {
        double mean1 = 0.0, mean2 = 0.0;
        for (std::size_t j = 0; j < kSeason; ++j) {
            mean1 += y[j];
            mean2 += y[kSeason + j];
        }
        mean1 /= kSeason;
        mean2 /= kSeason;
        st.level = mean2;
        st.trend = (mean2 - mean1) / static_cast<double>(kSeason);
        for (std::size_t j = 0; j < kSeason; ++j)
            st.season[j] = 0.5 * ((y[j] - mean1) + (y[kSeason + j] - mean2));

        double sse = 0.0;
        std::size_t n_pred = 0;
        for (std::size_t t = 2 * kSeason; t < y.size(); ++t) {
            const std::size_t ph = t % kSeason;
            const double pred = st.level + st.trend + st.season[ph];
            const double err = y[t] - pred;
            sse += err * err;
            ++n_pred;
            const double prev_level = st.level;
            st.level = alpha * (y[t] - st.season[ph]) + (1.0 - alpha) * (st.level + st.trend);
            st.trend = beta * (st.level - prev_level) + (1.0 - beta) * st.trend;
            st.season[ph] = gamma * (y[t] - st.level) + (1.0 - gamma) * st.season[ph];
        }
        return n_pred ? std::sqrt(sse / static_cast<double>(n_pred)) : 0.0;
    }

    bool fitted_ = false;
    double alpha_ = 0.2, beta_ = 0.1, gamma_ = 0.1;
    double in_sample_rmse_ = 0.0;
    State state_;
    std::size_t history_len_ = 0;
    TimePoint origin_{};
};

inline std::unique_ptr<BaselineForecaster> make_baseline(BaselineId id) {
    switch (id) {
    case BaselineId::Persistence:         return std::make_unique<PersistenceForecaster>();
    case BaselineId::SeasonalNaive24:     return std::make_unique<SeasonalNaiveForecaster>();
    case BaselineId::ARX:                 return std::make_unique<ArxForecaster>();
    case BaselineId::HoltWintersAdditive: return std::make_unique<HoltWintersForecaster>();
    }
    fail(Err::InvalidArgument, "unknown baseline");
}

} // namespace hivetherm
