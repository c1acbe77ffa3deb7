#pragma once

// Monte-Carlo harness: controlled paths, time-averaged PnL, ensemble
// statistics (mean, CI, VaR/ES), strategy comparison, gamma sweeps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ergoliq/errors.hpp"
#include "ergoliq/market_model.hpp"
#include "ergoliq/rng.hpp"
#include "ergoliq/strategies.hpp"

namespace ergoliq {

struct SimConfig {
    double dt = 0.1;
    double horizon = 2000.0;
    std::size_t n_paths = 500;
    std::uint64_t seed = 20240601;
    CashMode cash_mode = CashMode::Simplified;
    Strategy strategy = Strategy::ergodic();
    std::size_t timeseries_stride = 0; ///< 0: no sampled trajectory
    unsigned workers = 0;              ///< 0: hardware concurrency
};

inline void validate(const SimConfig& c) {
    if (!(c.dt > 0) || !std::isfinite(c.dt)) throw InvalidParameter("dt", "must be > 0");
    if (!(c.horizon >= c.dt) || !std::isfinite(c.horizon))
        throw InvalidParameter("horizon", "must be >= dt");
    if (c.n_paths < 1) throw InvalidParameter("paths", "must be >= 1");
    if (c.horizon > c.strategy.max_horizon() * (1 + 1e-12))
        throw InvalidParameter("horizon", "exceeds the horizon of strategy " + c.strategy.name());
}

/// Number of Euler steps; the simulated horizon is steps * dt.
inline std::size_t step_count(const SimConfig& c) {
    return static_cast<std::size_t>(std::max<long long>(1, std::llround(c.horizon / c.dt)));
}

struct TimePoint {
    double t = 0, S = 0, Q = 0, X = 0;
    double running_avg_pnl = 0;
};

struct PathResult {
    MarketState terminal;
    double horizon = 0;          ///< simulated T
    double penalty_integral = 0; ///< left-Riemann sum of Q^2 dt
    double avg_pnl = 0;          ///< (X_T + S_T Q_T - x0 - S0 q0 - phi * penalty) / T
    double avg_reward = 0;       ///< (1/T) * left-Riemann sum of F(Q, nu) dt
    double traded = 0;           ///< sum of nu dt
    double jump_sum = 0;         ///< signed sum of liquidation sizes
    std::vector<TimePoint> series;
};

namespace detail {
inline double pnl_per_time(const MarketState& s, const MarketParams& p, double penalty, double t) {
    return (s.X + s.S * s.Q - p.x0 - p.s0 * p.q0 - p.phi * penalty) / t;
}
} // namespace detail

/// Simulates one controlled path. Deterministic in (config, params, path_seed).
inline PathResult run_path(const SimConfig& config, const MarketParams& params, std::uint64_t path_seed) {
    validate(params);
    validate(config);
    const std::size_t steps = step_count(config);
    const double dt = config.dt;
    const double T = static_cast<double>(steps) * dt;

    Rng jump_rng = make_rng(derive_seed(path_seed, 0));
    Rng diffusion_rng = make_rng(derive_seed(path_seed, 1));
    const std::vector<JumpEvent> jumps = sample_jumps(params, T, jump_rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sqrt_dt = std::sqrt(dt);

    PathResult out;
    out.horizon = T;
    MarketState state = initial_state(params);
    std::size_t next_jump = 0;
    double reward = 0;
    const std::size_t stride = config.timeseries_stride;
    if (stride > 0) out.series.push_back({0.0, state.S, state.Q, state.X, 0.0});

    for (std::size_t n = 0; n < steps; ++n) {
        state.t = static_cast<double>(n) * dt;
        const double nu = config.strategy.rate(state.t, state.Q, params, dt);
        out.penalty_integral += state.Q * state.Q * dt;
        reward += running_reward(state.Q, nu, params) * dt;
        out.traded += nu * dt;

        const double t_end = static_cast<double>(n + 1) * dt;
        const std::size_t first = next_jump;
        while (next_jump < jumps.size() && (jumps[next_jump].time <= t_end || n + 1 == steps))
            ++next_jump;
        const std::span<const JumpEvent> in_step(jumps.data() + first, next_jump - first);
        for (const JumpEvent& j : in_step) out.jump_sum += j.side == Side::Long ? j.size : -j.size;

        const double dW = sqrt_dt * normal(diffusion_rng);
        state = step(state, nu, dt, dW, in_step, params, config.cash_mode);
        state.t = t_end;

        if (stride > 0 && ((n + 1) % stride == 0 || n + 1 == steps))
            out.series.push_back({state.t, state.S, state.Q, state.X,
                                  detail::pnl_per_time(state, params, out.penalty_integral, state.t)});
    }
    out.terminal = state;
    out.avg_pnl = detail::pnl_per_time(state, params, out.penalty_integral, T);
    out.avg_reward = reward / T;
    return out;
}

// ---------------------------------------------------------------------------
// Ensemble statistics
// ---------------------------------------------------------------------------

struct EnsembleStats {
    std::size_t n = 0;
    double mean = 0;
    double std_dev = 0; ///< sample standard deviation (n - 1)
    double std_err = 0;
    double ci95_low = 0;
    double ci95_high = 0;
    double var95 = 0; ///< 5th percentile of the reward sample, nearest rank
    double es95 = 0;  ///< mean of samples <= var95
};

/// Nearest-rank percentile: the ceil(level * n)-th smallest sample (at least the first).
inline double nearest_rank(std::span<const double> sorted, double level) {
    if (sorted.empty()) throw PreconditionError("percentile of an empty sample");
    const auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(sorted.size()) - 1e-9));
    return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

inline EnsembleStats summarize(std::span<const double> samples) {
    if (samples.empty()) throw PreconditionError("summarize: no samples");
    EnsembleStats s;
    s.n = samples.size();
    const double n = static_cast<double>(s.n);
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.std_dev = s.n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    s.std_err = s.std_dev / std::sqrt(n);
    s.ci95_low = s.mean - 1.96 * s.std_err;
    s.ci95_high = s.mean + 1.96 * s.std_err;

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    s.var95 = nearest_rank(sorted, 0.05);
    double tail = 0;
    std::size_t count = 0;
    for (double x : sorted) {
        if (x > s.var95) break;
        tail += x;
        ++count;
    }
    s.es95 = tail / static_cast<double>(count);
    if (sorted.front() == sorted.back()) {
        // Constant sample: avoid one-ulp noise from the summation.
        s.mean = s.var95 = s.es95 = s.ci95_low = s.ci95_high = sorted.front();
        s.std_dev = s.std_err = 0;
    }
    return s;
}

/// Mean and standard error of the per-path differences a[i] - b[i].
struct PairedDifference {
    double mean = 0;
    double std_err = 0;
};

inline PairedDifference paired_difference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw PreconditionError("paired_difference: samples must be non-empty and equally sized");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const EnsembleStats s = summarize(d);
    return {s.mean, s.std_err};
}

/// Runs fn(i) for i in [0, n) on `workers` threads. Callers write to slot i
/// only, so the result does not depend on scheduling.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += workers) fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Ensemble {
    EnsembleStats stats;
    std::vector<PathResult> paths;

    std::vector<double> avg_pnl() const {
        std::vector<double> v;
        v.reserve(paths.size());
        for (const auto& p : paths) v.push_back(p.avg_pnl);
        return v;
    }
};

/// n_paths independent paths; path i is seeded with derive_seed(config.seed, i).
inline Ensemble run_ensemble(const SimConfig& config, const MarketParams& params) {
    validate(params);
    validate(config);
    Ensemble e;
    e.paths.resize(config.n_paths);
    parallel_for(config.n_paths, config.workers, [&](std::size_t i) {
        e.paths[i] = run_path(config, params, derive_seed(config.seed, i));
    });
    const std::vector<double> pnl = e.avg_pnl();
    e.stats = summarize(pnl);
    return e;
}

// ---------------------------------------------------------------------------
// Strategy comparison under common random numbers
// ---------------------------------------------------------------------------

struct CompareRow {
    std::string strategy;
    CashMode cash_mode = CashMode::Simplified;
    Ensemble ensemble;
};

/// One row per (strategy, cash mode), in the given order, all sharing the
/// master seed of `base` and therefore the same jump and Brownian draws.
inline std::vector<CompareRow> compare_strategies(const SimConfig& base, const MarketParams& params,
                                                  const std::vector<Strategy>& strategies,
                                                  const std::vector<CashMode>& modes = {CashMode::Full,
                                                                                        CashMode::Simplified}) {
    std::vector<CompareRow> rows;
    for (const Strategy& s : strategies)
        for (CashMode m : modes) {
            SimConfig c = base;
            c.strategy = s;
            c.cash_mode = m;
            rows.push_back({s.name(), m, run_ensemble(c, params)});
        }
    return rows;
}

// ---------------------------------------------------------------------------
// Gamma sweeps
// ---------------------------------------------------------------------------

/// Sweepable constants: r, eta, lambda (both sides), k, b, sigma.
inline void set_param(MarketParams& p, const std::string& name, double value) {
    if (name == "r") p.r = value;
    else if (name == "eta") p.eta_mean = value;
    else if (name == "lambda") p.lambda_plus = p.lambda_minus = value;
    else if (name == "k") p.k = value;
    else if (name == "b") p.b = value;
    else if (name == "sigma") p.sigma = value;
    else throw ConfigError("cannot sweep '" + name + "' (expected r, eta, lambda, k, b, sigma)");
}

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepRow {
    std::vector<double> values; ///< one per axis
    double value = 0;           ///< gamma (closed form) or mean avg_pnl (Monte Carlo)
    double std_err = 0;
    std::optional<EnsembleStats> mc; ///< set in Monte-Carlo mode
};

/// Evaluates gamma over the grid spanned by one or two axes (axis 1 outermost).
///
/// Without `mc` the closed form is used. With `mc` each grid point runs an
/// ergodic-strategy ensemble under mc->cash_mode; grid point j (row-major)
/// gets master seed derive_seed(mc->seed, j), so the points are independent
/// estimates.
inline std::vector<SweepRow> sweep_gamma(const std::vector<SweepAxis>& axes, const MarketParams& params,
                                         const std::optional<SimConfig>& mc = std::nullopt) {
    if (axes.empty() || axes.size() > 2) throw ConfigError("sweep needs one or two axes");
    for (const auto& a : axes)
        if (a.values.empty()) throw ConfigError("sweep axis '" + a.name + "' has no values");
    const std::size_t inner = axes.size() == 2 ? axes[1].values.size() : 1;
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < axes[0].values.size(); ++i)
        for (std::size_t j = 0; j < inner; ++j) {
            MarketParams p = params;
            SweepRow row;
            row.values.push_back(axes[0].values[i]);
            set_param(p, axes[0].name, axes[0].values[i]);
            if (axes.size() == 2) {
                row.values.push_back(axes[1].values[j]);
                set_param(p, axes[1].name, axes[1].values[j]);
            }
            validate(p);
            if (!mc) {
                row.value = ergodic_gamma(p);
            } else {
                SimConfig c = *mc;
                c.strategy = Strategy::ergodic();
                c.seed = derive_seed(mc->seed, rows.size());
                const Ensemble e = run_ensemble(c, p);
                row.value = e.stats.mean;
                row.std_err = e.stats.std_err;
                row.mc = e.stats;
            }
            rows.push_back(std::move(row));
        }
    return rows;
}

} // namespace ergoliq
