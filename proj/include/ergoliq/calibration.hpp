#pragma once

// Estimators for the liquidation intensity and size (lambda, eta), the
// temporary impact slope k (order-book walking), and the permanent impact
// slope b (midprice change against net order flow).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergoliq/errors.hpp"

namespace ergoliq {

// ---------------------------------------------------------------------------
// lambda, eta
// ---------------------------------------------------------------------------

struct LiquidationRecord {
    double time = 0; ///< seconds from the start of the observation window
    double size = 0; ///< absolute distressed position, contracts
};

struct LambdaEtaEstimate {
    double lambda = 0;
    double eta = 0;
    std::size_t count = 0;
};

/// lambda = N / tau_N (time of the last event), eta = mean size.
///
/// Passing `window` replaces tau_N with the window length, i.e. the usual
/// N / T estimator; leave it empty for the last-event form.
inline LambdaEtaEstimate estimate_lambda_eta(std::span<const LiquidationRecord> records,
                                             std::optional<double> window = std::nullopt) {
    if (records.empty()) throw DataError("liquidation log is empty");
    double previous = -std::numeric_limits<double>::infinity();
    double total = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!std::isfinite(r.time) || r.time < previous)
            throw DataError("liquidation times must be finite and nondecreasing (record " +
                            std::to_string(i + 1) + ")");
        if (!(r.size > 0) || !std::isfinite(r.size))
            throw DataError("liquidation sizes must be > 0 (record " + std::to_string(i + 1) + ")");
        previous = r.time;
        total += r.size;
    }
    const double span = window ? *window : records.back().time;
    if (!(span > 0)) throw DataError("observation span must be > 0 (time of the last record is 0)");
    const auto n = static_cast<double>(records.size());
    return {n / span, total / n, records.size()};
}

// ---------------------------------------------------------------------------
// Regression helpers
// ---------------------------------------------------------------------------

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
    double residual_std = 0;
    double slope_std_err = 0;
    std::size_t n = 0;
};

/// Ordinary least squares of y on x, with or without an intercept.
/// Without an intercept R^2 is the uncentered 1 - RSS / sum(y^2).
inline LinearFit least_squares(std::span<const double> x, std::span<const double> y, bool with_intercept) {
    const std::size_t n = x.size();
    const std::size_t params = with_intercept ? 2 : 1;
    if (n != y.size() || n < params) throw DataError("regression needs at least " + std::to_string(params) + " points");
    LinearFit fit;
    fit.n = n;
    double mx = 0, my = 0;
    if (with_intercept) {
        for (std::size_t i = 0; i < n; ++i) {
            mx += x[i];
            my += y[i];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
    }
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0)) throw DataError("regressor has no variation");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - fit.intercept - fit.slope * x[i];
        rss += e * e;
    }
    fit.r_squared = syy > 0 ? 1.0 - rss / syy : 1.0;
    if (n > params) {
        fit.residual_std = std::sqrt(rss / static_cast<double>(n - params));
        fit.slope_std_err = fit.residual_std / std::sqrt(sxx);
    }
    return fit;
}

// ---------------------------------------------------------------------------
// k: walking the book
// ---------------------------------------------------------------------------

enum class BookSide { Bid, Ask };

struct BookLevel {
    double price = 0;
    double volume = 0;
};

/// One side of the book at one instant, best level first.
struct BookSnapshot {
    double time = 0;
    BookSide side = BookSide::Ask;
    std::vector<BookLevel> levels;
    double mid = 0;

    double depth() const {
        double v = 0;
        for (const auto& l : levels) v += l.volume;
        return v;
    }
};

/// Throws DataError unless prices are strictly monotone away from the mid,
/// volumes are positive, and the best level sits on the correct side of mid.
inline void validate(const BookSnapshot& s) {
    if (s.levels.empty()) throw DataError("book snapshot has no levels");
    const bool ask = s.side == BookSide::Ask;
    for (std::size_t i = 0; i < s.levels.size(); ++i) {
        if (!(s.levels[i].volume > 0)) throw DataError("book level volumes must be > 0");
        if (i > 0) {
            const double prev = s.levels[i - 1].price, cur = s.levels[i].price;
            if (ask ? !(cur > prev) : !(cur < prev))
                throw DataError("book level prices must be strictly monotone, best first");
        }
    }
    if (ask ? s.levels.front().price < s.mid : s.levels.front().price > s.mid)
        throw DataError("best level lies on the wrong side of the mid");
}

/// Volume-weighted price per unit for a market order of `trade_size` contracts,
/// consuming levels best first and the last one partially.
inline double walk_book(const BookSnapshot& snapshot, double trade_size) {
    if (!(trade_size > 0)) throw PreconditionError("walk_book: trade size must be > 0");
    double remaining = trade_size;
    double cost = 0;
    for (const BookLevel& level : snapshot.levels) {
        const double take = std::min(remaining, level.volume);
        cost += take * level.price;
        remaining -= take;
        if (remaining <= 0) return cost / trade_size;
    }
    if (remaining <= 1e-12 * trade_size) return cost / trade_size; // rounding in the running subtraction
    throw PreconditionError("walk_book: insufficient depth, " + std::to_string(snapshot.depth()) +
                            " contracts available for a trade of " + std::to_string(trade_size));
}

struct KEstimate {
    double k = 0;                        ///< mean of the per-snapshot slopes
    std::vector<LinearFit> fits;         ///< one per usable snapshot
    std::vector<std::size_t> used;       ///< indices of usable snapshots
    std::vector<std::size_t> skipped;    ///< snapshots with fewer than 2 usable sizes
    std::size_t skipped_sizes = 0;       ///< (snapshot, size) pairs deeper than the book
};

/// Regresses |walk_book(Q_j) - mid| on Q_j per snapshot and averages the slopes.
/// The intercept absorbs the half spread; disable it for a through-origin fit.
inline KEstimate estimate_k(std::span<const BookSnapshot> snapshots, std::span<const double> trade_sizes,
                            bool with_intercept = true) {
    KEstimate out;
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        const BookSnapshot& s = snapshots[i];
        validate(s);
        const double depth = s.depth();
        std::vector<double> xs, ys;
        for (double q : trade_sizes) {
            if (!(q > 0)) throw PreconditionError("estimate_k: trade sizes must be > 0");
            if (q > depth) {
                ++out.skipped_sizes;
                continue;
            }
            xs.push_back(q);
            ys.push_back(std::abs(walk_book(s, q) - s.mid));
        }
        if (xs.size() < 2) {
            out.skipped.push_back(i);
            continue;
        }
        out.fits.push_back(least_squares(xs, ys, with_intercept));
        out.used.push_back(i);
    }
    if (out.fits.empty()) throw DataError("estimate_k: no snapshot has two usable trade sizes");
    double sum = 0;
    for (const auto& f : out.fits) sum += f.slope;
    out.k = sum / static_cast<double>(out.fits.size());
    return out;
}

/// Q = 1, 2, ..., n.
inline std::vector<double> unit_trade_sizes(std::size_t n = 100) {
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = static_cast<double>(i + 1);
    return q;
}

// ---------------------------------------------------------------------------
// b: midprice change against net order flow
// ---------------------------------------------------------------------------

struct FlowInterval {
    double net_flow = 0;  ///< signed executed volume (buys positive)
    double delta_mid = 0; ///< midprice change over the interval
};

/// Through-origin least squares of delta_mid on net_flow.
inline LinearFit estimate_b(std::span<const FlowInterval> intervals) {
    std::vector<double> x, y;
    x.reserve(intervals.size());
    y.reserve(intervals.size());
    bool any_flow = false;
    for (const auto& iv : intervals) {
        x.push_back(iv.net_flow);
        y.push_back(iv.delta_mid);
        any_flow = any_flow || iv.net_flow != 0;
    }
    if (!any_flow) throw DataError("estimate_b: every interval has zero net flow");
    return least_squares(x, y, false);
}

} // namespace ergoliq
