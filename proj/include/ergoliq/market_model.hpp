#pragma once

// Controlled midprice / inventory / cash dynamics with Poisson liquidation
// arrivals and linear price impact:
//
//   dS = -b nu dt + sigma dW
//   dQ = -nu dt + zeta+ dN+ - zeta- dN-
//   dX = (S - k nu) nu dt + r zeta+ S* dN+ + r zeta- S* dN-
//
// where S* is the pre-jump midprice (CashMode::Full) or the initial midprice
// S0 (CashMode::Simplified, i.e. margin balances are never re-marked).

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergoliq/errors.hpp"
#include "ergoliq/rng.hpp"

namespace ergoliq {

/// Model constants. Defaults are the reference experiment: lambda = 0.05/s on
/// each side, sizes ~ N(10, 0.5), sigma = 0.5, b = 1e-5, k = 1e-3, phi = 1e-4,
/// S0 = 10, flat initial inventory, r = 0.05.
///
/// `r` is the margin fraction collected per unit notional on liquidation
/// (inverse leverage). For a lending protocol it can be read as the
/// liquidation bonus instead; nothing else changes.
struct MarketParams {
    double lambda_plus = 0.05;  ///< long-side liquidation intensity, 1/s
    double lambda_minus = 0.05; ///< short-side liquidation intensity, 1/s
    double eta_mean = 10.0;     ///< mean distressed size, contracts
    double eta_std = 0.5;       ///< std of the size distribution
    double sigma = 0.5;         ///< midprice volatility, currency / sqrt(s)
    double b = 1e-5;            ///< permanent impact slope
    double k = 1e-3;            ///< temporary impact slope
    double phi = 1e-4;          ///< running inventory penalty
    double r = 0.05;            ///< inverse leverage
    double s0 = 10.0;
    double q0 = 0.0;
    double x0 = 0.0;

    bool symmetric() const noexcept { return lambda_plus == lambda_minus; }
    /// Common intensity of the symmetric model; throws if the sides differ.
    double lambda() const {
        if (!symmetric())
            throw PreconditionError("closed forms require lambda_plus == lambda_minus");
        return lambda_plus;
    }

    bool operator==(const MarketParams&) const = default;
};

/// Throws InvalidParameter naming the first field that breaks its domain.
inline void validate(const MarketParams& p) {
    auto require = [](bool ok, const char* field, const char* rule) {
        if (!ok) throw InvalidParameter(field, std::string("must satisfy ") + rule);
    };
    auto finite = [&](double v, const char* field) {
        require(std::isfinite(v), field, "finite");
    };
    finite(p.lambda_plus, "lambda_plus");
    finite(p.lambda_minus, "lambda_minus");
    finite(p.eta_mean, "eta_mean");
    finite(p.eta_std, "eta_std");
    finite(p.sigma, "sigma");
    finite(p.b, "b");
    finite(p.k, "k");
    finite(p.phi, "phi");
    finite(p.r, "r");
    finite(p.s0, "s0");
    finite(p.q0, "q0");
    finite(p.x0, "x0");
    require(p.k > 0, "k", "k > 0");
    require(p.phi > 0, "phi", "phi > 0");
    require(p.sigma >= 0, "sigma", "sigma >= 0");
    require(p.b >= 0, "b", "b >= 0");
    require(p.lambda_plus >= 0, "lambda_plus", "lambda_plus >= 0");
    require(p.lambda_minus >= 0, "lambda_minus", "lambda_minus >= 0");
    require(p.eta_mean > 0, "eta_mean", "eta_mean > 0");
    require(p.eta_std >= 0, "eta_std", "eta_std >= 0");
    require(p.s0 > 0, "s0", "s0 > 0");
    require(p.r >= 0 && p.r <= 1, "r", "0 <= r <= 1");
}

struct MarketState {
    double t = 0.0; ///< seconds
    double S = 0.0; ///< midprice
    double Q = 0.0; ///< signed inventory, contracts
    double X = 0.0; ///< cash

    bool operator==(const MarketState&) const = default;
};

inline MarketState initial_state(const MarketParams& p) { return {0.0, p.s0, p.q0, p.x0}; }

enum class Side { Long, Short };

/// One liquidation: a distressed long (Long, inventory grows) or short
/// (Short, inventory shrinks) position of `size` contracts moves to the exchange.
struct JumpEvent {
    double time = 0.0;
    Side side = Side::Long;
    double size = 0.0;

    bool operator==(const JumpEvent&) const = default;
};

enum class CashMode { Full, Simplified };

inline std::string_view to_string(CashMode m) noexcept {
    return m == CashMode::Full ? "full" : "simplified";
}

inline CashMode parse_cash_mode(std::string_view s) {
    if (s == "full") return CashMode::Full;
    if (s == "simplified") return CashMode::Simplified;
    throw ConfigError("cash mode must be 'full' or 'simplified', got '" + std::string(s) + "'");
}

/// One draw of N(mean, std) conditioned on being positive (redraw while <= 0).
inline double draw_size(double mean, double std, Rng& rng) {
    if (std == 0.0) return mean;
    std::normal_distribution<double> normal(mean, std);
    double x = normal(rng);
    while (x <= 0.0) x = normal(rng);
    return x;
}

/// Liquidation arrivals on (0, horizon], merged across sides and sorted by time.
///
/// Each side is an independent Poisson process sampled with exact exponential
/// interarrival times. Draw order: all long events (interarrival, size, ...),
/// then all short events, so the stream consumption is fixed for a given seed.
inline std::vector<JumpEvent> sample_jumps(const MarketParams& p, double horizon, Rng& rng) {
    if (!(horizon > 0)) throw PreconditionError("sample_jumps: horizon must be > 0");
    std::vector<JumpEvent> events;
    auto one_side = [&](double intensity, Side side) {
        if (intensity <= 0) return;
        std::exponential_distribution<double> gap(intensity);
        for (double t = gap(rng); t <= horizon; t += gap(rng))
            events.push_back({t, side, draw_size(p.eta_mean, p.eta_std, rng)});
    };
    one_side(p.lambda_plus, Side::Long);
    one_side(p.lambda_minus, Side::Short);
    std::stable_sort(events.begin(), events.end(),
                     [](const JumpEvent& a, const JumpEvent& c) { return a.time < c.time; });
    return events;
}

/// Per-unit price received when selling at rate nu (buying when nu < 0).
constexpr double execution_price(double S, double nu, double k) noexcept { return S - k * nu; }

/// One Euler-Maruyama step of length dt with trading rate nu.
///
/// Application order (fixed so a seed reproduces bit-for-bit):
///   1. midprice: S_mid = S - b nu dt + sigma dW
///   2. jumps in (t, t+dt], in the given order: Q += +/-size and
///      X += r size S* with S* = S_mid (Full) or S0 (Simplified)
///   3. control: Q -= nu dt, X += (S - k nu) nu dt at the pre-step midprice.
inline MarketState step(const MarketState& state, double nu, double dt, double dW,
                        std::span<const JumpEvent> jumps, const MarketParams& p, CashMode mode) {
    if (!(dt > 0)) throw PreconditionError("step: dt must be > 0");
    MarketState next = state;
    next.S = state.S - p.b * nu * dt + p.sigma * dW;
    const double margin_mark = mode == CashMode::Full ? next.S : p.s0;
    for (const JumpEvent& j : jumps) {
        next.Q += j.side == Side::Long ? j.size : -j.size;
        next.X += p.r * j.size * margin_mark;
    }
    next.Q -= nu * dt;
    next.X += execution_price(state.S, nu, p.k) * nu * dt;
    next.t = state.t + dt;
    return next;
}

} // namespace ergoliq
