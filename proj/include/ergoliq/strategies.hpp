#pragma once

// Closed-form value-function coefficients and feedback controls.
//
// Under the symmetric, linear-impact, fixed-margin model the value functions
// are quadratic in inventory, u = h0 + h2 q^2 (the linear coefficient is
// identically zero), and every optimal control is a multiple of q:
//
//   ergodic      nu*(q)    = sqrt(phi/k) q
//   discounted   nu*(q)    = (sqrt((k beta - b)^2 + 4 k phi - b^2) - k beta) / (2k) q
//   finite       nu*(t, q) = -(b + 2 h2(t)) / (2k) q
//
// The finite-horizon expressions are evaluated in terms of exp(-2 w tau),
// tau = T - t, w = sqrt(phi/k), so nothing overflows however long the horizon.

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

#include "ergoliq/errors.hpp"
#include "ergoliq/market_model.hpp"

namespace ergoliq {

/// sqrt(phi/k): the fraction of inventory disposed per unit time by the ergodic control.
inline double disposal_rate(const MarketParams& p) { return std::sqrt(p.phi / p.k); }

inline double ergodic_rate(double q, const MarketParams& p) { return disposal_rate(p) * q; }

/// Long-run optimal reward per unit time, 2 r lambda eta S0 - lambda eta^2 b - 2 lambda eta^2 sqrt(k phi).
/// Reads only lambda, eta, r, S0, b, k, phi. Requires the symmetric model.
inline double ergodic_gamma(const MarketParams& p) {
    const double lambda = p.lambda();
    const double eta = p.eta_mean;
    return 2.0 * p.r * lambda * eta * p.s0 - lambda * eta * eta * p.b -
           2.0 * lambda * eta * eta * std::sqrt(p.k * p.phi);
}

/// Running reward of the reduced problem, F(q, nu) = -k nu^2 - b nu q - phi q^2 + (lambda+ + lambda-) eta r S0.
inline double running_reward(double q, double nu, const MarketParams& p) {
    return -p.k * nu * nu - p.b * nu * q - p.phi * q * q +
           (p.lambda_plus + p.lambda_minus) * p.eta_mean * p.r * p.s0;
}

// ---------------------------------------------------------------------------
// Finite horizon with terminal penalty -alpha q^2
// ---------------------------------------------------------------------------

struct FiniteHorizonCoeffs {
    double T = 0.0;
    double alpha = 0.0;
    double xi = 0.0;          ///< (alpha - b/2 + sqrt(k phi)) / (alpha - b/2 - sqrt(k phi))
    double xi_minus_one = 0.0; ///< xi - 1, computed without cancellation
    double rate_root = 0.0;    ///< sqrt(phi/k)
};

inline FiniteHorizonCoeffs make_finite_coeffs(double T, double alpha, const MarketParams& p) {
    if (!(T > 0)) throw PreconditionError("finite horizon: T must be > 0");
    const double root = std::sqrt(p.k * p.phi);
    const double a = alpha - 0.5 * p.b;
    if (!(a > root))
        throw PreconditionError("finite horizon: requires alpha > b/2 + sqrt(k phi)");
    FiniteHorizonCoeffs c;
    c.T = T;
    c.alpha = alpha;
    c.xi_minus_one = 2.0 * root / (a - root);
    c.xi = 1.0 + c.xi_minus_one;
    c.rate_root = disposal_rate(p);
    return c;
}

namespace detail {
inline double time_to_go(double t, const FiniteHorizonCoeffs& c) {
    if (!(t >= 0 && t <= c.T))
        throw PreconditionError("finite horizon: t must lie in [0, T]");
    return c.T - t;
}
} // namespace detail

/// Quadratic coefficient h2(t); equals -alpha at t = T.
inline double finite_h2(double t, const FiniteHorizonCoeffs& c, const MarketParams& p) {
    const double tau = detail::time_to_go(t, c);
    const double em1 = std::expm1(-2.0 * c.rate_root * tau); // e^{-2 w tau} - 1
    // k w (1 + xi E) / (1 - xi E) with E = e^{2 w tau}, divided through by E.
    const double shifted = p.k * c.rate_root * (2.0 + em1 + c.xi_minus_one) / (em1 - c.xi_minus_one);
    return shifted - 0.5 * p.b;
}

/// Constant coefficient h0(t); equals 0 at t = T. Requires the symmetric model.
inline double finite_h0(double t, const FiniteHorizonCoeffs& c, const MarketParams& p) {
    const double tau = detail::time_to_go(t, c);
    const double lambda = p.lambda();
    const double eta = p.eta_mean;
    const double w = c.rate_root;
    // ln[(xi - 1) / (xi e^{w tau} - e^{-w tau})] = ln(xi - 1) - w tau - ln(xi - e^{-2 w tau})
    const double log_term =
        std::log(c.xi_minus_one) - w * tau - std::log(c.xi_minus_one - std::expm1(-2.0 * w * tau));
    return 2.0 * lambda * eta * eta * p.k * log_term +
           (lambda * eta * eta * p.b - 2.0 * p.r * lambda * eta * p.s0) * (t - c.T);
}

inline double finite_value(double t, double q, const FiniteHorizonCoeffs& c, const MarketParams& p) {
    return finite_h0(t, c, p) + finite_h2(t, c, p) * q * q;
}

/// Optimal feedback rate at (t, q); (alpha - b/2)/k * q at t = T, sqrt(phi/k) q as T - t grows.
inline double finite_rate(double t, double q, const FiniteHorizonCoeffs& c, const MarketParams& /*p*/) {
    const double tau = detail::time_to_go(t, c);
    const double em1 = std::expm1(-2.0 * c.rate_root * tau);
    return c.rate_root * (2.0 + c.xi_minus_one + em1) / (c.xi_minus_one - em1) * q;
}

// ---------------------------------------------------------------------------
// Discounted infinite horizon
// ---------------------------------------------------------------------------

struct DiscountedCoeffs {
    double beta = 0.0;
    double h2 = 0.0;
    double h0 = 0.0;
    double rate_coeff = 0.0; ///< nu*(q) = rate_coeff * q, strictly positive
};

namespace detail {
/// sqrt((k beta - b)^2 + 4 k phi - b^2), checking both admissibility conditions.
inline double discounted_root(double beta, const MarketParams& p) {
    if (!(beta >= 0)) throw PreconditionError("discounted: beta must be >= 0");
    const double kb = p.k * beta - p.b;
    const double disc = kb * kb + (4.0 * p.k * p.phi - p.b * p.b);
    if (!(disc >= 0))
        throw PreconditionError("discounted: requires (k beta - b)^2 + 4 k phi - b^2 >= 0");
    if (!(2.0 * p.phi > beta * p.b))
        throw PreconditionError("discounted: requires 2 phi > beta b");
    return std::sqrt(disc);
}
} // namespace detail

/// Feedback coefficient of the discounted control. Defined for beta >= 0;
/// beta = 0 gives the ergodic coefficient.
inline double discounted_rate_coefficient(double beta, const MarketParams& p) {
    return (detail::discounted_root(beta, p) - p.k * beta) / (2.0 * p.k);
}

inline DiscountedCoeffs make_discounted_coeffs(double beta, const MarketParams& p) {
    if (!(beta > 0)) throw PreconditionError("discounted: beta must be > 0");
    const double root = detail::discounted_root(beta, p);
    DiscountedCoeffs c;
    c.beta = beta;
    c.h2 = 0.5 * (p.k * beta - p.b) - 0.5 * root;
    const double lambda = p.lambda();
    c.h0 = 2.0 * lambda * p.eta_mean * (p.eta_mean * c.h2 + p.r * p.s0) / beta;
    c.rate_coeff = discounted_rate_coefficient(beta, p);
    if (!(c.h2 < 0)) throw PreconditionError("discounted: h2 must be negative");
    return c;
}

inline double discounted_value(double q, const DiscountedCoeffs& c) { return c.h0 + c.h2 * q * q; }

inline double discounted_rate(double q, const DiscountedCoeffs& c) { return c.rate_coeff * q; }

// ---------------------------------------------------------------------------
// Mis-calibrated benchmark: dispose of half the position every period.
// ---------------------------------------------------------------------------

inline double half_inventory_action(double q, double dt) {
    if (!(dt > 0)) throw PreconditionError("half inventory: dt must be > 0");
    return q / (2.0 * dt);
}

// ---------------------------------------------------------------------------

struct Ergodic {};
struct HalfInventory {};

/// A feedback control together with the coefficients it needs.
class Strategy {
public:
    using Variant = std::variant<Ergodic, FiniteHorizonCoeffs, DiscountedCoeffs, HalfInventory>;

    Strategy() = default;
    Strategy(Variant v, std::string name) : spec_(std::move(v)), name_(std::move(name)) {}

    static Strategy ergodic() { return {Ergodic{}, "ergodic"}; }
    static Strategy half_inventory() { return {HalfInventory{}, "half"}; }
    static Strategy finite(double T, double alpha, const MarketParams& p);
    static Strategy discounted(double beta, const MarketParams& p);

    /// Trading rate at time t with inventory q; dt is the period of the
    /// half-inventory rule and ignored by the closed-form controls.
    double rate(double t, double q, const MarketParams& p, double dt) const {
        return std::visit(
            [&](const auto& s) -> double {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Ergodic>) return ergodic_rate(q, p);
                else if constexpr (std::is_same_v<S, FiniteHorizonCoeffs>)
                    return finite_rate(t, q, s, p);
                else if constexpr (std::is_same_v<S, DiscountedCoeffs>) return discounted_rate(q, s);
                else return half_inventory_action(q, dt);
            },
            spec_);
    }

    const Variant& spec() const noexcept { return spec_; }
    const std::string& name() const noexcept { return name_; }

    /// Longest simulation horizon this control is defined on.
    double max_horizon() const noexcept {
        if (const auto* f = std::get_if<FiniteHorizonCoeffs>(&spec_)) return f->T;
        return std::numeric_limits<double>::infinity();
    }

private:
    Variant spec_ = Ergodic{};
    std::string name_ = "ergodic";
};

namespace detail {
inline std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline double parse_number(std::string_view s, std::string_view what) {
    std::string str(s);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(str, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != str.size())
        throw ConfigError("expected a number for " + std::string(what) + ", got '" + str + "'");
    return v;
}
} // namespace detail

inline Strategy Strategy::finite(double T, double alpha, const MarketParams& p) {
    return {make_finite_coeffs(T, alpha, p),
            "finite:" + detail::short_number(T) + ":" + detail::short_number(alpha)};
}

inline Strategy Strategy::discounted(double beta, const MarketParams& p) {
    return {make_discounted_coeffs(beta, p), "discounted:" + detail::short_number(beta)};
}

/// Parses `ergodic`, `half`, `finite:<T>:<alpha>`, or `discounted:<beta>`.
inline Strategy parse_strategy(std::string_view text, const MarketParams& p) {
    if (text == "ergodic") return Strategy::ergodic();
    if (text == "half") return Strategy::half_inventory();
    auto rest_after = [&](std::string_view prefix) { return text.substr(prefix.size()); };
    if (text.starts_with("finite:")) {
        const std::string_view rest = rest_after("finite:");
        const auto colon = rest.find(':');
        if (colon == std::string_view::npos)
            throw ConfigError("strategy 'finite' needs finite:<T>:<alpha>");
        return Strategy::finite(detail::parse_number(rest.substr(0, colon), "finite T"),
                                detail::parse_number(rest.substr(colon + 1), "finite alpha"), p);
    }
    if (text.starts_with("discounted:"))
        return Strategy::discounted(detail::parse_number(rest_after("discounted:"), "beta"), p);
    throw ConfigError("unknown strategy '" + std::string(text) +
                      "' (expected ergodic, half, finite:<T>:<alpha>, discounted:<beta>)");
}

} // namespace ergoliq
