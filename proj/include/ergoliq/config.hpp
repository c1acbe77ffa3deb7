#pragma once

// Flat `key = value` configuration (a TOML-compatible subset: one assignment
// per line, `#` comments, optional double quotes around values). Layers are
// merged with precedence flag > file > default and resolved into typed
// structs. The merged table is what a run manifest records.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ergoliq/calibration.hpp"
#include "ergoliq/csv.hpp"
#include "ergoliq/engine.hpp"
#include "ergoliq/errors.hpp"
#include "ergoliq/market_model.hpp"
#include "ergoliq/strategies.hpp"

namespace ergoliq {

inline constexpr std::string_view tool_version = "1.0.0";

/// Ordered key -> raw value table.
using Settings = std::map<std::string, std::string>;

namespace config_detail {

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        // model
        "lambda_plus", "lambda_minus", "eta_mean", "eta_std", "sigma", "b", "k", "phi", "r", "s0", "q0", "x0",
        // simulation
        "dt", "horizon", "paths", "seed", "cash_mode", "strategy", "timeseries", "timeseries_paths", "workers",
        // sweep
        "axis1", "axis2", "sweep_mode",
        // calibration
        "liquidations", "book", "flow", "trade_sizes", "k_intercept", "lambda_window",
        // output and manifest metadata
        "out", "command", "version"};
    return keys;
}

inline bool is_known(const std::string& key) {
    const auto& keys = known_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

} // namespace config_detail

/// Built-in defaults for `command`.
inline Settings default_settings(std::string_view command) {
    Settings s = {
        {"lambda_plus", "0.05"}, {"lambda_minus", "0.05"}, {"eta_mean", "10"}, {"eta_std", "0.5"},
        {"sigma", "0.5"},        {"b", "1e-05"},           {"k", "0.001"},     {"phi", "0.0001"},
        {"r", "0.05"},           {"s0", "10"},             {"q0", "0"},        {"x0", "0"},
        {"dt", "0.1"},           {"horizon", "2000"},      {"paths", "500"},   {"seed", "20240601"},
        {"cash_mode", "simplified"},
        {"strategy", command == "compare" ? "ergodic,half" : "ergodic"},
        {"timeseries", "0"},     {"timeseries_paths", "10"},
        {"workers", "0"},        {"axis1", ""},            {"axis2", ""},      {"sweep_mode", "closed_form"},
        {"liquidations", ""},    {"book", ""},             {"flow", ""},       {"trade_sizes", "1:100"},
        {"k_intercept", "true"}, {"lambda_window", ""},    {"out", "."},
    };
    return s;
}

/// Sets one key, expanding aliases (`lambda` sets both sides, `eta` is eta_mean).
inline void assign(Settings& s, std::string key, std::string value) {
    if (key == "lambda") {
        s["lambda_plus"] = value;
        s["lambda_minus"] = value;
        return;
    }
    if (key == "eta") key = "eta_mean";
    if (key == "cash-mode") key = "cash_mode";
    if (!config_detail::is_known(key)) throw ConfigError("unknown config key '" + key + "'");
    s[key] = std::move(value);
}

/// Parses `key = value` lines. `source` names the origin in error messages.
inline Settings parse_settings(std::string_view text, std::string_view source = "config") {
    Settings out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        const auto where = [&] { return std::string(source) + ":" + std::to_string(line_no) + ": "; };

        // Strip comments outside quotes.
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line = line.substr(0, i);
                break;
            }
        }
        line = csv::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') throw ConfigError(where() + "tables are not supported; use flat keys");
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where() + "expected key = value");
        const std::string key(csv::trim(line.substr(0, eq)));
        std::string_view value = csv::trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        else if (!value.empty() && (value.front() == '"' || value.back() == '"'))
            throw ConfigError(where() + "unbalanced quote");
        if (key.empty()) throw ConfigError(where() + "empty key");
        try {
            assign(out, key, std::string(value));
        } catch (const ConfigError& e) {
            throw ConfigError(where() + e.what());
        }
    }
    return out;
}

/// base <- overlay, key by key.
inline Settings merge(Settings base, const Settings& overlay) {
    for (const auto& [k, v] : overlay) base[k] = v;
    return base;
}

/// Renders settings as a config file that parse_settings reads back unchanged.
inline std::string render_settings(const Settings& s) {
    std::string out;
    for (const auto& [k, v] : s) out += k + " = \"" + v + "\"\n";
    return out;
}

// ---------------------------------------------------------------------------
// Typed accessors
// ---------------------------------------------------------------------------

inline const std::string& get(const Settings& s, const std::string& key) {
    const auto it = s.find(key);
    if (it == s.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
}

inline double get_number(const Settings& s, const std::string& key) {
    return detail::parse_number(get(s, key), key);
}

inline std::uint64_t get_unsigned(const Settings& s, const std::string& key) {
    const std::string& v = get(s, key);
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        if (!v.empty() && v.front() != '-') x = std::stoull(v, &used, 0);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size())
        throw ConfigError("expected a non-negative integer for " + key + ", got '" + v + "'");
    return x;
}

inline bool get_bool(const Settings& s, const std::string& key) {
    const std::string& v = get(s, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("expected true or false for " + key + ", got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    for (auto& f : csv::split(v))
        if (!f.empty()) out.push_back(f);
    return out;
}

/// Model constants; throws InvalidParameter naming the offending field.
inline MarketParams resolve_params(const Settings& s) {
    MarketParams p;
    p.lambda_plus = get_number(s, "lambda_plus");
    p.lambda_minus = get_number(s, "lambda_minus");
    p.eta_mean = get_number(s, "eta_mean");
    p.eta_std = get_number(s, "eta_std");
    p.sigma = get_number(s, "sigma");
    p.b = get_number(s, "b");
    p.k = get_number(s, "k");
    p.phi = get_number(s, "phi");
    p.r = get_number(s, "r");
    p.s0 = get_number(s, "s0");
    p.q0 = get_number(s, "q0");
    p.x0 = get_number(s, "x0");
    validate(p);
    return p;
}

inline std::vector<Strategy> resolve_strategies(const Settings& s, const MarketParams& p) {
    std::vector<Strategy> out;
    for (const auto& name : split_list(get(s, "strategy"))) out.push_back(parse_strategy(name, p));
    if (out.empty()) throw ConfigError("no strategy given");
    return out;
}

/// Simulation settings with the first listed strategy.
inline SimConfig resolve_sim(const Settings& s, const MarketParams& p) {
    SimConfig c;
    c.dt = get_number(s, "dt");
    c.horizon = get_number(s, "horizon");
    c.n_paths = get_unsigned(s, "paths");
    c.seed = get_unsigned(s, "seed");
    c.cash_mode = parse_cash_mode(get(s, "cash_mode"));
    c.strategy = resolve_strategies(s, p).front();
    c.timeseries_stride = get_unsigned(s, "timeseries");
    c.workers = static_cast<unsigned>(get_unsigned(s, "workers"));
    validate(c);
    return c;
}

/// `name:start:stop:count` (inclusive linear grid) or `name=v1,v2,...`.
inline SweepAxis parse_axis(const std::string& text) {
    SweepAxis axis;
    const auto eq = text.find('=');
    if (eq != std::string::npos) {
        axis.name = text.substr(0, eq);
        for (const auto& v : split_list(text.substr(eq + 1))) axis.values.push_back(detail::parse_number(v, axis.name));
    } else {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const auto colon = text.find(':', start);
            parts.push_back(text.substr(start, colon - start));
            if (colon == std::string::npos) break;
            start = colon + 1;
        }
        if (parts.size() != 4) throw ConfigError("axis must be name:start:stop:count or name=v1,v2,..., got '" + text + "'");
        axis.name = parts[0];
        const double lo = detail::parse_number(parts[1], axis.name + " start");
        const double hi = detail::parse_number(parts[2], axis.name + " stop");
        const double n = detail::parse_number(parts[3], axis.name + " count");
        if (!(n >= 1) || n != std::floor(n)) throw ConfigError("axis count must be a positive integer");
        const auto count = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i < count; ++i)
            axis.values.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
        if (count > 1) axis.values.back() = hi; // exact endpoint
    }
    if (axis.values.empty()) throw ConfigError("axis '" + axis.name + "' has no values");
    MarketParams probe;
    set_param(probe, axis.name, axis.values.front()); // rejects unknown names
    return axis;
}

/// `a:b` (integers a..b) or a comma list.
inline std::vector<double> parse_trade_sizes(const std::string& text) {
    const auto colon = text.find(':');
    std::vector<double> out;
    if (colon != std::string::npos) {
        const double lo = detail::parse_number(text.substr(0, colon), "trade_sizes start");
        const double hi = detail::parse_number(text.substr(colon + 1), "trade_sizes stop");
        if (!(lo > 0) || hi < lo || lo != std::floor(lo) || hi != std::floor(hi))
            throw ConfigError("trade_sizes range must be positive integers a:b with a <= b");
        for (double q = lo; q <= hi; q += 1) out.push_back(q);
    } else {
        for (const auto& v : split_list(text)) out.push_back(detail::parse_number(v, "trade_sizes"));
    }
    if (out.size() < 2) throw ConfigError("trade_sizes needs at least two sizes");
    for (double q : out)
        if (!(q > 0)) throw ConfigError("trade_sizes must be > 0");
    return out;
}

} // namespace ergoliq
