// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ergoliq/calibration.hpp"
#include "ergoliq/commands.hpp"
#include "ergoliq/engine.hpp"
#include "ergoliq/market_model.hpp"
#include "ergoliq/strategies.hpp"
#include "support/hjb_residual.hpp"

using namespace ergoliq;

namespace {

constexpr double kGamma = 0.49678772; // closed form at the reference parameters, 8 digits

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

SimConfig reference_config() {
    SimConfig c;
    c.dt = 0.1;
    c.horizon = 2000;
    c.n_paths = 500;
    c.seed = 20240601;
    c.cash_mode = CashMode::Simplified;
    c.strategy = Strategy::ergodic();
    return c;
}

Outcome a1_gamma() {
    const MarketParams p;
    const double gamma = ergodic_gamma(p);
    const Ensemble e = run_ensemble(reference_config(), p);
    const double z = (e.stats.mean - gamma) / e.stats.std_err;
    const bool closed_form_ok = std::abs(gamma - kGamma) < 5e-9;
    return {closed_form_ok && std::abs(z) < 3,
            fmt("gamma=%.8f mc_mean=%.6f se=%.6f z=%.2f", gamma, e.stats.mean, e.stats.std_err, z)};
}

// Compare rows are ordered (ergodic, full), (ergodic, simplified), (half, full), (half, simplified).
std::vector<CompareRow> reference_compare() {
    return compare_strategies(reference_config(), MarketParams{}, {Strategy::ergodic(), Strategy::half_inventory()});
}

Outcome a2_dominance(const std::vector<CompareRow>& rows) {
    Outcome o{true, ""};
    for (std::size_t m = 0; m < 2; ++m) {
        const auto d = paired_difference(rows[m].ensemble.avg_pnl(), rows[2 + m].ensemble.avg_pnl());
        o.pass = o.pass && d.mean > 0 && d.mean > 3 * d.std_err;
        o.detail += fmt("%s: diff=%.5f se=%.5f  ", std::string(to_string(rows[m].cash_mode)).c_str(), d.mean,
                        d.std_err);
    }
    return o;
}

Outcome a3_simplification(const std::vector<CompareRow>& rows) {
    const auto d = paired_difference(rows[0].ensemble.avg_pnl(), rows[1].ensemble.avg_pnl());
    return {std::abs(d.mean) < 2 * d.std_err, fmt("full-simplified=%.5f se=%.5f", d.mean, d.std_err)};
}

Outcome a4_sigma(std::size_t paths) {
    const MarketParams p;
    SimConfig c = reference_config();
    c.n_paths = paths;
    std::vector<double> sigmas;
    for (int i = 1; i <= 10; ++i) sigmas.push_back(0.1 * i);
    const auto rows = sweep_gamma({{"sigma", sigmas}}, p, c);
    std::vector<double> means, es;
    for (const auto& r : rows) {
        means.push_back(r.value);
        es.push_back(r.mc->es95);
    }
    const LinearFit fit = least_squares(sigmas, means, true);
    const double t = fit.slope / fit.slope_std_err;
    int inversions = 0;
    for (std::size_t i = 1; i < es.size(); ++i)
        if (es[i] > es[i - 1]) ++inversions;
    std::string series;
    for (double v : es) series += fmt("%.3f ", v);
    return {std::abs(t) < 2 && inversions <= 1,
            fmt("slope=%.4f t=%.2f es95_inversions=%d es95=[ %s]", fit.slope, t, inversions, series.c_str())};
}

Outcome a5_limits() {
    const MarketParams p;
    const double w = disposal_rate(p);
    const double gamma = ergodic_gamma(p);
    double worst_rate = 0, worst_disc = 0, worst_pin = 0;
    for (double T : {20.0 / w, 100.0, 1000.0, 1e4}) {
        const auto c = make_finite_coeffs(T, 1.0, p);
        for (double q : {-25.0, 1.0, 10.0}) worst_rate = std::max(worst_rate, std::abs(finite_rate(0, q, c, p) / q - w));
    }
    bool disc_ok = true;
    for (double beta : {1e-2, 1e-3, 1e-4}) {
        const auto c = make_discounted_coeffs(beta, p);
        for (double q : {0.0, 10.0, -10.0}) {
            const double gap = std::abs(beta * discounted_value(q, c) - gamma);
            worst_disc = std::max(worst_disc, gap / beta);
            disc_ok = disc_ok && gap < 5 * beta;
        }
    }
    for (double alpha : {1.0, 0.5, 3.0}) {
        const auto c = make_finite_coeffs(500.0, alpha, p);
        worst_pin = std::max(worst_pin, std::abs(finite_h2(500.0, c, p) + alpha) / alpha);
        worst_pin = std::max(worst_pin, std::abs(finite_h0(500.0, c, p)));
    }
    return {worst_rate < 1e-9 && disc_ok && worst_pin < 1e-12,
            fmt("rate_gap=%.2e disc_gap/beta=%.3f terminal=%.1e", worst_rate, worst_disc, worst_pin)};
}

Outcome a6_hjb() {
    const MarketParams p;
    const double T = 100.0;
    const auto c = make_finite_coeffs(T, 1.0, p);
    const double sup = hjb::sup_residual(hjb::interior_grid(T, 100, 20.0, 41), 1e-4, c, p);
    return {sup < 1e-6, fmt("sup_residual=%.2e on 100x41", sup)};
}

Outcome a7_calibration() {
    // lambda, eta from a single Poisson stream of about 1e4 events.
    MarketParams p;
    p.lambda_minus = 0;
    Rng rng = make_rng(777);
    const auto events = sample_jumps(p, 1e4 / 0.05, rng);
    std::vector<LiquidationRecord> log;
    for (const auto& e : events) log.push_back({e.time, e.size});
    const auto le = estimate_lambda_eta(log);
    const bool le_ok = std::abs(le.lambda / 0.05 - 1) < 0.05 && std::abs(le.eta / 10 - 1) < 0.05;

    // k: noiseless linear book (unit levels) and one with noisy level volumes.
    const double k = 0.01, half_spread = 0.005, mid = 100;
    BookSnapshot exact{0, BookSide::Ask, {}, mid};
    for (int l = 1; l <= 120; ++l) exact.levels.push_back({mid + half_spread + k * (2 * l - 1), 1.0});
    const double k_exact = estimate_k(std::vector<BookSnapshot>{exact}, unit_trade_sizes()).k;

    std::uniform_real_distribution<double> noise(0.9, 1.1);
    std::vector<BookSnapshot> noisy;
    for (int s = 0; s < 20; ++s) {
        BookSnapshot b{static_cast<double>(s), s % 2 ? BookSide::Bid : BookSide::Ask, {}, mid};
        const double sign = b.side == BookSide::Ask ? 1 : -1;
        double depth = 0;
        for (int l = 0; l < 150; ++l) {
            const double v = noise(rng);
            b.levels.push_back({mid + sign * (half_spread + 2 * k * (depth + v / 2)), v});
            depth += v;
        }
        noisy.push_back(b);
    }
    const double k_noisy = estimate_k(noisy, unit_trade_sizes()).k;

    // b: midprice path driven by a known random flow.
    MarketParams flow_params;
    flow_params.lambda_plus = flow_params.lambda_minus = 0;
    std::uniform_real_distribution<double> rate(-1000, 1000);
    std::normal_distribution<double> z;
    MarketState st = initial_state(flow_params);
    std::vector<FlowInterval> flow;
    for (int i = 0; i < 20000; ++i) {
        const double nu = rate(rng), before = st.S;
        st = step(st, nu, 1.0, z(rng), {}, flow_params, CashMode::Simplified);
        flow.push_back({-nu, st.S - before});
    }
    const LinearFit bf = estimate_b(flow);
    const bool b_ok = std::abs(bf.slope - flow_params.b) < 2 * bf.slope_std_err;

    const bool pass = le_ok && std::abs(k_exact - k) < 1e-12 && std::abs(k_noisy - k) < 1e-5 && b_ok;
    return {pass, fmt("n=%zu lambda=%.5f eta=%.4f k_exact_err=%.1e k_noisy_err=%.1e b=%.3e se=%.1e", le.count,
                      le.lambda, le.eta, std::abs(k_exact - k), std::abs(k_noisy - k), bf.slope, bf.slope_std_err)};
}

Outcome a8_determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "ergoliq_acceptance_a8";
    fs::remove_all(root);
    Settings s = default_settings("compare");
    assign(s, "paths", "50");
    assign(s, "horizon", "500");
    assign(s, "timeseries", "100");
    std::ostringstream log;
    s["out"] = (root / "first").string();
    cmd_compare(s, log);
    Settings replay = merge(default_settings("compare"), parse_settings(csv::read_file((root / "first" / "manifest.toml").string())));
    replay["out"] = (root / "second").string();
    cmd_compare(replay, log);
    bool same = true;
    for (const char* f : {"paths.csv", "compare.csv", "timeseries.csv"})
        same = same && csv::read_file((root / "first" / f).string()) == csv::read_file((root / "second" / f).string());
    return {same, same ? "paths.csv, compare.csv, timeseries.csv identical" : "outputs differ"};
}

} // namespace

int main(int argc, char** argv) {
    std::size_t a4_paths = 5000; // per sigma point; es95 needs a populated 5% tail
    if (argc > 1) a4_paths = std::stoul(argv[1]);

    int failures = 0;
    const auto report = [&](const char* id, const char* what, const std::function<Outcome()>& fn) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %s %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, what, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };

    std::vector<CompareRow> rows;
    report("A1", "ergodic constant", a1_gamma);
    report("A2", "ergodic beats half-inventory", [&] {
        rows = reference_compare();
        return a2_dominance(rows);
    });
    report("A3", "full vs simplified cash", [&] { return a3_simplification(rows); });
    report("A4", "sigma robustness", [&] { return a4_sigma(a4_paths); });
    report("A5", "limit suite", a5_limits);
    report("A6", "HJB residual", a6_hjb);
    report("A7", "calibration round trip", a7_calibration);
    report("A8", "determinism", a8_determinism);
    return failures == 0 ? 0 : 1;
}
