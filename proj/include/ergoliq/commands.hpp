#pragma once

// Command implementations behind the `ergoliq` tool. Each takes fully merged
// settings, writes its CSV artifacts plus `manifest.toml` into settings["out"],
// and returns the artifact file names.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ergoliq/calibration.hpp"
#include "ergoliq/config.hpp"
#include "ergoliq/csv.hpp"
#include "ergoliq/engine.hpp"
#include "ergoliq/strategies.hpp"

namespace ergoliq {

namespace command_detail {

using csv::format_number;

inline std::filesystem::path out_dir(const Settings& s) {
    std::filesystem::path dir = get(s, "out");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

/// Writes manifest.toml: the merged settings plus command, version, and outputs.
inline void write_manifest(const std::filesystem::path& dir, const std::string& command, Settings s,
                           const std::vector<std::string>& outputs) {
    s["command"] = command;
    s["version"] = std::string(tool_version);
    std::string text = "# ergoliq run manifest; pass it back with --config to reproduce\n";
    text += "# outputs:";
    for (const auto& o : outputs) text += " " + o;
    text += "\n" + render_settings(s);
    std::ofstream f(dir / "manifest.toml", std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + (dir / "manifest.toml").string());
    f << text;
}

inline std::vector<std::string> stats_fields(const EnsembleStats& st) {
    return {format_number(st.mean), format_number(st.std_err), format_number(st.ci95_low),
            format_number(st.ci95_high), format_number(st.var95), format_number(st.es95)};
}

inline const std::vector<std::string> paths_header = {"path_id", "strategy", "cash_mode", "avg_pnl",
                                                       "terminal_q", "terminal_x", "penalty_integral"};
inline const std::vector<std::string> compare_header = {"strategy", "cash_mode", "mean", "std_err",
                                                         "ci_low", "ci_high", "var95", "es95"};
inline const std::vector<std::string> timeseries_header = {"path_id", "strategy", "cash_mode", "t",
                                                            "S", "Q", "X", "running_avg_pnl"};

/// Writes paths.csv, compare.csv, and (when requested) timeseries.csv for the given rows.
inline std::vector<std::string> write_ensembles(const std::filesystem::path& dir, const std::vector<CompareRow>& rows,
                                                std::size_t timeseries_paths) {
    csv::Writer paths(paths_header), compare(compare_header), series(timeseries_header);
    bool any_series = false;
    for (const auto& row : rows) {
        const std::string mode(to_string(row.cash_mode));
        for (std::size_t i = 0; i < row.ensemble.paths.size(); ++i) {
            const PathResult& p = row.ensemble.paths[i];
            paths.row({std::to_string(i), row.strategy, mode, format_number(p.avg_pnl), format_number(p.terminal.Q),
                       format_number(p.terminal.X), format_number(p.penalty_integral)});
            if (i < timeseries_paths)
                for (const TimePoint& tp : p.series) {
                    any_series = true;
                    series.row({std::to_string(i), row.strategy, mode, format_number(tp.t), format_number(tp.S),
                                format_number(tp.Q), format_number(tp.X), format_number(tp.running_avg_pnl)});
                }
        }
        std::vector<std::string> fields = {row.strategy, mode};
        for (auto& f : stats_fields(row.ensemble.stats)) fields.push_back(std::move(f));
        compare.row(fields);
    }
    std::vector<std::string> written = {"paths.csv", "compare.csv"};
    paths.save((dir / "paths.csv").string());
    compare.save((dir / "compare.csv").string());
    if (any_series) {
        series.save((dir / "timeseries.csv").string());
        written.push_back("timeseries.csv");
    }
    return written;
}

} // namespace command_detail

/// gamma.csv: r,lambda,eta,k,b,phi,s0,gamma
inline std::vector<std::string> cmd_gamma(const Settings& s, std::ostream& log) {
    using command_detail::format_number;
    const MarketParams p = resolve_params(s);
    const double gamma = ergodic_gamma(p);
    const auto dir = command_detail::out_dir(s);
    csv::Writer w({"r", "lambda", "eta", "k", "b", "phi", "s0", "gamma"});
    w.row({format_number(p.r), format_number(p.lambda()), format_number(p.eta_mean), format_number(p.k),
           format_number(p.b), format_number(p.phi), format_number(p.s0), format_number(gamma)});
    w.save((dir / "gamma.csv").string());
    command_detail::write_manifest(dir, "gamma", s, {"gamma.csv"});
    log << "gamma = " << format_number(gamma) << "\n";
    return {"gamma.csv", "manifest.toml"};
}

/// One ensemble with the first configured strategy.
inline std::vector<std::string> cmd_simulate(const Settings& s, std::ostream& log) {
    const MarketParams p = resolve_params(s);
    const SimConfig c = resolve_sim(s, p);
    const auto dir = command_detail::out_dir(s);
    CompareRow row{c.strategy.name(), c.cash_mode, run_ensemble(c, p)};
    auto written = command_detail::write_ensembles(dir, {row}, get_unsigned(s, "timeseries_paths"));
    command_detail::write_manifest(dir, "simulate", s, written);
    const auto& st = row.ensemble.stats;
    log << row.strategy << " (" << to_string(c.cash_mode) << "): mean avg_pnl = " << csv::format_number(st.mean)
        << " +/- " << csv::format_number(st.std_err) << " (n = " << st.n << ")\n";
    written.push_back("manifest.toml");
    return written;
}

/// Every configured strategy under both cash modes, sharing seeds.
inline std::vector<std::string> cmd_compare(const Settings& s, std::ostream& log) {
    const MarketParams p = resolve_params(s);
    const SimConfig base = resolve_sim(s, p);
    const auto strategies = resolve_strategies(s, p);
    for (const auto& st : strategies) {
        SimConfig c = base;
        c.strategy = st;
        validate(c);
    }
    const auto dir = command_detail::out_dir(s);
    const auto rows = compare_strategies(base, p, strategies);
    auto written = command_detail::write_ensembles(dir, rows, get_unsigned(s, "timeseries_paths"));
    command_detail::write_manifest(dir, "compare", s, written);
    for (const auto& row : rows)
        log << row.strategy << " (" << to_string(row.cash_mode)
            << "): mean = " << csv::format_number(row.ensemble.stats.mean)
            << " +/- " << csv::format_number(row.ensemble.stats.std_err) << "\n";
    written.push_back("manifest.toml");
    return written;
}

/// sweep.csv: axis1,value1[,axis2,value2],mode,gamma_or_mean,std_err,ci_low,ci_high,var95,es95
/// (the last four are empty for closed-form rows).
inline std::vector<std::string> cmd_sweep(const Settings& s, std::ostream& log) {
    using command_detail::format_number;
    const MarketParams p = resolve_params(s);
    std::vector<SweepAxis> axes;
    for (const char* key : {"axis1", "axis2"})
        if (!get(s, key).empty()) axes.push_back(parse_axis(get(s, key)));
    if (axes.empty()) throw ConfigError("sweep needs --axis (or axis1 in the config)");

    const std::string& mode = get(s, "sweep_mode");
    std::optional<SimConfig> mc;
    std::string mode_label = "closed_form";
    if (mode == "monte_carlo") {
        mc = resolve_sim(s, p);
        mode_label = "mc_" + std::string(to_string(mc->cash_mode));
    } else if (mode != "closed_form") {
        throw ConfigError("sweep_mode must be closed_form or monte_carlo, got '" + mode + "'");
    }

    const auto rows = sweep_gamma(axes, p, mc);
    std::vector<std::string> header;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        header.push_back("axis" + std::to_string(i + 1));
        header.push_back("value" + std::to_string(i + 1));
    }
    for (const char* h : {"mode", "gamma_or_mean", "std_err", "ci_low", "ci_high", "var95", "es95"}) header.push_back(h);
    csv::Writer w(header);
    for (const auto& row : rows) {
        std::vector<std::string> f;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            f.push_back(axes[i].name);
            f.push_back(format_number(row.values[i]));
        }
        f.push_back(mode_label);
        f.push_back(format_number(row.value));
        f.push_back(format_number(row.std_err));
        if (row.mc) {
            f.push_back(format_number(row.mc->ci95_low));
            f.push_back(format_number(row.mc->ci95_high));
            f.push_back(format_number(row.mc->var95));
            f.push_back(format_number(row.mc->es95));
        } else {
            f.insert(f.end(), 4, "");
        }
        w.row(f);
    }
    const auto dir = command_detail::out_dir(s);
    w.save((dir / "sweep.csv").string());
    command_detail::write_manifest(dir, "sweep", s, {"sweep.csv"});
    log << rows.size() << " grid points (" << mode_label << ")\n";
    return {"sweep.csv", "manifest.toml"};
}

/// params_estimated.csv: parameter,estimate,count,skipped,r_squared,residual_std,std_err
inline std::vector<std::string> cmd_calibrate(const Settings& s, std::ostream& log) {
    using command_detail::format_number;
    const std::string& liq = get(s, "liquidations");
    const std::string& book = get(s, "book");
    const std::string& flow = get(s, "flow");
    if (liq.empty() && book.empty() && flow.empty())
        throw ConfigError("calibrate needs at least one of --liquidations, --book, --flow");

    csv::Writer w({"parameter", "estimate", "count", "skipped", "r_squared", "residual_std", "std_err"});
    if (!liq.empty()) {
        const auto records = csv::parse_liquidations(csv::read_file(liq));
        std::optional<double> window;
        if (!get(s, "lambda_window").empty()) window = get_number(s, "lambda_window");
        const auto est = estimate_lambda_eta(records, window);
        const std::string n = std::to_string(est.count);
        w.row({"lambda", format_number(est.lambda), n, "0", "", "", ""});
        w.row({"eta", format_number(est.eta), n, "0", "", "", ""});
        log << "lambda = " << format_number(est.lambda) << ", eta = " << format_number(est.eta) << " from " << n
            << " liquidations\n";
    }
    if (!book.empty()) {
        const auto snaps = csv::parse_book(csv::read_file(book));
        const auto est = estimate_k(snaps, parse_trade_sizes(get(s, "trade_sizes")), get_bool(s, "k_intercept"));
        double r2 = 0, resid = 0, se = 0;
        for (const auto& f : est.fits) {
            r2 += f.r_squared;
            resid += f.residual_std;
        }
        const auto m = static_cast<double>(est.fits.size());
        r2 /= m;
        resid /= m;
        if (est.fits.size() > 1) {
            double ss = 0;
            for (const auto& f : est.fits) ss += (f.slope - est.k) * (f.slope - est.k);
            se = std::sqrt(ss / (m - 1) / m);
        }
        w.row({"k", format_number(est.k), std::to_string(est.fits.size()), std::to_string(est.skipped.size()),
               format_number(r2), format_number(resid), format_number(se)});
        log << "k = " << format_number(est.k) << " from " << est.fits.size() << " snapshots (" << est.skipped.size()
            << " skipped, " << est.skipped_sizes << " oversized trades)\n";
    }
    if (!flow.empty()) {
        const auto fit = estimate_b(csv::parse_flow(csv::read_file(flow)));
        w.row({"b", format_number(fit.slope), std::to_string(fit.n), "0", format_number(fit.r_squared),
               format_number(fit.residual_std), format_number(fit.slope_std_err)});
        log << "b = " << format_number(fit.slope) << " +/- " << format_number(fit.slope_std_err) << "\n";
    }
    const auto dir = command_detail::out_dir(s);
    w.save((dir / "params_estimated.csv").string());
    command_detail::write_manifest(dir, "calibrate", s, {"params_estimated.csv"});
    return {"params_estimated.csv", "manifest.toml"};
}

} // namespace ergoliq
