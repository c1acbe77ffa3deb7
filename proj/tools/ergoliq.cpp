// ergoliq: closed-form gamma, Monte-Carlo experiments, sweeps, and calibration.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric precondition failure.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ergoliq/commands.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kPreconditionError = 4;

struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::vector<std::string> strategies;
    std::vector<std::string> axes;
    std::map<std::string, std::string> values; // config key -> flag value
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "flat key = value config file");
    cmd->add_option("--set", f.sets, "override any config key, key=value (repeatable)");
    cmd->add_option("--out", f.values["out"], "output directory");
}

void add_model(CLI::App* cmd, Flags& f) {
    add_common(cmd, f);
    for (const char* key : {"r", "lambda", "eta", "eta_std", "sigma", "b", "k", "phi", "s0", "q0", "x0"})
        cmd->add_option(std::string("--") + key, f.values[key], std::string("model constant ") + key);
}

void add_sim(CLI::App* cmd, Flags& f) {
    add_model(cmd, f);
    cmd->add_option("--seed", f.values["seed"], "master seed (u64)");
    cmd->add_option("--paths", f.values["paths"], "number of Monte-Carlo paths");
    cmd->add_option("--horizon", f.values["horizon"], "simulated horizon T, seconds");
    cmd->add_option("--dt", f.values["dt"], "Euler step, seconds");
    cmd->add_option("--cash-mode", f.values["cash_mode"], "full | simplified")
        ->check(CLI::IsMember({"full", "simplified"}));
    cmd->add_option("--strategy", f.strategies, "ergodic | finite:<T>:<alpha> | discounted:<beta> | half");
    cmd->add_option("--timeseries", f.values["timeseries"], "emit trajectories every <stride> steps");
    cmd->add_option("--timeseries-paths", f.values["timeseries_paths"], "trajectories per (strategy, mode)");
    cmd->add_option("--workers", f.values["workers"], "worker threads (0: all cores)");
}

ergoliq::Settings resolve(const std::string& command, const Flags& f) {
    using namespace ergoliq;
    Settings s = default_settings(command);
    if (!f.config.empty()) s = merge(s, parse_settings(csv::read_file(f.config), f.config));
    Settings flags;
    for (const auto& kv : f.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        assign(flags, kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [key, value] : f.values)
        if (!value.empty()) assign(flags, key, value);
    if (!f.strategies.empty()) {
        std::string joined;
        for (const auto& st : f.strategies) joined += (joined.empty() ? "" : ",") + st;
        flags["strategy"] = joined;
    }
    for (std::size_t i = 0; i < f.axes.size(); ++i) {
        if (i >= 2) throw ConfigError("at most two --axis options");
        flags["axis" + std::to_string(i + 1)] = f.axes[i];
    }
    return merge(s, flags);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ergodic optimal liquidation: closed forms, Monte-Carlo experiments, calibration"};
    app.set_version_flag("--version", std::string(ergoliq::tool_version));
    app.require_subcommand(1);

    Flags flags;
    auto* gamma = app.add_subcommand("gamma", "evaluate the ergodic constant; writes gamma.csv");
    add_model(gamma, flags);
    auto* simulate = app.add_subcommand("simulate", "run one ensemble; writes paths.csv, compare.csv");
    add_sim(simulate, flags);
    auto* compare = app.add_subcommand("compare", "strategies x cash modes with shared seeds");
    add_sim(compare, flags);
    auto* sweep = app.add_subcommand("sweep", "gamma over a 1-2 axis grid; writes sweep.csv");
    add_sim(sweep, flags);
    sweep->add_option("--axis", flags.axes, "name:start:stop:count or name=v1,v2,... (r, eta, lambda, k, b, sigma)");
    sweep->add_option("--mode", flags.values["sweep_mode"], "closed_form | monte_carlo")
        ->check(CLI::IsMember({"closed_form", "monte_carlo"}));
    auto* calibrate = app.add_subcommand("calibrate", "estimate lambda, eta, k, b from CSV data");
    add_common(calibrate, flags);
    calibrate->add_option("--liquidations", flags.values["liquidations"], "CSV time,size");
    calibrate->add_option("--book", flags.values["book"], "CSV snapshot_time,side,price,volume,mid");
    calibrate->add_option("--flow", flags.values["flow"], "CSV net_flow,delta_mid");
    calibrate->add_option("--trade-sizes", flags.values["trade_sizes"], "a:b or comma list (default 1:100)");
    calibrate->add_option("--k-intercept", flags.values["k_intercept"], "fit k with an intercept (true/false)");
    calibrate->add_option("--lambda-window", flags.values["lambda_window"],
                          "divide by this window length instead of the last event time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        CLI::App* chosen = app.get_subcommands().front();
        const std::string name = chosen->get_name();
        const ergoliq::Settings settings = resolve(name, flags);
        if (name == "gamma") ergoliq::cmd_gamma(settings, std::cout);
        else if (name == "simulate") ergoliq::cmd_simulate(settings, std::cout);
        else if (name == "compare") ergoliq::cmd_compare(settings, std::cout);
        else if (name == "sweep") ergoliq::cmd_sweep(settings, std::cout);
        else ergoliq::cmd_calibrate(settings, std::cout);
    } catch (const ergoliq::InvalidParameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ergoliq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ergoliq::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const ergoliq::PreconditionError& e) {
        std::cerr << "precondition failed: " << e.what() << "\n";
        return kPreconditionError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
