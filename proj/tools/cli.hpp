#pragma once

#include "rgf/rgf.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace rgf::cli {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::vector<double> parse_numbers(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw bench::ConfigError(flag + ": '" + item + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw bench::ConfigError(flag + " needs at least one value");
    return out;
}

struct Options {
    std::string filters = "gf-thin,gf-fat,rgf";
    std::size_t steps = 50;
    std::size_t seeds = 100;
    std::uint64_t seed_offset = 0;
    std::size_t samples = 1000;
    std::string backend = "monte-carlo";
    std::string omega;
    std::string gamma;
    std::string pairs;
    double truth_omega = linear_example::kTailWeight;
    double truth_gamma = linear_example::kTailScale;
    std::string config;
    std::string out;
    std::string summary;
    unsigned threads = 0;
};

/// Turns parsed flags into a validated experiment configuration.
inline bench::ExperimentConfig resolve(bench::Scenario scenario, const Options& o) {
    bench::ExperimentConfig cfg;
    cfg.scenario = scenario;
    cfg.filters = split_list(o.filters);
    cfg.steps = o.steps;
    cfg.seeds = bench::ExperimentConfig::seed_range(o.seeds, o.seed_offset);
    cfg.samples = o.samples;
    cfg.backend = o.backend == "unscented" ? bench::Backend::Unscented : bench::Backend::MonteCarlo;
    cfg.truth_omega = o.truth_omega;
    cfg.truth_gamma = o.truth_gamma;
    cfg.threads = o.threads;

    if (scenario == bench::Scenario::Sweep) {
        std::vector<double> omegas{0.1, 0.001, 0.5};
        std::vector<double> gammas{10.0, 1.0, 100.0};
        std::vector<std::string> names{"matched", "under", "over"};
        if (!o.omega.empty()) omegas = parse_numbers(o.omega, "--omega");
        if (!o.gamma.empty()) gammas = parse_numbers(o.gamma, "--gamma");
        if (!o.pairs.empty()) {
            names = split_list(o.pairs);
        } else if (!o.omega.empty() || !o.gamma.empty()) {
            names.clear();
            for (std::size_t i = 0; i < omegas.size(); ++i) names.push_back("pair" + std::to_string(i));
        }
        if (omegas.size() != gammas.size() || omegas.size() != names.size()) {
            throw bench::ConfigError("--omega, --gamma and --pairs must list the same number of entries");
        }
        cfg.sweep.clear();
        for (std::size_t i = 0; i < omegas.size(); ++i) cfg.sweep.push_back({names[i], omegas[i], gammas[i]});
    } else {
        if (!o.pairs.empty()) throw bench::ConfigError("--pairs only applies to the sweep subcommand");
        auto single = [](const std::string& s, const std::string& flag, double fallback) {
            if (s.empty()) return fallback;
            const auto v = parse_numbers(s, flag);
            if (v.size() != 1) throw bench::ConfigError(flag + " takes a single value outside the sweep subcommand");
            return v.front();
        };
        cfg.rgf_tail.omega = single(o.omega, "--omega", cfg.rgf_tail.omega);
        cfg.rgf_tail.gamma = single(o.gamma, "--gamma", cfg.rgf_tail.gamma);
    }

    if (scenario == bench::Scenario::Radar) {
        if (!o.config.empty()) cfg.radar = io::load_radar_setup(o.config);
        cfg.radar.rgf_tail_weight = cfg.rgf_tail.omega;
        cfg.radar.rgf_tail_scale_factor = cfg.rgf_tail.gamma;
    } else if (!o.config.empty()) {
        throw bench::ConfigError("--config only applies to the radar subcommand");
    }
    bench::validate(cfg);
    return cfg;
}

inline void add_run_flags(CLI::App& sub, Options& o, bench::Scenario scenario) {
    if (scenario != bench::Scenario::Sweep) {
        sub.add_option("--filters", o.filters, "Comma-separated subset of gf-thin,gf-fat,rgf")->capture_default_str();
    }
    if (scenario != bench::Scenario::Radar) {
        sub.add_option("--steps", o.steps, "Time steps per run")->capture_default_str();
        sub.add_option("--truth-omega", o.truth_omega, "Outlier probability of the simulated sensor")->capture_default_str();
        sub.add_option("--truth-gamma", o.truth_gamma, "Cauchy scale of the simulated outliers")->capture_default_str();
    } else {
        sub.add_option("--config", o.config, "JSON file overriding the radar scenario")->check(CLI::ExistingFile);
    }
    sub.add_option("--seeds", o.seeds, "Number of seeds")->capture_default_str();
    sub.add_option("--seed-offset", o.seed_offset, "First seed")->capture_default_str();
    sub.add_option("--samples", o.samples, "Monte Carlo samples per moment estimate")->capture_default_str();
    sub.add_option("--backend", o.backend, "Moment integration backend")
        ->check(CLI::IsMember({"monte-carlo", "unscented"}))
        ->capture_default_str();
    if (scenario == bench::Scenario::Sweep) {
        sub.add_option("--omega", o.omega, "Comma-separated tail weights, paired with --gamma (default 0.1,0.001,0.5)");
        sub.add_option("--gamma", o.gamma, "Comma-separated tail scales (default 10,1,100)");
        sub.add_option("--pairs", o.pairs, "Comma-separated pair names (default matched,under,over)");
    } else {
        sub.add_option("--omega", o.omega, "RGF tail weight (default 0.1)");
        sub.add_option("--gamma", o.gamma,
                       scenario == bench::Scenario::Radar ? "RGF Cauchy scale in nominal sigmas (default 10)"
                                                          : "RGF Cauchy scale (default 10)");
    }
    sub.add_option("--out", o.out, "CSV output path");
    sub.add_option("--summary", o.summary, "JSON summary path (the summary is always printed to stdout)");
    sub.add_option("--threads", o.threads, "Worker threads (0: RGF_THREADS or all processors)");
}

/// Entry point of rgf-bench; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Benchmarks for the robust Gaussian filter", "rgf-bench"};
    app.require_subcommand(1, 1);
    Options o;
    CLI::App* linear = app.add_subcommand("linear", "Scalar random walk with Cauchy outliers");
    CLI::App* radar = app.add_subcommand("radar", "Reentry tracking with a contaminated radar");
    CLI::App* sweep = app.add_subcommand("sweep", "RGF tail-parameter robustness on the scalar model");
    CLI::App* selftest = app.add_subcommand("selftest", "Run embedded invariant checks");
    add_run_flags(*linear, o, bench::Scenario::Linear);
    add_run_flags(*radar, o, bench::Scenario::Radar);
    add_run_flags(*sweep, o, bench::Scenario::Sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    if (*selftest) return run_selftest(out);

    bench::Scenario scenario = bench::Scenario::Linear;
    CLI::App* active = linear;
    if (*radar) {
        scenario = bench::Scenario::Radar;
        active = radar;
    } else if (*sweep) {
        scenario = bench::Scenario::Sweep;
        active = sweep;
    }

    bench::ExperimentConfig cfg;
    try {
        cfg = resolve(scenario, o);
    } catch (const bench::ConfigError& e) {
        err << "error: " << e.what() << "\n\n" << active->help();
        return 2;
    }

    bench::BatchReport report;
    try {
        report = bench::run_batch(cfg);
    } catch (const bench::RunFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "failure in scenario " << bench::to_string(scenario) << ": " << e.what() << '\n';
        return 1;
    }

    const nlohmann::json full = io::to_json(report);
    nlohmann::json brief = full;
    brief.erase("runs");
    out << brief.dump(2) << '\n';

    if (!o.summary.empty()) {
        std::ofstream f(o.summary);
        if (!(f << full.dump(2) << '\n')) {
            err << "error: cannot write " << o.summary << '\n';
            return 1;
        }
    }
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        io::write_csv(f, report);
        if (!f) {
            err << "error: cannot write " << o.out << '\n';
            return 1;
        }
    }
    return 0;
}

}  // namespace rgf::cli
