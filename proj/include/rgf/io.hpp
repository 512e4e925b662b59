#pragma once

#include "rgf/benchmarks.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

namespace rgf::io {

using nlohmann::json;

inline json to_json(const radar::Constants& c) {
    return {{"delta_s", c.delta_s},
            {"sigma_v", c.sigma_v},
            {"beta0", c.beta0},
            {"H0", c.H0},
            {"Gm0", c.Gm0},
            {"R0", c.R0},
            {"sigma_nom_r", c.sigma_nom_r},
            {"sigma_con_r", c.sigma_con_r},
            {"sigma_nom_theta_mrad", c.sigma_nom_theta_mrad},
            {"sigma_con_theta_mrad", c.sigma_con_theta_mrad},
            {"alpha", c.alpha}};
}

inline json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline Vector json_vector(const json& j, Eigen::Index expected, const std::string& key) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != expected) {
        throw bench::ConfigError("'" + key + "' must be an array of " + std::to_string(expected) + " numbers");
    }
    Vector v(expected);
    for (Eigen::Index i = 0; i < expected; ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

/// Reads the radar scenario from a JSON object. Physical constants keep their
/// defaults when absent; unknown keys are rejected. Optional keys:
/// radar_position [2], true_x0 [5], initial_mean [5], initial_cov_diag [5],
/// duration_s, measurement_period_s.
inline radar::Setup radar_setup_from_json(const json& j, radar::Setup base = {}) {
    if (!j.is_object()) throw bench::ConfigError("radar config must be a JSON object");
    radar::Constants& c = base.constants;
    const std::pair<const char*, double*> scalars[] = {
        {"delta_s", &c.delta_s},
        {"sigma_v", &c.sigma_v},
        {"beta0", &c.beta0},
        {"H0", &c.H0},
        {"Gm0", &c.Gm0},
        {"R0", &c.R0},
        {"sigma_nom_r", &c.sigma_nom_r},
        {"sigma_con_r", &c.sigma_con_r},
        {"sigma_nom_theta_mrad", &c.sigma_nom_theta_mrad},
        {"sigma_con_theta_mrad", &c.sigma_con_theta_mrad},
        {"alpha", &c.alpha},
        {"duration_s", &base.duration_s},
        {"measurement_period_s", &base.measurement_period_s},
    };
    bool radar_position_given = false;
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto& [name, target] : scalars) {
            if (key == name) {
                if (!value.is_number()) throw bench::ConfigError("'" + key + "' must be a number");
                *target = value.get<double>();
                known = true;
            }
        }
        if (known) continue;
        if (key == "radar_position") {
            base.radar_position = json_vector(value, 2, key);
            radar_position_given = true;
        } else if (key == "true_x0") {
            base.true_x0 = json_vector(value, 5, key);
        } else if (key == "initial_mean") {
            base.initial_mean = json_vector(value, 5, key);
        } else if (key == "initial_cov_diag") {
            base.initial_cov_diag = json_vector(value, 5, key);
        } else {
            throw bench::ConfigError("unknown radar config key '" + key + "'");
        }
    }
    // The station sits on the surface at (R0, 0) unless placed explicitly.
    if (!radar_position_given) base.radar_position = (Vector(2) << c.R0, 0.0).finished();
    if (!(c.delta_s > 0.0) || !(base.duration_s > 0.0) || !(base.measurement_period_s >= c.delta_s)) {
        throw bench::ConfigError("radar config: need delta_s > 0, duration_s > 0, measurement_period_s >= delta_s");
    }
    if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw bench::ConfigError("radar config: alpha must lie in [0, 1]");
    if (!(base.initial_cov_diag.array() >= 0.0).all()) {
        throw bench::ConfigError("radar config: initial_cov_diag must be non-negative");
    }
    return base;
}

inline radar::Setup load_radar_setup(const std::string& path, radar::Setup base = {}) {
    std::ifstream in(path);
    if (!in) throw bench::ConfigError("cannot open radar config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw bench::ConfigError("radar config '" + path + "': " + e.what());
    }
    return radar_setup_from_json(j, std::move(base));
}

inline json to_json(const bench::ExperimentConfig& cfg) {
    json j;
    j["scenario"] = bench::to_string(cfg.scenario);
    j["backend"] = bench::to_string(cfg.backend);
    j["samples"] = cfg.samples;
    j["seeds"] = cfg.seeds;
    j["divergence_threshold"] = cfg.divergence_threshold;
    if (cfg.scenario == bench::Scenario::Sweep) {
        json pairs = json::array();
        for (const auto& t : cfg.sweep) pairs.push_back({{"name", t.name}, {"omega", t.omega}, {"gamma", t.gamma}});
        j["sweep"] = pairs;
    } else {
        j["filters"] = cfg.filters;
        j["rgf_tail"] = {{"omega", cfg.rgf_tail.omega}, {"gamma", cfg.rgf_tail.gamma}};
    }
    if (cfg.scenario == bench::Scenario::Radar) {
        const radar::Setup& s = cfg.radar;
        j["radar"] = {{"constants", to_json(s.constants)},
                      {"radar_position", vector_json(s.radar_position)},
                      {"true_x0", vector_json(s.true_x0)},
                      {"initial_mean", vector_json(s.initial_mean)},
                      {"initial_cov_diag", vector_json(s.initial_cov_diag)},
                      {"duration_s", s.duration_s},
                      {"measurement_period_s", s.measurement_period_s},
                      {"steps", s.steps()},
                      {"meas_every", s.meas_every()}};
    } else {
        j["steps"] = cfg.steps;
        j["truth"] = {{"omega", cfg.truth_omega}, {"gamma", cfg.truth_gamma}};
    }
    return j;
}

// JSON has no NaN; non-finite values become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (const double x : v) a.push_back(number(x));
    return a;
}

inline json to_json(const bench::BatchReport& r) {
    json j;
    j["config"] = to_json(r.config);
    json summary = json::object();
    for (const auto& s : r.summary) {
        json f{{"median_rmse", numbers(s.median_rmse)},
               {"median_mean_position_error", number(s.median_mean_position_error)},
               {"divergences", s.divergences}};
        if (s.median_rmse_ratio) f["median_rmse_ratio"] = number(*s.median_rmse_ratio);
        summary[s.name] = f;
    }
    j["summary"] = summary;
    if (!r.reference.empty()) j["reference"] = r.reference;
    json runs = json::array();
    for (const auto& run : r.runs) {
        json per_filter = json::object();
        for (const auto& m : run.metrics.filters) {
            json f{{"rmse", numbers(m.rmse)},
                   {"median_abs_error", numbers(m.median_abs_error)},
                   {"mean_position_error", number(m.mean_position_error)},
                   {"max_outlier_spike", number(m.max_outlier_spike)},
                   {"outlier_count", m.outlier_count},
                   {"diverged", m.diverged}};
            if (m.diverged_at) f["diverged_at_t"] = run.log.t[*m.diverged_at];
            per_filter[m.name] = f;
        }
        runs.push_back({{"seed", run.seed}, {"filters", per_filter}});
    }
    j["runs"] = runs;
    return j;
}

/// Shortest round-trip-safe text for a double: 17 significant digits.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// One row per (seed, t): truth, measurement (empty on predict-only steps),
/// then every filter's mean and marginal standard deviations.
inline void write_csv(std::ostream& out, const bench::BatchReport& r) {
    if (r.runs.empty()) return;
    const TrajectoryLog& first = r.runs.front().log;
    const Eigen::Index nx = first.state.front().size();
    Eigen::Index ny = 0;
    for (const auto& y : first.measurement) {
        if (y) {
            ny = y->size();
            break;
        }
    }

    out << "seed,t";
    for (Eigen::Index i = 0; i < nx; ++i) out << ",x_true_" << i;
    for (Eigen::Index i = 0; i < ny; ++i) out << ",y_" << i;
    for (const auto& f : first.filters) {
        for (Eigen::Index i = 0; i < nx; ++i) out << ',' << f.name << "_mean_" << i;
        for (Eigen::Index i = 0; i < nx; ++i) out << ',' << f.name << "_sd_" << i;
    }
    out << '\n';

    for (const auto& run : r.runs) {
        const TrajectoryLog& log = run.log;
        for (std::size_t k = 0; k < log.size(); ++k) {
            out << run.seed << ',' << log.t[k];
            for (Eigen::Index i = 0; i < nx; ++i) out << ',' << format_number(log.state[k][i]);
            for (Eigen::Index i = 0; i < ny; ++i) {
                out << ',';
                if (log.measurement[k]) out << format_number((*log.measurement[k])[i]);
            }
            for (const auto& f : log.filters) {
                for (Eigen::Index i = 0; i < nx; ++i) out << ',' << format_number(f.mean[k][i]);
                for (Eigen::Index i = 0; i < nx; ++i) {
                    out << ',' << format_number(std::sqrt(f.covariance[k](i, i)));
                }
            }
            out << '\n';
        }
    }
}

}  // namespace rgf::io
