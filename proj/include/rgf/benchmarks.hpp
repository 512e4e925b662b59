#pragma once

#include "rgf/gaussian_filter.hpp"
#include "rgf/linear_example.hpp"
#include "rgf/radar.hpp"
#include "rgf/robust_feature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace rgf::bench {

enum class Scenario { Linear, Radar, Sweep };
enum class Backend { MonteCarlo, Unscented };

inline std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::Linear: return "linear";
        case Scenario::Radar: return "radar";
        default: return "sweep";
    }
}
inline std::string to_string(Backend b) { return b == Backend::MonteCarlo ? "monte-carlo" : "unscented"; }

/// Tail parameters of one RGF variant. For the radar scenario `gamma` is the
/// Cauchy scale as a multiple of the nominal noise sigma.
struct TailParams {
    std::string name;
    double omega = linear_example::kTailWeight;
    double gamma = linear_example::kTailScale;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::Linear;
    std::vector<std::string> filters{"gf-thin", "gf-fat", "rgf"};
    std::vector<std::uint64_t> seeds;
    Backend backend = Backend::MonteCarlo;
    std::size_t samples = 1000;
    std::size_t steps = 50;  // linear and sweep only
    TailParams rgf_tail{"rgf", linear_example::kTailWeight, linear_example::kTailScale};
    double truth_omega = linear_example::kTailWeight;  // linear and sweep ground truth
    double truth_gamma = linear_example::kTailScale;
    std::vector<TailParams> sweep{{"matched", 0.1, 10.0}, {"under", 0.001, 1.0}, {"over", 0.5, 100.0}};
    radar::Setup radar;
    double divergence_threshold = 1e3;  // position error that counts as divergence
    unsigned threads = 0;               // 0: RGF_THREADS or hardware concurrency

    /// Seeds 0..count-1 shifted by `offset`.
    static std::vector<std::uint64_t> seed_range(std::size_t count, std::uint64_t offset = 0) {
        std::vector<std::uint64_t> s(count);
        std::iota(s.begin(), s.end(), offset);
        return s;
    }
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A failure inside one seed of a batch; carries the scenario and seed.
class RunFailure : public std::runtime_error {
public:
    RunFailure(Scenario scenario, std::uint64_t seed, const std::string& what)
        : std::runtime_error("scenario " + to_string(scenario) + ", seed " + std::to_string(seed) + ": " + what),
          seed_(seed) {}
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

inline void validate(const ExperimentConfig& cfg) {
    if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
    if (cfg.samples < 2) throw ConfigError("--samples must be at least 2");
    if (cfg.scenario == Scenario::Sweep) {
        if (cfg.sweep.size() < 2) throw ConfigError("a sweep needs at least two (omega, gamma) pairs");
    } else if (cfg.filters.empty()) {
        throw ConfigError("at least one filter is required");
    }
    if (cfg.scenario != Scenario::Radar && cfg.steps < 1) throw ConfigError("--steps must be at least 1");
    auto check_tail = [](const TailParams& t) {
        if (!(t.omega >= 0.0 && t.omega <= 1.0)) throw ConfigError("omega must lie in [0, 1]");
        if (!(t.gamma > 0.0)) throw ConfigError("gamma must be positive");
    };
    check_tail(cfg.rgf_tail);
    for (const auto& t : cfg.sweep) check_tail(t);
    check_tail({"truth", cfg.truth_omega, cfg.truth_gamma});
    for (const auto& f : cfg.filters) {
        if (f != "gf-thin" && f != "gf-fat" && f != "rgf") throw ConfigError("unknown filter '" + f + "'");
    }
}

/// A filter under test: a plain GF against a (mixture) sensor, or an RGF.
struct FilterDefinition {
    std::string name;
    std::variant<std::vector<MixtureComponent>, TailedSensorModel> sensor;
};

/// Fully-built models for one scenario.
struct ScenarioModel {
    TransitionModel transition;
    TailedSensorModel truth;
    std::variant<GaussianDensity, Vector> x0;  // sampled prior or pinned state
    GaussianBelief initial_belief;
    std::size_t steps = 0;
    std::size_t meas_every = 1;
    std::vector<Eigen::Index> position_dims;
    std::vector<FilterDefinition> filters;
};

inline ScenarioModel build_scenario(const ExperimentConfig& cfg) {
    validate(cfg);
    if (cfg.scenario == Scenario::Radar) {
        const radar::Setup& s = cfg.radar;
        radar::Setup rgf_setup = s;
        rgf_setup.rgf_tail_weight = cfg.rgf_tail.omega;
        rgf_setup.rgf_tail_scale_factor = cfg.rgf_tail.gamma;
        ScenarioModel m{radar::transition_model(s.constants), radar::truth_sensor(s), s.true_x0,
                        s.initial_belief(), s.steps(), s.meas_every(), {0, 1}, {}};
        for (const auto& name : cfg.filters) {
            if (name == "gf-thin") m.filters.push_back({name, radar::thin_sensor(s)});
            if (name == "gf-fat") m.filters.push_back({name, radar::fat_sensor(s)});
            if (name == "rgf") m.filters.push_back({name, radar::rgf_sensor(rgf_setup)});
        }
        return m;
    }

    namespace lx = linear_example;
    ScenarioModel m{lx::transition(), lx::sensor(cfg.truth_omega, cfg.truth_gamma), lx::prior(), lx::prior(),
                    cfg.steps, 1, {0}, {}};
    if (cfg.scenario == Scenario::Sweep) {
        for (const auto& t : cfg.sweep) m.filters.push_back({"rgf-" + t.name, lx::sensor(t.omega, t.gamma)});
        return m;
    }
    for (const auto& name : cfg.filters) {
        if (name == "gf-thin") m.filters.push_back({name, lx::thin_sensor()});
        if (name == "gf-fat") m.filters.push_back({name, lx::fat_surrogate_sensor(cfg.rgf_tail.omega, cfg.rgf_tail.gamma)});
        if (name == "rgf") m.filters.push_back({name, lx::sensor(cfg.rgf_tail.omega, cfg.rgf_tail.gamma)});
    }
    return m;
}

inline IntegrationBackend make_backend(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.backend == Backend::Unscented) return IntegrationBackend::unscented();
    return IntegrationBackend::monte_carlo(cfg.samples, seed);
}

inline double position_error(const Vector& estimate, const Vector& truth, std::span<const Eigen::Index> dims) {
    double s = 0.0;
    for (const Eigen::Index d : dims) s += (estimate[d] - truth[d]) * (estimate[d] - truth[d]);
    return std::sqrt(s);
}

/// Runs one filter over a simulated log. Numerical failures and runaway
/// estimates stop the filter and are recorded, never thrown.
inline FilterTrack run_filter(const ScenarioModel& model, const FilterDefinition& filter, const TrajectoryLog& log,
                              IntegrationBackend backend, double divergence_threshold) {
    FilterTrack track;
    track.name = filter.name;
    const std::size_t n = log.size();
    const Eigen::Index dim = model.initial_belief.dim();
    track.mean.assign(n, Vector::Constant(dim, std::numeric_limits<double>::quiet_NaN()));
    track.covariance.assign(n, Matrix::Constant(dim, dim, std::numeric_limits<double>::quiet_NaN()));

    GaussianBelief belief = model.initial_belief;
    for (std::size_t i = 0; i < n; ++i) {
        try {
            belief = predict(belief, model.transition, backend);
            if (const auto& y = log.measurement[i]) {
                if (const auto* gf = std::get_if<std::vector<MixtureComponent>>(&filter.sensor)) {
                    belief = update(belief, *gf, *y, backend);
                } else {
                    belief = rgf_update(belief, std::get<TailedSensorModel>(filter.sensor), *y, backend);
                }
            }
        } catch (const std::exception& e) {
            track.diverged_at = i;
            track.failure = e.what();
            return track;
        }
        track.mean[i] = belief.mean();
        track.covariance[i] = belief.covariance();
        if (!(position_error(belief.mean(), log.state[i], model.position_dims) <= divergence_threshold)) {
            track.diverged_at = i;
            track.failure = "estimate diverged";
            return track;
        }
    }
    return track;
}

/// Simulates once, then runs every filter on the identical measurements.
/// All filters share one Monte Carlo seed (common random numbers).
inline TrajectoryLog run_seed(const ScenarioModel& model, const ExperimentConfig& cfg, std::uint64_t seed) {
    Rng sim_rng(seed, 1);
    TrajectoryLog log = std::visit(
        [&](const auto& x0) {
            return simulate_trajectory(model.transition, model.truth, x0, model.steps, model.meas_every, sim_rng);
        },
        model.x0);
    for (const auto& f : model.filters) {
        log.filters.push_back(run_filter(model, f, log, make_backend(cfg, seed), cfg.divergence_threshold));
    }
    return log;
}

struct FilterMetrics {
    std::string name;
    std::vector<double> rmse;              // per state dimension
    std::vector<double> median_abs_error;  // per state dimension
    std::vector<double> position_error;    // per step; NaN after divergence
    double mean_position_error = 0.0;
    double max_outlier_spike = 0.0;  // max position error within +-1 step of a tail-drawn measurement
    std::size_t outlier_count = 0;
    std::size_t evaluated_steps = 0;
    bool diverged = false;
    std::optional<std::size_t> diverged_at;
};

struct MetricsReport {
    std::vector<FilterMetrics> filters;

    const FilterMetrics& at(const std::string& name) const {
        for (const auto& f : filters) {
            if (f.name == name) return f;
        }
        throw std::out_of_range("no metrics for filter '" + name + "'");
    }
};

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    return 0.5 * (upper + *std::max_element(v.begin(), mid));
}

/// Error statistics of every filter in the log. A diverged filter is scored
/// only on the steps before its divergence.
inline MetricsReport compute_metrics(const TrajectoryLog& log, std::span<const Eigen::Index> position_dims) {
    if (log.size() == 0) throw std::invalid_argument("compute_metrics: empty log");
    const std::size_t n = log.size();
    const Eigen::Index dim = log.state.front().size();

    std::vector<std::size_t> outliers;
    for (std::size_t i = 0; i < n; ++i) {
        if (log.tail_drawn[i]) outliers.push_back(i);
    }

    MetricsReport report;
    for (const auto& track : log.filters) {
        FilterMetrics m;
        m.name = track.name;
        m.diverged = track.diverged_at.has_value();
        m.diverged_at = track.diverged_at;
        m.evaluated_steps = track.diverged_at.value_or(n);
        m.outlier_count = outliers.size();
        m.position_error.assign(n, std::numeric_limits<double>::quiet_NaN());
        m.rmse.assign(static_cast<std::size_t>(dim), 0.0);

        std::vector<std::vector<double>> abs_err(static_cast<std::size_t>(dim));
        double pos_sum = 0.0;
        for (std::size_t i = 0; i < m.evaluated_steps; ++i) {
            const Vector e = track.mean[i] - log.state[i];
            for (Eigen::Index d = 0; d < dim; ++d) {
                m.rmse[static_cast<std::size_t>(d)] += e[d] * e[d];
                abs_err[static_cast<std::size_t>(d)].push_back(std::abs(e[d]));
            }
            m.position_error[i] = position_error(track.mean[i], log.state[i], position_dims);
            pos_sum += m.position_error[i];
        }
        for (Eigen::Index d = 0; d < dim; ++d) {
            const auto k = static_cast<std::size_t>(d);
            m.rmse[k] = m.evaluated_steps > 0 ? std::sqrt(m.rmse[k] / static_cast<double>(m.evaluated_steps))
                                              : std::numeric_limits<double>::quiet_NaN();
            m.median_abs_error.push_back(median(abs_err[k]));
        }
        m.mean_position_error = m.evaluated_steps > 0 ? pos_sum / static_cast<double>(m.evaluated_steps)
                                                      : std::numeric_limits<double>::quiet_NaN();
        for (const std::size_t k : outliers) {
            const std::size_t lo = k == 0 ? 0 : k - 1;
            const std::size_t hi = std::min(k + 1, m.evaluated_steps == 0 ? 0 : m.evaluated_steps - 1);
            for (std::size_t i = lo; i <= hi && i < m.evaluated_steps; ++i) {
                m.max_outlier_spike = std::max(m.max_outlier_spike, m.position_error[i]);
            }
        }
        report.filters.push_back(std::move(m));
    }
    return report;
}

struct SeedResult {
    std::uint64_t seed = 0;
    TrajectoryLog log;
    MetricsReport metrics;
};

struct FilterSummary {
    std::string name;
    std::vector<double> median_rmse;  // per dimension, over seeds
    double median_mean_position_error = 0.0;
    std::size_t divergences = 0;
    // Sweep only: median over seeds of RMSE(variant) / RMSE(reference).
    std::optional<double> median_rmse_ratio;
};

struct BatchReport {
    ExperimentConfig config;
    std::vector<SeedResult> runs;  // sorted by seed
    std::vector<FilterSummary> summary;
    std::string reference;  // sweep reference variant

    const FilterSummary& summary_of(const std::string& name) const {
        for (const auto& s : summary) {
            if (s.name == name) return s;
        }
        throw std::out_of_range("no summary for filter '" + name + "'");
    }
};

inline unsigned worker_count(const ExperimentConfig& cfg, std::size_t jobs) {
    unsigned n = cfg.threads;
    if (n == 0) {
        if (const char* env = std::getenv("RGF_THREADS")) n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

inline std::vector<FilterSummary> summarize(const std::vector<SeedResult>& runs, const std::string& reference) {
    std::vector<FilterSummary> out;
    if (runs.empty()) return out;
    for (const auto& f : runs.front().metrics.filters) {
        FilterSummary s;
        s.name = f.name;
        const std::size_t dim = f.rmse.size();
        for (std::size_t d = 0; d < dim; ++d) {
            std::vector<double> v;
            for (const auto& r : runs) v.push_back(r.metrics.at(f.name).rmse[d]);
            s.median_rmse.push_back(median(v));
        }
        std::vector<double> pos;
        std::vector<double> ratios;
        for (const auto& r : runs) {
            const FilterMetrics& m = r.metrics.at(f.name);
            pos.push_back(m.mean_position_error);
            if (m.diverged) ++s.divergences;
            if (!reference.empty()) ratios.push_back(m.rmse[0] / r.metrics.at(reference).rmse[0]);
        }
        s.median_mean_position_error = median(pos);
        if (!reference.empty()) s.median_rmse_ratio = median(ratios);
        out.push_back(std::move(s));
    }
    return out;
}

/// Runs every seed (in parallel when allowed) and assembles a report whose
/// content does not depend on the thread count.
inline BatchReport run_batch(const ExperimentConfig& cfg) {
    const ScenarioModel model = build_scenario(cfg);
    std::vector<std::uint64_t> seeds = cfg.seeds;
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

    std::vector<SeedResult> runs(seeds.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::size_t failed_index = seeds.size();
    std::mutex failure_mutex;

    auto work = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                runs[i].seed = seeds[i];
                runs[i].log = run_seed(model, cfg, seeds[i]);
                runs[i].metrics = compute_metrics(runs[i].log, model.position_dims);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    const unsigned workers = worker_count(cfg, seeds.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const std::exception& e) {
            throw RunFailure(cfg.scenario, seeds[failed_index], e.what());
        }
    }

    BatchReport report;
    report.config = cfg;
    report.config.seeds = seeds;
    if (cfg.scenario == Scenario::Sweep) {
        report.reference = "rgf-" + cfg.sweep.front().name;
        for (const auto& t : cfg.sweep) {
            if (t.name == "matched") report.reference = "rgf-matched";
        }
    }
    report.runs = std::move(runs);
    report.summary = summarize(report.runs, report.reference);
    return report;
}

inline BatchReport run_linear_example(ExperimentConfig cfg) {
    if (cfg.scenario != Scenario::Linear) throw ConfigError("run_linear_example needs the linear scenario");
    return run_batch(cfg);
}

inline BatchReport run_sweep(ExperimentConfig cfg) {
    if (cfg.scenario != Scenario::Sweep) throw ConfigError("run_sweep needs the sweep scenario");
    return run_batch(cfg);
}

inline BatchReport run_radar(ExperimentConfig cfg) {
    if (cfg.scenario != Scenario::Radar) throw ConfigError("run_radar needs the radar scenario");
    return run_batch(cfg);
}

}  // namespace rgf::bench
