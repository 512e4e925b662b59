// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "oracles.hpp"
#include "rgf/rgf.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace rgf;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

Vector v1(double v) { return Vector::Constant(1, v); }
Matrix m1(double v) { return Matrix::Constant(1, 1, v); }

Outcome kf_equivalence() {
    Rng rng(2016, 1);
    double worst_exact = 0.0;
    double worst_ukf = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const LinearGaussianProblem p = random_linear_problem(rng, 4);
        const GaussianBelief ref = kalman_update(p);
        IntegrationBackend exact = IntegrationBackend::exact_linear();
        IntegrationBackend ukf = IntegrationBackend::unscented();
        worst_exact = std::max(worst_exact, belief_rel_error(update(p.prior, p.sensor.body_fn(), p.sensor.noise(), p.y, exact), ref));
        worst_ukf = std::max(worst_ukf, belief_rel_error(update(p.prior, p.sensor.body_fn(), p.sensor.noise(), p.y, ukf), ref));
    }
    return {worst_exact <= 1e-10 && worst_ukf <= 1e-8,
            "500 models, max rel error exact-linear " + num(worst_exact) + " (tol 1e-10), unscented " + num(worst_ukf) +
                " (tol 1e-8)"};
}

Outcome omega_zero_reduction() {
    const GaussianBelief prior(v1(0.0), m1(2.0));
    const TailedSensorModel scalar = linear_example::sensor(0.0);
    radar::Setup setup;
    setup.rgf_tail_weight = 0.0;
    const TailedSensorModel radar_rgf = radar::rgf_sensor(setup);
    const auto radar_gf = radar::thin_sensor(setup);
    IntegrationBackend ukf_pred = IntegrationBackend::unscented();
    const GaussianBelief radar_prior = predict(setup.initial_belief(), radar::transition_model(setup.constants), ukf_pred);
    Vector radar_y = radar::measurement(radar_prior.mean(), setup.radar_position, Vector::Zero(2));
    radar_y += (Vector(2) << 0.4, -3.0).finished();

    double worst_ukf = 0.0;
    for (const double y : {-4.0, 0.0, 1.0, 8.0, 30.0}) {
        IntegrationBackend a = IntegrationBackend::unscented();
        IntegrationBackend b = IntegrationBackend::unscented();
        worst_ukf = std::max(worst_ukf, belief_rel_error(rgf_update(prior, scalar, v1(y), a),
                                                         update(prior, scalar.body_fn(), scalar.body_noise(), v1(y), b)));
    }
    {
        IntegrationBackend a = IntegrationBackend::unscented();
        IntegrationBackend b = IntegrationBackend::unscented();
        worst_ukf = std::max(worst_ukf, belief_rel_error(rgf_update(radar_prior, radar_rgf, radar_y, a),
                                                         update(radar_prior, radar_gf, radar_y, b)));
    }

    // Monte Carlo: the difference under a shared seed against the spread of
    // the GF posterior mean over independent seeds.
    double worst_ratio = 0.0;
    for (const double y : {-4.0, 1.0, 8.0, 30.0}) {
        double sum = 0.0;
        double sum_sq = 0.0;
        const int reps = 40;
        for (int s = 0; s < reps; ++s) {
            IntegrationBackend b = IntegrationBackend::monte_carlo(1000, 1000 + s);
            const double m = update(prior, scalar.body_fn(), scalar.body_noise(), v1(y), b).mean()[0];
            sum += m;
            sum_sq += m * m;
        }
        const double se = std::sqrt(std::max((sum_sq - sum * sum / reps) / (reps - 1), 1e-300));
        IntegrationBackend a = IntegrationBackend::monte_carlo(1000, 7);
        IntegrationBackend b = IntegrationBackend::monte_carlo(1000, 7);
        const double diff = std::abs(rgf_update(prior, scalar, v1(y), a).mean()[0] -
                                     update(prior, scalar.body_fn(), scalar.body_noise(), v1(y), b).mean()[0]);
        worst_ratio = std::max(worst_ratio, diff / se);
    }
    return {worst_ukf <= 1e-8 && worst_ratio <= 3.0,
            "unscented max diff " + num(worst_ukf) + " (tol 1e-8), monte-carlo max diff " + num(worst_ratio) +
                " standard errors (tol 3)"};
}

Outcome optimal_mean_oracle() {
    const GaussianBelief prior(v1(0.0), m1(2.0));
    const TailedSensorModel s = linear_example::sensor();
    IntegrationBackend exact = IntegrationBackend::exact_linear();
    const GaussianDensity body = predict_body_moments(prior, s.body_fn(), s.body_noise(), exact);
    const CauchyDensity tail(v1(0.0), v1(10.0));
    const FeatureContext ctx(prior.mean(), body, [tail](const VectorRef& y, const VectorRef&) { return tail.logpdf(y); },
                             0.1);
    const LinearConditioning lc = linear_conditioning(prior, linear_example::body());
    double worst = 0.0;
    for (int i = 0; i <= 600; ++i) {
        const double y = -30.0 + 0.1 * i;
        const double approx = approx_posterior_mean(v1(y), ctx, lc.D, lc.d)[0];
        worst = std::max(worst, std::abs(approx - oracle::bayes_posterior_mean(y, 0.0, 2.0, 1.0, 0.1, 0.0, 10.0)));
    }
    const double at20 = std::abs(approx_posterior_mean(v1(20.0), ctx, lc.D, lc.d)[0]);
    return {worst <= 0.05 && at20 < 0.05,
            "601 grid points, max |approx - quadrature| " + num(worst) + " (tol 0.05), |mean(20)| " + num(at20)};
}

Outcome feature_invariants() {
    Rng rng(77, 4);
    int violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::Index m = 1 + trial % 3;
        const GaussianDensity body(rng.normal_vector(m) * 5.0, random_spd(m, rng, 0.01));
        const Vector scale = (rng.normal_vector(m).array().abs() * 10.0 + 0.01).matrix();
        const CauchyDensity tail(rng.normal_vector(m), scale);
        const double w = rng.uniform();
        const FeatureContext ctx(Vector::Zero(m), body, [tail](const VectorRef& y, const VectorRef&) { return tail.logpdf(y); },
                                 w);
        const Vector y = rng.normal_vector(m) * std::pow(10.0, 6.0 * rng.uniform() - 2.0);
        const FeatureVector f = feature(y, ctx);
        const bool ok = f.body_responsibility + f.tail_responsibility == 1.0 &&
                        (f.weighted_measurement.array() == (y * f.body_responsibility).array()).all() &&
                        f.body_responsibility >= 0.0 && f.body_responsibility <= 1.0 && f.tail_responsibility >= 0.0 &&
                        f.tail_responsibility <= 1.0;
        violations += !ok;

        Vector extreme = Vector::Zero(m);
        extreme[trial % m] = trial % 2 ? 1e6 : -1e6;
        const Vector z = feature(extreme, ctx).stacked();
        Vector expected = Vector::Zero(m + 2);
        expected[m + 1] = 1.0;
        violations += !(z.allFinite() && z == expected);
    }
    return {violations == 0, "10000 draws + 10000 extreme measurements, violations " + std::to_string(violations)};
}

bench::ExperimentConfig batch(bench::Scenario s, std::size_t seeds) {
    bench::ExperimentConfig cfg;
    cfg.scenario = s;
    cfg.seeds = bench::ExperimentConfig::seed_range(seeds);
    return cfg;
}

Outcome linear_ordering() {
    const bench::BatchReport r = bench::run_linear_example(batch(bench::Scenario::Linear, 100));
    const double rgf = r.summary_of("rgf").median_rmse[0];
    const double thin = r.summary_of("gf-thin").median_rmse[0];
    const double fat = r.summary_of("gf-fat").median_rmse[0];
    // Seeds without any outlier count as losses.
    int wins = 0;
    for (const auto& run : r.runs) {
        const auto& a = run.metrics.at("rgf");
        const auto& b = run.metrics.at("gf-thin");
        wins += a.outlier_count > 0 && a.max_outlier_spike < b.max_outlier_spike;
    }
    const double frac = wins / static_cast<double>(r.runs.size());
    return {rgf < thin && rgf < fat && frac >= 0.9,
            "median RMSE rgf " + num(rgf) + ", gf-thin " + num(thin) + ", gf-fat " + num(fat) +
                "; rgf spike below gf-thin on " + num(100.0 * frac) + "% of seeds (need 90%)"};
}

Outcome tail_robustness() {
    const bench::BatchReport r = bench::run_sweep(batch(bench::Scenario::Sweep, 100));
    const double under = *r.summary_of("rgf-under").median_rmse_ratio;
    const double over = *r.summary_of("rgf-over").median_rmse_ratio;
    return {under < 1.5 && over < 1.5, "median RMSE ratio to matched: under " + num(under) + ", over " + num(over) +
                                           " (tol < 1.5)"};
}

Outcome radar_ordering() {
    const bench::BatchReport r = bench::run_radar(batch(bench::Scenario::Radar, 20));
    const auto& rgf = r.summary_of("rgf");
    const double thin = r.summary_of("gf-thin").median_mean_position_error;
    const double fat = r.summary_of("gf-fat").median_mean_position_error;
    return {rgf.median_mean_position_error < thin && rgf.median_mean_position_error < fat && rgf.divergences == 0,
            "median 2D error rgf " + num(rgf.median_mean_position_error) + ", gf-thin " + num(thin) + " (" +
                std::to_string(r.summary_of("gf-thin").divergences) + " diverged), gf-fat " + num(fat) +
                "; rgf divergences " + std::to_string(rgf.divergences)};
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rgf_acceptance";
    fs::create_directories(dir);
    const std::string bench = RGF_BENCH_PATH;
    const std::vector<std::string> invocations{
        "linear --seeds 8 --steps 30 --samples 300",
        "sweep --seeds 5 --steps 20 --samples 300",
        "radar --seeds 2 --samples 300",
        "linear --seeds 4 --steps 20 --backend unscented",
    };
    int identical = 0;
    for (std::size_t i = 0; i < invocations.size(); ++i) {
        std::string files[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path csv = dir / ("run" + std::to_string(i) + "_" + std::to_string(rep) + ".csv");
            const std::string cmd = "\"" + bench + "\" " + invocations[i] + " --threads " + std::to_string(1 + 2 * rep) +
                                    " --out \"" + csv.string() + "\" > /dev/null";
            if (std::system(cmd.c_str()) != 0) return {false, "invocation failed: " + invocations[i]};
            std::ifstream in(csv, std::ios::binary);
            files[rep].assign(std::istreambuf_iterator<char>(in), {});
        }
        identical += !files[0].empty() && files[0] == files[1];
    }
    return {identical == static_cast<int>(invocations.size()),
            std::to_string(identical) + "/" + std::to_string(invocations.size()) +
                " invocations byte-identical across repeats (1 vs 3 threads)"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {1, "KF equivalence", 1.0, kf_equivalence},
        {2, "omega=0 reduction", 1.0, omega_zero_reduction},
        {3, "optimal-mean oracle", 10.0, optimal_mean_oracle},
        {4, "feature invariants", 5.0, feature_invariants},
        {5, "linear benchmark ordering", 120.0, linear_ordering},
        {6, "tail-parameter robustness", 180.0, tail_robustness},
        {7, "radar ordering", 300.0, radar_ordering},
        {8, "CLI determinism", 600.0, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << "; "
                  << num(secs) << " s of " << num(c.budget_s) << " s" << (in_time ? "" : " OVER BUDGET") << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
