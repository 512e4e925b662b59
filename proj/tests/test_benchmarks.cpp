#include "rgf/benchmarks.hpp"
#include "rgf/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace rgf;
using namespace rgf::bench;

namespace {

ExperimentConfig small_linear(std::size_t seeds = 4, std::uint64_t offset = 0) {
    ExperimentConfig cfg;
    cfg.seeds = ExperimentConfig::seed_range(seeds, offset);
    cfg.steps = 15;
    cfg.samples = 200;
    cfg.threads = 1;
    return cfg;
}

TrajectoryLog handmade_log() {
    TrajectoryLog log;
    log.initial_state = Vector::Zero(1);
    for (std::size_t k = 0; k < 4; ++k) {
        log.t.push_back(k + 1);
        log.state.push_back(Vector::Zero(1));
        log.measurement.emplace_back(Vector::Zero(1));
        log.tail_drawn.push_back(k == 2);
    }
    FilterTrack f{"f", {}, {}, std::nullopt, ""};
    for (const double e : {1.0, -1.0, 3.0, 1.0}) {
        f.mean.push_back(Vector::Constant(1, e));
        f.covariance.push_back(Matrix::Identity(1, 1));
    }
    log.filters.push_back(f);
    return log;
}

}  // namespace

TEST(Metrics, HandComputedValues) {
    const std::vector<Eigen::Index> dims{0};
    const FilterMetrics m = compute_metrics(handmade_log(), dims).at("f");
    EXPECT_DOUBLE_EQ(m.rmse[0], std::sqrt(12.0 / 4.0));
    EXPECT_DOUBLE_EQ(m.median_abs_error[0], 1.0);
    EXPECT_DOUBLE_EQ(m.mean_position_error, 1.5);
    EXPECT_DOUBLE_EQ(m.max_outlier_spike, 3.0);
    EXPECT_EQ(m.outlier_count, 1u);
    EXPECT_FALSE(m.diverged);
}

TEST(Metrics, DivergedFilterIsScoredBeforeDivergenceOnly) {
    TrajectoryLog log = handmade_log();
    log.filters[0].diverged_at = 2;
    const std::vector<Eigen::Index> dims{0};
    const FilterMetrics m = compute_metrics(log, dims).at("f");
    EXPECT_TRUE(m.diverged);
    EXPECT_EQ(m.evaluated_steps, 2u);
    EXPECT_DOUBLE_EQ(m.rmse[0], 1.0);
    EXPECT_TRUE(std::isnan(m.position_error[3]));
}

TEST(Metrics, MedianOfEvenAndOddSamples) {
    EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_DOUBLE_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
    EXPECT_TRUE(std::isnan(median({})));
}

TEST(Config, ValidationRejectsBadValues) {
    ExperimentConfig cfg = small_linear();
    cfg.filters = {"gf-thin", "kalman"};
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = small_linear();
    cfg.rgf_tail.omega = 1.5;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = small_linear();
    cfg.seeds.clear();
    EXPECT_THROW(validate(cfg), ConfigError);
    EXPECT_NO_THROW(validate(small_linear()));
}

TEST(Batch, SeedOffsetDoesNotChangePerSeedResults) {
    const BatchReport a = run_batch(small_linear(4, 0));
    const BatchReport b = run_batch(small_linear(4, 2));
    ASSERT_EQ(a.runs[2].seed, b.runs[0].seed);
    ASSERT_EQ(a.runs[3].seed, b.runs[1].seed);
    for (int k = 0; k < 2; ++k) {
        const auto& la = a.runs[2 + k].log;
        const auto& lb = b.runs[k].log;
        for (std::size_t f = 0; f < la.filters.size(); ++f) {
            for (std::size_t i = 0; i < la.size(); ++i) EXPECT_EQ(la.filters[f].mean[i][0], lb.filters[f].mean[i][0]);
        }
    }
}

TEST(Batch, ThreadCountDoesNotChangeTheCsv) {
    ExperimentConfig one = small_linear(5);
    ExperimentConfig many = one;
    many.threads = 4;
    std::ostringstream a, b;
    io::write_csv(a, run_batch(one));
    io::write_csv(b, run_batch(many));
    EXPECT_EQ(a.str(), b.str());
}

TEST(Batch, FiltersShareTheSimulatedMeasurements) {
    const BatchReport r = run_batch(small_linear(1));
    const auto& log = r.runs[0].log;
    EXPECT_EQ(log.filters.size(), 3u);
    EXPECT_EQ(log.filters[0].name, "gf-thin");
    EXPECT_EQ(log.filters[2].name, "rgf");
}

TEST(Batch, SweepReportsRatiosAgainstTheMatchedVariant) {
    ExperimentConfig cfg = small_linear(3);
    cfg.scenario = Scenario::Sweep;
    const BatchReport r = run_batch(cfg);
    EXPECT_EQ(r.reference, "rgf-matched");
    EXPECT_DOUBLE_EQ(*r.summary_of("rgf-matched").median_rmse_ratio, 1.0);
    EXPECT_TRUE(r.summary_of("rgf-under").median_rmse_ratio.has_value());
}

TEST(Batch, UnscentedBackendRuns) {
    ExperimentConfig cfg = small_linear(2);
    cfg.backend = Backend::Unscented;
    const BatchReport r = run_batch(cfg);
    EXPECT_TRUE(std::isfinite(r.summary_of("rgf").median_rmse[0]));
}

TEST(Batch, RadarDivergenceIsRecordedNotThrown) {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::Radar;
    cfg.seeds = {0};
    cfg.samples = 200;
    cfg.radar.duration_s = 5.0;
    cfg.divergence_threshold = 1e-9;  // every estimate counts as diverged
    const BatchReport r = run_batch(cfg);
    const FilterMetrics& m = r.runs[0].metrics.at("gf-thin");
    EXPECT_TRUE(m.diverged);
    EXPECT_EQ(r.summary_of("gf-thin").divergences, 1u);
}

TEST(Csv, HeaderAndSeventeenDigitNumbers) {
    const BatchReport r = run_batch(small_linear(1));
    std::ostringstream out;
    io::write_csv(out, r);
    std::istringstream in(out.str());
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    EXPECT_EQ(header, "seed,t,x_true_0,y_0,gf-thin_mean_0,gf-thin_sd_0,gf-fat_mean_0,gf-fat_sd_0,rgf_mean_0,rgf_sd_0");
    EXPECT_EQ(first.rfind("0,1,", 0), 0u);
    EXPECT_EQ(io::format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(io::format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Json, SummaryEchoesTheConfiguration) {
    const nlohmann::json j = io::to_json(run_batch(small_linear(2)));
    EXPECT_EQ(j["config"]["scenario"], "linear");
    EXPECT_EQ(j["config"]["samples"], 200);
    EXPECT_EQ(j["config"]["seeds"].size(), 2u);
    EXPECT_TRUE(j["summary"].contains("rgf"));
    EXPECT_EQ(j["runs"].size(), 2u);
}
