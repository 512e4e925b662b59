#pragma once

#include "rgf/gaussian_filter.hpp"
#include "rgf/linear_example.hpp"
#include "rgf/robust_feature.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

namespace rgf {

/// A random linear-Gaussian update problem y = A x + a + w.
struct LinearGaussianProblem {
    GaussianBelief prior;
    LinearGaussianSensor sensor;
    Vector y;
};

inline std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline Matrix random_spd(Eigen::Index n, Rng& rng, double floor = 0.1) {
    Matrix b(n, n);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
    return symmetrized(b * b.transpose() / static_cast<double>(n) + floor * Matrix::Identity(n, n));
}

inline LinearGaussianProblem random_linear_problem(Rng& rng, Eigen::Index max_dim = 4) {
    const auto pick = [&] { return 1 + static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(max_dim)); };
    const Eigen::Index nx = std::min(pick(), max_dim);
    const Eigen::Index ny = std::min(pick(), max_dim);
    Matrix a(ny, nx);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    return {GaussianBelief(rng.normal_vector(nx), random_spd(nx, rng)),
            LinearGaussianSensor{a, rng.normal_vector(ny), random_spd(ny, rng)}, rng.normal_vector(ny)};
}

/// Textbook Kalman measurement update.
inline GaussianBelief kalman_update(const LinearGaussianProblem& p) {
    const Matrix& s = p.prior.covariance();
    const Matrix& a = p.sensor.A;
    const Matrix innovation_cov = a * s * a.transpose() + p.sensor.P;
    const Matrix gain = s * a.transpose() * innovation_cov.inverse();
    const Vector mean = p.prior.mean() + gain * (p.y - a * p.prior.mean() - p.sensor.a);
    const Matrix cov = (Matrix::Identity(s.rows(), s.cols()) - gain * a) * s;
    return {mean, symmetrized(cov)};
}

/// max |a - b| / max(|b|, 1) over mean and covariance entries.
inline double belief_rel_error(const GaussianBelief& a, const GaussianBelief& b) {
    const double dm = (a.mean() - b.mean()).cwiseAbs().maxCoeff() / std::max(b.mean().cwiseAbs().maxCoeff(), 1.0);
    const double dc = (a.covariance() - b.covariance()).cwiseAbs().maxCoeff() /
                      std::max(b.covariance().cwiseAbs().maxCoeff(), 1.0);
    return std::max(dm, dc);
}

struct SelftestOptions {
    JitterPolicy jitter;
    std::uint64_t seed = 20160706;
};

struct SelftestCheck {
    std::string name;
    std::string tolerance;
    std::function<bool(const SelftestOptions&, std::string& detail)> run;
};

inline std::vector<SelftestCheck> selftest_checks() {
    std::vector<SelftestCheck> checks;

    checks.push_back({"feature-normalization", "exact: c0 + c2 == 1, c1 == y c0, components in [0, 1]",
                      [](const SelftestOptions& opt, std::string& detail) {
                          Rng rng(opt.seed, 1);
                          for (int trial = 0; trial < 2000; ++trial) {
                              const Eigen::Index m = 1 + trial % 3;
                              const GaussianDensity body(rng.normal_vector(m), random_spd(m, rng, 0.05));
                              const Vector scale = (rng.normal_vector(m).array().abs() + 0.1).matrix();
                              const CauchyDensity tail(rng.normal_vector(m), scale);
                              const double w = rng.uniform();
                              const FeatureContext ctx(Vector::Zero(m), body,
                                                       [tail](const VectorRef& y, const VectorRef&) { return tail.logpdf(y); }, w);
                              const Vector y = rng.normal_vector(m) * std::pow(10.0, 4.0 * rng.uniform());
                              const FeatureVector f = feature(y, ctx);
                              const bool ok = f.body_responsibility + f.tail_responsibility == 1.0 &&
                                              (f.weighted_measurement.array() == (y * f.body_responsibility).array()).all() &&
                                              f.body_responsibility >= 0.0 && f.body_responsibility <= 1.0 &&
                                              f.tail_responsibility >= 0.0 && f.tail_responsibility <= 1.0;
                              if (!ok) {
                                  detail = "violated at trial " + std::to_string(trial);
                                  return false;
                              }
                          }
                          return true;
                      }});

    checks.push_back({"kf-equivalence", "relative 1e-10 (exact-linear), 1e-8 (unscented)",
                      [](const SelftestOptions& opt, std::string& detail) {
                          Rng rng(opt.seed, 2);
                          double worst_exact = 0.0;
                          double worst_ukf = 0.0;
                          for (int trial = 0; trial < 200; ++trial) {
                              const LinearGaussianProblem p = random_linear_problem(rng);
                              const GaussianBelief ref = kalman_update(p);
                              IntegrationBackend exact = IntegrationBackend::exact_linear();
                              IntegrationBackend ukf = IntegrationBackend::unscented();
                              exact.jitter = ukf.jitter = opt.jitter;
                              worst_exact = std::max(worst_exact, belief_rel_error(update(p.prior, p.sensor.body_fn(), p.sensor.noise(), p.y, exact), ref));
                              worst_ukf = std::max(worst_ukf, belief_rel_error(update(p.prior, p.sensor.body_fn(), p.sensor.noise(), p.y, ukf), ref));
                          }
                          detail = "max error exact-linear " + short_number(worst_exact) + ", unscented " +
                                   short_number(worst_ukf);
                          return worst_exact <= 1e-10 && worst_ukf <= 1e-8;
                      }});

    checks.push_back({"omega-zero-reduction", "1e-8 (unscented; monte-carlo with shared seed)",
                      [](const SelftestOptions& opt, std::string& detail) {
                          const GaussianBelief prior(Vector::Zero(1), Matrix::Constant(1, 1, 2.0));
                          const TailedSensorModel sensor = linear_example::sensor(0.0);
                          double worst = 0.0;
                          for (const double y : {-3.0, 0.5, 1.0, 25.0}) {
                              const Vector obs = linear_example::scalar(y);
                              for (int kind = 0; kind < 2; ++kind) {
                                  auto make = [&] {
                                      IntegrationBackend b = kind == 0 ? IntegrationBackend::unscented()
                                                                       : IntegrationBackend::monte_carlo(1000, opt.seed);
                                      b.jitter = opt.jitter;
                                      return b;
                                  };
                                  IntegrationBackend gf_backend = make();
                                  IntegrationBackend rgf_backend = make();
                                  const GaussianBelief gf = update(prior, sensor.body_fn(), sensor.body_noise(), obs, gf_backend);
                                  const GaussianBelief robust = rgf_update(prior, sensor, obs, rgf_backend);
                                  worst = std::max(worst, belief_rel_error(robust, gf));
                              }
                          }
                          detail = "max difference " + short_number(worst);
                          return worst <= 1e-8;
                      }});

    checks.push_back({"redescending-mean", "0.05 absolute",
                      [](const SelftestOptions& opt, std::string& detail) {
                          const GaussianBelief prior(Vector::Zero(1), Matrix::Constant(1, 1, 2.0));
                          const TailedSensorModel sensor = linear_example::sensor();
                          auto mean_at = [&](double y) {
                              IntegrationBackend b = IntegrationBackend::monte_carlo(1000, opt.seed);
                              b.jitter = opt.jitter;
                              return rgf_update(prior, sensor, linear_example::scalar(y), b).mean()[0];
                          };
                          std::vector<double> grid;
                          for (double y = 10.0; y <= 100.0; y += 5.0) grid.push_back(std::abs(mean_at(y)));
                          for (std::size_t i = 0; i < grid.size(); ++i) {
                              for (std::size_t j = 0; j < i; ++j) {
                                  if (grid[i] > grid[j] + 0.05) {
                                      detail = "influence grows between grid points";
                                      return false;
                                  }
                              }
                          }
                          detail = "|mean(100)| = " + short_number(grid.back());
                          return grid.back() < 0.05;
                      }});

    checks.push_back({"gaussian-normalization", "1e-3 (trapezoid on +-8 sigma)",
                      [](const SelftestOptions&, std::string& detail) {
                          const GaussianDensity d(Vector::Constant(1, 0.7), Matrix::Constant(1, 1, 2.5));
                          const double sd = std::sqrt(2.5);
                          const int n = 4000;
                          const double h = 16.0 * sd / n;
                          double sum = 0.0;
                          for (int i = 0; i <= n; ++i) {
                              const double x = 0.7 - 8.0 * sd + i * h;
                              const double v = std::exp(d.logpdf(Vector::Constant(1, x)));
                              sum += (i == 0 || i == n) ? 0.5 * v : v;
                          }
                          detail = "integral " + short_number(sum * h);
                          return std::abs(sum * h - 1.0) <= 1e-3;
                      }});

    return checks;
}

/// Runs every embedded invariant check, printing one line each. Returns the
/// process exit code: 0 iff all pass.
inline int run_selftest(std::ostream& out, const SelftestOptions& opt = {}) {
    int failures = 0;
    for (const auto& check : selftest_checks()) {
        std::string detail;
        bool ok = false;
        try {
            ok = check.run(opt, detail);
        } catch (const std::exception& e) {
            detail = std::string("threw: ") + e.what();
        }
        if (!ok) ++failures;
        out << (ok ? "[PASS] " : "[FAIL] ") << check.name << "  tolerance: " << check.tolerance;
        if (!detail.empty()) out << "  (" << detail << ')';
        out << '\n';
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace rgf
