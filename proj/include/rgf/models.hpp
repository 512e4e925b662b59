#pragma once

#include "rgf/distributions.hpp"
#include "rgf/integration.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rgf {

/// x_t = g(x_{t-1}, v_t), v_t ~ noise.
struct TransitionModel {
    std::size_t state_dim = 0;
    NoisyFn g;
    GaussianDensity noise;

    std::size_t noise_dim() const { return static_cast<std::size_t>(noise.dim()); }
    Vector operator()(const VectorRef& x, const VectorRef& v) const { return g(x, v); }
};

/// log t(y | x) of a tail density.
using TailLogPdf = std::function<double(const VectorRef& y, const VectorRef& x)>;

/// p(y|x) = (1 - w) b(y|x) + w t(y|x), with the body and the tail each given
/// as a noisy function of a Gaussian noise variable, plus the tail's
/// density for evaluating the feature.
class TailedSensorModel {
public:
    TailedSensorModel(std::size_t meas_dim, NoisyFn body_fn, GaussianDensity body_noise, NoisyFn tail_fn,
                      GaussianDensity tail_noise, TailLogPdf tail_logpdf, double tail_weight)
        : meas_dim_(meas_dim),
          body_{1.0 - tail_weight, std::move(body_fn), std::move(body_noise)},
          tail_{tail_weight, std::move(tail_fn), std::move(tail_noise)},
          tail_logpdf_(std::move(tail_logpdf)),
          weight_(tail_weight) {
        if (!(weight_ >= 0.0 && weight_ <= 1.0)) throw std::invalid_argument("TailedSensorModel: tail weight outside [0, 1]");
        if (meas_dim_ == 0) throw std::invalid_argument("TailedSensorModel: meas_dim must be positive");
    }

    std::size_t meas_dim() const { return meas_dim_; }
    double tail_weight() const { return weight_; }
    const NoisyFn& body_fn() const { return body_.fn; }
    const GaussianDensity& body_noise() const { return body_.noise; }
    const NoisyFn& tail_fn() const { return tail_.fn; }
    const GaussianDensity& tail_noise() const { return tail_.noise; }
    double tail_logpdf(const VectorRef& y, const VectorRef& x) const { return tail_logpdf_(y, x); }
    const TailLogPdf& tail_density() const { return tail_logpdf_; }

    /// Body and tail as weighted branches of the full sensor h.
    std::vector<MixtureComponent> components() const { return {body_, tail_}; }

    struct Draw {
        Vector y;
        bool from_tail = false;
    };

    /// Full sampler: Bernoulli(w) branch indicator, then that branch.
    Draw draw(const VectorRef& x, Rng& rng) const {
        const bool from_tail = rng.uniform() < weight_;
        const MixtureComponent& c = from_tail ? tail_ : body_;
        return {c.fn(x, c.noise.sample(rng)), from_tail};
    }

    Vector sample(const VectorRef& x, Rng& rng) const { return draw(x, rng).y; }

private:
    std::size_t meas_dim_;
    MixtureComponent body_;
    MixtureComponent tail_;
    TailLogPdf tail_logpdf_;
    double weight_;
};

/// Linear Gaussian body b(y|x) = N(y | A x + a, P).
struct LinearGaussianSensor {
    Matrix A;
    Vector a;
    Matrix P;

    NoisyFn body_fn() const {
        return [A = A, a = a](const VectorRef& x, const VectorRef& w) -> Vector { return A * x + a + w; };
    }
    GaussianDensity noise() const { return {Vector::Zero(P.rows()), P}; }
};

using MeanFn = std::function<Vector(const VectorRef& x)>;

/// y = h(x) + w in the body, y = h(x) + scale .* Cauchy in the tail; the tail
/// noise is driven by standard normals so every backend can propagate it.
inline TailedSensorModel additive_cauchy_tailed_sensor(MeanFn h, GaussianDensity body_noise, Vector tail_scale,
                                                       double tail_weight) {
    const auto dim = static_cast<std::size_t>(body_noise.dim());
    require_dim(tail_scale.size(), body_noise.dim(), "cauchy tail scale");
    const CauchyDensity tail(Vector::Zero(tail_scale.size()), tail_scale);
    NoisyFn body = [h](const VectorRef& x, const VectorRef& w) -> Vector { return h(x) + w; };
    NoisyFn tail_fn = [h, tail_scale](const VectorRef& x, const VectorRef& w) -> Vector {
        Vector y = h(x);
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += tail_scale[i] * cauchy_from_normal(w[i]);
        return y;
    };
    TailLogPdf logpdf = [h, tail](const VectorRef& y, const VectorRef& x) { return tail.logpdf(y - h(x)); };
    return {dim, std::move(body), std::move(body_noise), std::move(tail_fn), GaussianDensity::standard(tail_scale.size()),
            std::move(logpdf), tail_weight};
}

/// y = h(x) + w with a Gaussian body and a wider Gaussian tail (glint-style
/// contamination).
inline TailedSensorModel additive_gaussian_tailed_sensor(MeanFn h, GaussianDensity body_noise,
                                                         GaussianDensity tail_noise, double tail_weight) {
    const auto dim = static_cast<std::size_t>(body_noise.dim());
    NoisyFn fn = [h](const VectorRef& x, const VectorRef& w) -> Vector { return h(x) + w; };
    TailLogPdf logpdf = [h, tail_noise](const VectorRef& y, const VectorRef& x) { return tail_noise.logpdf(y - h(x)); };
    return {dim, fn, std::move(body_noise), fn, std::move(tail_noise), std::move(logpdf), tail_weight};
}

/// Per-filter estimates over a trajectory.
struct FilterTrack {
    std::string name;
    std::vector<Vector> mean;
    std::vector<Matrix> covariance;
    std::optional<std::size_t> diverged_at;  // index into the log
    std::string failure;
};

/// Ground truth, measurements, and filter estimates for steps t = 1..T.
struct TrajectoryLog {
    Vector initial_state;
    std::vector<std::size_t> t;
    std::vector<Vector> state;
    std::vector<std::optional<Vector>> measurement;  // empty on predict-only steps
    std::vector<bool> tail_drawn;
    std::vector<FilterTrack> filters;

    std::size_t size() const { return t.size(); }
};

/// Iterates the transition from a fixed x0 and emits a measurement every
/// `meas_every` steps.
inline TrajectoryLog simulate_trajectory(const TransitionModel& transition, const TailedSensorModel& sensor,
                                         const Vector& x0, std::size_t steps, std::size_t meas_every, Rng& rng) {
    if (steps < 1) throw std::invalid_argument("simulate_trajectory: steps must be >= 1");
    if (meas_every < 1) throw std::invalid_argument("simulate_trajectory: meas_every must be >= 1");
    require_dim(x0.size(), static_cast<Eigen::Index>(transition.state_dim), "simulate_trajectory x0");

    TrajectoryLog log;
    log.initial_state = x0;
    log.t.reserve(steps);
    log.state.reserve(steps);
    log.measurement.reserve(steps);
    log.tail_drawn.reserve(steps);

    Vector x = x0;
    for (std::size_t step = 1; step <= steps; ++step) {
        x = transition(x, transition.noise.sample(rng));
        if (!x.allFinite()) throw SimulationError("non-finite state", step);
        log.t.push_back(step);
        log.state.push_back(x);
        if (step % meas_every == 0) {
            auto d = sensor.draw(x, rng);
            if (!d.y.allFinite()) throw SimulationError("non-finite measurement", step);
            log.measurement.emplace_back(std::move(d.y));
            log.tail_drawn.push_back(d.from_tail);
        } else {
            log.measurement.emplace_back(std::nullopt);
            log.tail_drawn.push_back(false);
        }
    }
    return log;
}

/// Same, with x0 drawn from `x0_density` first.
inline TrajectoryLog simulate_trajectory(const TransitionModel& transition, const TailedSensorModel& sensor,
                                         const GaussianDensity& x0_density, std::size_t steps, std::size_t meas_every,
                                         Rng& rng) {
    const Vector x0 = x0_density.sample(rng);
    return simulate_trajectory(transition, sensor, x0, steps, meas_every, rng);
}

}  // namespace rgf
