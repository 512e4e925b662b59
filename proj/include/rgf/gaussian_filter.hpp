#pragma once

#include "rgf/integration.hpp"
#include "rgf/models.hpp"

#include <span>

namespace rgf {

namespace detail {

inline GaussianBelief checked_belief(Vector mean, Matrix cov, const char* stage) {
    cov = symmetrized(cov);
    if (!mean.allFinite() || !cov.allFinite()) throw NumericalError(std::string(stage) + ": non-finite belief");
    if (!is_psd(cov, GaussianDensity::kPsdFloor)) {
        throw NumericalError(std::string(stage) + ": covariance is not PSD (min eigenvalue " +
                             std::to_string(min_eigenvalue(cov)) + ")");
    }
    return {std::move(mean), std::move(cov)};
}

}  // namespace detail

/// Moment-matching prediction: the Gaussian with the mean and covariance of
/// g(x, v) for x ~ belief.
inline GaussianBelief predict(const GaussianBelief& belief, const TransitionModel& transition,
                              IntegrationBackend& backend) {
    require_dim(belief.dim(), static_cast<Eigen::Index>(transition.state_dim), "predict belief");
    MomentTriple m = propagate_moments(belief, transition.g, transition.noise, backend);
    require_dim(m.mean_y.size(), belief.dim(), "transition output");
    return detail::checked_belief(std::move(m.mean_y), std::move(m.cov_yy), "predict");
}

/// Gaussian conditioning on already-propagated moments:
///   mean = mu_x + S_xy S_yy^-1 (y - mu_y),  cov = S_xx - S_xy S_yy^-1 S_xy^T.
inline GaussianBelief condition(const GaussianBelief& belief, const MomentTriple& m, const VectorRef& y,
                                const JitterPolicy& jitter) {
    require_dim(y.size(), m.mean_y.size(), "update measurement");
    if (!y.allFinite()) throw std::invalid_argument("update: measurement is not finite");
    const JitteredCholesky chol(m.cov_yy, jitter);
    // K^T = S_yy^-1 S_xy^T
    const Matrix gain_t = chol.solve(m.cov_xy.transpose());
    Vector mean = belief.mean() + gain_t.transpose() * (y - m.mean_y);
    Matrix cov = belief.covariance() - m.cov_xy * gain_t;
    return detail::checked_belief(std::move(mean), std::move(cov), "update");
}

/// GF update against a (possibly mixture) sensor.
inline GaussianBelief update(const GaussianBelief& belief, std::span<const MixtureComponent> sensor,
                             const VectorRef& y, IntegrationBackend& backend) {
    if (!y.allFinite()) throw std::invalid_argument("update: measurement is not finite");
    const MomentTriple m = propagate_moments(belief, sensor, backend);
    return condition(belief, m, y, backend.jitter);
}

inline GaussianBelief update(const GaussianBelief& belief, const NoisyFn& sensor_fn, const GaussianDensity& sensor_noise,
                             const VectorRef& y, IntegrationBackend& backend) {
    const MixtureComponent single{1.0, sensor_fn, sensor_noise};
    return update(belief, std::span<const MixtureComponent>(&single, 1), y, backend);
}

/// One full GF step: predict, then update.
inline GaussianBelief gf_step(const GaussianBelief& belief, const TransitionModel& transition,
                              std::span<const MixtureComponent> sensor, const VectorRef& y,
                              IntegrationBackend& backend) {
    return update(predict(belief, transition, backend), sensor, y, backend);
}

}  // namespace rgf
