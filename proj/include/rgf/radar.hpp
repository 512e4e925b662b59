#pragma once

// Reentry-vehicle tracking from a ground radar.
//
// State (x1, x2, x3, x4, x5): planar position [km], velocity [km/s], and the
// log-offset of the ballistic coefficient. Measurements: range [km] and
// bearing [mrad], the latter left unwrapped.

#include "rgf/models.hpp"

#include <cmath>

namespace rgf::radar {

struct Constants {
    double delta_s = 0.05;            // integration step [s]
    double sigma_v = 5e-3;            // process noise [km/s^2]
    double beta0 = 0.59;              // nominal ballistic coefficient [1/km]
    double H0 = 13.4;                 // density scale height [km]
    double Gm0 = 3.986e5;             // gravitational parameter [km^3/s^2]
    double R0 = 6374.0;               // Earth radius [km]
    double sigma_nom_r = 0.5;         // [km]
    double sigma_con_r = 15.8;        // [km]
    double sigma_nom_theta_mrad = 0.63;
    double sigma_con_theta_mrad = 200.0;
    double alpha = 0.15;              // contamination weight
};

inline Vector transition(const VectorRef& x, const VectorRef& v, const Constants& c) {
    require_dim(x.size(), 5, "radar state");
    require_dim(v.size(), 2, "radar process noise");
    const double r = std::hypot(x[0], x[1]);
    if (r == 0.0) throw DomainError("radar transition: zero distance to the Earth's centre");
    const double speed = std::hypot(x[2], x[3]);
    const double beta = c.beta0 * std::exp(x[4]);
    const double drag = -beta * std::exp((c.R0 - r) / c.H0) * speed;
    const double gravity = -c.Gm0 / (r * r * r);
    const double kick = std::sqrt(c.delta_s) * c.sigma_v;

    Vector out(5);
    out[0] = x[0] + c.delta_s * x[2];
    out[1] = x[1] + c.delta_s * x[3];
    out[2] = x[2] + c.delta_s * (drag * x[2] + gravity * x[0]) + kick * v[0];
    out[3] = x[3] + c.delta_s * (drag * x[3] + gravity * x[1]) + kick * v[1];
    out[4] = x[4];
    return out;
}

/// Range and bearing (10^3 arctan) from `radar_pos`, plus additive noise w.
inline Vector measurement(const VectorRef& x, const VectorRef& radar_pos, const VectorRef& w) {
    const double dx = x[0] - radar_pos[0];
    const double dy = x[1] - radar_pos[1];
    if (dx == 0.0 && dy == 0.0) throw DomainError("radar measurement: target coincides with the radar");
    Vector y(2);
    y[0] = std::hypot(dx, dy) + w[0];
    y[1] = 1e3 * std::atan(dy / dx) + w[1];
    return y;
}

/// Everything about the scenario that is not a physical constant.
struct Setup {
    Constants constants;
    // Station position and the initial filter covariance are free choices of
    // this library, not part of the physical scenario.
    Vector radar_position = (Vector(2) << 6374.0, 0.0).finished();
    Vector true_x0 = (Vector(5) << 6500.4, 349.14, -1.8093, -6.7967, 0.6932).finished();
    Vector initial_mean = (Vector(5) << 6500.4, 349.14, -1.8093, -6.7967, 0.0).finished();
    Vector initial_cov_diag = (Vector(5) << 1e-6, 1e-6, 1e-6, 1e-6, 1.0).finished();
    double duration_s = 100.0;
    double measurement_period_s = 1.0;
    double rgf_tail_weight = 0.1;
    double rgf_tail_scale_factor = 10.0;  // Cauchy scale as a multiple of the nominal sigma

    std::size_t steps() const { return static_cast<std::size_t>(std::lround(duration_s / constants.delta_s)); }
    std::size_t meas_every() const {
        return static_cast<std::size_t>(std::lround(measurement_period_s / constants.delta_s));
    }
    GaussianBelief initial_belief() const {
        return {initial_mean, Matrix(initial_cov_diag.asDiagonal())};
    }
};

inline Matrix nominal_covariance(const Constants& c) {
    return Vector((Vector(2) << c.sigma_nom_r * c.sigma_nom_r, c.sigma_nom_theta_mrad * c.sigma_nom_theta_mrad).finished())
        .asDiagonal();
}

inline Matrix contamination_covariance(const Constants& c) {
    return Vector((Vector(2) << c.sigma_con_r * c.sigma_con_r, c.sigma_con_theta_mrad * c.sigma_con_theta_mrad).finished())
        .asDiagonal();
}

inline TransitionModel transition_model(const Constants& c) {
    return {5, [c](const VectorRef& x, const VectorRef& v) { return transition(x, v, c); },
            GaussianDensity::standard(2)};
}

inline MeanFn noiseless_measurement(const Vector& radar_pos) {
    return [radar_pos](const VectorRef& x) -> Vector { return measurement(x, radar_pos, Vector::Zero(2)); };
}

/// Glint-noise sensor that generates the data:
/// w ~ (1 - alpha) N(0, S_nom) + alpha N(0, S_con).
inline TailedSensorModel truth_sensor(const Setup& s) {
    const Vector zero = Vector::Zero(2);
    return additive_gaussian_tailed_sensor(noiseless_measurement(s.radar_position),
                                           {zero, nominal_covariance(s.constants)},
                                           {zero, contamination_covariance(s.constants)}, s.constants.alpha);
}

/// Nominal noise only.
inline std::vector<MixtureComponent> thin_sensor(const Setup& s) {
    const MeanFn h = noiseless_measurement(s.radar_position);
    return {{1.0, [h](const VectorRef& x, const VectorRef& w) -> Vector { return h(x) + w; },
             GaussianDensity(Vector::Zero(2), nominal_covariance(s.constants))}};
}

/// Gaussian with the true mixture covariance.
inline std::vector<MixtureComponent> fat_sensor(const Setup& s) {
    const MeanFn h = noiseless_measurement(s.radar_position);
    const Constants& c = s.constants;
    const Matrix cov = (1.0 - c.alpha) * nominal_covariance(c) + c.alpha * contamination_covariance(c);
    return {{1.0, [h](const VectorRef& x, const VectorRef& w) -> Vector { return h(x) + w; },
             GaussianDensity(Vector::Zero(2), cov)}};
}

/// Nominal body with a default Cauchy tail:
/// 0.9 N(0, S_nom) + 0.1 C(0, diag(10 sigma_nom_r, 10 sigma_nom_theta)).
inline TailedSensorModel rgf_sensor(const Setup& s) {
    const Constants& c = s.constants;
    const Vector scale =
        s.rgf_tail_scale_factor * (Vector(2) << c.sigma_nom_r, c.sigma_nom_theta_mrad).finished();
    return additive_cauchy_tailed_sensor(noiseless_measurement(s.radar_position),
                                         {Vector::Zero(2), nominal_covariance(c)}, scale, s.rgf_tail_weight);
}

}  // namespace rgf::radar
