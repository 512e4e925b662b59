#pragma once

// Scalar random walk observed through a Gaussian body with a Cauchy tail:
//   x_t = x_{t-1} + v,  v ~ N(0, 1)
//   y_t ~ (1 - w) N(y | x, 1) + w C(y | x, gamma)
//   x_0 ~ N(0, 1)

#include "rgf/models.hpp"

namespace rgf::linear_example {

inline constexpr double kTailWeight = 0.1;
inline constexpr double kTailScale = 10.0;

inline Vector scalar(double v) { return Vector::Constant(1, v); }

inline GaussianDensity prior() { return GaussianDensity::standard(1); }

inline TransitionModel transition() {
    return {1, [](const VectorRef& x, const VectorRef& v) -> Vector { return x + v; }, GaussianDensity::standard(1)};
}

inline LinearGaussianSensor body() { return {Matrix::Identity(1, 1), Vector::Zero(1), Matrix::Identity(1, 1)}; }

inline TailedSensorModel sensor(double tail_weight = kTailWeight, double tail_scale = kTailScale) {
    return additive_cauchy_tailed_sensor([](const VectorRef& x) -> Vector { return x; }, GaussianDensity::standard(1),
                                         scalar(tail_scale), tail_weight);
}

/// Body-only sensor N(y | x, 1).
inline std::vector<MixtureComponent> thin_sensor() {
    const LinearGaussianSensor b = body();
    return {{1.0, b.body_fn(), b.noise()}};
}

/// Finite-variance stand-in for the full fat-tailed sensor in a plain GF:
/// (1 - w) N(y | x, 1) + w N(y | x, sd^2).
inline std::vector<MixtureComponent> fat_surrogate_sensor(double tail_weight = kTailWeight,
                                                          double tail_sd = kTailScale) {
    const LinearGaussianSensor b = body();
    return {{1.0 - tail_weight, b.body_fn(), b.noise()},
            {tail_weight, b.body_fn(), GaussianDensity(Vector::Zero(1), Matrix::Constant(1, 1, tail_sd * tail_sd))}};
}

}  // namespace rgf::linear_example
