#pragma once

#include "rgf/gaussian_filter.hpp"
#include "rgf/models.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace rgf {

/// Predicted measurement moments of the body alone, (mu_y^b, Sigma_yy^b).
/// The tail never enters, so its (possibly infinite) variance cannot wash
/// out the prediction.
inline GaussianDensity predict_body_moments(const GaussianBelief& belief, const NoisyFn& body_fn,
                                            const GaussianDensity& body_noise, IntegrationBackend& backend) {
    MomentTriple m = propagate_moments(belief, body_fn, body_noise, backend);
    Matrix cov = symmetrized(m.cov_yy);
    if (!m.mean_y.allFinite() || !is_psd(cov, GaussianDensity::kPsdFloor)) {
        throw NumericalError("predict_body_moments: predicted body covariance is not PSD");
    }
    return {std::move(m.mean_y), std::move(cov)};
}

/// Everything the feature needs at one time step: the predicted state mean,
/// the predicted body measurement density, the tail, and its weight.
class FeatureContext {
public:
    FeatureContext(Vector state_mean, std::optional<GaussianDensity> body_prediction, TailLogPdf tail, double tail_weight)
        : state_mean_(std::move(state_mean)), body_(std::move(body_prediction)), tail_(std::move(tail)), weight_(tail_weight) {
        if (!(weight_ >= 0.0 && weight_ <= 1.0)) throw std::invalid_argument("FeatureContext: tail weight outside [0, 1]");
        if (weight_ > 0.0 && weight_ < 1.0 && !body_) {
            throw std::invalid_argument("FeatureContext: body prediction required for 0 < tail weight < 1");
        }
        if (weight_ > 0.0 && !tail_) throw std::invalid_argument("FeatureContext: tail density required");
        log_body_weight_ = std::log1p(-weight_);
        log_tail_weight_ = std::log(weight_);
    }

    const Vector& state_mean() const { return state_mean_; }
    const std::optional<GaussianDensity>& body_prediction() const { return body_; }
    double tail_weight() const { return weight_; }

    double log_body_term(const VectorRef& y) const { return log_body_weight_ + body_->logpdf(y); }
    double log_tail_term(const VectorRef& y) const { return log_tail_weight_ + tail_(y, state_mean_); }

private:
    Vector state_mean_;
    std::optional<GaussianDensity> body_;
    TailLogPdf tail_;
    double weight_;
    double log_body_weight_;
    double log_tail_weight_;
};

/// (c0, c1, c2): body responsibility, responsibility-weighted measurement,
/// tail responsibility. c0 + c2 == 1 and c1 == y * c0 hold exactly.
struct FeatureVector {
    double body_responsibility = 1.0;
    Vector weighted_measurement;
    double tail_responsibility = 0.0;

    /// Stacked as [c0, c1..., c2]; dimension meas_dim + 2.
    Vector stacked() const {
        Vector z(weighted_measurement.size() + 2);
        z[0] = body_responsibility;
        z.segment(1, weighted_measurement.size()) = weighted_measurement;
        z[z.size() - 1] = tail_responsibility;
        return z;
    }
};

inline FeatureVector feature(const VectorRef& y, const FeatureContext& ctx) {
    const double w = ctx.tail_weight();
    if (w == 0.0) return {1.0, y, 0.0};
    if (w == 1.0) return {0.0, Vector::Zero(y.size()), 1.0};

    const double lb = ctx.log_body_term(y);
    const double lt = ctx.log_tail_term(y);
    if (std::isnan(lb) || std::isnan(lt)) throw NumericalError("feature: log-density is NaN");
    // Both densities underflow: the measurement is beyond anything the body
    // explains, so it goes to the tail.
    if (lb == -std::numeric_limits<double>::infinity() && lt == lb) return {0.0, Vector::Zero(y.size()), 1.0};
    // The smaller responsibility comes from the normalized exponential, the
    // larger as its complement, so the two sum to exactly one and an
    // underflowing body density gives exactly (0, 0, 1).
    double c0;
    double c2;
    if (lb >= lt) {
        c2 = std::exp(lt - log_add_exp(lb, lt));
        c0 = 1.0 - c2;
    } else {
        c0 = std::exp(lb - log_add_exp(lb, lt));
        c2 = 1.0 - c0;
    }
    return {c0, y * c0, c2};
}

/// Gaussian-conditioning terms of a linear body: the exact linear-Gaussian
/// posterior mean is d + D y.
struct LinearConditioning {
    Matrix D;
    Vector d;
};

inline LinearConditioning linear_conditioning(const GaussianBelief& belief, const LinearGaussianSensor& body) {
    require_dim(body.A.cols(), belief.dim(), "linear_conditioning A cols");
    require_dim(body.A.rows(), body.P.rows(), "linear_conditioning A rows");
    require_dim(body.a.size(), body.P.rows(), "linear_conditioning offset");
    const Eigen::LLT<Matrix> prior(belief.covariance());
    const Eigen::LLT<Matrix> noise(body.P);
    if (prior.info() != Eigen::Success || noise.info() != Eigen::Success) {
        throw NumericalError("linear_conditioning: prior or body covariance not invertible");
    }
    const Matrix at_pinv = noise.solve(body.A).transpose();  // A^T P^-1
    const Matrix precision = prior.solve(Matrix::Identity(belief.dim(), belief.dim())) + at_pinv * body.A;
    const Eigen::LLT<Matrix> sum(symmetrized(precision));
    if (sum.info() != Eigen::Success) throw NumericalError("linear_conditioning: precision sum not invertible");
    return {sum.solve(at_pinv), sum.solve(prior.solve(belief.mean()) - at_pinv * body.a)};
}

/// Responsibility-weighted blend of the linear-Gaussian posterior mean and
/// the prior mean: c0 (d + D y) + c2 mu_x. Redescends to mu_x for outliers.
inline Vector approx_posterior_mean(const VectorRef& y, const FeatureContext& ctx, const Matrix& D, const Vector& d) {
    require_dim(D.cols(), y.size(), "approx_posterior_mean D");
    require_dim(D.rows(), ctx.state_mean().size(), "approx_posterior_mean D rows");
    const FeatureVector f = feature(y, ctx);
    Vector out = f.tail_responsibility * ctx.state_mean();
    if (f.body_responsibility > 0.0) out += f.body_responsibility * (d + D * y);
    return out;
}

/// Robust update: filter with the pseudo measurement phi(y) against the
/// pseudo sensor phi(h(x, w)), where h is the full body + tail sensor and
/// phi is built from the body-only prediction at this step.
inline GaussianBelief rgf_update(const GaussianBelief& belief, const TailedSensorModel& sensor, const VectorRef& y,
                                 IntegrationBackend& backend) {
    require_dim(y.size(), static_cast<Eigen::Index>(sensor.meas_dim()), "rgf_update measurement");
    if (!y.allFinite()) throw std::invalid_argument("rgf_update: measurement is not finite");

    const double w = sensor.tail_weight();
    std::optional<GaussianDensity> body;
    // At w in {0, 1} the feature is affine resp. constant and ignores the body.
    if (w > 0.0 && w < 1.0) body = predict_body_moments(belief, sensor.body_fn(), sensor.body_noise(), backend);
    const auto ctx = std::make_shared<const FeatureContext>(belief.mean(), std::move(body), sensor.tail_density(), w);

    std::vector<MixtureComponent> pseudo = sensor.components();
    for (auto& c : pseudo) {
        c.fn = [ctx, fn = std::move(c.fn)](const VectorRef& x, const VectorRef& noise) -> Vector {
            return feature(fn(x, noise), *ctx).stacked();
        };
    }
    const Vector z = feature(y, *ctx).stacked();
    return update(belief, pseudo, z, backend);
}

/// Predict, then robust update.
inline GaussianBelief rgf_step(const GaussianBelief& belief, const TransitionModel& transition,
                               const TailedSensorModel& sensor, const VectorRef& y, IntegrationBackend& backend) {
    return rgf_update(predict(belief, transition, backend), sensor, y, backend);
}

}  // namespace rgf
