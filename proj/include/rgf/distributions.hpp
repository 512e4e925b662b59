#pragma once

#include "rgf/common.hpp"
#include "rgf/linalg.hpp"
#include "rgf/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <variant>

namespace rgf {

/// log(exp(a) + exp(b)) without overflow; -inf operands are allowed.
inline double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// Maps a standard-normal draw onto a standard Cauchy draw through the
/// probability integral transform. Lets Cauchy noise enter moment
/// propagation as an ordinary Gaussian noise variable.
inline double cauchy_from_normal(double u) {
    if (u > 0.0) return -cauchy_from_normal(-u);
    const double p = std::max(0.5 * std::erfc(-u / std::numbers::sqrt2), std::numeric_limits<double>::min());
    if (p > 0.25) return std::tan(std::numbers::pi * (p - 0.5));
    // tan(pi (p - 1/2)) == -1 / tan(pi p); accurate for small p.
    return -1.0 / std::tan(std::numbers::pi * p);
}

/// Multivariate normal density N(mean, covariance). Validated on
/// construction and immutable afterwards.
class GaussianDensity {
public:
    static constexpr double kSymmetryTol = 1e-12;
    static constexpr double kPsdFloor = 1e-10;

    GaussianDensity() : GaussianDensity(Vector::Zero(1), Matrix::Identity(1, 1)) {}

    GaussianDensity(Vector mean, Matrix covariance) : mean_(std::move(mean)), cov_(std::move(covariance)) {
        require_dim(cov_.rows(), mean_.size(), "GaussianDensity covariance rows");
        require_dim(cov_.cols(), mean_.size(), "GaussianDensity covariance cols");
        if (!mean_.allFinite() || !cov_.allFinite()) throw std::invalid_argument("GaussianDensity: non-finite parameters");
        if (!is_symmetric(cov_, kSymmetryTol)) throw std::invalid_argument("GaussianDensity: covariance not symmetric");
        Eigen::LLT<Matrix> llt(cov_);
        if (llt.info() == Eigen::Success) {
            sqrt_ = llt.matrixL();
        } else {
            if (!is_psd(cov_, kPsdFloor)) throw std::invalid_argument("GaussianDensity: covariance not PSD");
            sqrt_ = psd_sqrt(cov_);
        }
        factorize_for_density(std::move(llt));
    }

    static GaussianDensity standard(Eigen::Index dim) {
        return {Vector::Zero(dim), Matrix::Identity(dim, dim)};
    }

    Eigen::Index dim() const { return mean_.size(); }
    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return cov_; }
    /// S with S S^T == covariance.
    const Matrix& sqrt_covariance() const { return sqrt_; }

    double logpdf(const VectorRef& x) const {
        require_dim(x.size(), dim(), "gaussian_logpdf");
        if (!llt_) throw NumericalError("gaussian_logpdf: covariance not decomposable even after jitter");
        const Vector z = llt_->matrixL().solve(x - mean_);
        return -0.5 * (static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi) + log_det_ + z.squaredNorm());
    }

    Vector sample(Rng& rng) const { return mean_ + sqrt_ * rng.normal_vector(dim()); }

private:
    void factorize_for_density(Eigen::LLT<Matrix> llt) {
        if (llt.info() != Eigen::Success) {
            const double eps = 1e-9 * std::max(1.0, cov_.trace() / static_cast<double>(dim()));
            llt.compute(cov_ + eps * Matrix::Identity(dim(), dim()));
            if (llt.info() != Eigen::Success) return;
        }
        log_det_ = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
        llt_ = std::move(llt);
    }

    Vector mean_;
    Matrix cov_;
    Matrix sqrt_;
    std::optional<Eigen::LLT<Matrix>> llt_;
    double log_det_ = 0.0;
};

/// Product of independent one-dimensional Cauchy densities.
class CauchyDensity {
public:
    CauchyDensity(Vector location, Vector scale) : location_(std::move(location)), scale_(std::move(scale)) {
        require_dim(scale_.size(), location_.size(), "CauchyDensity scale");
        if (!location_.allFinite()) throw std::invalid_argument("CauchyDensity: non-finite location");
        if (!(scale_.array() > 0.0).all() || !scale_.allFinite()) {
            throw std::invalid_argument("CauchyDensity: every scale entry must be positive");
        }
    }

    Eigen::Index dim() const { return location_.size(); }
    const Vector& location() const { return location_; }
    const Vector& scale() const { return scale_; }

    double logpdf(const VectorRef& x) const {
        require_dim(x.size(), dim(), "cauchy_logpdf");
        double sum = 0.0;
        for (Eigen::Index i = 0; i < dim(); ++i) {
            const double r = (x[i] - location_[i]) / scale_[i];
            // log(1 + r^2) == 2 log|r| to double precision once r^2 swamps 1;
            // avoids overflow of r * r.
            const double tail = std::abs(r) > 1e8 ? 2.0 * std::log(std::abs(r)) : std::log1p(r * r);
            sum += -std::log(std::numbers::pi * scale_[i]) - tail;
        }
        return sum;
    }

    Vector sample(Rng& rng) const {
        Vector v(dim());
        for (Eigen::Index i = 0; i < dim(); ++i) {
            v[i] = location_[i] + scale_[i] * std::tan(std::numbers::pi * (rng.uniform() - 0.5));
        }
        return v;
    }

private:
    Vector location_;
    Vector scale_;
};

using NoiseComponent = std::variant<GaussianDensity, CauchyDensity>;

/// Two-component mixture (1 - weight) a + weight b.
class MixtureNoise {
public:
    MixtureNoise(double weight, NoiseComponent a, NoiseComponent b)
        : weight_(weight), a_(std::move(a)), b_(std::move(b)) {
        if (!(weight_ >= 0.0 && weight_ <= 1.0)) throw std::invalid_argument("MixtureNoise: weight outside [0, 1]");
        if (dim_of(a_) != dim_of(b_)) throw std::invalid_argument("MixtureNoise: component dimensions differ");
    }

    double weight() const { return weight_; }
    const NoiseComponent& component_a() const { return a_; }
    const NoiseComponent& component_b() const { return b_; }
    Eigen::Index dim() const { return dim_of(a_); }

    double logpdf(const VectorRef& x) const {
        const double ninf = -std::numeric_limits<double>::infinity();
        const double la = weight_ < 1.0 ? std::log1p(-weight_) + logpdf_of(a_, x) : ninf;
        const double lb = weight_ > 0.0 ? std::log(weight_) + logpdf_of(b_, x) : ninf;
        return log_add_exp(la, lb);
    }

    struct Draw {
        Vector value;
        bool from_b;
    };

    Draw draw(Rng& rng) const {
        const bool from_b = rng.uniform() < weight_;
        return {sample_of(from_b ? b_ : a_, rng), from_b};
    }

    Vector sample(Rng& rng) const { return draw(rng).value; }

private:
    static Eigen::Index dim_of(const NoiseComponent& c) {
        return std::visit([](const auto& d) { return d.dim(); }, c);
    }
    static double logpdf_of(const NoiseComponent& c, const VectorRef& x) {
        return std::visit([&](const auto& d) { return d.logpdf(x); }, c);
    }
    static Vector sample_of(const NoiseComponent& c, Rng& rng) {
        return std::visit([&](const auto& d) { return d.sample(rng); }, c);
    }

    double weight_;
    NoiseComponent a_;
    NoiseComponent b_;
};

inline double gaussian_logpdf(const VectorRef& x, const GaussianDensity& d) { return d.logpdf(x); }
inline double cauchy_logpdf(const VectorRef& x, const CauchyDensity& d) { return d.logpdf(x); }

inline Vector sample(const GaussianDensity& d, Rng& rng) { return d.sample(rng); }
inline Vector sample(const CauchyDensity& d, Rng& rng) { return d.sample(rng); }
inline Vector sample(const MixtureNoise& d, Rng& rng) { return d.sample(rng); }

}  // namespace rgf
