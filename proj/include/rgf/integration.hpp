#pragma once

#include "rgf/common.hpp"
#include "rgf/distributions.hpp"
#include "rgf/linalg.hpp"
#include "rgf/random.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rgf {

/// Mean and covariance of the state; the predicted belief p(x_t | y_{1:t-1})
/// or the posterior p(x_t | y_{1:t}).
using GaussianBelief = GaussianDensity;

/// y = f(x, w): a deterministic map of the state and an explicit Gaussian
/// noise variable. Any noise law can be expressed by transforming w inside f.
using NoisyFn = std::function<Vector(const VectorRef& x, const VectorRef& w)>;

/// One branch of a mixture sensor: with probability `weight`, y = fn(x, w)
/// with w ~ noise.
struct MixtureComponent {
    double weight = 1.0;
    NoisyFn fn;
    GaussianDensity noise;
};

/// First two moments of y = f(x, w) jointly with x.
struct MomentTriple {
    Vector mean_y;
    Matrix cov_yy;
    Matrix cov_xy;  // state_dim x output_dim
};

/// Closed-form moments; valid only for affine functions.
struct ExactLinear {};

/// Scaled unscented transform on the augmented (x, w) vector.
struct Unscented {
    double alpha = 1.0;
    double beta = 2.0;
    std::optional<double> kappa;  // defaults to 3 - n_aug
};

/// Joint sampling of (x, w). State draws are whitened so their sample mean
/// and covariance (divisor N - 1) equal the belief exactly, which keeps the
/// joint sample covariance PSD. With `antithetic`, draws come in (+z, -z)
/// pairs sharing one mixture indicator; the count is rounded up to even.
struct MonteCarlo {
    std::size_t samples = 1000;
    bool antithetic = true;
};

class IntegrationBackend {
public:
    using Method = std::variant<ExactLinear, Unscented, MonteCarlo>;

    IntegrationBackend(Method method, std::uint64_t seed = 0) : method_(method), rng_(seed, kStream) {}

    static IntegrationBackend exact_linear() { return IntegrationBackend(ExactLinear{}); }
    static IntegrationBackend unscented(Unscented params = {}) { return IntegrationBackend(params); }
    static IntegrationBackend monte_carlo(std::size_t samples = 1000, std::uint64_t seed = 0) {
        return IntegrationBackend(MonteCarlo{samples, true}, seed);
    }

    const Method& method() const { return method_; }
    bool is_monte_carlo() const { return std::holds_alternative<MonteCarlo>(method_); }

    std::string name() const {
        switch (method_.index()) {
            case 0: return "exact-linear";
            case 1: return "unscented";
            default: return "monte-carlo";
        }
    }

    /// Restart the sample stream; only Monte Carlo consumes it.
    void reseed(std::uint64_t seed) { rng_ = Rng(seed, kStream); }
    Rng& rng() { return rng_; }

    JitterPolicy jitter;

private:
    static constexpr std::uint64_t kStream = 0x6d63;

    Method method_;
    Rng rng_;
};

namespace detail {

inline MomentTriple combine_mixture(std::span<const double> weights, std::span<const MomentTriple> parts) {
    MomentTriple out{Vector::Zero(parts[0].mean_y.size()), Matrix::Zero(parts[0].cov_yy.rows(), parts[0].cov_yy.cols()),
                     Matrix::Zero(parts[0].cov_xy.rows(), parts[0].cov_xy.cols())};
    for (std::size_t k = 0; k < parts.size(); ++k) out.mean_y += weights[k] * parts[k].mean_y;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const Vector shift = parts[k].mean_y - out.mean_y;
        out.cov_yy += weights[k] * (parts[k].cov_yy + shift * shift.transpose());
        // E[x - mu_x] vanishes in every branch, so the cross term is a plain blend.
        out.cov_xy += weights[k] * parts[k].cov_xy;
    }
    out.cov_yy = symmetrized(out.cov_yy);
    return out;
}

inline void require_output_dim(const Vector& y, Eigen::Index& dim) {
    if (dim < 0) dim = y.size();
    require_dim(y.size(), dim, "propagated function output");
}

inline MomentTriple exact_linear_moments(const GaussianBelief& belief, const MixtureComponent& c) {
    const Eigen::Index nx = belief.dim();
    const Eigen::Index nw = c.noise.dim();
    const Vector& mx = belief.mean();
    const Vector& mw = c.noise.mean();

    const Vector base = c.fn(mx, mw);
    const Eigen::Index ny = base.size();
    Matrix jx(ny, nx);
    Matrix jw(ny, nw);
    Vector probe = mx;
    for (Eigen::Index i = 0; i < nx; ++i) {
        probe[i] += 1.0;
        jx.col(i) = c.fn(probe, mw) - base;
        probe[i] = mx[i];
    }
    Vector wprobe = mw;
    for (Eigen::Index j = 0; j < nw; ++j) {
        wprobe[j] += 1.0;
        jw.col(j) = c.fn(mx, wprobe) - base;
        wprobe[j] = mw[j];
    }

    // Probe the mirrored points and the all-ones point; an affine map must
    // reproduce its own linearization there.
    auto check = [&](const Vector& x, const Vector& w) {
        const Vector got = c.fn(x, w);
        const Vector expected = base + jx * (x - mx) + jw * (w - mw);
        const double scale = 1.0 + std::max(got.cwiseAbs().maxCoeff(), expected.cwiseAbs().maxCoeff());
        if (!got.allFinite() || (got - expected).cwiseAbs().maxCoeff() > 1e-9 * scale) {
            throw BackendMisuse("exact-linear backend used with a non-affine function");
        }
    };
    for (Eigen::Index i = 0; i < nx; ++i) {
        probe[i] -= 1.0;
        check(probe, mw);
        probe[i] = mx[i];
    }
    for (Eigen::Index j = 0; j < nw; ++j) {
        wprobe[j] -= 1.0;
        check(mx, wprobe);
        wprobe[j] = mw[j];
    }
    check(mx + Vector::Ones(nx), mw + Vector::Ones(nw));

    return {base, symmetrized(jx * belief.covariance() * jx.transpose() + jw * c.noise.covariance() * jw.transpose()),
            belief.covariance() * jx.transpose()};
}

inline MomentTriple unscented_moments(const GaussianBelief& belief, const MixtureComponent& c, const Unscented& p) {
    const Eigen::Index nx = belief.dim();
    const Eigen::Index nw = c.noise.dim();
    const Eigen::Index n = nx + nw;
    const double kappa = p.kappa.value_or(3.0 - static_cast<double>(n));
    const double lambda = p.alpha * p.alpha * (static_cast<double>(n) + kappa) - static_cast<double>(n);
    const double spread = static_cast<double>(n) + lambda;
    if (!(spread > 0.0)) throw std::invalid_argument("unscented: n + lambda must be positive");

    const double gamma = std::sqrt(spread);
    const Matrix sx = gamma * belief.sqrt_covariance();
    const Matrix sw = gamma * c.noise.sqrt_covariance();
    const Vector& mx = belief.mean();
    const Vector& mw = c.noise.mean();

    const Eigen::Index count = 2 * n + 1;
    const double w0m = lambda / spread;
    const double w0c = w0m + (1.0 - p.alpha * p.alpha + p.beta);
    const double wi = 0.5 / spread;

    Vector y0 = c.fn(mx, mw);
    Eigen::Index ny = y0.size();
    Matrix ys(ny, count);
    Matrix dx = Matrix::Zero(nx, count);
    ys.col(0) = y0;
    Eigen::Index col = 1;
    for (Eigen::Index i = 0; i < nx; ++i) {
        for (const double sign : {1.0, -1.0}) {
            const Vector x = mx + sign * sx.col(i);
            const Vector y = c.fn(x, mw);
            require_output_dim(y, ny);
            ys.col(col) = y;
            dx.col(col) = sign * sx.col(i);
            ++col;
        }
    }
    for (Eigen::Index j = 0; j < nw; ++j) {
        for (const double sign : {1.0, -1.0}) {
            const Vector y = c.fn(mx, mw + sign * sw.col(j));
            require_output_dim(y, ny);
            ys.col(col) = y;
            ++col;
        }
    }

    Vector wm = Vector::Constant(count, wi);
    Vector wc = Vector::Constant(count, wi);
    wm[0] = w0m;
    wc[0] = w0c;

    const Vector mean = ys * wm;
    const Matrix dy = ys.colwise() - mean;
    return {mean, symmetrized(dy * wc.asDiagonal() * dy.transpose()), dx * wc.asDiagonal() * dy.transpose()};
}

inline MomentTriple monte_carlo_moments(const GaussianBelief& belief, std::span<const MixtureComponent> comps,
                                        std::span<const double> cumulative, const MonteCarlo& p, Rng& rng) {
    const Eigen::Index nx = belief.dim();
    Eigen::Index max_nw = 0;
    for (const auto& c : comps) max_nw = std::max(max_nw, c.noise.dim());
    std::size_t n = p.samples;
    if (p.antithetic && n % 2 == 1) ++n;
    if (n < static_cast<std::size_t>(2 * (nx + max_nw)) || n < 2) {
        throw std::invalid_argument("monte-carlo: sample_count must be at least 2 (state_dim + noise_dim)");
    }
    const auto count = static_cast<Eigen::Index>(n);
    const Eigen::Index fresh = p.antithetic ? count / 2 : count;

    Matrix z(nx, count);
    for (Eigen::Index i = 0; i < fresh; ++i) {
        for (Eigen::Index r = 0; r < nx; ++r) z(r, i) = rng.normal();
    }
    if (p.antithetic) z.rightCols(fresh) = -z.leftCols(fresh);

    // Whiten: sample mean 0 and sample covariance I exactly.
    if (nx > 0) {
        z = z.colwise() - z.rowwise().mean();
        const Matrix s = z * z.transpose() / static_cast<double>(count - 1);
        Eigen::LLT<Matrix> llt(s);
        if (llt.info() == Eigen::Success) z = llt.matrixL().solve(z);
    }
    const Matrix dx = belief.sqrt_covariance() * z;
    const Matrix xs = dx.colwise() + belief.mean();

    Eigen::Index ny = -1;
    Matrix ys;
    Vector e;
    for (Eigen::Index i = 0; i < fresh; ++i) {
        std::size_t k = 0;
        if (comps.size() > 1) {
            const double u = rng.uniform();
            while (k + 1 < comps.size() && u >= cumulative[k]) ++k;
        }
        const MixtureComponent& c = comps[k];
        e.resize(c.noise.dim());
        for (Eigen::Index j = 0; j < e.size(); ++j) e[j] = rng.normal();
        const Vector w = c.noise.mean() + c.noise.sqrt_covariance() * e;
        const Vector y = c.fn(xs.col(i), w);
        if (ny < 0) {
            ny = y.size();
            ys.resize(ny, count);
        }
        require_output_dim(y, ny);
        ys.col(i) = y;
        if (p.antithetic) {
            const Vector w_mirror = c.noise.mean() - c.noise.sqrt_covariance() * e;
            const Vector y_mirror = c.fn(xs.col(fresh + i), w_mirror);
            require_output_dim(y_mirror, ny);
            ys.col(fresh + i) = y_mirror;
        }
    }

    const Vector mean = ys.rowwise().mean();
    const Matrix dy = ys.colwise() - mean;
    const double denom = static_cast<double>(count - 1);
    return {mean, symmetrized(dy * dy.transpose() / denom), dx * dy.transpose() / denom};
}

}  // namespace detail

/// (mu_y, Sigma_yy, Sigma_xy) of y drawn from a mixture of noisy functions
/// of x ~ belief. Zero-weight components are skipped entirely, so a mixture
/// that degenerates to one branch behaves exactly like that branch.
inline MomentTriple propagate_moments(const GaussianBelief& belief, std::span<const MixtureComponent> components,
                                      IntegrationBackend& backend) {
    std::vector<MixtureComponent> active;
    std::vector<double> weights;
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight >= 0.0)) throw std::invalid_argument("propagate_moments: negative mixture weight");
        if (c.weight > 0.0) {
            active.push_back(c);
            weights.push_back(c.weight);
            total += c.weight;
        }
    }
    if (active.empty()) throw std::invalid_argument("propagate_moments: no component with positive weight");
    for (double& w : weights) w /= total;

    return std::visit(
        [&](const auto& method) -> MomentTriple {
            using M = std::decay_t<decltype(method)>;
            if constexpr (std::is_same_v<M, MonteCarlo>) {
                std::vector<double> cumulative(weights.size());
                double acc = 0.0;
                for (std::size_t k = 0; k < weights.size(); ++k) cumulative[k] = (acc += weights[k]);
                return detail::monte_carlo_moments(belief, active, cumulative, method, backend.rng());
            } else {
                std::vector<MomentTriple> parts;
                parts.reserve(active.size());
                for (const auto& c : active) {
                    if constexpr (std::is_same_v<M, ExactLinear>) {
                        parts.push_back(detail::exact_linear_moments(belief, c));
                    } else {
                        parts.push_back(detail::unscented_moments(belief, c, method));
                    }
                }
                if (parts.size() == 1) return parts.front();
                for (std::size_t k = 1; k < parts.size(); ++k) {
                    require_dim(parts[k].mean_y.size(), parts[0].mean_y.size(), "mixture component output");
                }
                return detail::combine_mixture(weights, parts);
            }
        },
        backend.method());
}

inline MomentTriple propagate_moments(const GaussianBelief& belief, const NoisyFn& fn, const GaussianDensity& noise,
                                      IntegrationBackend& backend) {
    const MixtureComponent single{1.0, fn, noise};
    return propagate_moments(belief, std::span<const MixtureComponent>(&single, 1), backend);
}

}  // namespace rgf
