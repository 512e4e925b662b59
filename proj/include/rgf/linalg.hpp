#pragma once

#include "rgf/common.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rgf {

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline bool is_symmetric(const Matrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

inline double min_eigenvalue(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// PSD up to an eigenvalue floor of -rel_floor * |trace|.
inline bool is_psd(const Matrix& m, double rel_floor) {
    if (m.size() == 0) return true;
    return min_eigenvalue(m) >= -rel_floor * std::abs(m.trace());
}

/// Returns S with S S^T == cov. Cholesky when possible, otherwise the
/// symmetric eigendecomposition with negative round-off clipped to zero, so
/// singular (and all-zero) covariances are accepted.
inline Matrix psd_sqrt(const Matrix& cov) {
    if (cov.size() == 0) return Matrix(0, 0);
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(cov));
    if (es.info() != Eigen::Success) throw NumericalError("psd_sqrt: eigendecomposition failed");
    const Vector& lambda = es.eigenvalues();
    const double floor = -1e-10 * std::max(std::abs(cov.trace()), 1e-300);
    if (lambda.minCoeff() < floor) {
        throw NumericalError("psd_sqrt: matrix is not positive semidefinite (min eigenvalue " +
                             std::to_string(lambda.minCoeff()) + ")");
    }
    return es.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

/// Diagonal jitter schedule, as multiples of trace/dim, tried in order when a
/// covariance that must be inverted is singular or badly conditioned.
struct JitterPolicy {
    std::vector<double> factors{1e-12, 1e-9, 1e-6};
};

/// Cholesky factorization of a covariance with the escalating jitter of a
/// JitterPolicy. The unjittered matrix is accepted only if its pivots span
/// less than `kConditionFloor` in ratio; jittered attempts only need to
/// factor.
class JitteredCholesky {
public:
    static constexpr double kConditionFloor = 1e-12;

    JitteredCholesky(const Matrix& cov, const JitterPolicy& policy) {
        if (cov.rows() != cov.cols()) throw std::invalid_argument("JitteredCholesky: matrix not square");
        const Matrix sym = symmetrized(cov);
        if (accept(sym, true)) return;

        const double n = static_cast<double>(sym.rows());
        const double trace = sym.trace();
        const double scale = trace > 0.0 ? trace / n : 1.0;
        for (const double factor : policy.factors) {
            jitter_ = factor * scale;
            Matrix jittered = sym;
            jittered.diagonal().array() += jitter_;
            if (accept(jittered, false)) return;
        }
        throw NumericalError("covariance is not invertible after jitter (trace " + std::to_string(trace) +
                             ", " + std::to_string(policy.factors.size()) + " jitter levels tried)");
    }

    /// Solves (cov + jitter I) X = rhs.
    template <typename Rhs>
    Matrix solve(const Eigen::MatrixBase<Rhs>& rhs) const {
        return llt_.solve(rhs);
    }

    const Eigen::LLT<Matrix>& llt() const { return llt_; }
    double jitter() const { return jitter_; }

private:
    bool accept(const Matrix& m, bool check_condition) {
        llt_.compute(m);
        if (llt_.info() != Eigen::Success) return false;
        const Vector pivots = Matrix(llt_.matrixL()).diagonal().array().square();
        if (!pivots.allFinite() || pivots.minCoeff() <= 0.0) return false;
        if (check_condition && pivots.minCoeff() < kConditionFloor * pivots.maxCoeff()) return false;
        return true;
    }

    Eigen::LLT<Matrix> llt_;
    double jitter_ = 0.0;
};

}  // namespace rgf
