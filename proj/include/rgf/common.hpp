#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rgf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Read-only view accepted by every model callable, so matrix columns can be
// passed without copying.
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// A factorization or PSD check failed even after the jitter policy ran out.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the domain of a model formula (e.g. a singular geometry).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The chosen integration backend cannot handle the supplied function.
class BackendMisuse : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Ground-truth simulation produced a non-finite state.
class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

inline void require_dim(Eigen::Index got, Eigen::Index expected, const char* what) {
    if (got != expected) {
        throw std::invalid_argument(std::string(what) + ": dimension " + std::to_string(got) +
                                    ", expected " + std::to_string(expected));
    }
}

}  // namespace rgf
