#pragma once

#include "rgf/common.hpp"

#include <cstdint>
#include <random>

namespace rgf {

/// Seedable pseudo-random source. All sampling in the library goes through
/// an explicit Rng; identical seeds give bit-identical streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : Rng(seed, 0) {}

    /// Independent stream `stream` derived from `seed`.
    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

    Vector normal_vector(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace rgf
