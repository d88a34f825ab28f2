#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "varreg/index_set.hpp"
#include "varreg/rng.hpp"
#include "varreg/util.hpp"

namespace varreg {

/// Diagonal forward map (Ax)_i = abar_i x_i. With the image space identified
/// as plain l2 over the same index set, ||Ax||_2 equals the abar-weighted l2
/// norm of x exactly, so the norm-isomorphism constant is M = 1. All weights
/// are strictly positive, hence A is injective.
class DiagonalOperator {
public:
    DiagonalOperator(LeveledIndexSet set, WeightVector weights,
                     std::optional<double> besov_degree = std::nullopt)
        : set_(std::move(set)), a_(std::move(weights)), besov_a_(besov_degree) {
        require_weights(a_, set_.size(), "DiagonalOperator");
    }

    /// Smoothing operator of degree a > 0 on the dyadic set: abar_(j,k) = 2^{-ja}.
    static DiagonalOperator besov(int d, int max_level, double a) {
        require(a > 0.0, "DiagonalOperator::besov: smoothing degree must be positive");
        auto set = LeveledIndexSet::dyadic(d, max_level);
        auto w = dyadic_level_weights(set, -a);
        return DiagonalOperator(std::move(set), std::move(w), a);
    }

    const LeveledIndexSet& set() const { return set_; }
    const WeightVector& weights() const { return a_; }
    double weight(std::size_t i) const { return a_[i]; }
    std::optional<double> besov_degree() const { return besov_a_; }

    /// Weight shared by every coordinate of level j; throws when the level is
    /// not uniformly weighted.
    double uniform_level_weight(std::size_t j) const {
        std::size_t off = set_.level_offset(j);
        double w = a_[off];
        for (std::size_t k = 1; k < set_.level_size(j); ++k)
            require(a_[off + k] == w, "DiagonalOperator: level weight not uniform");
        return w;
    }

private:
    LeveledIndexSet set_;
    WeightVector a_;
    std::optional<double> besov_a_;
};

inline Coefficients apply_forward(const DiagonalOperator& A, const Coefficients& x) {
    require(x.set == A.set(), "apply_forward: index sets differ");
    Coefficients y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y.values[i] *= A.weight(i);
    return y;
}

/// The diagonal is self-adjoint: (A*y)_i = abar_i y_i.
inline Coefficients apply_adjoint(const DiagonalOperator& A, const Coefficients& y) {
    return apply_forward(A, y);
}

/// Noisy observation with its exact noise level and the seed that produced it.
struct Observation {
    Coefficients g;
    double delta = 0.0;
    std::uint64_t seed = 0;
};

/// g + delta * u with u a seeded pseudorandom unit vector, so that
/// ||g^delta - g|| = delta holds to rounding. Pure in (g, delta, seed).
inline Observation add_noise(const Coefficients& g, double delta, std::uint64_t seed) {
    require(delta >= 0.0, "add_noise: delta must be nonnegative");
    require(g.size() > 0, "add_noise: zero-dimensional observation");
    Observation obs{g, delta, seed};
    if (delta == 0.0) return obs;
    Rng rng(seed);
    std::vector<double> u(g.size());
    double nrm = 0.0;
    do {
        rng.fill_gaussian(u);
        nrm = l2_norm(u);
    } while (nrm == 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) obs.g.values[i] += delta * u[i] / nrm;
    return obs;
}

}  // namespace varreg
