#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "varreg/util.hpp"

namespace varreg {

/// Dyadically organized index set {(j,k) : j = 0..J, k < |level j|}, stored
/// level-major. A flat set (plain vector indices) is modelled as level 0 of
/// arbitrary size with the flat tag set.
class LeveledIndexSet {
public:
    LeveledIndexSet() = default;

    LeveledIndexSet(int d, std::vector<std::size_t> level_sizes, bool flat = false,
                    double c_lambda = 1.0)
        : d_(d), sizes_(std::move(level_sizes)), flat_(flat), c_lambda_(c_lambda) {
        require(d_ >= 1, "LeveledIndexSet: dimension must be positive");
        require(!sizes_.empty(), "LeveledIndexSet: need at least one level");
        require(c_lambda_ >= 1.0, "LeveledIndexSet: C_Lambda must be >= 1");
        offsets_.resize(sizes_.size() + 1, 0);
        for (std::size_t j = 0; j < sizes_.size(); ++j) {
            require(sizes_[j] >= 1, "LeveledIndexSet: empty level");
            offsets_[j + 1] = offsets_[j] + sizes_[j];
        }
        if (!flat_) {
            for (std::size_t j = 0; j < sizes_.size(); ++j) {
                double lo = std::ldexp(1.0, static_cast<int>(j) * d_);
                double n = static_cast<double>(sizes_[j]);
                require(n >= lo && n <= c_lambda_ * lo,
                        "LeveledIndexSet: level size outside [2^{jd}, C*2^{jd}]");
            }
        }
    }

    /// Levels j = 0..J with exactly 2^{jd} entries each.
    static LeveledIndexSet dyadic(int d, int max_level) {
        require(max_level >= 0, "dyadic: max_level must be >= 0");
        std::vector<std::size_t> sizes(static_cast<std::size_t>(max_level) + 1);
        for (int j = 0; j <= max_level; ++j)
            sizes[static_cast<std::size_t>(j)] = std::size_t{1} << (j * d);
        return LeveledIndexSet(d, std::move(sizes), false);
    }

    static LeveledIndexSet single_level(std::size_t n) {
        return LeveledIndexSet(1, {n}, true);
    }

    int d() const { return d_; }
    bool flat() const { return flat_; }
    double c_lambda() const { return c_lambda_; }
    std::size_t level_count() const { return sizes_.size(); }
    std::size_t level_size(std::size_t j) const { return sizes_[j]; }
    std::size_t level_offset(std::size_t j) const { return offsets_[j]; }
    std::size_t size() const { return offsets_.back(); }
    const std::vector<std::size_t>& level_sizes() const { return sizes_; }

    std::size_t flat_index(std::size_t j, std::size_t k) const {
        require(j < sizes_.size() && k < sizes_[j], "flat_index: (j,k) out of range");
        return offsets_[j] + k;
    }

    std::pair<std::size_t, std::size_t> level_position(std::size_t i) const {
        require(i < size(), "level_position: index out of range");
        std::size_t j = 0;
        while (offsets_[j + 1] <= i) ++j;
        return {j, i - offsets_[j]};
    }

    bool operator==(const LeveledIndexSet& o) const {
        return d_ == o.d_ && flat_ == o.flat_ && sizes_ == o.sizes_;
    }

private:
    int d_ = 1;
    std::vector<std::size_t> sizes_{1};
    bool flat_ = true;
    double c_lambda_ = 1.0;
    std::vector<std::size_t> offsets_{0, 1};
};

/// Real sequence over a LeveledIndexSet, values in level-major order.
struct Coefficients {
    LeveledIndexSet set;
    std::vector<double> values;

    Coefficients() = default;
    Coefficients(LeveledIndexSet s, std::vector<double> v) : set(std::move(s)), values(std::move(v)) {
        require(values.size() == set.size(), "Coefficients: value count does not match index set");
        require(all_finite(values), "Coefficients: non-finite entry");
    }

    static Coefficients zeros(const LeveledIndexSet& s) {
        return Coefficients(s, std::vector<double>(s.size(), 0.0));
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    std::span<const double> level(std::size_t j) const {
        return std::span<const double>(values).subspan(set.level_offset(j), set.level_size(j));
    }
    std::span<double> level(std::size_t j) {
        return std::span<double>(values).subspan(set.level_offset(j), set.level_size(j));
    }
};

inline void require_same_set(const Coefficients& a, const Coefficients& b, const char* what) {
    require(a.set == b.set && a.values.size() == b.values.size(),
            std::string(what) + ": index sets differ");
}

/// Per-coordinate strictly positive weights (abar, rbar, mu, nu, ...).
using WeightVector = std::vector<double>;

inline void require_weights(const WeightVector& w, std::size_t n, const char* what) {
    require(w.size() == n, std::string(what) + ": weight length mismatch");
    for (double v : w)
        require(std::isfinite(v) && v > 0.0, std::string(what) + ": weights must be positive finite");
}

/// Weights 2^{j*e} repeated over each level; e = s + d/2 - d/p reproduces the
/// Besov-to-weighted identification, e = -a the smoothing operator weights.
inline WeightVector dyadic_level_weights(const LeveledIndexSet& set, double exponent) {
    WeightVector w(set.size());
    for (std::size_t j = 0; j < set.level_count(); ++j) {
        double v = std::exp2(exponent * static_cast<double>(j));
        for (std::size_t k = 0; k < set.level_size(j); ++k) w[set.level_offset(j) + k] = v;
    }
    return w;
}

inline WeightVector uniform_weights(const LeveledIndexSet& set, double value = 1.0) {
    return WeightVector(set.size(), value);
}

}  // namespace varreg
