#pragma once

#include <cmath>
#include <vector>

#include "varreg/index_set.hpp"
#include "varreg/util.hpp"

namespace varreg {

/// Convex penalty, one of
///   WeightedPower: R(x) = (1/p) sum_i rbar_i^p |x_i|^p,       p in (1,inf)
///   LevelTwoQ:     R(x) = (1/q) sum_j (sum_k x_jk^2)^{q/2},   q in (1,inf)
/// The weighted family covers plain and weighted l^p as well as Besov (0,p,p)
/// penalties through rbar_(j,k) = 2^{j(d/2-d/p)}.
class PenaltySpec {
public:
    enum class Kind { weighted_power, level_two_q };

    static PenaltySpec weighted_power(double p, WeightVector rbar) {
        require(std::isfinite(p) && p > 1.0, "PenaltySpec: p must be in (1,inf)");
        PenaltySpec s;
        s.kind_ = Kind::weighted_power;
        s.exponent_ = p;
        s.rbar_ = std::move(rbar);
        for (double w : s.rbar_)
            require(std::isfinite(w) && w > 0.0, "PenaltySpec: rbar must be positive");
        return s;
    }

    static PenaltySpec besov_0pp(const LeveledIndexSet& set, double p) {
        double d = static_cast<double>(set.d());
        return weighted_power(p, dyadic_level_weights(set, d / 2.0 - d / p));
    }

    static PenaltySpec level_two_q(double q) {
        require(std::isfinite(q) && q > 1.0, "PenaltySpec: q must be in (1,inf)");
        PenaltySpec s;
        s.kind_ = Kind::level_two_q;
        s.exponent_ = q;
        return s;
    }

    Kind kind() const { return kind_; }
    /// Homogeneity degree u of R = (1/u)||.||^u.
    double homogeneity() const { return exponent_; }
    const WeightVector& rbar() const { return rbar_; }

private:
    PenaltySpec() = default;
    Kind kind_ = Kind::weighted_power;
    double exponent_ = 2.0;
    WeightVector rbar_;
};

inline double penalty_value(const PenaltySpec& R, const Coefficients& x) {
    const double u = R.homogeneity();
    double s = 0.0;
    if (R.kind() == PenaltySpec::Kind::weighted_power) {
        require(R.rbar().size() == x.size(), "penalty_value: weight length mismatch");
        for (std::size_t i = 0; i < x.size(); ++i)
            s += std::pow(R.rbar()[i] * std::abs(x.values[i]), u);
    } else {
        for (std::size_t j = 0; j < x.set.level_count(); ++j)
            s += std::pow(l2_norm(x.level(j)), u);
    }
    return s / u;
}

/// Gradient of R at x (single-valued since p,q > 1).
inline Coefficients penalty_subgradient(const PenaltySpec& R, const Coefficients& x) {
    Coefficients xi = Coefficients::zeros(x.set);
    const double u = R.homogeneity();
    if (R.kind() == PenaltySpec::Kind::weighted_power) {
        require(R.rbar().size() == x.size(), "penalty_subgradient: weight length mismatch");
        for (std::size_t i = 0; i < x.size(); ++i) {
            double v = x.values[i];
            if (v != 0.0)
                xi.values[i] = std::pow(R.rbar()[i], u) * std::pow(std::abs(v), u - 1.0) *
                               (v > 0.0 ? 1.0 : -1.0);
        }
    } else {
        for (std::size_t j = 0; j < x.set.level_count(); ++j) {
            double nrm = l2_norm(x.level(j));
            if (nrm == 0.0) continue;
            double f = std::pow(nrm, u - 2.0);
            auto out = xi.level(j);
            auto in = x.level(j);
            for (std::size_t k = 0; k < in.size(); ++k) out[k] = f * in[k];
        }
    }
    return xi;
}

}  // namespace varreg
