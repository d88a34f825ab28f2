#pragma once

#include <cstdint>

#include "varreg/oracle.hpp"
#include "varreg/rng.hpp"
#include "varreg/solve.hpp"

namespace varreg {

struct CrosscheckResult {
    double max_gap = 0.0;
    std::size_t instances = 0;
};

/// Random small instances (both penalty families, p,q in {1.2,1.5,2,3,4})
/// solved by the prox path and by the derivative-free oracle; reports the
/// worst coordinatewise disagreement.
inline CrosscheckResult prox_crosscheck(std::size_t instances, std::uint64_t seed) {
    static constexpr double kExponents[] = {1.2, 1.5, 2.0, 3.0, 4.0};
    CrosscheckResult res;
    res.instances = instances;
    for (std::size_t i = 0; i < instances; ++i) {
        Rng rng(derive_seed(seed, i));
        double pq = kExponents[rng.next_u64() % 5];
        double alpha = rng.log_uniform(1e-3, 1e3);
        bool level_kind = (rng.next_u64() % 2) == 0;

        LeveledIndexSet set = level_kind
                                  ? LeveledIndexSet::dyadic(1, static_cast<int>(rng.next_u64() % 3))
                                  : LeveledIndexSet::single_level(1 + rng.next_u64() % 8);
        Coefficients g = Coefficients::zeros(set);
        rng.fill_gaussian(g.values);

        WeightVector a;
        PenaltySpec R = PenaltySpec::level_two_q(2.0);
        if (level_kind) {
            a = dyadic_level_weights(set, -rng.uniform(0.3, 1.5));
            R = PenaltySpec::level_two_q(pq);
        } else {
            a.resize(set.size());
            WeightVector w(set.size());
            for (std::size_t m = 0; m < set.size(); ++m) {
                a[m] = rng.log_uniform(0.5, 2.0);
                w[m] = rng.log_uniform(0.5, 2.0);
            }
            R = PenaltySpec::weighted_power(pq, std::move(w));
        }
        DiagonalOperator A(set, std::move(a));

        auto fast = minimize(A, R, g, alpha).x_hat;
        auto slow = oracle_minimize(A, R, g, alpha);
        for (std::size_t m = 0; m < set.size(); ++m)
            res.max_gap = std::max(res.max_gap, std::abs(fast.values[m] - slow.values[m]));
    }
    return res;
}

}  // namespace varreg
