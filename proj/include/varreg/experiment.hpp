#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <tuple>
#include <vector>

#include "varreg/analysis.hpp"
#include "varreg/norms.hpp"
#include "varreg/operator.hpp"
#include "varreg/parallel.hpp"
#include "varreg/penalty.hpp"
#include "varreg/rng.hpp"
#include "varreg/solve.hpp"
#include "varreg/util.hpp"

namespace varreg {

/// Geometric noise levels from max down to min.
struct DeltaGridSpec {
    double max = 1e-1;
    double min = 1e-4;
    std::size_t count = 13;

    std::vector<double> levels() const {
        require(min > 0.0 && max > min, "DeltaGridSpec: need 0 < min < max");
        require(count >= 2, "DeltaGridSpec: need at least two levels");
        auto g = geometric_grid(min, max, count);
        std::reverse(g.begin(), g.end());
        return g;
    }
};

/// A-priori rule; rho = 0 requests measuring the grid estimate of rho_nu(x)
/// (inflated by 1% to cover the grid-sup deficit) so the image-space bound
/// constants of the rule hold as stated.
struct AprioriRuleSpec {
    RateExponent exponent = RateExponent::from_nu(1.0);
    double c_l = 1.0;
    double c_r = 1.0;
    double rho = 0.0;
};

struct DiscrepancyRuleSpec {
    double c_D = 1.5;
    double C_D = 2.0;
};

/// How the ground truth is produced.
struct TruthSpec {
    enum class Kind { explicit_coeffs, besov_decay, spikes };
    Kind kind = Kind::besov_decay;

    std::optional<Coefficients> explicit_x;

    // besov_decay: seeded level directions with exact per-level mass.
    // sup_space: unit sphere of b^s_{p,inf} (level mass 2^{-j(s+d/2-d/p)});
    // otherwise unit sphere of b^s_{p,p} with equal level contributions.
    double s = 0.5;
    double inner_p = 2.0;
    bool sup_space = true;

    std::vector<std::tuple<std::size_t, std::size_t, double>> spikes;
};

inline Coefficients make_truth(const TruthSpec& t, const LeveledIndexSet& set,
                               std::uint64_t seed) {
    switch (t.kind) {
        case TruthSpec::Kind::explicit_coeffs: {
            require(t.explicit_x.has_value(), "make_truth: missing explicit coefficients");
            require(t.explicit_x->set == set, "make_truth: explicit truth on a different index set");
            return *t.explicit_x;
        }
        case TruthSpec::Kind::spikes: {
            Coefficients x = Coefficients::zeros(set);
            for (const auto& [j, k, v] : t.spikes) x.values[set.flat_index(j, k)] = v;
            return x;
        }
        case TruthSpec::Kind::besov_decay: {
            require(t.inner_p > 0.0, "make_truth: inner exponent must be positive");
            Coefficients x = Coefficients::zeros(set);
            Rng rng(seed);
            const double d = static_cast<double>(set.d());
            const double we = t.s + d / 2.0 - d / t.inner_p;
            const double J1 = static_cast<double>(set.level_count());
            for (std::size_t j = 0; j < set.level_count(); ++j) {
                auto lvl = x.level(j);
                double pn = 0.0;
                do {
                    rng.fill_gaussian(lvl);
                    pn = 0.0;
                    for (double v : lvl) pn += std::pow(std::abs(v), t.inner_p);
                    pn = std::pow(pn, 1.0 / t.inner_p);
                } while (pn == 0.0);
                double w = std::exp2(we * static_cast<double>(j));
                double target = t.sup_space ? 1.0 / w : std::pow(J1, -1.0 / t.inner_p) / w;
                for (double& v : lvl) v *= target / pn;
            }
            return x;
        }
    }
    throw std::invalid_argument("make_truth: unknown truth kind");
}

/// Error norm the experiment reports.
struct ErrorNormSpec {
    enum class Kind { besov, weighted };
    Kind kind = Kind::besov;
    BesovParams besov{0.0, 2.0, 2.0};
    double p = 2.0;
    WeightVector weights;

    double operator()(const Coefficients& diff) const {
        if (kind == Kind::besov) return besov_norm(diff, besov);
        return weighted_norm(diff, weights, p);
    }
};

struct ExperimentConfig {
    DiagonalOperator op;
    PenaltySpec penalty;
    TruthSpec truth;
    DeltaGridSpec deltas;
    std::optional<AprioriRuleSpec> apriori;         // exactly one rule set
    std::optional<DiscrepancyRuleSpec> discrepancy;
    ErrorNormSpec error_norm;
    std::uint64_t master_seed = 1;
    double theory_slope = std::numeric_limits<double>::quiet_NaN();  // NaN: derive s/(s+a)

    void validate() const {
        require(apriori.has_value() != discrepancy.has_value(),
                "ExperimentConfig: exactly one parameter choice rule");
    }
};

struct RateRow {
    double delta = 0.0;
    double alpha = 0.0;
    double error = 0.0;        // in the configured norm
    double residual = 0.0;     // ||g_delta - A x_hat||
    double image_error = 0.0;  // ||Ax - A x_hat||
    double bound_rhs = 0.0;    // (1+c_r^nu) delta or (1+C_D) delta
    bool plateau = false;
    bool noise_dominated = false;
};

struct RateReport {
    std::vector<RateRow> rows;
    double fitted_slope = 0.0;
    double theoretical_slope = 0.0;
    double rho_used = 0.0;  // a-priori only
    double nu_used = 0.0;
    std::size_t rows_used = 0;
};

inline RateReport run_rate_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto& set = cfg.op.set();
    Coefficients x = make_truth(cfg.truth, set, derive_seed(cfg.master_seed, 0));
    Coefficients g = apply_forward(cfg.op, x);
    auto deltas = cfg.deltas.levels();

    RateReport rep;
    rep.rows.resize(deltas.size());

    double nu = 1.0, c_r = 1.0, rho = 1.0;
    if (cfg.apriori) {
        nu = cfg.apriori->exponent.effective_nu();
        c_r = cfg.apriori->c_r;
        rho = cfg.apriori->rho;
        if (rho <= 0.0) {
            auto est = rho_nu_estimate(cfg.op, cfg.penalty, x, nu, geometric_grid(1e-8, 1e4, 241));
            rho = est.rho_hat * 1.01;
        }
        rep.rho_used = rho;
    }
    rep.nu_used = cfg.apriori ? nu : 0.0;

    parallel_for(
        deltas.size(),
        [&](std::size_t row) {
            double delta = deltas[row];
            std::uint64_t seed = derive_seed(cfg.master_seed, row + 1);
            Observation obs = add_noise(g, delta, seed);
            RateRow r;
            r.delta = delta;
            if (cfg.apriori) {
                auto [lo, hi] =
                    apriori_alpha(delta, rho, cfg.apriori->exponent, cfg.apriori->c_l, cfg.apriori->c_r);
                r.alpha = std::sqrt(lo * hi);
                auto sol = minimize(cfg.op, cfg.penalty, obs.g, r.alpha);
                r.residual = sol.residual;
                r.bound_rhs = (1.0 + std::pow(c_r, nu)) * delta;
                double ie = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    double e = g.values[i] - cfg.op.weight(i) * sol.x_hat.values[i];
                    ie += e * e;
                }
                r.image_error = std::sqrt(ie);
                Coefficients diff = Coefficients::zeros(set);
                for (std::size_t i = 0; i < diff.size(); ++i)
                    diff.values[i] = x.values[i] - sol.x_hat.values[i];
                r.error = cfg.error_norm(diff);
            } else {
                auto res = discrepancy_alpha(cfg.op, cfg.penalty, obs.g, delta, cfg.discrepancy->c_D,
                                             cfg.discrepancy->C_D);
                r.alpha = res.alpha;
                r.noise_dominated = res.noise_dominated;
                r.residual = res.solution.residual;
                r.bound_rhs = (1.0 + cfg.discrepancy->C_D) * delta;
                double ie = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    double e = g.values[i] - cfg.op.weight(i) * res.solution.x_hat.values[i];
                    ie += e * e;
                }
                r.image_error = std::sqrt(ie);
                Coefficients diff = Coefficients::zeros(set);
                for (std::size_t i = 0; i < diff.size(); ++i)
                    diff.values[i] = x.values[i] - res.solution.x_hat.values[i];
                r.error = cfg.error_norm(diff);
            }
            rep.rows[row] = r;
        },
        /*grain=*/1);

    // Terminal plateau: once the error stops improving by 2% toward small
    // delta, the finite level cutoff has saturated; those rows leave the fit.
    for (std::size_t i = rep.rows.size(); i-- > 1;) {
        if (rep.rows[i].noise_dominated) continue;
        if (rep.rows[i].error > 0.98 * rep.rows[i - 1].error)
            rep.rows[i].plateau = true;
        else
            break;
    }

    std::vector<double> lx, ly;
    for (const auto& r : rep.rows) {
        if (r.plateau || r.noise_dominated || r.error <= 0.0) continue;
        lx.push_back(std::log(r.delta));
        ly.push_back(std::log(r.error));
    }
    require(lx.size() >= 4, "run_rate_experiment: fewer than 4 usable rows for the regression");
    rep.rows_used = lx.size();
    rep.fitted_slope = fit_slope(lx, ly);

    if (std::isfinite(cfg.theory_slope)) {
        rep.theoretical_slope = cfg.theory_slope;
    } else {
        require(cfg.op.besov_degree().has_value() && cfg.truth.kind == TruthSpec::Kind::besov_decay,
                "run_rate_experiment: cannot derive the theoretical slope; set theory_slope");
        double a = *cfg.op.besov_degree();
        rep.theoretical_slope = cfg.truth.s / (cfg.truth.s + a);
    }
    return rep;
}

}  // namespace varreg
