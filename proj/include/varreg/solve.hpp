#pragma once

#include <cmath>
#include <limits>

#include "varreg/operator.hpp"
#include "varreg/parallel.hpp"
#include "varreg/penalty.hpp"
#include "varreg/prox.hpp"
#include "varreg/util.hpp"

namespace varreg {

/// Exact minimizer of T_alpha(x, g) = 1/(2 alpha)||g - Ax||^2 + R(x) together
/// with its audit quantities. The minimizer is unique (strictly convex
/// penalty, injective diagonal A).
struct TikhonovSolution {
    Coefficients x_hat;
    double alpha = 0.0;
    double residual = 0.0;       // ||g - A x_hat||
    double penalty_value = 0.0;  // R(x_hat)
    double objective = 0.0;      // residual^2/(2 alpha) + penalty_value
    double kkt_gap = 0.0;        // max scaled stationarity violation
};

inline TikhonovSolution minimize(const DiagonalOperator& A, const PenaltySpec& R,
                                 const Coefficients& g, double alpha) {
    require(alpha > 0.0, "minimize: alpha must be positive");
    require(g.set == A.set(), "minimize: index sets differ");

    TikhonovSolution sol;
    sol.alpha = alpha;
    sol.x_hat = Coefficients::zeros(g.set);
    const std::size_t n = g.size();

    std::vector<double> gap;
    if (R.kind() == PenaltySpec::Kind::weighted_power) {
        require(R.rbar().size() == n, "minimize: penalty weight length mismatch");
        const double p = R.homogeneity();
        gap.assign(n, 0.0);
        parallel_for(n, [&](std::size_t i) {
            double a = A.weight(i), w = R.rbar()[i], gi = g.values[i];
            double x = prox_power_scalar(gi, a, w, p, alpha);
            sol.x_hat.values[i] = x;
            double res = prox_power_residual(std::abs(x), std::abs(gi), a, w, p, alpha);
            gap[i] = std::abs(res) / std::max(1.0, std::abs(gi) * a / alpha);
        });
    } else {
        const double q = R.homogeneity();
        const std::size_t levels = g.set.level_count();
        gap.assign(levels, 0.0);
        parallel_for(
            levels,
            [&](std::size_t j) {
                double a = A.uniform_level_weight(j);
                double s = prox_level_2q(g.level(j), a, q, alpha, sol.x_hat.level(j));
                double G = l2_norm(g.level(j));
                double res = prox_power_residual(s, G, a, 1.0, q, alpha);
                gap[j] = std::abs(res) / std::max(1.0, G * a / alpha);
            },
            /*grain=*/1);
    }
    for (double v : gap) sol.kkt_gap = std::max(sol.kkt_gap, v);

    double rr = 0.0;  // fixed-order reduction
    for (std::size_t i = 0; i < n; ++i) {
        double d = g.values[i] - A.weight(i) * sol.x_hat.values[i];
        rr += d * d;
    }
    sol.residual = std::sqrt(rr);
    sol.penalty_value = penalty_value(R, sol.x_hat);
    sol.objective = rr / (2.0 * alpha) + sol.penalty_value;
    return sol;
}

/// Minimal value function and its derivative at alpha:
///   theta = T_alpha(x_alpha, g),  theta' = -||g - A x_alpha||^2 / (2 alpha^2).
struct MinimalValue {
    double theta = 0.0;
    double theta_prime = 0.0;
};

inline MinimalValue minimal_value(const DiagonalOperator& A, const PenaltySpec& R,
                                  const Coefficients& g, double alpha) {
    auto sol = minimize(A, R, g, alpha);
    return {sol.objective, -sol.residual * sol.residual / (2.0 * alpha * alpha)};
}

/// Hoelder exponent spec for the a-priori rule, either directly as nu or as
/// the (theta, u) pair of the Banach-space form. The two agree under
/// nu = theta / ((1-theta)(u-1) + theta).
struct RateExponent {
    enum class Kind { nu_form, theta_u_form };
    Kind kind = Kind::nu_form;
    double nu = 1.0;
    double theta = 1.0;
    double u = 2.0;

    static RateExponent from_nu(double nu) {
        require(nu > 0.0 && nu <= 1.0, "RateExponent: nu must be in (0,1]");
        RateExponent e;
        e.kind = Kind::nu_form;
        e.nu = nu;
        return e;
    }
    static RateExponent from_theta_u(double theta, double u) {
        require(theta > 0.0 && theta <= 1.0, "RateExponent: theta must be in (0,1]");
        require(u >= 1.0, "RateExponent: homogeneity u must be >= 1");
        RateExponent e;
        e.kind = Kind::theta_u_form;
        e.theta = theta;
        e.u = u;
        e.nu = theta / ((1.0 - theta) * (u - 1.0) + theta);
        return e;
    }
    double effective_nu() const { return nu; }
};

/// Admissible a-priori interval for alpha:
///   nu form:        [c_l, c_r] * rho^{-1/nu} delta^{1/nu}
///   (theta,u) form: [c_l, c_r] * rho^{-(u-1)/theta} delta^{((1-theta)(u-1)+theta)/theta}
inline std::pair<double, double> apriori_alpha(double delta, double rho, const RateExponent& e,
                                               double c_l, double c_r) {
    require(delta > 0.0 && rho > 0.0, "apriori_alpha: delta, rho must be positive");
    require(c_l > 0.0 && c_l <= c_r, "apriori_alpha: need 0 < c_l <= c_r");
    double base;
    if (e.kind == RateExponent::Kind::nu_form) {
        base = std::pow(rho, -1.0 / e.nu) * std::pow(delta, 1.0 / e.nu);
    } else {
        double num = (1.0 - e.theta) * (e.u - 1.0) + e.theta;
        base = std::pow(rho, -(e.u - 1.0) / e.theta) * std::pow(delta, num / e.theta);
    }
    return {c_l * base, c_r * base};
}

/// Result of the discrepancy principle. When the data is dominated by noise
/// (||g_delta|| < c_D delta) no alpha can reach the window; x = 0 is returned
/// with the flag set and alpha = infinity.
struct DiscrepancyResult {
    double alpha = 0.0;
    TikhonovSolution solution;
    bool noise_dominated = false;
};

struct DiscrepancyOptions {
    double alpha0 = 1.0;
    double factor = 4.0;
    int max_expansions = 200;
    int max_bisections = 200;
};

/// Finds alpha with c_D delta <= ||g_delta - A x_alpha|| <= C_D delta by
/// geometric bracketing and log-bisection, relying on the residual being
/// continuous and non-decreasing in alpha.
inline DiscrepancyResult discrepancy_alpha(const DiagonalOperator& A, const PenaltySpec& R,
                                           const Coefficients& g_delta, double delta, double c_D,
                                           double C_D, const DiscrepancyOptions& opt = {}) {
    require(delta > 0.0, "discrepancy_alpha: delta must be positive");
    require(C_D > c_D && c_D > 1.0, "discrepancy_alpha: need C_D > c_D > 1");

    const double lo_target = c_D * delta;
    const double hi_target = C_D * delta;

    if (l2_norm(g_delta.values) < lo_target) {
        DiscrepancyResult r;
        r.noise_dominated = true;
        r.alpha = std::numeric_limits<double>::infinity();
        r.solution.x_hat = Coefficients::zeros(g_delta.set);
        r.solution.alpha = r.alpha;
        r.solution.residual = l2_norm(g_delta.values);
        r.solution.penalty_value = 0.0;
        r.solution.objective = 0.0;
        return r;
    }

    auto probe = [&](double alpha) { return minimize(A, R, g_delta, alpha); };

    double alpha = opt.alpha0;
    TikhonovSolution sol = probe(alpha);
    auto in_window = [&](const TikhonovSolution& s) {
        return s.residual >= lo_target && s.residual <= hi_target;
    };
    if (in_window(sol)) return {alpha, std::move(sol), false};

    double lo = 0.0, hi = 0.0;  // bracket: residual(lo) < window < residual(hi)
    if (sol.residual < lo_target) {
        lo = alpha;
        int k = 0;
        for (; k < opt.max_expansions; ++k) {
            alpha *= opt.factor;
            sol = probe(alpha);
            if (in_window(sol)) return {alpha, std::move(sol), false};
            if (sol.residual > hi_target) {
                hi = alpha;
                break;
            }
            lo = alpha;
        }
        if (hi == 0.0) throw numeric_error("discrepancy_alpha: bracket expansion failed");
    } else {
        hi = alpha;
        int k = 0;
        for (; k < opt.max_expansions; ++k) {
            alpha /= opt.factor;
            sol = probe(alpha);
            if (in_window(sol)) return {alpha, std::move(sol), false};
            if (sol.residual < lo_target) {
                lo = alpha;
                break;
            }
            hi = alpha;
        }
        if (lo == 0.0) throw numeric_error("discrepancy_alpha: bracket expansion failed");
    }

    for (int k = 0; k < opt.max_bisections; ++k) {
        double mid = std::sqrt(lo * hi);
        sol = probe(mid);
        if (in_window(sol)) return {mid, std::move(sol), false};
        if (sol.residual < lo_target)
            lo = mid;
        else
            hi = mid;
    }
    throw numeric_error("discrepancy_alpha: bisection failed to hit the residual window");
}

}  // namespace varreg
