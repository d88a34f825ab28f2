#pragma once

#include <cmath>
#include <span>

#include "varreg/util.hpp"

namespace varreg {

/// Stationarity residual of the scalar Tikhonov problem
///   min_x 1/(2 alpha) (g - a x)^2 + (w^p/p) |x|^p
/// at x >= 0 for data g >= 0:  psi(x) = (a/alpha)(a x - g) + w^p x^{p-1}.
inline double prox_power_residual(double x, double g, double a, double w, double p, double alpha) {
    return (a / alpha) * (a * x - g) + std::pow(w, p) * std::pow(x, p - 1.0);
}

/// Unique minimizer of 1/(2 alpha)(g - a x)^2 + (w^p/p)|x|^p for p > 1.
///
/// The positive-data root of psi is found by safeguarded Newton, run in the
/// variable y = x^{p-1} when p < 2 (psi becomes convex in y, so the iteration
/// decreases monotonically from the upper bracket) and in x itself when
/// p >= 2. A sign-consistent bracket [0, g/a] is maintained and bisection
/// takes over whenever a Newton step leaves it. Stops once the stationarity
/// residual drops below 1e-12 * max(1, |g| a / alpha).
inline double prox_power_scalar(double g, double a, double w, double p, double alpha) {
    require(std::isfinite(p) && p > 1.0, "prox_power_scalar: p must be in (1,inf)");
    require(a > 0.0 && w > 0.0 && alpha > 0.0, "prox_power_scalar: a, w, alpha must be positive");
    require(std::isfinite(g), "prox_power_scalar: non-finite data");
    if (g == 0.0) return 0.0;

    const double sign = g > 0.0 ? 1.0 : -1.0;
    const double ag = std::abs(g);
    const double tol = 1e-12 * std::max(1.0, ag * a / alpha);
    const double wp = std::pow(w, p);

    const bool in_y = p < 2.0;           // y = x^{p-1}
    const double m = 1.0 / (p - 1.0);    // x = y^m in y-mode
    const double hi_x = ag / a;

    double lo = 0.0;
    double hi = in_y ? std::pow(hi_x, p - 1.0) : hi_x;
    double v = hi;  // current iterate in the solve variable

    auto to_x = [&](double t) { return in_y ? std::pow(t, m) : t; };

    double x = to_x(v);
    double res = prox_power_residual(x, ag, a, w, p, alpha);
    for (int it = 0; it < 200 && std::abs(res) > tol; ++it) {
        if (res > 0.0)
            hi = v;
        else
            lo = v;
        double deriv = in_y ? (a * a / alpha) * m * std::pow(v, m - 1.0) + wp
                            : (a * a / alpha) + wp * (p - 1.0) * std::pow(v, p - 2.0);
        double next = v - res / deriv;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        v = next;
        x = to_x(v);
        res = prox_power_residual(x, ag, a, w, p, alpha);
    }
    return sign * x;
}

/// Per-level prox of the (1/q)(sum_k x_k^2)^{q/2} penalty under a uniform
/// level weight a. Writes (s/||g||) g into out, where s solves the radial
/// scalar problem; vanishes exactly iff the level data vanishes.
inline double prox_level_2q(std::span<const double> g_level, double a, double q, double alpha,
                            std::span<double> out) {
    require(g_level.size() == out.size(), "prox_level_2q: size mismatch");
    double nrm = l2_norm(g_level);
    if (nrm == 0.0) {
        for (double& v : out) v = 0.0;
        return 0.0;
    }
    double s = prox_power_scalar(nrm, a, 1.0, q, alpha);
    double scale = s / nrm;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = scale * g_level[k];
    return s;
}

}  // namespace varreg
