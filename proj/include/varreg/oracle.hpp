#pragma once

#include <cmath>

#include "varreg/operator.hpp"
#include "varreg/penalty.hpp"
#include "varreg/util.hpp"

namespace varreg {

namespace detail {

/// Golden section to interval width <= 1e-10 followed by a short quadratic
/// polish; value-based only, no derivatives.
template <typename Fn>
double oracle_line_min(Fn&& f, double lo, double hi) {
    double width = hi - lo;
    int iters = 1;
    if (width > 1e-10)
        iters = static_cast<int>(std::ceil(std::log(width / 1e-10) / std::log(1.0 / 0.6180339887498949)));
    iters = std::min(iters, 200);
    double x = golden_min(f, lo, hi, iters).first;
    // Quadratic polish: golden localization stalls near sqrt(eps). Fit a
    // parabola with the probe step kept near cbrt(eps |f| / f''), where the
    // vertex estimate is most accurate; shrinking past it only measures noise.
    double h = 1e-4 * std::max(std::abs(x), 1e-3 * width);
    for (int round = 0; round < 8; ++round) {
        double fm = f(x - h), f0 = f(x), fp = f(x + h);
        double denom = fp - 2.0 * f0 + fm;
        if (denom > 0.0) {
            // successive parabolic interpolation; accept up to rounding noise
            // so that progress is not blocked once improvements fall below eps
            double step = std::clamp(0.5 * h * (fm - fp) / denom, -h, h);
            double xc = std::clamp(x + step, lo, hi);
            if (f(xc) <= f0 + 4.0 * 2.3e-16 * std::max(std::abs(f0), 1e-300)) {
                x = xc;
                double curv = denom / (h * h);
                double h_opt = std::cbrt(2.3e-16 * std::max(std::abs(f0), 1e-300) / curv);
                // shrink toward h_opt but never below it: smaller stencils
                // only sample rounding noise
                h = std::max({h / 4.0, std::min(h_opt, h), 1e-12 * std::max(std::abs(x), 1e-6)});
            } else {
                h *= 0.25;  // stencil too wide (kink nearby): tighten
            }
        } else {
            h *= 4.0;  // curvature lost in rounding: widen the stencil
        }
    }
    return x;
}

}  // namespace detail

/// Brute-force Tikhonov minimizer for cross-checking the prox-based solver.
/// Each scalar (or radial, for the level penalty) subproblem is minimized by
/// golden-section search on [-2|g_i|/a_i, 2|g_i|/a_i]; shares no code with
/// the Newton prox kernels. Capped at 8 coordinates.
inline Coefficients oracle_minimize(const DiagonalOperator& A, const PenaltySpec& R,
                                    const Coefficients& g, double alpha) {
    require(g.size() <= 8, "oracle_minimize: dimension cap (8) exceeded");
    require(alpha > 0.0, "oracle_minimize: alpha must be positive");
    require(g.set == A.set(), "oracle_minimize: index sets differ");

    Coefficients x = Coefficients::zeros(g.set);
    if (R.kind() == PenaltySpec::Kind::weighted_power) {
        const double p = R.homogeneity();
        for (std::size_t i = 0; i < g.size(); ++i) {
            double a = A.weight(i), w = R.rbar()[i], gi = g.values[i];
            if (gi == 0.0) continue;
            double bound = 2.0 * std::abs(gi) / a;
            auto f = [&](double t) {
                double r = gi - a * t;
                return r * r / (2.0 * alpha) + std::pow(w, p) * std::pow(std::abs(t), p) / p;
            };
            x.values[i] = detail::oracle_line_min(f, -bound, bound);
        }
    } else {
        const double q = R.homogeneity();
        for (std::size_t j = 0; j < g.set.level_count(); ++j) {
            double a = A.uniform_level_weight(j);
            double G = l2_norm(g.level(j));
            if (G == 0.0) continue;
            auto f = [&](double s) {
                double r = G - a * s;
                return r * r / (2.0 * alpha) + std::pow(std::abs(s), q) / q;
            };
            double s = detail::oracle_line_min(f, -2.0 * G / a, 2.0 * G / a);
            auto in = g.level(j);
            auto out = x.level(j);
            for (std::size_t k = 0; k < in.size(); ++k) out[k] = (s / G) * in[k];
        }
    }
    return x;
}

}  // namespace varreg
