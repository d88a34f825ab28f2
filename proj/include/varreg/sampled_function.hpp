#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "varreg/util.hpp"

namespace varreg {

enum class Monotonicity { nondecreasing, nonincreasing };
enum class Curvature { none, convex_in_inverse, concave };

/// Monotone function on (0,inf) represented by sample pairs, with declared
/// monotonicity and curvature that are verified on the samples at
/// construction. Evaluation between samples is piecewise linear; outside the
/// sampled range the end values are held.
class SampledIndexFunction {
public:
    SampledIndexFunction(std::vector<double> args, std::vector<double> vals, Monotonicity mono,
                         Curvature curv, double slack = 1e-10)
        : args_(std::move(args)), vals_(std::move(vals)), mono_(mono), curv_(curv) {
        require(!args_.empty() && args_.size() == vals_.size(),
                "SampledIndexFunction: need matching nonempty samples");
        require(all_finite(args_) && all_finite(vals_), "SampledIndexFunction: non-finite sample");
        require(args_.front() > 0.0, "SampledIndexFunction: arguments must be positive");
        for (std::size_t i = 0; i + 1 < args_.size(); ++i)
            require(args_[i] < args_[i + 1], "SampledIndexFunction: arguments must increase");
        double scale = 0.0;
        for (double v : vals_) {
            require(v >= -slack, "SampledIndexFunction: negative value");
            scale = std::max(scale, std::abs(v));
        }
        for (double& v : vals_) v = std::max(v, 0.0);
        const double tol = slack * std::max(1.0, scale);

        for (std::size_t i = 0; i + 1 < vals_.size(); ++i) {
            double diff = vals_[i + 1] - vals_[i];
            if (mono_ == Monotonicity::nondecreasing)
                require(diff >= -tol, "SampledIndexFunction: not non-decreasing");
            else
                require(diff <= tol, "SampledIndexFunction: not non-increasing");
        }
        if (curv_ == Curvature::concave) {
            // concave: samples sit above their chords
            for (std::size_t i = 0; i + 2 < args_.size(); ++i)
                require(chord_gap(args_, vals_, i) >= -tol, "SampledIndexFunction: not concave");
        } else if (curv_ == Curvature::convex_in_inverse) {
            // convexity of v against u = 1/arg; u decreases along the samples
            std::vector<double> u(args_.size()), w(vals_.size());
            for (std::size_t i = 0; i < args_.size(); ++i) {
                u[args_.size() - 1 - i] = 1.0 / args_[i];
                w[args_.size() - 1 - i] = vals_[i];
            }
            for (std::size_t i = 0; i + 2 < u.size(); ++i)
                require(chord_gap(u, w, i) <= tol, "SampledIndexFunction: not convex in 1/alpha");
        }
    }

    const std::vector<double>& args() const { return args_; }
    const std::vector<double>& vals() const { return vals_; }
    Monotonicity monotonicity() const { return mono_; }
    Curvature curvature() const { return curv_; }
    std::size_t size() const { return args_.size(); }

    double operator()(double t) const {
        if (t <= args_.front()) return vals_.front();
        if (t >= args_.back()) return vals_.back();
        auto it = std::upper_bound(args_.begin(), args_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - args_.begin()) - 1;
        double w = (t - args_[i]) / (args_[i + 1] - args_[i]);
        return vals_[i] + w * (vals_[i + 1] - vals_[i]);
    }

private:
    // value minus chord at the middle point of a consecutive triple
    static double chord_gap(const std::vector<double>& x, const std::vector<double>& y,
                            std::size_t i) {
        double w = (x[i + 1] - x[i]) / (x[i + 2] - x[i]);
        double chord = y[i] + w * (y[i + 2] - y[i]);
        return y[i + 1] - chord;
    }

    std::vector<double> args_, vals_;
    Monotonicity mono_;
    Curvature curv_;
};

namespace detail {

/// Piecewise-linear value within cell i of a sampled function.
inline double cell_interp(const std::vector<double>& a, const std::vector<double>& v,
                          std::size_t i, double x) {
    double w = (x - a[i]) / (a[i + 1] - a[i]);
    return v[i] + w * (v[i + 1] - v[i]);
}

}  // namespace detail

/// F(sigma)(t) = inf_{alpha>0} (sigma(alpha) + t/(2 alpha)), evaluated on
/// t_grid over the sampled range of sigma. The discrete minimum over samples
/// is sharpened by golden-section refinement inside the two cells around it
/// (the objective restricted to one linear piece of sigma is convex). Output
/// is tagged concave non-decreasing.
inline SampledIndexFunction F_transform(const SampledIndexFunction& sigma,
                                        const std::vector<double>& t_grid, int golden_iters = 20) {
    require(!t_grid.empty(), "F_transform: empty t grid");
    require(sigma.monotonicity() == Monotonicity::nondecreasing &&
                sigma.curvature() == Curvature::convex_in_inverse,
            "F_transform: sigma must be non-decreasing with sigma(1/.) convex");
    const auto& a = sigma.args();
    const auto& v = sigma.vals();
    std::vector<double> out(t_grid.size());
    double max_gain = 0.0;
    for (std::size_t m = 0; m < t_grid.size(); ++m) {
        double t = t_grid[m];
        require(t > 0.0, "F_transform: t grid must be positive");
        std::size_t best = 0;
        double bv = v[0] + t / (2.0 * a[0]);
        for (std::size_t i = 1; i < a.size(); ++i) {
            double o = v[i] + t / (2.0 * a[i]);
            if (o < bv) {
                bv = o;
                best = i;
            }
        }
        double refined = bv;
        auto obj = [&](std::size_t cell) {
            return [&, cell](double alpha) {
                return detail::cell_interp(a, v, cell, alpha) + t / (2.0 * alpha);
            };
        };
        if (best > 0)
            refined = std::min(refined, golden_min(obj(best - 1), a[best - 1], a[best], golden_iters).second);
        if (best + 1 < a.size())
            refined = std::min(refined, golden_min(obj(best), a[best], a[best + 1], golden_iters).second);
        // alpha -> inf limit under the held-end convention
        refined = std::min(refined, v.back());
        max_gain = std::max(max_gain, bv - refined);
        out[m] = refined;
    }
    // The refinement is one-sided but varies across t; tags are checked at the
    // resolution it actually achieved.
    double slack = std::max(1e-10, 8.0 * max_gain);
    return SampledIndexFunction(t_grid, std::move(out), Monotonicity::nondecreasing,
                                Curvature::concave, slack);
}

/// F^{-1}(phi)(alpha) = sup_{t>=0} (phi(t) - t/(2 alpha)) on alpha_grid, with
/// the same discrete-scan-plus-golden scheme (the objective is concave in t).
/// Values are clamped at 0, which only tightens the restricted supremum
/// toward the true one since phi >= 0 makes sup >= phi(0) >= 0. Output is
/// tagged non-decreasing with sigma(1/.) convex.
inline SampledIndexFunction F_inverse(const SampledIndexFunction& phi,
                                      const std::vector<double>& alpha_grid,
                                      int golden_iters = 20) {
    require(!alpha_grid.empty(), "F_inverse: empty alpha grid");
    require(phi.monotonicity() == Monotonicity::nondecreasing &&
                phi.curvature() == Curvature::concave,
            "F_inverse: phi must be concave non-decreasing");
    const auto& tt = phi.args();
    const auto& v = phi.vals();
    std::vector<double> out(alpha_grid.size());
    double max_gain = 0.0;
    for (std::size_t m = 0; m < alpha_grid.size(); ++m) {
        double alpha = alpha_grid[m];
        require(alpha > 0.0, "F_inverse: alpha grid must be positive");
        std::size_t best = 0;
        double bv = v[0] - tt[0] / (2.0 * alpha);
        for (std::size_t j = 1; j < tt.size(); ++j) {
            double o = v[j] - tt[j] / (2.0 * alpha);
            if (o > bv) {
                bv = o;
                best = j;
            }
        }
        double refined = bv;
        auto obj = [&](std::size_t cell) {
            return [&, cell](double t) {
                return detail::cell_interp(tt, v, cell, t) - t / (2.0 * alpha);
            };
        };
        if (best > 0)
            refined = std::max(refined, golden_max(obj(best - 1), tt[best - 1], tt[best], golden_iters).second);
        if (best + 1 < tt.size())
            refined = std::max(refined, golden_max(obj(best), tt[best], tt[best + 1], golden_iters).second);
        max_gain = std::max(max_gain, refined - bv);
        out[m] = std::max(refined, 0.0);
    }
    double slack = std::max(1e-10, 8.0 * max_gain);
    return SampledIndexFunction(alpha_grid, std::move(out), Monotonicity::nondecreasing,
                                Curvature::convex_in_inverse, slack);
}

}  // namespace varreg
