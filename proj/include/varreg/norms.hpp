#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "varreg/index_set.hpp"
#include "varreg/util.hpp"

namespace varreg {

/// Positive exponent that may be infinite. Infinity is a tagged state, not a
/// sentinel double.
class Exponent {
public:
    Exponent(double v) : value_(v) {  // NOLINT: implicit by design
        require(std::isfinite(v) && v > 0.0, "Exponent: must be positive finite");
    }
    static Exponent infinity() {
        Exponent e;
        e.infinite_ = true;
        return e;
    }
    bool is_infinite() const { return infinite_; }
    double value() const {
        require(!infinite_, "Exponent: infinite exponent has no value");
        return value_;
    }

private:
    Exponent() = default;
    double value_ = std::numeric_limits<double>::quiet_NaN();
    bool infinite_ = false;
};

struct BesovParams {
    double s;
    Exponent p;
    Exponent q;
};

namespace detail {
inline double level_p_norm(std::span<const double> level, const Exponent& p) {
    if (p.is_infinite()) {
        double m = 0.0;
        for (double v : level) m = std::max(m, std::abs(v));
        return m;
    }
    const double pe = p.value();
    double s = 0.0;
    for (double v : level) s += std::pow(std::abs(v), pe);
    return std::pow(s, 1.0 / pe);
}
}  // namespace detail

/// Besov sequence quasi-norm: (sum_j 2^{jq(s+d/2-d/p)} (sum_k |x_jk|^p)^{q/p})^{1/q},
/// with sup replacements for infinite p or q.
inline double besov_norm(const Coefficients& x, const BesovParams& params) {
    const double d = static_cast<double>(x.set.d());
    const double dp = params.p.is_infinite() ? 0.0 : d / params.p.value();
    const double we = params.s + d / 2.0 - dp;
    if (params.q.is_infinite()) {
        double m = 0.0;
        for (std::size_t j = 0; j < x.set.level_count(); ++j) {
            double w = std::exp2(we * static_cast<double>(j));
            m = std::max(m, w * detail::level_p_norm(x.level(j), params.p));
        }
        return m;
    }
    const double qe = params.q.value();
    double s = 0.0;
    for (std::size_t j = 0; j < x.set.level_count(); ++j) {
        double w = std::exp2(we * static_cast<double>(j));
        s += std::pow(w * detail::level_p_norm(x.level(j), params.p), qe);
    }
    return std::pow(s, 1.0 / qe);
}

/// Weighted (quasi-)norm (sum_i (w_i |x_i|)^p)^{1/p}, p > 0. Coincides with
/// besov_norm(s,p,p) for w_i = 2^{j(s+d/2-d/p)}.
inline double weighted_norm(const Coefficients& x, const WeightVector& w, double p) {
    require(std::isfinite(p) && p > 0.0, "weighted_norm: p must be positive");
    require_weights(w, x.size(), "weighted_norm");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(w[i] * std::abs(x.values[i]), p);
    return std::pow(s, 1.0 / p);
}

/// Weighted weak-type quasi-norm:
///   ||x||^t = sup_{tau>0} tau^t * sum_i nu_i 1{mu_i |x_i| > tau}.
/// The supremum of the step function is attained in the limit tau -> m from
/// below at the jump points m = mu_i |x_i|, so it is evaluated exactly there.
inline double weak_quasi_norm(const Coefficients& x, const WeightVector& mu,
                              const WeightVector& nu, double t) {
    require(std::isfinite(t) && t > 0.0, "weak_quasi_norm: t must be positive");
    require_weights(mu, x.size(), "weak_quasi_norm");
    require_weights(nu, x.size(), "weak_quasi_norm");
    std::vector<std::pair<double, double>> jumps;  // (mu_i |x_i|, nu_i)
    jumps.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double m = mu[i] * std::abs(x.values[i]);
        if (m > 0.0) jumps.emplace_back(m, nu[i]);
    }
    if (jumps.empty()) return 0.0;
    std::sort(jumps.begin(), jumps.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    double best = 0.0, cum = 0.0;
    for (std::size_t i = 0; i < jumps.size(); ++i) {
        cum += jumps[i].second;
        bool run_end = (i + 1 == jumps.size()) || (jumps[i + 1].first < jumps[i].first);
        if (run_end) best = std::max(best, std::pow(jumps[i].first, t) * cum);
    }
    return std::pow(best, 1.0 / t);
}

namespace detail {

/// Lower envelope of lines t -> A_i + B_i t on t > 0; returns indices of the
/// active lines in order of decreasing slope together with breakpoints.
struct AffineEnvelope {
    std::vector<double> a, b;      // active pieces
    std::vector<double> breaks;    // interior breakpoints, increasing
};

inline AffineEnvelope lower_envelope(std::vector<std::pair<double, double>> lines) {
    // lines as (A intercept, B slope); the min envelope is concave, active
    // slopes decrease with t.
    std::sort(lines.begin(), lines.end(), [](const auto& l, const auto& r) {
        if (l.second != r.second) return l.second > r.second;
        return l.first < r.first;
    });
    std::vector<std::pair<double, double>> uniq;  // one line per slope
    for (const auto& ln : lines)
        if (uniq.empty() || uniq.back().second != ln.second) uniq.push_back(ln);

    auto cross = [](const std::pair<double, double>& l, const std::pair<double, double>& r) {
        return (r.first - l.first) / (l.second - r.second);  // l.slope > r.slope
    };
    // Middle line never minimal when the outer crossing is left of the inner one.
    auto bad = [&](const std::pair<double, double>& l1, const std::pair<double, double>& l2,
                   const std::pair<double, double>& l3) { return cross(l1, l3) <= cross(l1, l2); };

    std::vector<std::pair<double, double>> hull;
    for (const auto& ln : uniq) {
        while (hull.size() >= 2 && bad(hull[hull.size() - 2], hull.back(), ln)) hull.pop_back();
        // A new line with smaller slope and no larger intercept dominates for all t > 0.
        while (hull.size() == 1 && ln.first <= hull.back().first) hull.pop_back();
        hull.push_back(ln);
    }
    AffineEnvelope env;
    for (const auto& h : hull) {
        env.a.push_back(h.first);
        env.b.push_back(h.second);
    }
    for (std::size_t i = 0; i + 1 < hull.size(); ++i)
        env.breaks.push_back(cross(hull[i], hull[i + 1]));
    return env;
}

}  // namespace detail

/// Default crossover grid for interp_norm_upper; wide enough for every scale
/// in the test corpus.
inline std::vector<double> default_interp_t_grid() { return geometric_grid(1e-8, 1e8, 161); }

/// Certified upper bound on the (X_A, X_S)_{theta,inf} interpolation norm,
/// X_A the aw-weighted l2 space and X_S the sw-weighted l^{t_S} space.
///
/// The K-functional infimum is restricted to the truncation family
/// {hard-threshold of x at each coordinate magnitude} plus sampled scalar
/// multiples lambda*x. Each family member contributes an affine function
/// A_z + t B_z; sup_t t^{-theta} min_z(...) is evaluated exactly on the lower
/// envelope, and over the supplied grid. The result bounds the true norm from
/// above; it is not the exact norm.
inline double interp_norm_upper(const Coefficients& x, double theta, const WeightVector& aw,
                                const WeightVector& sw, double t_s,
                                const std::vector<double>& t_grid, std::size_t lambda_samples = 33) {
    require(theta > 0.0 && theta < 1.0, "interp_norm_upper: theta must be in (0,1)");
    require(!t_grid.empty(), "interp_norm_upper: empty t grid");
    require(std::isfinite(t_s) && t_s > 0.0, "interp_norm_upper: t_S must be positive");
    require_weights(aw, x.size(), "interp_norm_upper");
    require_weights(sw, x.size(), "interp_norm_upper");

    const std::size_t n = x.size();
    bool zero = std::all_of(x.values.begin(), x.values.end(), [](double v) { return v == 0.0; });
    if (zero) return 0.0;

    auto cost_a = [&](const std::vector<double>& z) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double dv = aw[i] * (x.values[i] - z[i]);
            s += dv * dv;
        }
        return std::sqrt(s);
    };
    auto cost_s = [&](const std::vector<double>& z) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::pow(sw[i] * std::abs(z[i]), t_s);
        return std::pow(s, 1.0 / t_s);
    };

    std::vector<std::pair<double, double>> lines;  // (A_z, B_z)
    std::vector<double> z(n, 0.0);

    // Hard thresholds: keep coordinates with |x_i| > tau, tau over magnitudes.
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(x.values[i]);
    std::vector<double> dist = mags;
    std::sort(dist.begin(), dist.end());
    dist.erase(std::unique(dist.begin(), dist.end()), dist.end());
    std::vector<double> taus = {-1.0};  // keep everything
    taus.insert(taus.end(), dist.begin(), dist.end());
    for (double tau : taus) {
        for (std::size_t i = 0; i < n; ++i) z[i] = (mags[i] > tau) ? x.values[i] : 0.0;
        lines.emplace_back(cost_a(z), cost_s(z));
    }
    // Scalar multiples lambda*x.
    for (std::size_t m = 0; m < lambda_samples; ++m) {
        double lam = static_cast<double>(m) / static_cast<double>(lambda_samples - 1);
        for (std::size_t i = 0; i < n; ++i) z[i] = lam * x.values[i];
        lines.emplace_back(cost_a(z), cost_s(z));
    }

    auto env = detail::lower_envelope(std::move(lines));
    auto env_value = [&](double t) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < env.a.size(); ++i) best = std::min(best, env.a[i] + env.b[i] * t);
        return std::pow(t, -theta) * best;
    };

    std::vector<double> cands(t_grid.begin(), t_grid.end());
    cands.insert(cands.end(), env.breaks.begin(), env.breaks.end());
    // Per-piece interior maximizer of t^{-theta} (A + B t): t* = theta A / ((1-theta) B).
    for (std::size_t i = 0; i < env.a.size(); ++i) {
        if (env.a[i] > 0.0 && env.b[i] > 0.0)
            cands.push_back(theta * env.a[i] / ((1.0 - theta) * env.b[i]));
    }
    double best = 0.0;
    for (double t : cands) {
        if (!(t > 0.0) || !std::isfinite(t)) continue;
        best = std::max(best, env_value(t));
    }
    return best;
}

inline double interp_norm_upper(const Coefficients& x, double theta, const WeightVector& aw,
                                const WeightVector& sw, double t_s) {
    return interp_norm_upper(x, theta, aw, sw, t_s, default_interp_t_grid());
}

}  // namespace varreg
