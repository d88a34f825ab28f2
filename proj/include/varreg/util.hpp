#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace varreg {

/// Thrown when an algorithm fails numerically (bracket search exhausted,
/// diverging limit, ...) as opposed to being called with invalid arguments.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// n geometrically spaced points on [lo, hi], endpoints included. n >= 2.
inline std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
    require(lo > 0.0 && hi > lo, "geometric_grid: need 0 < lo < hi");
    require(n >= 2, "geometric_grid: need at least two points");
    std::vector<double> g(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) {
        double w = static_cast<double>(i) / static_cast<double>(n - 1);
        g[i] = std::exp(llo + w * (lhi - llo));
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

/// Left-to-right sum; fixed order keeps results bit-stable under any caller
/// parallelism.
inline double sum_ordered(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

inline double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Golden-section minimization on [lo, hi]; returns (argmin, min value).
template <typename Fn>
std::pair<double, double> golden_min(Fn&& f, double lo, double hi, int iters) {
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    double mid = 0.5 * (a + b);
    double fm = f(mid);
    if (fc < fm && fc <= fd) return {c, fc};
    if (fd < fm) return {d, fd};
    return {mid, fm};
}

template <typename Fn>
std::pair<double, double> golden_max(Fn&& f, double lo, double hi, int iters) {
    auto neg = [&](double x) { return -f(x); };
    auto [x, v] = golden_min(neg, lo, hi, iters);
    return {x, -v};
}

/// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "fit_slope: need >= 2 matching points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0.0, "fit_slope: degenerate abscissae");
    return sxy / sxx;
}

}  // namespace varreg
