#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "varreg/norms.hpp"
#include "varreg/operator.hpp"
#include "varreg/penalty.hpp"
#include "varreg/rng.hpp"
#include "varreg/sampled_function.hpp"
#include "varreg/solve.hpp"
#include "varreg/util.hpp"

namespace varreg {

/// Default grid for rate estimation: Hoelder behavior makes geometric grids
/// accurate up to the step ratio.
inline std::vector<double> default_alpha_grid() { return geometric_grid(1e-6, 1e2, 121); }

/// Exact-data diagnostics at one alpha.
struct RateSample {
    double alpha = 0.0;
    double image_error = 0.0;     // ||Ax - A x_alpha||
    double defect = 0.0;          // sigma_x(alpha)
    double penalty_defect = 0.0;  // R(x) - R(x_alpha)
};

namespace detail {
inline double clamp_small_negative(double v, double scale, const char* what) {
    if (v >= 0.0) return v;
    require(v >= -1e-9 * std::max(1.0, scale), std::string(what) + ": negative beyond tolerance");
    return 0.0;
}
}  // namespace detail

/// sigma_x(alpha) = T_alpha(x, Ax) - T_alpha(x_alpha, Ax) plus companions.
inline RateSample defect_sigma(const DiagonalOperator& A, const PenaltySpec& R,
                               const Coefficients& x, double alpha) {
    auto g = apply_forward(A, x);
    auto sol = minimize(A, R, g, alpha);
    double rx = penalty_value(R, x);
    RateSample s;
    s.alpha = alpha;
    s.image_error = sol.residual;
    s.defect = detail::clamp_small_negative(rx - sol.objective, rx, "defect_sigma");
    s.penalty_defect = detail::clamp_small_negative(rx - sol.penalty_value, rx, "defect_sigma");
    return s;
}

inline std::vector<RateSample> exact_data_trace(const DiagonalOperator& A, const PenaltySpec& R,
                                                const Coefficients& x,
                                                const std::vector<double>& alpha_grid) {
    require(!alpha_grid.empty(), "exact_data_trace: empty grid");
    auto g = apply_forward(A, x);
    double rx = penalty_value(R, x);
    std::vector<RateSample> out;
    out.reserve(alpha_grid.size());
    for (double alpha : alpha_grid) {
        auto sol = minimize(A, R, g, alpha);
        RateSample s;
        s.alpha = alpha;
        s.image_error = sol.residual;
        s.defect = detail::clamp_small_negative(rx - sol.objective, rx, "exact_data_trace");
        s.penalty_defect = detail::clamp_small_negative(rx - sol.penalty_value, rx, "exact_data_trace");
        out.push_back(s);
    }
    return out;
}

struct RhoEstimate {
    double rho_hat = 0.0;
    double argmax_alpha = 0.0;
    std::vector<RateSample> samples;
};

/// Grid supremum of alpha^{-nu} ||Ax - A x_alpha||; a lower bound on the true
/// rho_nu(x) since the sup is restricted to the grid.
inline RhoEstimate rho_nu_estimate(const DiagonalOperator& A, const PenaltySpec& R,
                                   const Coefficients& x, double nu,
                                   const std::vector<double>& alpha_grid) {
    require(nu >= 0.0 && nu <= 1.0, "rho_nu_estimate: nu must be in [0,1]");
    RhoEstimate est;
    est.samples = exact_data_trace(A, R, x, alpha_grid);
    est.argmax_alpha = alpha_grid.front();
    for (const auto& s : est.samples) {
        double v = std::pow(s.alpha, -nu) * s.image_error;
        if (v > est.rho_hat) {
            est.rho_hat = v;
            est.argmax_alpha = s.alpha;
        }
    }
    return est;
}

/// Closed forms for rho_1 = min{||omega|| : A* omega in dR(x)}. With the
/// diagonal isometry (M = 1) these are exact, not just two-sided.
inline double rho_one_weighted(const Coefficients& x, const WeightVector& abar,
                               const WeightVector& rbar, double p) {
    require(p > 1.0, "rho_one_weighted: p must be in (1,inf)");
    require_weights(abar, x.size(), "rho_one_weighted");
    require_weights(rbar, x.size(), "rho_one_weighted");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double xi = std::pow(rbar[i], p) * std::pow(std::abs(x.values[i]), p - 1.0);
        double w = xi / abar[i];
        s += w * w;
    }
    return std::sqrt(s);
}

inline double rho_one_plain(const Coefficients& x, double p) {
    return rho_one_weighted(x, uniform_weights(x.set), uniform_weights(x.set), p);
}

inline double rho_one_besov_0pp(const Coefficients& x, double a, double p) {
    double d = static_cast<double>(x.set.d());
    return rho_one_weighted(x, dyadic_level_weights(x.set, -a),
                            dyadic_level_weights(x.set, d / 2.0 - d / p), p);
}

inline double rho_one_level2q(const Coefficients& x, const std::vector<double>& level_weights,
                              double q) {
    require(q > 1.0, "rho_one_level2q: q must be in (1,inf)");
    require(level_weights.size() == x.set.level_count(), "rho_one_level2q: level count mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < x.set.level_count(); ++j) {
        double nrm = l2_norm(x.level(j));
        double v = std::pow(nrm, q - 1.0) / level_weights[j];
        s += v * v;
    }
    return std::sqrt(s);
}

inline double rho_one_besov_02q(const Coefficients& x, double a, double q) {
    std::vector<double> lw(x.set.level_count());
    for (std::size_t j = 0; j < lw.size(); ++j) lw[j] = std::exp2(-a * static_cast<double>(j));
    return rho_one_level2q(x, lw, q);
}

/// Dispatch on the penalty attached to this operator.
inline double rho_one_for(const DiagonalOperator& A, const PenaltySpec& R, const Coefficients& x) {
    if (R.kind() == PenaltySpec::Kind::weighted_power)
        return rho_one_weighted(x, A.weights(), R.rbar(), R.homogeneity());
    std::vector<double> lw(x.set.level_count());
    for (std::size_t j = 0; j < lw.size(); ++j) lw[j] = A.uniform_level_weight(j);
    return rho_one_level2q(x, lw, R.homogeneity());
}

/// Approximate source element from the limit (Ax - A x_alpha)/alpha.
struct SourceCertificate {
    Coefficients omega;
    double omega_norm = 0.0;
    double rho_one = 0.0;
    std::vector<std::pair<double, double>> limit_residuals;  // (alpha, ||omega_alpha - omega||)
    double subgradient_gap = 0.0;  // max |a_i omega_i - xi_i| scaled
};

inline SourceCertificate source_element_limit(const DiagonalOperator& A, const PenaltySpec& R,
                                              const Coefficients& x,
                                              const std::vector<double>& alpha_seq) {
    require(!alpha_seq.empty(), "source_element_limit: empty alpha sequence");
    for (std::size_t i = 0; i + 1 < alpha_seq.size(); ++i)
        require(alpha_seq[i] > alpha_seq[i + 1], "source_element_limit: alphas must decrease");

    SourceCertificate cert;
    cert.rho_one = rho_one_for(A, R, x);
    auto g = apply_forward(A, x);

    std::vector<Coefficients> omegas;
    omegas.reserve(alpha_seq.size());
    double prev_norm = -1.0;
    for (double alpha : alpha_seq) {
        auto sol = minimize(A, R, g, alpha);
        Coefficients om = Coefficients::zeros(x.set);
        for (std::size_t i = 0; i < x.size(); ++i)
            om.values[i] = (g.values[i] - A.weight(i) * sol.x_hat.values[i]) / alpha;
        double nrm = l2_norm(om.values);
        if (cert.rho_one > 0.0 && nrm > 10.0 * cert.rho_one)
            throw numeric_error("source_element_limit: ||omega_alpha|| diverges (x not in K_1?)");
        if (prev_norm >= 0.0 && nrm < prev_norm - 1e-10 * std::max(1.0, prev_norm))
            throw numeric_error("source_element_limit: ||omega_alpha|| not increasing");
        prev_norm = nrm;
        omegas.push_back(std::move(om));
    }
    cert.omega = omegas.back();
    cert.omega_norm = l2_norm(cert.omega.values);
    for (std::size_t m = 0; m < omegas.size(); ++m) {
        double d = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = omegas[m].values[i] - cert.omega.values[i];
            d += e * e;
        }
        cert.limit_residuals.emplace_back(alpha_seq[m], std::sqrt(d));
    }
    auto xi = penalty_subgradient(R, x);
    double gap = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lhs = A.weight(i) * cert.omega.values[i];
        gap = std::max(gap, std::abs(lhs - xi.values[i]) / std::max(1.0, std::abs(xi.values[i])));
    }
    cert.subgradient_gap = gap;
    return cert;
}

/// Bounds on gamma_x(r) = inf{||Ax - Az|| : rho_1(z) <= r}.
struct GammaBounds {
    double upper = 0.0;
    double lower = 0.0;
};

/// Upper bound from the Tikhonov path (rho_1(x_alpha) evaluated in closed
/// form); lower bound is upper/4 from the factor-4 sandwich. For up to three
/// coordinates the lower bound is sharpened by a certified box-grid search:
/// rho_1 is monotone in every |z_i|, so rounding the optimizer toward zero
/// stays feasible and costs at most the grid step in image distance.
inline GammaBounds gamma_estimate(const DiagonalOperator& A, const PenaltySpec& R,
                                  const Coefficients& x, double r,
                                  const std::vector<double>& alpha_grid = default_alpha_grid(),
                                  std::size_t grid_points_per_dim = 41) {
    require(r >= 0.0, "gamma_estimate: r must be nonnegative");
    auto g = apply_forward(A, x);
    double gnorm = l2_norm(g.values);
    if (r == 0.0) return {gnorm, gnorm};  // B_0 = {0} for these penalties
    if (rho_one_for(A, R, x) <= r) return {0.0, 0.0};

    double upper = gnorm;  // z = 0 is always feasible
    for (double alpha : alpha_grid) {
        auto sol = minimize(A, R, g, alpha);
        if (rho_one_for(A, R, sol.x_hat) <= r) upper = std::min(upper, sol.residual);
    }
    GammaBounds out{upper, upper / 4.0};

    const std::size_t n = x.size();
    if (n >= 1 && n <= 3) {
        std::vector<double> box(n);
        if (R.kind() == PenaltySpec::Kind::weighted_power) {
            double p = R.homogeneity();
            for (std::size_t i = 0; i < n; ++i)
                box[i] = std::pow(r * A.weight(i) / std::pow(R.rbar()[i], p), 1.0 / (p - 1.0));
        } else {
            double q = R.homogeneity();
            for (std::size_t j = 0; j < x.set.level_count(); ++j) {
                double b = std::pow(r * A.uniform_level_weight(j), 1.0 / (q - 1.0));
                for (std::size_t k = 0; k < x.set.level_size(j); ++k)
                    box[x.set.level_offset(j) + k] = b;
            }
        }
        const std::size_t m = grid_points_per_dim | 1;  // odd, so 0 is on the grid
        std::vector<double> h(n);
        double step_image = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            h[i] = 2.0 * box[i] / static_cast<double>(m - 1);
            step_image += A.weight(i) * h[i] * A.weight(i) * h[i];
        }
        step_image = std::sqrt(step_image);

        Coefficients z = Coefficients::zeros(x.set);
        std::size_t total = 1;
        for (std::size_t i = 0; i < n; ++i) total *= m;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rem = idx;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t pos = rem % m;
                rem /= m;
                z.values[i] = -box[i] + static_cast<double>(pos) * h[i];
            }
            if (rho_one_for(A, R, z) > r) continue;
            double dist = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double e = g.values[i] - A.weight(i) * z.values[i];
                dist += e * e;
            }
            best = std::min(best, std::sqrt(dist));
        }
        if (std::isfinite(best)) out.lower = std::max(out.lower, std::min(best - step_image, out.upper));
    }
    return out;
}

/// sigma_x(alpha) both directly and through the integral identity
/// sigma_x(alpha) = int_0^alpha ||Ax - A x_beta||^2 / (2 beta^2) d beta,
/// quadrature in log beta with an Euler-Maclaurin endpoint correction.
inline std::pair<double, double> defect_integral_check(const DiagonalOperator& A,
                                                       const PenaltySpec& R, const Coefficients& x,
                                                       double alpha, std::size_t quad_points = 400,
                                                       double cutoff_factor = 1e-8) {
    require(alpha > 0.0, "defect_integral_check: alpha must be positive");
    require(quad_points >= 8, "defect_integral_check: need a few quadrature points");
    double direct = defect_sigma(A, R, x, alpha).defect;

    auto g = apply_forward(A, x);
    bool zero = std::all_of(x.values.begin(), x.values.end(), [](double v) { return v == 0.0; });
    if (zero) return {direct, 0.0};

    const double u_lo = std::log(cutoff_factor * alpha);
    const double u_hi = std::log(alpha);
    const double hstep = (u_hi - u_lo) / static_cast<double>(quad_points - 1);
    std::vector<double> G(quad_points);
    for (std::size_t i = 0; i < quad_points; ++i) {
        double beta = std::exp(u_lo + static_cast<double>(i) * hstep);
        auto sol = minimize(A, R, g, beta);
        G[i] = sol.residual * sol.residual / (2.0 * beta);  // integrand after du substitution
    }
    double trap = 0.5 * (G.front() + G.back());
    for (std::size_t i = 1; i + 1 < quad_points; ++i) trap += G[i];
    trap *= hstep;
    double d_lo = (-3.0 * G[0] + 4.0 * G[1] - G[2]) / (2.0 * hstep);
    double d_hi = (3.0 * G[quad_points - 1] - 4.0 * G[quad_points - 2] + G[quad_points - 3]) /
                  (2.0 * hstep);
    double integral = trap - hstep * hstep / 12.0 * (d_hi - d_lo);
    return {direct, integral};
}

/// Constant chain of the Hoelder equivalence for nu in (1/2, 1]:
/// image rate c1 -> defect bound c2 = c1^2/(4 nu - 2) -> VSC constant
/// c3 = 2 c2^{1/(2 nu)} -> image rate c1_back = c3^nu.
struct EquivalenceConstants {
    double c2 = 0.0;
    double c3 = 0.0;
    double c1_back = 0.0;
};

inline EquivalenceConstants equivalence_chain(double nu, double c1) {
    require(nu > 0.5 && nu <= 1.0, "equivalence_chain: nu must be in (1/2, 1]");
    require(c1 >= 0.0, "equivalence_chain: c1 must be nonnegative");
    EquivalenceConstants c;
    c.c2 = c1 * c1 / (4.0 * nu - 2.0);
    c.c3 = 2.0 * std::pow(c.c2, 1.0 / (2.0 * nu));
    c.c1_back = std::pow(c.c3, nu);
    return c;
}

/// Instance check of the equivalence: measures c1 on the grid, then verifies
/// the chained bounds on the same grid and on sampled z.
struct EquivalenceReport {
    double c1_hat = 0.0;
    EquivalenceConstants chain;
    double defect_violation = 0.0;  // max sigma_x(alpha) - c2 alpha^{2nu-1}
    double vsc_violation = 0.0;     // max R(x)-R(z) - c3 ||Ax-Az||^{(2nu-1)/nu}
};

inline EquivalenceReport verify_equivalence(const DiagonalOperator& A, const PenaltySpec& R,
                                            const Coefficients& x, double nu,
                                            const std::vector<double>& alpha_grid,
                                            std::size_t z_trials, std::uint64_t seed) {
    require(nu > 0.5 && nu <= 1.0, "verify_equivalence: nu must be in (1/2, 1]");
    EquivalenceReport rep;
    auto est = rho_nu_estimate(A, R, x, nu, alpha_grid);
    rep.c1_hat = est.rho_hat;
    rep.chain = equivalence_chain(nu, rep.c1_hat);

    for (const auto& s : est.samples) {
        double bound = rep.chain.c2 * std::pow(s.alpha, 2.0 * nu - 1.0);
        rep.defect_violation = std::max(rep.defect_violation, s.defect - bound);
    }

    auto g = apply_forward(A, x);
    double rx = penalty_value(R, x);
    const double expo = (2.0 * nu - 1.0) / nu;
    auto check_z = [&](const Coefficients& z) {
        double dist = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = g.values[i] - A.weight(i) * z.values[i];
            dist += e * e;
        }
        double viol = rx - penalty_value(R, z) - rep.chain.c3 * std::pow(std::sqrt(dist), expo);
        rep.vsc_violation = std::max(rep.vsc_violation, viol);
    };
    for (const auto& s : est.samples) {
        auto sol = minimize(A, R, g, s.alpha);
        check_z(sol.x_hat);
    }
    Rng rng(seed);
    double scale = 0.0;
    for (double v : x.values) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) scale = 1.0;
    for (std::size_t tr = 0; tr < z_trials; ++tr) {
        Coefficients z = Coefficients::zeros(x.set);
        double lam = rng.log_uniform(0.05, 3.0);
        bool around_x = (tr % 2 == 0);
        for (std::size_t i = 0; i < z.size(); ++i)
            z.values[i] = (around_x ? x.values[i] : 0.0) + lam * scale * rng.gaussian();
        check_z(z);
    }
    return rep;
}

/// Star-shaped candidate set K = {z : norm(z) <= radius} with a raw sampler;
/// draws get rescaled onto the sphere and pairs are shrunk to the noise level.
struct BallSpec {
    std::function<double(const Coefficients&)> norm;
    double radius = 1.0;
    std::function<Coefficients(Rng&)> draw;
};

using LossFn = std::function<double(const Coefficients&)>;

/// Randomized lower bound on the modulus of continuity
///   Omega(delta, K) = sup{ L(x1, x2) : x1, x2 in K, ||A x1 - A x2|| <= delta }.
/// Every evaluated pair is feasible (common rescale into the ball, then down
/// to the image constraint), so the best value found certifies Omega from
/// below. Deterministic single-coordinate antipodal candidates are always
/// included, then random pairs with a short coordinate ascent.
inline double modulus_estimate(const DiagonalOperator& A, const BallSpec& ball, const LossFn& loss,
                               double delta, std::size_t trials, std::uint64_t seed) {
    require(trials > 0, "modulus_estimate: zero trials");
    require(delta >= 0.0, "modulus_estimate: delta must be nonnegative");
    const std::size_t n = A.set().size();

    auto feasible_value = [&](Coefficients z1, Coefficients z2) {
        double s = std::max(ball.norm(z1), ball.norm(z2));
        if (s > ball.radius && s > 0.0) {
            double lam = ball.radius / s;
            for (std::size_t i = 0; i < n; ++i) {
                z1.values[i] *= lam;
                z2.values[i] *= lam;
            }
        }
        double dist = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = A.weight(i) * (z1.values[i] - z2.values[i]);
            dist += e * e;
        }
        dist = std::sqrt(dist);
        double lam = (dist > delta && dist > 0.0) ? delta / dist : 1.0;
        Coefficients diff = Coefficients::zeros(A.set());
        for (std::size_t i = 0; i < n; ++i)
            diff.values[i] = lam * (z1.values[i] - z2.values[i]);
        return loss(diff);
    };

    double best = 0.0;
    // antipodal single-coordinate pairs
    for (std::size_t i = 0; i < n; ++i) {
        Coefficients e = Coefficients::zeros(A.set());
        e.values[i] = 1.0;
        double nn = ball.norm(e);
        if (!(nn > 0.0)) continue;
        double t = ball.radius / nn;
        Coefficients z1 = e, z2 = e;
        for (std::size_t k = 0; k < n; ++k) {
            z1.values[k] *= t;
            z2.values[k] *= -t;
        }
        best = std::max(best, feasible_value(z1, z2));
    }

    Rng rng(seed);
    for (std::size_t tr = 0; tr < trials; ++tr) {
        Coefficients z1 = ball.draw(rng);
        Coefficients z2 = ball.draw(rng);
        for (Coefficients* z : {&z1, &z2}) {
            double nn = ball.norm(*z);
            if (nn > 0.0)
                for (double& v : z->values) v *= ball.radius / nn;
        }
        best = std::max(best, feasible_value(z1, z2));
        // coordinate ascent on z2
        double scale = ball.radius;
        for (double step : {0.5, 0.2, 0.05}) {
            for (std::size_t i = 0; i < n; ++i) {
                for (double dir : {1.0, -1.0}) {
                    Coefficients cand = z2;
                    cand.values[i] += dir * step * scale;
                    double v = feasible_value(z1, cand);
                    if (v > best) {
                        best = v;
                        z2 = cand;
                    }
                }
            }
        }
    }
    return best;
}

/// Conservative evaluation of a sampled concave nondecreasing phi: chords
/// below the first sample pass through the origin, the last value is held to
/// the right; both underestimate phi, so reported VSC violations can only be
/// pessimistic.
inline double phi_lower_eval(const SampledIndexFunction& phi, double t) {
    const auto& a = phi.args();
    const auto& v = phi.vals();
    if (t <= 0.0) return 0.0;
    if (t < a.front()) return v.front() * (t / a.front());
    if (t >= a.back()) return v.back();
    return phi(t);
}

/// Max over sampled z of R(x) - R(z) - phi(||Ax - Az||^2); z runs over the
/// exact-data Tikhonov path and user-drawn samples.
inline double vsc_check(const DiagonalOperator& A, const PenaltySpec& R, const Coefficients& x,
                        const SampledIndexFunction& phi,
                        const std::function<Coefficients(Rng&)>& z_sampler, std::size_t trials,
                        std::uint64_t seed, const std::vector<double>& path_grid = default_alpha_grid()) {
    require(phi.monotonicity() == Monotonicity::nondecreasing &&
                phi.curvature() == Curvature::concave,
            "vsc_check: phi must be concave non-decreasing");
    auto g = apply_forward(A, x);
    double rx = penalty_value(R, x);
    double worst = -std::numeric_limits<double>::infinity();
    auto check_z = [&](const Coefficients& z) {
        double dist = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = g.values[i] - A.weight(i) * z.values[i];
            dist += e * e;
        }
        double viol = rx - penalty_value(R, z) - phi_lower_eval(phi, dist);
        worst = std::max(worst, viol);
    };
    for (double alpha : path_grid) check_z(minimize(A, R, g, alpha).x_hat);
    Rng rng(seed);
    for (std::size_t tr = 0; tr < trials; ++tr) check_z(z_sampler(rng));
    return worst;
}

/// Exact samples of the minimal VSC index function F(sigma_x): the inequality
/// is tight along the exact-data path, so (||Ax - A x_alpha||^2,
/// R(x) - R(x_alpha)) are samples of F(sigma_x) itself.
inline SampledIndexFunction minimal_vsc_phi(const DiagonalOperator& A, const PenaltySpec& R,
                                            const Coefficients& x,
                                            const std::vector<double>& alpha_grid) {
    auto trace = exact_data_trace(A, R, x, alpha_grid);
    std::vector<double> args, vals;
    for (const auto& s : trace) {
        double t = s.image_error * s.image_error;
        if (t <= 0.0) continue;
        if (!args.empty() && t <= args.back() * (1.0 + 1e-12)) continue;
        args.push_back(t);
        vals.push_back(s.penalty_defect);
    }
    // alpha -> inf endpoint (z = 0): F(sigma_x) equals R(x) at t = ||Ax||^2
    // and stays there beyond, so the held-right extension becomes exact.
    auto g = apply_forward(A, x);
    double t_end = 0.0;
    for (double v : g.values) t_end += v * v;
    if (!args.empty() && t_end > args.back() * (1.0 + 1e-12)) {
        args.push_back(t_end);
        vals.push_back(penalty_value(R, x));
    }
    require(args.size() >= 2, "minimal_vsc_phi: degenerate path (x = 0?)");
    return SampledIndexFunction(std::move(args), std::move(vals), Monotonicity::nondecreasing,
                                Curvature::concave, 1e-8);
}

}  // namespace varreg
