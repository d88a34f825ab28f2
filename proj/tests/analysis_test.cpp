#include <gtest/gtest.h>

#include <cmath>

#include "varreg/analysis.hpp"
#include "varreg/rng.hpp"

namespace varreg {
namespace {

Coefficients random_coeffs(const LeveledIndexSet& set, std::uint64_t seed, double scale = 1.0) {
    Coefficients x = Coefficients::zeros(set);
    Rng rng(seed);
    rng.fill_gaussian(x.values);
    for (auto& v : x.values) v *= scale;
    return x;
}

struct Instance {
    DiagonalOperator A;
    PenaltySpec R;
};

Instance scalar_quadratic() {
    auto set = LeveledIndexSet::single_level(1);
    return {DiagonalOperator(set, {1.0}), PenaltySpec::weighted_power(2.0, {1.0})};
}

Instance random_instance(std::uint64_t seed) {
    Rng rng(seed);
    bool level_kind = (rng.next_u64() % 2) == 0;
    static constexpr double kExp[] = {1.3, 1.5, 2.0, 3.0};
    double pq = kExp[rng.next_u64() % 4];
    if (level_kind) {
        int J = static_cast<int>(rng.next_u64() % 3);
        auto A = DiagonalOperator::besov(1, J, rng.uniform(0.3, 1.2));
        return {std::move(A), PenaltySpec::level_two_q(pq)};
    }
    std::size_t n = 1 + rng.next_u64() % 5;
    auto set = LeveledIndexSet::single_level(n);
    WeightVector a(n), w(n);
    for (auto& v : a) v = rng.log_uniform(0.5, 2.0);
    for (auto& v : w) v = rng.log_uniform(0.5, 2.0);
    return {DiagonalOperator(set, std::move(a)), PenaltySpec::weighted_power(pq, std::move(w))};
}

TEST(RhoNu, ZeroAndScalarClosedForms) {
    auto inst = scalar_quadratic();
    auto zero = Coefficients::zeros(inst.A.set());
    auto est0 = rho_nu_estimate(inst.A, inst.R, zero, 1.0, default_alpha_grid());
    EXPECT_EQ(est0.rho_hat, 0.0);

    Coefficients x(inst.A.set(), {1.0});
    // ||Ax - A x_alpha|| = alpha/(1+alpha): nu=1 sup -> 1 as alpha -> 0
    auto est1 = rho_nu_estimate(inst.A, inst.R, x, 1.0, default_alpha_grid());
    EXPECT_NEAR(est1.rho_hat, 1.0, 1e-4);
    EXPECT_NEAR(est1.argmax_alpha, 1e-6, 1e-9);
    // nu = 1/2: sqrt(alpha)/(1+alpha) maximized at alpha = 1 with value 1/2
    auto est2 = rho_nu_estimate(inst.A, inst.R, x, 0.5, default_alpha_grid());
    EXPECT_NEAR(est2.rho_hat, 0.5, 1e-6);
    EXPECT_NEAR(est2.argmax_alpha, 1.0, 1e-10);
    EXPECT_THROW(rho_nu_estimate(inst.A, inst.R, x, 1.0, {}), std::invalid_argument);
}

TEST(RhoOne, ClosedFormExamples) {
    // plain p = 3/2, x = (1,1,0): rho_1 = ||x||_{2p-2}^{p-1} = sqrt(2)
    auto set = LeveledIndexSet::single_level(3);
    Coefficients x(set, {1.0, 1.0, 0.0});
    EXPECT_NEAR(rho_one_plain(x, 1.5), std::sqrt(2.0), 1e-14);

    // weighted with abar_j = 1/j, rbar = 1, p = 3/2, x = e1 -> 1
    Coefficients e1(set, {1.0, 0.0, 0.0});
    EXPECT_NEAR(rho_one_weighted(e1, {1.0, 0.5, 1.0 / 3.0}, {1.0, 1.0, 1.0}, 1.5), 1.0, 1e-14);

    // besov 0,2,q spike at level j0, q = 2 -> 2^{j0 a}
    auto dset = LeveledIndexSet::dyadic(1, 6);
    for (std::size_t j0 : {0u, 2u, 6u}) {
        Coefficients sp = Coefficients::zeros(dset);
        sp.values[dset.flat_index(j0, 0)] = 1.0;
        EXPECT_NEAR(rho_one_besov_02q(sp, 1.0, 2.0), std::exp2(double(j0)), 1e-11);
    }
}

TEST(RhoOne, HomogeneityAndAgreementAcrossForms) {
    auto dset = LeveledIndexSet::dyadic(1, 4);
    for (std::uint64_t s = 0; s < 6; ++s) {
        auto x = random_coeffs(dset, 30 + s);
        Rng rng(60 + s);
        double p = rng.uniform(1.2, 3.0), a = rng.uniform(0.4, 1.5);
        double lam = rng.uniform(0.1, 4.0);
        Coefficients lx = x;
        for (auto& v : lx.values) v *= lam;
        double base = rho_one_besov_0pp(x, a, p);
        EXPECT_NEAR(rho_one_besov_0pp(lx, a, p), std::pow(lam, p - 1.0) * base, 1e-11 * (1 + base));
        // the 0pp closed form is the weighted form under the dyadic weights
        double d = 1.0;
        auto wa = dyadic_level_weights(dset, -a);
        auto wr = dyadic_level_weights(dset, d / 2.0 - d / p);
        EXPECT_NEAR(rho_one_weighted(x, wa, wr, p), base, 1e-12 * (1 + base));
    }
}

TEST(SourceElementLimit, ScalarAndPlainCases) {
    auto inst = scalar_quadratic();
    Coefficients x(inst.A.set(), {1.0});
    auto seq = geometric_grid(1e-8, 1.0, 25);
    std::reverse(seq.begin(), seq.end());
    auto cert = source_element_limit(inst.A, inst.R, x, seq);
    EXPECT_NEAR(cert.omega_norm, 1.0, 1e-7);
    EXPECT_NEAR(cert.rho_one, 1.0, 1e-14);
    EXPECT_LE(cert.subgradient_gap, 1e-7);
    EXPECT_EQ(cert.limit_residuals.size(), seq.size());
    EXPECT_EQ(cert.limit_residuals.back().second, 0.0);

    auto zero = Coefficients::zeros(inst.A.set());
    auto cz = source_element_limit(inst.A, inst.R, zero, seq);
    EXPECT_EQ(cz.omega_norm, 0.0);

    // plain p = 3/2, x = e1: ||omega|| -> rho_1 = 1
    auto set = LeveledIndexSet::single_level(2);
    DiagonalOperator A(set, {1.0, 1.0});
    auto R = PenaltySpec::weighted_power(1.5, {1.0, 1.0});
    Coefficients e1(set, {1.0, 0.0});
    auto c2 = source_element_limit(A, R, e1, seq);
    EXPECT_NEAR(c2.omega_norm, 1.0, 1e-4);
    EXPECT_NEAR(c2.rho_one, 1.0, 1e-14);
}

TEST(RhoNu, ScalesLikeClosedFormAtNuOne) {
    // rho_1(lambda x) = |lambda|^{p-1} rho_1(x); the grid estimate follows suit
    auto grid = geometric_grid(1e-9, 1e2, 221);
    for (std::uint64_t s = 0; s < 4; ++s) {
        Rng rng(77 + s);
        std::size_t n = 2 + rng.next_u64() % 3;
        auto set = LeveledIndexSet::single_level(n);
        WeightVector a(n), w(n);
        for (auto& v : a) v = rng.log_uniform(0.5, 2.0);
        for (auto& v : w) v = rng.log_uniform(0.5, 2.0);
        double p = rng.uniform(1.3, 3.0);
        DiagonalOperator A(set, a);
        auto R = PenaltySpec::weighted_power(p, w);
        auto x = random_coeffs(set, 177 + s);
        double lam = rng.uniform(0.3, 2.5);
        Coefficients lx = x;
        for (auto& v : lx.values) v *= lam;
        double r1 = rho_nu_estimate(A, R, x, 1.0, grid).rho_hat;
        double r2 = rho_nu_estimate(A, R, lx, 1.0, grid).rho_hat;
        EXPECT_NEAR(r2, std::pow(lam, p - 1.0) * r1, 2e-3 * (1.0 + r2));
    }
}

TEST(RhoNu, InterpolationTypeInequality) {
    // rho_{nu1} <= rho_{nu2}^{nu1/nu2} rho_0^{1-nu1/nu2}
    auto grid = default_alpha_grid();
    for (std::uint64_t s = 0; s < 8; ++s) {
        auto inst = random_instance(s + 90);
        auto x = random_coeffs(inst.A.set(), 91 + s);
        Rng rng(92 + s);
        double nu2 = rng.uniform(0.3, 1.0), nu1 = rng.uniform(0.05, nu2);
        auto r0 = rho_nu_estimate(inst.A, inst.R, x, 0.0, grid).rho_hat;
        auto r1 = rho_nu_estimate(inst.A, inst.R, x, nu1, grid).rho_hat;
        auto r2 = rho_nu_estimate(inst.A, inst.R, x, nu2, grid).rho_hat;
        double bound = std::pow(r2, nu1 / nu2) * std::pow(r0, 1.0 - nu1 / nu2);
        EXPECT_LE(r1, bound * (1.0 + 1e-9) + 1e-12);
    }
}

TEST(Gamma, DegenerateCases) {
    auto inst = scalar_quadratic();
    Coefficients x(inst.A.set(), {1.0});
    auto g0 = gamma_estimate(inst.A, inst.R, x, 0.0);
    EXPECT_EQ(g0.upper, 1.0);
    EXPECT_EQ(g0.lower, 1.0);
    auto gfeas = gamma_estimate(inst.A, inst.R, x, 2.0);  // r >= rho_1(x) = 1
    EXPECT_EQ(gfeas.upper, 0.0);
}

TEST(Gamma, IdentityProjectionClosedForm) {
    // p=2, A=identity: B_r is the l2 ball, gamma_x(r) = max(||x||-r, 0)
    auto set = LeveledIndexSet::single_level(3);
    DiagonalOperator A(set, {1.0, 1.0, 1.0});
    auto R = PenaltySpec::weighted_power(2.0, {1.0, 1.0, 1.0});
    Coefficients x(set, {0.6, 0.0, 0.8});  // ||x|| = 1
    auto gb = gamma_estimate(A, R, x, 0.5);
    EXPECT_LE(gb.upper, 0.5 * 1.05);
    EXPECT_GE(gb.upper, 0.5 - 1e-9);
    EXPECT_LE(gb.lower, 0.5 + 1e-9);
    EXPECT_GE(gb.lower, 0.125 - 1e-12);  // grid-sharpened beyond upper/4
}

TEST(Gamma, HoelderBoundFromImageRate) {
    // if ||Ax-Ax_alpha|| <= c2 alpha^{nu/(1+nu)} then gamma_x(r) <= c2^{1+nu} r^{-nu}
    auto inst = random_instance(413);
    auto x = random_coeffs(inst.A.set(), 414);
    const double nu = 1.0;
    auto grid = geometric_grid(1e-8, 1e4, 241);
    double c2 = 0.0;
    for (const auto& s : exact_data_trace(inst.A, inst.R, x, grid))
        c2 = std::max(c2, s.image_error * std::pow(s.alpha, -nu / (1.0 + nu)));
    for (double r : {0.5, 1.0, 2.0}) {
        auto gb = gamma_estimate(inst.A, inst.R, x, r, grid);
        EXPECT_LE(gb.upper, std::pow(c2, 1.0 + nu) / r * (1.0 + 1e-6));
    }
}

TEST(Defect, ScalarClosedFormAndDerivative) {
    auto inst = scalar_quadratic();
    Coefficients x(inst.A.set(), {1.0});
    auto s = defect_sigma(inst.A, inst.R, x, 1.0);
    EXPECT_NEAR(s.defect, 0.25, 1e-12);
    EXPECT_NEAR(s.penalty_defect, 0.5 - 0.125, 1e-12);
    EXPECT_LE(s.defect, s.penalty_defect + 1e-10);

    auto zero = Coefficients::zeros(inst.A.set());
    EXPECT_EQ(defect_sigma(inst.A, inst.R, zero, 2.0).defect, 0.0);

    // sigma'(alpha) = residual^2/(2 alpha^2) against a central difference
    for (std::uint64_t sd = 0; sd < 8; ++sd) {
        auto ri = random_instance(500 + sd);
        auto rx = random_coeffs(ri.A.set(), 510 + sd);
        Rng rng(520 + sd);
        double alpha = rng.log_uniform(1e-2, 1e2);
        double h = 1e-4 * alpha;
        auto mid = defect_sigma(ri.A, ri.R, rx, alpha);
        double deriv = mid.image_error * mid.image_error / (2.0 * alpha * alpha);
        double fd = (defect_sigma(ri.A, ri.R, rx, alpha + h).defect -
                     defect_sigma(ri.A, ri.R, rx, alpha - h).defect) /
                    (2.0 * h);
        EXPECT_NEAR(fd, deriv, 1e-6 * std::abs(deriv) + 1e-14);
    }
}

TEST(Defect, PropertiesAlongGrid) {
    auto grid = geometric_grid(1e-5, 1e3, 41);
    for (std::uint64_t sd = 0; sd < 6; ++sd) {
        auto inst = random_instance(600 + sd);
        auto x = random_coeffs(inst.A.set(), 610 + sd);
        auto trace = exact_data_trace(inst.A, inst.R, x, grid);
        for (std::size_t i = 0; i < trace.size(); ++i) {
            EXPECT_GE(trace[i].defect, 0.0);
            EXPECT_LE(trace[i].defect, trace[i].penalty_defect + 1e-10);
            // image bound from the defect
            EXPECT_LE(trace[i].image_error,
                      std::sqrt(2.0 * trace[i].alpha * trace[i].defect) + 1e-10);
            if (i > 0) { EXPECT_GE(trace[i].defect, trace[i - 1].defect - 1e-10); }
        }
        // concavity via divided differences
        for (std::size_t i = 0; i + 2 < trace.size(); ++i) {
            double d1 = (trace[i + 1].defect - trace[i].defect) / (grid[i + 1] - grid[i]);
            double d2 = (trace[i + 2].defect - trace[i + 1].defect) / (grid[i + 2] - grid[i + 1]);
            EXPECT_LE(d2 - d1, 1e-10);
        }
        EXPECT_LE(trace.front().defect, 1e-4 * std::max(1.0, trace.back().defect));
    }
}

TEST(DefectIntegral, ClosedFormAndSelfConsistency) {
    auto inst = scalar_quadratic();
    Coefficients x(inst.A.set(), {1.0});
    auto [direct, integral] = defect_integral_check(inst.A, inst.R, x, 1.0, 400);
    EXPECT_NEAR(direct, 0.25, 1e-10);
    EXPECT_NEAR(integral, 0.25, 1e-4 * 0.25);

    auto zero = Coefficients::zeros(inst.A.set());
    auto [dz, iz] = defect_integral_check(inst.A, inst.R, zero, 1.0, 400);
    EXPECT_EQ(dz, 0.0);
    EXPECT_EQ(iz, 0.0);

    for (std::uint64_t sd = 0; sd < 6; ++sd) {
        auto ri = random_instance(700 + sd);
        auto rx = random_coeffs(ri.A.set(), 710 + sd);
        Rng rng(720 + sd);
        double alpha = rng.log_uniform(1e-1, 1e2);
        auto [d, i] = defect_integral_check(ri.A, ri.R, rx, alpha, 400);
        if (d > 0.0) { EXPECT_LE(std::abs(d - i) / d, 1e-4); }
    }
}

TEST(Equivalence, ConstantChain) {
    auto c = equivalence_chain(1.0, 2.0);
    EXPECT_NEAR(c.c2, 2.0, 1e-15);
    EXPECT_NEAR(c.c3, 2.0 * std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(c.c1_back, 2.0 * std::sqrt(2.0), 1e-15);
    auto z = equivalence_chain(1.0, 0.0);
    EXPECT_EQ(z.c2, 0.0);
    EXPECT_EQ(z.c3, 0.0);
    EXPECT_EQ(z.c1_back, 0.0);
    EXPECT_THROW(equivalence_chain(0.5, 1.0), std::invalid_argument);
}

TEST(Equivalence, ScalarQuadraticVerifier) {
    // x=1: (i) holds with c1 = 1; sigma = alpha/(2(1+alpha)) <= alpha/2
    auto inst = scalar_quadratic();
    Coefficients x(inst.A.set(), {1.0});
    auto rep = verify_equivalence(inst.A, inst.R, x, 1.0, geometric_grid(1e-9, 1.0, 151), 40, 7);
    EXPECT_NEAR(rep.c1_hat, 1.0, 1e-6);
    EXPECT_NEAR(rep.chain.c2, 0.5, 1e-5);
    EXPECT_NEAR(rep.chain.c3, std::sqrt(2.0), 1e-5);
    EXPECT_LE(rep.defect_violation, 1e-8);
    EXPECT_LE(rep.vsc_violation, 1e-8);
}

TEST(Modulus, IdentityBallClosedForm) {
    auto set = LeveledIndexSet::single_level(4);
    DiagonalOperator A(set, WeightVector(4, 1.0));
    BallSpec ball;
    ball.radius = 1.0;
    ball.norm = [](const Coefficients& z) { return l2_norm(z.values); };
    ball.draw = [set](Rng& rng) {
        Coefficients z = Coefficients::zeros(set);
        rng.fill_gaussian(z.values);
        return z;
    };
    LossFn loss = [](const Coefficients& d) { return l2_norm(d.values); };
    for (double delta : {0.5, 1.5, 3.0}) {
        double expect = std::min(delta, 2.0);
        double est = modulus_estimate(A, ball, loss, delta, 32, 11);
        EXPECT_GE(est, 0.95 * expect);
        EXPECT_LE(est, expect + 1e-9);
    }
    EXPECT_THROW(modulus_estimate(A, ball, loss, 0.5, 0, 1), std::invalid_argument);

    BallSpec point = ball;
    point.radius = 0.0;
    EXPECT_EQ(modulus_estimate(A, point, loss, 0.5, 8, 1), 0.0);
}

TEST(Modulus, DyadicBallHoelderShape) {
    // Omega(delta, {||x||_{b^s_{2,2}} <= rho}) <= c rho^{a/(s+a)} delta^{s/(s+a)}
    const double a = 1.0, s = 0.5;
    auto A = DiagonalOperator::besov(1, 6, a);
    const LeveledIndexSet set = A.set();
    BesovParams ball_norm{s, 2.0, 2.0};
    BallSpec ball;
    ball.norm = [ball_norm](const Coefficients& z) { return besov_norm(z, ball_norm); };
    ball.draw = [set](Rng& rng) {
        Coefficients z = Coefficients::zeros(set);
        rng.fill_gaussian(z.values);
        return z;
    };
    LossFn loss = [](const Coefficients& d) { return l2_norm(d.values); };
    const double e = a / (s + a);
    for (double rho : {0.5, 1.0}) {
        ball.radius = rho;
        for (double delta : {0.01, 0.1}) {
            double est = modulus_estimate(A, ball, loss, delta, 24, 3);
            EXPECT_GT(est, 0.0);
            EXPECT_LE(est, 4.0 * std::pow(rho, e) * std::pow(delta, 1.0 - e));
        }
    }
}

TEST(Vsc, MinimalPhiSharpAlongPath) {
    // Random z can land exactly on the sharpness manifold, so phi needs a
    // grid fine enough that its chords stay within the tolerance.
    for (std::uint64_t sd = 0; sd < 5; ++sd) {
        auto inst = random_instance(800 + sd);
        auto x = random_coeffs(inst.A.set(), 810 + sd);
        auto dense = geometric_grid(1e-8, 1e5, 30000);
        auto phi = minimal_vsc_phi(inst.A, inst.R, x, dense);
        std::vector<double> path;  // subsample of the construction grid
        for (std::size_t i = 0; i < dense.size(); i += 75) path.push_back(dense[i]);
        auto sampler = [&](Rng& rng) {
            Coefficients z = Coefficients::zeros(inst.A.set());
            rng.fill_gaussian(z.values);
            return z;
        };
        double viol = vsc_check(inst.A, inst.R, x, phi, sampler, 40, 900 + sd, path);
        EXPECT_LE(viol, 1e-8);
        EXPECT_GE(viol, -1e30);  // defined
    }
}

TEST(Vsc, TrivialAndCauchySchwarzCases) {
    // z = x gives violation -phi(0) <= 0
    auto set = LeveledIndexSet::single_level(2);
    DiagonalOperator A(set, {1.0, 1.0});
    auto R = PenaltySpec::weighted_power(2.0, {1.0, 1.0});
    Coefficients x(set, {0.8, 0.6});  // ||x|| = 1

    // phi(t) = ||x|| sqrt(t): quadratic VSC from Cauchy-Schwarz
    auto tgrid = geometric_grid(1e-14, 1e2, 2400);
    std::vector<double> pv(tgrid.size());
    for (std::size_t i = 0; i < tgrid.size(); ++i) pv[i] = std::sqrt(tgrid[i]);
    SampledIndexFunction phi(tgrid, pv, Monotonicity::nondecreasing, Curvature::concave);
    auto sampler = [&](Rng& rng) {
        Coefficients z = Coefficients::zeros(set);
        rng.fill_gaussian(z.values);
        return z;
    };
    double viol = vsc_check(A, R, x, phi, sampler, 60, 31, geometric_grid(1e-6, 1e2, 121));
    EXPECT_LE(viol, 1e-6);

    // z = x itself: violation is -phi(0) <= 0
    double at_x = penalty_value(R, x) - penalty_value(R, x) - phi_lower_eval(phi, 0.0);
    EXPECT_LE(at_x, 0.0);
}

}  // namespace
}  // namespace varreg
