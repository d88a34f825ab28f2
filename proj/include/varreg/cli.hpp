#pragma once

#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "varreg/analysis.hpp"
#include "varreg/crosscheck.hpp"
#include "varreg/experiment.hpp"
#include "varreg/io.hpp"

namespace varreg {

namespace cli_detail {

struct SolveCommon {
    std::string operator_path, penalty_path, data_path;
};

inline DiagonalOperator load_operator(const std::string& path) {
    return operator_from_json(load_json(path));
}

inline void write_trace_csv(const std::vector<RateSample>& trace, const std::string& path) {
    CsvWriter w("alpha,image_error,defect,penalty_defect");
    for (const auto& s : trace)
        w.row({fmt_double(s.alpha), fmt_double(s.image_error), fmt_double(s.defect),
               fmt_double(s.penalty_defect)});
    w.save(path);
}

/// "delta=0.1,cd=1.5,CD=2" -> (delta, c_D, C_D)
inline std::tuple<double, double, double> parse_discrepancy_arg(const std::string& s) {
    double delta = -1.0, cd = -1.0, CD = -1.0;
    std::istringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto eq = part.find('=');
        require(eq != std::string::npos, "discrepancy: expected key=value, got '" + part + "'");
        std::string key = part.substr(0, eq);
        double val = std::stod(part.substr(eq + 1));
        if (key == "delta")
            delta = val;
        else if (key == "cd")
            cd = val;
        else if (key == "CD")
            CD = val;
        else
            throw std::invalid_argument("discrepancy: unknown key '" + key + "'");
    }
    require(delta > 0.0 && cd > 0.0 && CD > 0.0, "discrepancy: need delta, cd and CD");
    return {delta, cd, CD};
}

inline BesovParams besov_params(double s, double p, double q) {
    return BesovParams{s, p <= 0.0 ? Exponent::infinity() : Exponent(p),
                       q <= 0.0 ? Exponent::infinity() : Exponent(q)};
}

}  // namespace cli_detail

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 validation/usage error, 2 numeric failure.
inline int cli_main(int argc, const char* const* argv) {
    using namespace cli_detail;
    CLI::App app{"variational regularization on diagonal sequence models"};
    app.require_subcommand(1);

    // ---- solve ----
    auto* solve_cmd = app.add_subcommand("solve", "minimize the Tikhonov functional");
    SolveCommon sv;
    double sv_alpha = 0.0;
    std::string sv_disc, sv_out = "solution.csv", sv_summary = "solution.json";
    solve_cmd->add_option("--operator", sv.operator_path, "operator JSON")->required();
    solve_cmd->add_option("--penalty", sv.penalty_path, "penalty JSON")->required();
    solve_cmd->add_option("--data", sv.data_path, "data CSV (j,k,value)")->required();
    solve_cmd->add_option("--alpha", sv_alpha, "regularization parameter");
    solve_cmd->add_option("--discrepancy", sv_disc, "delta=...,cd=...,CD=...");
    solve_cmd->add_option("--out", sv_out, "solution CSV path");
    solve_cmd->add_option("--summary", sv_summary, "summary JSON path");

    // ---- rho ----
    auto* rho_cmd = app.add_subcommand("rho", "image-space approximation rate estimate");
    SolveCommon rh;
    double rh_nu = 1.0, rh_gmin = 1e-6, rh_gmax = 1e2;
    std::size_t rh_gn = 121;
    std::string rh_trace = "rho_trace.csv", rh_summary = "rho.json";
    rho_cmd->add_option("--operator", rh.operator_path)->required();
    rho_cmd->add_option("--penalty", rh.penalty_path)->required();
    rho_cmd->add_option("--data", rh.data_path, "coefficients of x")->required();
    rho_cmd->add_option("--nu", rh_nu, "Hoelder exponent in [0,1]");
    rho_cmd->add_option("--grid-min", rh_gmin);
    rho_cmd->add_option("--grid-max", rh_gmax);
    rho_cmd->add_option("--grid-points", rh_gn);
    rho_cmd->add_option("--trace", rh_trace);
    rho_cmd->add_option("--summary", rh_summary);

    // ---- defect ----
    auto* def_cmd = app.add_subcommand("defect", "Tikhonov defect and its integral identity");
    SolveCommon df;
    double df_alpha = 1.0, df_gmin = 1e-6, df_gmax = 1e2;
    std::size_t df_gn = 121, df_quad = 400;
    std::string df_trace = "defect_trace.csv", df_summary = "defect.json";
    def_cmd->add_option("--operator", df.operator_path)->required();
    def_cmd->add_option("--penalty", df.penalty_path)->required();
    def_cmd->add_option("--data", df.data_path, "coefficients of x")->required();
    def_cmd->add_option("--alpha", df_alpha, "alpha for the integral check");
    def_cmd->add_option("--quad-points", df_quad);
    def_cmd->add_option("--grid-min", df_gmin);
    def_cmd->add_option("--grid-max", df_gmax);
    def_cmd->add_option("--grid-points", df_gn);
    def_cmd->add_option("--trace", df_trace);
    def_cmd->add_option("--summary", df_summary);

    // ---- equiv ----
    auto* eq_cmd = app.add_subcommand("equiv", "Hoelder equivalence chain verifier");
    SolveCommon ev;
    double ev_nu = 1.0, ev_gmin = 1e-6, ev_gmax = 1e2;
    std::size_t ev_gn = 121, ev_trials = 64;
    std::uint64_t ev_seed = 1;
    std::string ev_trace = "equiv_trace.csv", ev_summary = "equiv.json";
    eq_cmd->add_option("--operator", ev.operator_path)->required();
    eq_cmd->add_option("--penalty", ev.penalty_path)->required();
    eq_cmd->add_option("--data", ev.data_path)->required();
    eq_cmd->add_option("--nu", ev_nu, "exponent in (1/2,1]");
    eq_cmd->add_option("--trials", ev_trials, "random z samples");
    eq_cmd->add_option("--seed", ev_seed);
    eq_cmd->add_option("--grid-min", ev_gmin);
    eq_cmd->add_option("--grid-max", ev_gmax);
    eq_cmd->add_option("--grid-points", ev_gn);
    eq_cmd->add_option("--trace", ev_trace);
    eq_cmd->add_option("--summary", ev_summary);

    // ---- modulus ----
    auto* mod_cmd = app.add_subcommand("modulus", "lower bound on the modulus of continuity");
    std::string mo_op, mo_summary = "modulus.json";
    double mo_delta = 0.1, mo_radius = 1.0;
    double mo_ball_s = 0.0, mo_ball_p = 2.0, mo_ball_q = 2.0;
    double mo_loss_s = 0.0, mo_loss_p = 2.0, mo_loss_q = 2.0;
    std::size_t mo_trials = 64;
    std::uint64_t mo_seed = 1;
    mod_cmd->add_option("--operator", mo_op)->required();
    mod_cmd->add_option("--delta", mo_delta)->required();
    mod_cmd->add_option("--radius", mo_radius, "ball radius in the source norm");
    mod_cmd->add_option("--ball-s", mo_ball_s, "Besov s of the ball norm");
    mod_cmd->add_option("--ball-p", mo_ball_p, "Besov p of the ball norm (<=0: infinity)");
    mod_cmd->add_option("--ball-q", mo_ball_q, "Besov q of the ball norm (<=0: infinity)");
    mod_cmd->add_option("--loss-s", mo_loss_s, "Besov s of the loss norm");
    mod_cmd->add_option("--loss-p", mo_loss_p);
    mod_cmd->add_option("--loss-q", mo_loss_q);
    mod_cmd->add_option("--trials", mo_trials);
    mod_cmd->add_option("--seed", mo_seed);
    mod_cmd->add_option("--summary", mo_summary);

    // ---- rates ----
    auto* rates_cmd = app.add_subcommand("rates", "convergence-rate regression experiment");
    std::string ra_config, ra_csv = "rates.csv", ra_plot = "rates_plot.csv",
                ra_summary = "rates.json", ra_gp = "rates.gp";
    rates_cmd->add_option("--config", ra_config, "experiment config JSON")->required();
    rates_cmd->add_option("--out-csv", ra_csv);
    rates_cmd->add_option("--plot-csv", ra_plot);
    rates_cmd->add_option("--summary", ra_summary);
    rates_cmd->add_option("--gnuplot", ra_gp);

    // ---- prox-test ----
    auto* px_cmd = app.add_subcommand("prox-test", "cross-check prox solver against the oracle");
    std::size_t px_instances = 500;
    std::uint64_t px_seed = 42;
    px_cmd->add_option("--instances", px_instances);
    px_cmd->add_option("--seed", px_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*solve_cmd) {
            auto A = load_operator(sv.operator_path);
            auto R = penalty_from_json(load_json(sv.penalty_path), A.set());
            auto g = read_coefficients_csv(sv.data_path, A.set());
            ordered_json summary;
            TikhonovSolution sol;
            if (!sv_disc.empty()) {
                auto [delta, cd, CD] = parse_discrepancy_arg(sv_disc);
                auto res = discrepancy_alpha(A, R, g, delta, cd, CD);
                sol = std::move(res.solution);
                summary["noise_dominated"] = res.noise_dominated;
                summary["alpha"] = res.alpha;
            } else {
                require(sv_alpha > 0.0, "solve: need --alpha > 0 or --discrepancy");
                sol = minimize(A, R, g, sv_alpha);
                summary["alpha"] = sol.alpha;
            }
            summary["residual"] = sol.residual;
            summary["penalty_value"] = sol.penalty_value;
            summary["objective"] = sol.objective;
            summary["kkt_gap"] = sol.kkt_gap;
            write_coefficients_csv(sol.x_hat, sv_out);
            save_json(summary, sv_summary);
            std::cout << "solve: residual " << fmt_double(sol.residual) << ", objective "
                      << fmt_double(sol.objective) << "\n";
        } else if (*rho_cmd) {
            auto A = load_operator(rh.operator_path);
            auto R = penalty_from_json(load_json(rh.penalty_path), A.set());
            auto x = read_coefficients_csv(rh.data_path, A.set());
            auto est = rho_nu_estimate(A, R, x, rh_nu, geometric_grid(rh_gmin, rh_gmax, rh_gn));
            write_trace_csv(est.samples, rh_trace);
            ordered_json summary;
            summary["nu"] = rh_nu;
            summary["rho_hat"] = est.rho_hat;
            summary["argmax_alpha"] = est.argmax_alpha;
            summary["note"] = "grid supremum: lower bound on rho_nu";
            save_json(summary, rh_summary);
            std::cout << "rho: rho_hat " << fmt_double(est.rho_hat) << " at alpha "
                      << fmt_double(est.argmax_alpha) << "\n";
        } else if (*def_cmd) {
            auto A = load_operator(df.operator_path);
            auto R = penalty_from_json(load_json(df.penalty_path), A.set());
            auto x = read_coefficients_csv(df.data_path, A.set());
            write_trace_csv(exact_data_trace(A, R, x, geometric_grid(df_gmin, df_gmax, df_gn)),
                            df_trace);
            auto [direct, integral] = defect_integral_check(A, R, x, df_alpha, df_quad);
            ordered_json summary;
            summary["alpha"] = df_alpha;
            summary["sigma"] = direct;
            summary["sigma_integral"] = integral;
            summary["rel_gap"] =
                std::abs(direct - integral) / std::max(1e-300, std::abs(direct));
            save_json(summary, df_summary);
            std::cout << "defect: sigma " << fmt_double(direct) << ", integral "
                      << fmt_double(integral) << "\n";
        } else if (*eq_cmd) {
            auto A = load_operator(ev.operator_path);
            auto R = penalty_from_json(load_json(ev.penalty_path), A.set());
            auto x = read_coefficients_csv(ev.data_path, A.set());
            auto grid = geometric_grid(ev_gmin, ev_gmax, ev_gn);
            auto rep = verify_equivalence(A, R, x, ev_nu, grid, ev_trials, ev_seed);
            write_trace_csv(exact_data_trace(A, R, x, grid), ev_trace);
            ordered_json summary;
            summary["nu"] = ev_nu;
            summary["c1_hat"] = rep.c1_hat;
            summary["c2"] = rep.chain.c2;
            summary["c3"] = rep.chain.c3;
            summary["c1_back"] = rep.chain.c1_back;
            summary["defect_violation"] = rep.defect_violation;
            summary["vsc_violation"] = rep.vsc_violation;
            save_json(summary, ev_summary);
            std::cout << "equiv: c1_hat " << fmt_double(rep.c1_hat) << ", worst violation "
                      << fmt_double(std::max(rep.defect_violation, rep.vsc_violation)) << "\n";
        } else if (*mod_cmd) {
            auto A = load_operator(mo_op);
            auto ball_params = besov_params(mo_ball_s, mo_ball_p, mo_ball_q);
            auto loss_params = besov_params(mo_loss_s, mo_loss_p, mo_loss_q);
            BallSpec ball;
            ball.radius = mo_radius;
            ball.norm = [ball_params](const Coefficients& z) { return besov_norm(z, ball_params); };
            const LeveledIndexSet& set = A.set();
            ball.draw = [set](Rng& rng) {
                Coefficients z = Coefficients::zeros(set);
                rng.fill_gaussian(z.values);
                return z;
            };
            LossFn loss = [loss_params](const Coefficients& diff) {
                return besov_norm(diff, loss_params);
            };
            double lb = modulus_estimate(A, ball, loss, mo_delta, mo_trials, mo_seed);
            ordered_json summary;
            summary["delta"] = mo_delta;
            summary["radius"] = mo_radius;
            summary["lower_bound"] = lb;
            save_json(summary, mo_summary);
            std::cout << "modulus: lower bound " << fmt_double(lb) << "\n";
        } else if (*rates_cmd) {
            auto cfg = experiment_config_from_json(load_json(ra_config));
            auto rep = run_rate_experiment(cfg);
            CsvWriter w("delta,alpha,error,residual,image_error,plateau,noise_dominated");
            for (const auto& r : rep.rows)
                w.row({fmt_double(r.delta), fmt_double(r.alpha), fmt_double(r.error),
                       fmt_double(r.residual), fmt_double(r.image_error),
                       r.plateau ? "1" : "0", r.noise_dominated ? "1" : "0"});
            w.save(ra_csv);

            // plot CSV with the theoretical line anchored at the first usable row
            double anchor = 1.0;
            for (const auto& r : rep.rows)
                if (!r.plateau && !r.noise_dominated && r.error > 0.0) {
                    anchor = r.error / std::pow(r.delta, rep.theoretical_slope);
                    break;
                }
            CsvWriter pw("delta,error,alpha,theory_line");
            for (const auto& r : rep.rows)
                pw.row({fmt_double(r.delta), fmt_double(r.error), fmt_double(r.alpha),
                        fmt_double(anchor * std::pow(r.delta, rep.theoretical_slope))});
            pw.save(ra_plot);

            ordered_json summary;
            summary["fitted_slope"] = rep.fitted_slope;
            summary["theoretical_slope"] = rep.theoretical_slope;
            summary["rows_used"] = rep.rows_used;
            summary["rho_used"] = rep.rho_used;
            summary["nu_used"] = rep.nu_used;
            save_json(summary, ra_summary);

            std::ofstream gp(ra_gp, std::ios::binary);
            gp << "set logscale xy\nset xlabel 'delta'\nset ylabel 'error'\n"
               << "plot '" << ra_plot << "' using 1:2 with linespoints title 'measured', \\\n"
               << "     '" << ra_plot << "' using 1:4 with lines title 'theory slope "
               << fmt_double(rep.theoretical_slope) << "'\n";

            std::cout << "rates: fitted slope " << fmt_double(rep.fitted_slope) << " (theory "
                      << fmt_double(rep.theoretical_slope) << ", " << rep.rows_used
                      << " rows)\n";
        } else if (*px_cmd) {
            auto res = prox_crosscheck(px_instances, px_seed);
            std::cout << "prox-test: max coordinate gap " << fmt_double(res.max_gap) << " over "
                      << res.instances << " instances\n";
            if (res.max_gap > 1e-8) {
                std::cerr << "prox-test: gap exceeds 1e-8\n";
                return 2;
            }
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace varreg
