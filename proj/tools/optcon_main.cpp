// SPDX-License-Identifier: Apache-2.0

#include "optcon/bench.hpp"
#include "optcon/spectral.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace {

// flag values parsed by CLI11; merged over config-file values by count()
struct Flags {
    std::string pde, solver;
    int ell = 0;
    double alpha = 0, beta = 0, sigma = 0, eps = 0, tau = 0, ua = 0, ub = 0, ya = 0, yb = 0;
    double lintol = 0, mu0 = 0;
    std::string out;
    std::vector<double> obs_box;
};

void add_common_flags(CLI::App* app, Flags& f)
{
    app->add_option("--pde", f.pde, "poisson | convdiff | heat");
    app->add_option("--ell", f.ell, "grid level, h = 2^-ell");
    app->add_option("--alpha", f.alpha, "L2 regularization weight");
    app->add_option("--beta", f.beta, "L1 sparsity weight");
    app->add_option("--sigma", f.sigma, "barrier reduction factor");
    app->add_option("--solver", f.solver, "gmres-pt | minres-pd | gmres-ppi");
    app->add_option("--ua", f.ua, "control lower bound");
    app->add_option("--ub", f.ub, "control upper bound");
    app->add_option("--ya", f.ya, "state lower bound");
    app->add_option("--yb", f.yb, "state upper bound");
    app->add_option("--obs-box", f.obs_box, "observation box a1,b1,a2,b2")
        ->delimiter(',')
        ->expected(4);
    app->add_option("--eps", f.eps, "convection-diffusion diffusion coefficient");
    app->add_option("--tau", f.tau, "heat equation time step");
    app->add_option("--lintol", f.lintol, "Krylov relative residual tolerance");
    app->add_option("--mu0", f.mu0, "initial barrier parameter");
    app->add_option("--out", f.out, "output directory");
}

void merge_flags(const CLI::App* app, const Flags& f, optcon::RunConfig& cfg)
{
    auto given = [&](const char* name) { return app->count(name) > 0; };
    if (given("--pde")) cfg.pde = optcon::config_from_map({{"pde", f.pde}}).pde;
    if (given("--solver")) cfg.solver = optcon::config_from_map({{"solver", f.solver}}).solver;
    if (given("--ell")) cfg.ell = f.ell;
    if (given("--alpha")) cfg.alpha = f.alpha;
    if (given("--beta")) cfg.beta = f.beta;
    if (given("--sigma")) cfg.sigma = f.sigma;
    if (given("--eps")) cfg.eps = f.eps;
    if (given("--tau")) cfg.tau = f.tau;
    if (given("--ua")) cfg.ua = f.ua;
    if (given("--ub")) cfg.ub = f.ub;
    if (given("--ya")) cfg.ya = f.ya;
    if (given("--yb")) cfg.yb = f.yb;
    if (given("--lintol")) cfg.lintol = f.lintol;
    if (given("--mu0")) cfg.mu0 = f.mu0;
    if (given("--out")) cfg.out_dir = f.out;
    if (given("--obs-box")) cfg.obs_box = {f.obs_box[0], f.obs_box[1], f.obs_box[2], f.obs_box[3]};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"sparse optimal control benchmark driver"};
    app.require_subcommand(1);

    Flags run_flags;
    std::string run_config_file;
    bool dump_solution = false;
    CLI::App* run = app.add_subcommand("run", "solve one configuration, write stats/summary CSV");
    run->add_option("--config", run_config_file, "key=value problem file (flags override)");
    add_common_flags(run, run_flags);
    run->add_flag("--dump-solution", dump_solution, "write the nodal control/state field");

    Flags sweep_flags;
    std::string preset, sweep_out = "sweep.csv";
    std::vector<int> ells;
    std::vector<double> alphas, betas, epss, taus;
    CLI::App* sweep = app.add_subcommand("sweep", "cartesian benchmark sweep, aggregated CSV");
    add_common_flags(sweep, sweep_flags);
    sweep->add_option("--preset", preset, "table1 | table2 | table3 | table3b | table4 | table6");
    sweep->add_option("--ells", ells, "grid levels")->delimiter(',');
    sweep->add_option("--alphas", alphas, "alpha values")->delimiter(',');
    sweep->add_option("--betas", betas, "beta values")->delimiter(',');
    sweep->add_option("--epss", epss, "diffusion values")->delimiter(',');
    sweep->add_option("--taus", taus, "time steps")->delimiter(',');
    sweep->add_option("--sweep-out", sweep_out, "aggregated CSV path");

    std::string scatter_csv, theta_csv;
    int verify_ell = 4;
    CLI::App* verify = app.add_subcommand("verify", "desk-scale spectral certification report");
    verify->add_option("--ell", verify_ell, "grid level for the interval/bound checks");
    verify->add_option("--scatter-csv", scatter_csv, "write the final-iterate spectrum as CSV");
    verify->add_option("--theta-csv", theta_csv, "write the final-iterate barrier diagonals as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            optcon::RunConfig cfg;
            if (!run_config_file.empty())
                cfg = optcon::config_from_map(optcon::parse_key_value_file(run_config_file));
            merge_flags(run, run_flags, cfg);
            cfg.dump_solution = dump_solution;
            const optcon::RunArtifacts art = optcon::run_benchmark(cfg);
            std::printf("nli=%d av_li=%.6g sparsity=%.6g%% l1=%.6g converged=%d\n", art.stats.nli,
                        art.stats.av_li, art.sparsity.percent_below_threshold,
                        art.sparsity.l1_norm, art.converged ? 1 : 0);
            std::printf("stats: %s\nsummary: %s\n", art.stats_csv.c_str(), art.summary_csv.c_str());
            if (!art.solution_csv.empty()) std::printf("solution: %s\n", art.solution_csv.c_str());
            std::printf("wall: %.3f s\n", art.wall_seconds);
            return art.converged ? 0 : 1;
        }
        if (*sweep) {
            optcon::SweepSpec spec;
            if (!preset.empty()) spec = optcon::sweep_preset(preset);
            merge_flags(sweep, sweep_flags, spec.base);
            if (sweep->count("--ells") > 0 || preset.empty()) spec.ells = ells;
            if (sweep->count("--alphas") > 0 || preset.empty()) spec.alphas = alphas;
            if (sweep->count("--betas") > 0) spec.betas = betas;
            if (sweep->count("--epss") > 0) spec.epss = epss;
            if (sweep->count("--taus") > 0) spec.taus = taus;
            const int cells = optcon::run_sweep(spec, sweep_out);
            std::printf("sweep: %d cells -> %s\n", cells, sweep_out.c_str());
            return 0;
        }
        if (*verify) {
            const auto ideal = optcon::verify_ideal_preconditioners(3);
            std::printf("ideal preconditioners: %s (minres %d, gmres %d, set distance %.2e)\n",
                        ideal.pass ? "pass" : "FAIL", ideal.minres_iterations,
                        ideal.gmres_iterations, ideal.max_set_distance);
            const auto interval =
                optcon::verify_theorem_interval(verify_ell, 10, {1e-6, 1e-2, 1.0}, false);
            std::printf("control-block interval: %s ([%.6f, %.6f] in [%.6f, %.6f])\n",
                        interval.pass ? "pass" : "FAIL", interval.min_eig, interval.max_eig,
                        interval.bound_lo, interval.bound_hi);
            const auto bound = optcon::verify_schur_bound(std::min(verify_ell, 4), 10,
                                                          {1e-6, 1e-4, 1e-2, 1.0}, true);
            std::printf("lumped schur bound: %s (min %.6f)\n", bound.pass ? "pass" : "FAIL",
                        bound.min_eig);
            const auto scatter = optcon::eigenvalue_scatter(optcon::PdeKind::poisson, verify_ell,
                                                            1e-2, 1e-2, 0.2, scatter_csv, "poisson",
                                                            theta_csv);
            std::printf("final-iterate clustering: %.1f%% of eigenvalues in [0.45, 1.05]\n",
                        100.0 * scatter.fraction_clustered);
            return (ideal.pass && interval.pass && bound.pass) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
