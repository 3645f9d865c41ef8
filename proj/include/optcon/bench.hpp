// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_BENCH_HPP
#define OPTCON_BENCH_HPP

#include "optcon/ipm.hpp"
#include "optcon/timedep.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>

namespace optcon {

/// One benchmark cell: problem, grid, IPM settings, output location.
struct RunConfig {
    PdeKind pde = PdeKind::poisson;
    int ell = 5;
    double alpha = 1e-2;
    double beta = 1e-2;
    double sigma = 0.2;
    double eps = 1e-1; // convection-diffusion diffusion
    double tau = 0.04;
    double horizon = 1.0;
    SolverKind solver = SolverKind::gmres_pt;
    double ua = -2.0;
    double ub = 1.5;
    std::optional<double> ya, yb;
    std::optional<std::array<double, 4>> obs_box;
    double lintol = 1e-10;
    double mu0 = 1.0;
    int max_iterations = 100;
    std::string out_dir = ".";
    bool dump_solution = false;
    std::string label; // row tag in sweep output
};

struct RunArtifacts {
    IpmStats stats;
    /// control sparsity over the full nodal function: interior values plus
    /// the boundary zeros Dirichlet elimination imposes
    SparsityReport sparsity;
    bool converged = false;
    std::string stats_csv;
    std::string summary_csv;
    std::string solution_csv; // empty unless requested
    double wall_seconds = 0.0;
};

/// Parse a RunConfig from a plain-text key=value map (keys: pde, ell, alpha,
/// beta, ua, ub, ya, yb, obs_box, tau, T, sigma, solver, lintol, mu0, out).
RunConfig config_from_map(const std::map<std::string, std::string>& kv);

/// Validate flag combinations (partial observation needs gmres-ppi, heat
/// runs use gmres-pt). Throws std::invalid_argument.
void validate_config(const RunConfig& cfg);

ControlProblem problem_from_config(const RunConfig& cfg, const Grid& grid);

/// Solve one configuration and write stats/summary (and optionally the nodal
/// solution) as deterministic CSV files under cfg.out_dir.
RunArtifacts run_benchmark(const RunConfig& cfg);

/// Cartesian sweep over levels x alphas x (betas | epss | taus). The worker
/// pool is capped by the SOLVER_THREADS environment variable; output rows
/// are written in deterministic cell order regardless of scheduling.
struct SweepSpec {
    RunConfig base;
    std::vector<int> ells;
    std::vector<double> alphas;
    std::vector<double> betas; // used for poisson tables
    std::vector<double> epss;  // used for convection-diffusion tables
    std::vector<double> taus;  // used for heat tables
};

/// Returns the number of cells run; writes the aggregated CSV.
int run_sweep(const SweepSpec& spec, const std::string& csv_path);

/// Table presets matching the benchmark study layouts.
SweepSpec sweep_preset(const std::string& name);

/// Sparsity of the control as a nodal function on the full grid (boundary
/// zeros included); nt > 1 stacks time steps.
SparsityReport nodal_sparsity(const Vector& u_interior, int ell, int nt = 1,
                              double threshold = 1e-2);

} // namespace optcon

#endif // OPTCON_BENCH_HPP
