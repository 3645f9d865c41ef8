// SPDX-License-Identifier: Apache-2.0

#include "optcon/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace optcon {

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

PdeKind parse_pde(const std::string& s)
{
    if (s == "poisson") return PdeKind::poisson;
    if (s == "convdiff") return PdeKind::convdiff;
    if (s == "heat") return PdeKind::heat;
    throw std::invalid_argument("unknown pde: " + s);
}

SolverKind parse_solver(const std::string& s)
{
    if (s == "gmres-pt") return SolverKind::gmres_pt;
    if (s == "minres-pd") return SolverKind::minres_pd;
    if (s == "gmres-ppi") return SolverKind::gmres_ppi;
    throw std::invalid_argument("unknown solver: " + s);
}

const char* solver_name(SolverKind k)
{
    switch (k) {
    case SolverKind::gmres_pt: return "gmres-pt";
    case SolverKind::minres_pd: return "minres-pd";
    case SolverKind::gmres_ppi: return "gmres-ppi";
    case SolverKind::dense: return "dense";
    }
    return "?";
}

const char* pde_name(PdeKind k)
{
    switch (k) {
    case PdeKind::poisson: return "poisson";
    case PdeKind::convdiff: return "convdiff";
    case PdeKind::heat: return "heat";
    }
    return "?";
}

ScalarField default_desired_state(PdeKind pde)
{
    if (pde == PdeKind::convdiff)
        return [](double x, double y) {
            return std::exp(-64.0 * ((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)));
        };
    return [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); };
}

int thread_cap()
{
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("SOLVER_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) cap = v;
    }
    return cap;
}

} // namespace

SparsityReport nodal_sparsity(const Vector& u_interior, int ell, int nt, double threshold)
{
    const std::int64_t nx = (std::int64_t(1) << ell) - 1;
    const std::int64_t all = (nx + 2) * (nx + 2);
    if (u_interior.size() != static_cast<std::size_t>(nx * nx * nt))
        throw std::invalid_argument("nodal_sparsity: size does not match level");
    std::int64_t below = 0;
    double l1 = 0.0;
    for (double v : u_interior) {
        if (std::abs(v) < threshold) ++below;
        l1 += std::abs(v);
    }
    below += (all - nx * nx) * nt; // boundary nodes carry zero control
    return {100.0 * static_cast<double>(below) / static_cast<double>(all * nt), l1};
}

RunConfig config_from_map(const std::map<std::string, std::string>& kv)
{
    RunConfig cfg;
    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto* v = get("pde")) cfg.pde = parse_pde(*v);
    if (auto* v = get("ell")) cfg.ell = std::stoi(*v);
    if (auto* v = get("alpha")) cfg.alpha = std::stod(*v);
    if (auto* v = get("beta")) cfg.beta = std::stod(*v);
    if (auto* v = get("sigma")) cfg.sigma = std::stod(*v);
    if (auto* v = get("eps")) cfg.eps = std::stod(*v);
    if (auto* v = get("tau")) cfg.tau = std::stod(*v);
    if (auto* v = get("T")) cfg.horizon = std::stod(*v);
    if (auto* v = get("ua")) cfg.ua = std::stod(*v);
    if (auto* v = get("ub")) cfg.ub = std::stod(*v);
    if (auto* v = get("ya")) cfg.ya = std::stod(*v);
    if (auto* v = get("yb")) cfg.yb = std::stod(*v);
    if (auto* v = get("solver")) cfg.solver = parse_solver(*v);
    if (auto* v = get("lintol")) cfg.lintol = std::stod(*v);
    if (auto* v = get("mu0")) cfg.mu0 = std::stod(*v);
    if (auto* v = get("out")) cfg.out_dir = *v;
    if (auto* v = get("obs_box")) {
        std::array<double, 4> box{};
        std::istringstream ss(*v);
        std::string tok;
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(ss, tok, ',')) throw std::invalid_argument("obs_box needs 4 values");
            box[static_cast<std::size_t>(i)] = std::stod(tok);
        }
        cfg.obs_box = box;
    }
    return cfg;
}

void validate_config(const RunConfig& cfg)
{
    if (cfg.obs_box && cfg.solver != SolverKind::gmres_ppi)
        throw std::invalid_argument(
            "partial observation makes the (1,1)-block singular: use --solver gmres-ppi");
    if (!cfg.obs_box && cfg.solver == SolverKind::gmres_ppi && cfg.pde == PdeKind::heat)
        throw std::invalid_argument("gmres-ppi is not available for heat problems");
    if (cfg.pde == PdeKind::heat && cfg.solver != SolverKind::gmres_pt)
        throw std::invalid_argument("heat problems support --solver gmres-pt only");
    if (cfg.ya.has_value() != cfg.yb.has_value())
        throw std::invalid_argument("state bounds must be given as a pair (--ya and --yb)");
    if (cfg.ell < 3 || cfg.ell > 12) throw std::invalid_argument("ell out of supported range");
}

ControlProblem problem_from_config(const RunConfig& cfg, const Grid& grid)
{
    ControlProblem p;
    p.pde = cfg.pde;
    p.eps = cfg.eps;
    p.tau = cfg.tau;
    p.horizon = cfg.horizon;
    p.alpha = cfg.alpha;
    p.beta = cfg.beta;
    p.y_d = interpolate(grid, default_desired_state(cfg.pde));
    p.f = Vector(static_cast<std::size_t>(grid.num_nodes()), 0.0);
    p.u_a = Vector(static_cast<std::size_t>(grid.num_nodes()), cfg.ua);
    p.u_b = Vector(static_cast<std::size_t>(grid.num_nodes()), cfg.ub);
    if (cfg.ya) {
        p.y_a = Vector(static_cast<std::size_t>(grid.num_nodes()), *cfg.ya);
        p.y_b = Vector(static_cast<std::size_t>(grid.num_nodes()), *cfg.yb);
    }
    if (cfg.obs_box)
        p.observation =
            ObservationRegion{(*cfg.obs_box)[0], (*cfg.obs_box)[1], (*cfg.obs_box)[2],
                              (*cfg.obs_box)[3]};
    return p;
}

namespace {

void write_stats_csv(const std::string& path, const IpmStats& stats, bool heat, double tau)
{
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    if (heat)
        std::fprintf(f, "k,mu,xi_p,xi_d,xi_c,lin_iters,lin_relres,tau\n");
    else
        std::fprintf(f, "k,mu,xi_p,xi_d,xi_c,lin_iters,lin_relres\n");
    for (const auto& it : stats.iterations) {
        std::fprintf(f, "%d,%s,%s,%s,%s,%d,%s", it.k, fmt(it.mu).c_str(), fmt(it.norm_xp).c_str(),
                     fmt(it.norm_xd).c_str(), fmt(it.norm_xc).c_str(), it.lin_iters,
                     fmt(it.lin_relres).c_str());
        if (heat) std::fprintf(f, ",%s", fmt(tau).c_str());
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

std::string summary_header()
{
    return "pde,ell,alpha,beta,sigma,eps,tau,solver,nli,av_li,sparsity,l1,converged";
}

std::string summary_row(const RunConfig& cfg, const IpmStats& stats, const SparsityReport& sp,
                        bool converged)
{
    std::ostringstream os;
    os << pde_name(cfg.pde) << ',' << cfg.ell << ',' << fmt(cfg.alpha) << ',' << fmt(cfg.beta)
       << ',' << fmt(cfg.sigma) << ',' << fmt(cfg.eps) << ','
       << fmt(cfg.pde == PdeKind::heat ? cfg.tau : 0.0) << ',' << solver_name(cfg.solver) << ','
       << stats.nli << ',' << fmt(stats.av_li) << ',' << fmt(sp.percent_below_threshold) << ','
       << fmt(sp.l1_norm) << ',' << (converged ? 1 : 0);
    return os.str();
}

void dump_solution_csv(const std::string& path, const Grid& g, const Vector& u,
                       const Vector& state)
{
    // full nodal field: boundary nodes carry the Dirichlet zeros
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "x,y,u,state\n");
    const std::int32_t nfull = g.nx() + 2;
    const double h = g.h();
    for (std::int32_t gy = 0; gy < nfull; ++gy)
        for (std::int32_t gx = 0; gx < nfull; ++gx) {
            double uv = 0.0, yv = 0.0;
            if (gx >= 1 && gx <= g.nx() && gy >= 1 && gy <= g.nx()) {
                const std::int32_t idx = g.node_index(gx, gy);
                uv = u[static_cast<std::size_t>(idx)];
                yv = state[static_cast<std::size_t>(idx)];
            }
            std::fprintf(f, "%s,%s,%s,%s\n", fmt(gx * h).c_str(), fmt(gy * h).c_str(),
                         fmt(uv).c_str(), fmt(yv).c_str());
        }
    std::fclose(f);
}

} // namespace

RunArtifacts run_benchmark(const RunConfig& cfg)
{
    validate_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    std::filesystem::create_directories(cfg.out_dir);
    Grid grid(cfg.ell);
    const ControlProblem problem = problem_from_config(cfg, grid);

    IpmParams params;
    params.sigma = cfg.sigma;
    params.solver = cfg.solver;
    params.linear_tol = cfg.lintol;
    params.mu0 = cfg.mu0;
    params.max_iterations = cfg.max_iterations;

    RunArtifacts art;
    if (cfg.pde == PdeKind::heat) {
        const HeatSolveResult r = solve_heat_control(problem, grid, params);
        art.stats = r.ipm.stats;
        art.converged = r.ipm.stats.converged;
        art.sparsity = nodal_sparsity(r.ipm.u, cfg.ell, r.system.nt);
        if (cfg.dump_solution) {
            // terminal time slice
            const std::size_t nn = static_cast<std::size_t>(grid.num_nodes());
            const std::size_t off = nn * static_cast<std::size_t>(r.system.nt - 1);
            art.solution_csv = cfg.out_dir + "/solution.csv";
            dump_solution_csv(art.solution_csv, grid, segment(r.ipm.u, off, nn),
                              segment(r.ipm.state.y, off, nn));
        }
    } else {
        const QpProblem qp = build_qp(problem, grid);
        const IpmModel model = make_steady_model(qp);
        const IpmResult r = ipm_solve(model, params);
        art.stats = r.stats;
        art.converged = r.stats.converged;
        art.sparsity = nodal_sparsity(r.u, cfg.ell);
        if (cfg.dump_solution) {
            art.solution_csv = cfg.out_dir + "/solution.csv";
            dump_solution_csv(art.solution_csv, grid, r.u, r.state.y);
        }
    }

    art.stats_csv = cfg.out_dir + "/stats.csv";
    write_stats_csv(art.stats_csv, art.stats, cfg.pde == PdeKind::heat, cfg.tau);

    art.summary_csv = cfg.out_dir + "/summary.csv";
    {
        std::FILE* f = std::fopen(art.summary_csv.c_str(), "w");
        if (!f) throw std::runtime_error("cannot open " + art.summary_csv);
        std::fprintf(f, "%s\n%s\n", summary_header().c_str(),
                     summary_row(cfg, art.stats, art.sparsity, art.converged).c_str());
        std::fclose(f);
    }

    art.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return art;
}

int run_sweep(const SweepSpec& spec, const std::string& csv_path)
{
    std::vector<RunConfig> cells;
    const bool use_beta = !spec.betas.empty();
    const bool use_eps = !spec.epss.empty();
    const bool use_tau = !spec.taus.empty();
    for (int ell : spec.ells)
        for (double alpha : spec.alphas) {
            auto push = [&](RunConfig c) {
                c.ell = ell;
                c.alpha = alpha;
                cells.push_back(std::move(c));
            };
            if (use_beta)
                for (double beta : spec.betas) {
                    RunConfig c = spec.base;
                    c.beta = beta;
                    push(c);
                }
            else if (use_eps)
                for (double eps : spec.epss) {
                    RunConfig c = spec.base;
                    c.eps = eps;
                    push(c);
                }
            else if (use_tau)
                for (double tau : spec.taus) {
                    RunConfig c = spec.base;
                    c.tau = tau;
                    push(c);
                }
            else
                push(spec.base);
        }

    struct Row {
        std::string text;
    };
    std::vector<Row> rows(cells.size());

    const int workers = std::min<int>(thread_cap(), std::max<std::size_t>(cells.size(), 1));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            RunConfig cfg = cells[i];
            validate_config(cfg);
            Grid grid(cfg.ell);
            const ControlProblem problem = problem_from_config(cfg, grid);
            IpmParams params;
            params.sigma = cfg.sigma;
            params.solver = cfg.solver;
            params.linear_tol = cfg.lintol;
            params.mu0 = cfg.mu0;
            params.max_iterations = cfg.max_iterations;

            IpmStats stats;
            SparsityReport sp{};
            bool converged = false;
            if (cfg.pde == PdeKind::heat) {
                const HeatSolveResult r = solve_heat_control(problem, grid, params);
                stats = r.ipm.stats;
                converged = stats.converged;
                sp = nodal_sparsity(r.ipm.u, cfg.ell, r.system.nt);
            } else {
                const QpProblem qp = build_qp(problem, grid);
                const IpmModel model = make_steady_model(qp);
                const IpmResult r = ipm_solve(model, params);
                stats = r.stats;
                converged = stats.converged;
                sp = nodal_sparsity(r.u, cfg.ell);
            }
            rows[i].text = summary_row(cfg, stats, sp, converged);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::FILE* f = std::fopen(csv_path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + csv_path);
    std::fprintf(f, "%s\n", summary_header().c_str());
    for (const auto& r : rows) std::fprintf(f, "%s\n", r.text.c_str());
    std::fclose(f);
    return static_cast<int>(cells.size());
}

SweepSpec sweep_preset(const std::string& name)
{
    SweepSpec s;
    if (name == "table1") {
        s.base.pde = PdeKind::poisson;
        s.base.sigma = 0.2;
        s.ells = {5};
        s.alphas = {1e-2, 1e-4, 1e-6};
        s.betas = {1e-1, 1e-2, 1e-3};
    } else if (name == "table2") {
        s.base.pde = PdeKind::poisson;
        s.base.sigma = 0.2;
        s.base.beta = 1e-2;
        s.ells = {6, 7, 8, 9};
        s.alphas = {1e-2, 1e-4, 1e-6};
    } else if (name == "table3") {
        // eps = 1e-1 column; the eps = 1e-2 column is preset table3b
        s.base.pde = PdeKind::convdiff;
        s.base.beta = 1e-3;
        s.base.sigma = 0.25;
        s.ells = {6, 7, 8, 9};
        s.alphas = {1e-2, 1e-4, 1e-6};
        s.epss = {1e-1};
    } else if (name == "table3b") {
        s.base.pde = PdeKind::convdiff;
        s.base.beta = 1e-3;
        s.base.sigma = 0.4;
        s.ells = {6, 7, 8, 9};
        s.alphas = {1e-2, 1e-4, 1e-6};
        s.epss = {1e-2};
    } else if (name == "table4") {
        s.base.pde = PdeKind::poisson;
        s.base.sigma = 0.2;
        s.base.beta = 1e-2;
        s.base.ua = -1.0;
        s.base.ub = 15.0;
        s.base.ya = -0.1;
        s.base.yb = 0.8;
        s.ells = {6, 7, 8, 9};
        s.alphas = {1e-2, 1e-4, 1e-6};
    } else if (name == "table6") {
        s.base.pde = PdeKind::heat;
        s.base.sigma = 0.25;
        s.base.beta = 1e-2;
        s.ells = {4, 5, 6};
        s.alphas = {1e-2, 1e-4, 1e-6};
        s.taus = {0.04, 0.02, 0.01};
    } else {
        throw std::invalid_argument("unknown sweep preset: " + name);
    }
    return s;
}

} // namespace optcon
