// SPDX-License-Identifier: Apache-2.0

#include "optcon/qp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace optcon {

void ControlProblem::validate() const
{
    if (alpha <= 0.0) throw std::invalid_argument("ControlProblem: alpha must be positive");
    if (beta < 0.0) throw std::invalid_argument("ControlProblem: beta must be nonnegative");
    if (u_a.size() != u_b.size()) throw std::invalid_argument("ControlProblem: bound size mismatch");
    for (std::size_t i = 0; i < u_a.size(); ++i) {
        if (u_a[i] > 0.0 || u_b[i] < 0.0)
            throw std::invalid_argument("ControlProblem: control bounds must satisfy u_a <= 0 <= u_b");
    }
    if (y_a.has_value() != y_b.has_value())
        throw std::invalid_argument("ControlProblem: state bounds must come as a pair");
    if (y_a) {
        for (std::size_t i = 0; i < y_a->size(); ++i)
            if ((*y_a)[i] > 0.0 || (*y_b)[i] < 0.0)
                throw std::invalid_argument("ControlProblem: state bounds must satisfy y_a <= 0 <= y_b");
    }
}

std::pair<Vector, Vector> split_bounds(const Vector& u_a, const Vector& u_b)
{
    if (u_a.size() != u_b.size()) throw std::invalid_argument("split_bounds: size mismatch");
    const std::size_t n = u_a.size();
    Vector z_a(2 * n), z_b(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (u_a[i] > u_b[i]) throw std::invalid_argument("split_bounds: u_a > u_b");
        z_a[i] = std::max(u_a[i], 0.0);
        z_a[n + i] = -std::min(u_b[i], 0.0);
        z_b[i] = std::max(u_b[i], 0.0);
        z_b[n + i] = -std::min(u_a[i], 0.0);
    }
    return {std::move(z_a), std::move(z_b)};
}

Vector recover_control(const Vector& z)
{
    if (z.size() % 2 != 0) throw std::invalid_argument("recover_control: odd length");
    const std::size_t n = z.size() / 2;
    Vector u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = z[i] - z[n + i];
    return u;
}

SparsityReport sparsity_metric(const Vector& u, double threshold)
{
    std::size_t below = 0;
    double l1 = 0.0;
    for (double v : u) {
        if (std::abs(v) < threshold) ++below;
        l1 += std::abs(v);
    }
    const double pct = u.empty() ? 100.0 : 100.0 * static_cast<double>(below) / u.size();
    return {pct, l1};
}

Vector QpProblem::apply_Mtilde(const Vector& z) const
{
    const std::size_t un = static_cast<std::size_t>(n);
    if (z.size() != 2 * un) throw std::invalid_argument("apply_Mtilde: size mismatch");
    Vector diff(un);
    for (std::size_t i = 0; i < un; ++i) diff[i] = z[i] - z[un + i];
    const Vector mdiff = M.apply(diff);
    Vector out(2 * un);
    for (std::size_t i = 0; i < un; ++i) {
        out[i] = mdiff[i];
        out[un + i] = -mdiff[i];
    }
    return out;
}

Vector QpProblem::apply_Mbar(const Vector& z) const
{
    const std::size_t un = static_cast<std::size_t>(n);
    if (z.size() != 2 * un) throw std::invalid_argument("apply_Mbar: size mismatch");
    Vector diff(un);
    for (std::size_t i = 0; i < un; ++i) diff[i] = z[i] - z[un + i];
    return M.apply(diff);
}

Vector QpProblem::apply_Mbar_t(const Vector& p) const
{
    const std::size_t un = static_cast<std::size_t>(n);
    if (p.size() != un) throw std::invalid_argument("apply_Mbar_t: size mismatch");
    const Vector mp = M.apply(p);
    Vector out(2 * un);
    for (std::size_t i = 0; i < un; ++i) {
        out[i] = mp[i];
        out[un + i] = -mp[i];
    }
    return out;
}

Vector QpProblem::beta_gradient() const
{
    const std::size_t un = static_cast<std::size_t>(n);
    Vector g(2 * un);
    for (std::size_t i = 0; i < un; ++i) g[i] = g[un + i] = beta * lumped_d[i];
    return g;
}

double QpProblem::objective(const Vector& y, const Vector& z) const
{
    Vector diff = y;
    axpy(-1.0, y_d, diff);
    double val = 0.5 * dot(diff, M_obs.apply(diff));
    val += 0.5 * alpha * dot(z, apply_Mtilde(z));
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
        val += beta * lumped_d[i] * (z[i] + z[static_cast<std::size_t>(n) + i]);
    return val;
}

QpProblem build_qp(const ControlProblem& problem, const Grid& grid, const Vector* lifting)
{
    problem.validate();
    if (problem.pde == PdeKind::heat)
        throw std::invalid_argument("build_qp: heat problems use the space-time assembly");

    QpProblem qp;
    qp.n = grid.num_nodes();
    qp.level = grid.level;
    const std::size_t un = static_cast<std::size_t>(qp.n);
    if (problem.y_d.size() != un || problem.f.size() != un || problem.u_a.size() != un)
        throw std::invalid_argument("build_qp: nodal data size mismatch with grid");

    qp.M = assemble_mass(grid, MassVariant::consistent);
    qp.lumped_d = qp.M.row_sums();
    if (problem.pde == PdeKind::poisson) {
        qp.L = assemble_stiffness_poisson(grid);
    } else {
        qp.L = assemble_convdiff(grid, problem.eps, default_wind(), true);
        const double eps = problem.eps;
        qp.op_assembler = [eps](int l) {
            return assemble_convdiff(Grid(l), eps, default_wind(), true);
        };
    }
    if (problem.observation) {
        qp.M_obs = assemble_partial_mass(grid, *problem.observation);
        qp.partial_observation = true;
    } else {
        qp.M_obs = qp.M;
        qp.partial_observation = false;
    }

    qp.y_d = problem.y_d;
    qp.f = qp.M.apply(problem.f);
    if (lifting) {
        if (lifting->size() != un) throw std::invalid_argument("build_qp: lifting size mismatch");
        axpy(1.0, *lifting, qp.f);
    }

    auto [za, zb] = split_bounds(problem.u_a, problem.u_b);
    // pinned components are opened by a hair so strict interiority exists
    for (std::size_t i = 0; i < za.size(); ++i)
        if (zb[i] - za[i] < 1e-12) zb[i] = za[i] + 1e-12;
    qp.z_a = std::move(za);
    qp.z_b = std::move(zb);

    qp.y_a = problem.y_a;
    qp.y_b = problem.y_b;
    qp.alpha = problem.alpha;
    qp.beta = problem.beta;
    return qp;
}

std::map<std::string, std::string> parse_key_value_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_key_value_file: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

} // namespace optcon
