// SPDX-License-Identifier: Apache-2.0

#include "optcon/timedep.hpp"

#include "optcon/dense_eig.hpp"

#include <cmath>
#include <stdexcept>

namespace optcon {

namespace {

std::size_t un(const SpaceTimeSystem& s) { return static_cast<std::size_t>(s.n); }

} // namespace

Vector SpaceTimeSystem::apply_bidiag(const Vector& y) const
{
    const std::size_t nn = un(*this);
    if (y.size() != nn * static_cast<std::size_t>(nt))
        throw std::invalid_argument("apply_bidiag: size mismatch");
    Vector out(y.size());
    Vector tmp(nn);
    for (int k = 0; k < nt; ++k) {
        const double* yk = y.data() + static_cast<std::size_t>(k) * nn;
        double* ok = out.data() + static_cast<std::size_t>(k) * nn;
        Mtl.apply(yk, ok);
        if (k > 0) {
            M.apply(yk - nn, tmp.data());
            for (std::size_t i = 0; i < nn; ++i) ok[i] -= tmp[i];
        }
    }
    return out;
}

Vector SpaceTimeSystem::apply_bidiag_t(const Vector& y) const
{
    const std::size_t nn = un(*this);
    if (y.size() != nn * static_cast<std::size_t>(nt))
        throw std::invalid_argument("apply_bidiag_t: size mismatch");
    Vector out(y.size());
    Vector tmp(nn);
    // (M + tau L)' y_k - M' y_{k+1}; spatial blocks are symmetric here
    for (int k = 0; k < nt; ++k) {
        const double* yk = y.data() + static_cast<std::size_t>(k) * nn;
        double* ok = out.data() + static_cast<std::size_t>(k) * nn;
        Mtl.apply(yk, ok);
        if (k + 1 < nt) {
            M.apply(yk + nn, tmp.data());
            for (std::size_t i = 0; i < nn; ++i) ok[i] -= tmp[i];
        }
    }
    return out;
}

Vector SpaceTimeSystem::apply_cost_mass(const Vector& y) const
{
    const std::size_t nn = un(*this);
    Vector out(y.size());
    for (int k = 0; k < nt; ++k) {
        M.apply(y.data() + static_cast<std::size_t>(k) * nn,
                out.data() + static_cast<std::size_t>(k) * nn);
        const double s = tau * qweights[static_cast<std::size_t>(k)];
        kernels::scale(s, out.data() + static_cast<std::size_t>(k) * nn, nn);
    }
    return out;
}

Vector SpaceTimeSystem::apply_control_hessian(const Vector& z) const
{
    const std::size_t nn = un(*this);
    const std::size_t ny = nn * static_cast<std::size_t>(nt);
    if (z.size() != 2 * ny) throw std::invalid_argument("apply_control_hessian: size mismatch");
    Vector out(z.size());
    Vector diff(nn), mdiff(nn);
    for (int k = 0; k < nt; ++k) {
        const std::size_t off = static_cast<std::size_t>(k) * nn;
        for (std::size_t i = 0; i < nn; ++i) diff[i] = z[off + i] - z[ny + off + i];
        M.apply(diff.data(), mdiff.data());
        const double s = alpha * tau * qweights[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < nn; ++i) {
            out[off + i] = s * mdiff[i];
            out[ny + off + i] = -s * mdiff[i];
        }
    }
    return out;
}

Vector SpaceTimeSystem::apply_coupling(const Vector& z) const
{
    const std::size_t nn = un(*this);
    const std::size_t ny = nn * static_cast<std::size_t>(nt);
    Vector out(ny);
    Vector diff(nn);
    for (int k = 0; k < nt; ++k) {
        const std::size_t off = static_cast<std::size_t>(k) * nn;
        for (std::size_t i = 0; i < nn; ++i) diff[i] = z[off + i] - z[ny + off + i];
        M.apply(diff.data(), out.data() + off);
        kernels::scale(tau, out.data() + off, nn);
    }
    return out;
}

Vector SpaceTimeSystem::apply_coupling_t(const Vector& p) const
{
    const std::size_t nn = un(*this);
    const std::size_t ny = nn * static_cast<std::size_t>(nt);
    Vector out(2 * ny);
    Vector mp(nn);
    for (int k = 0; k < nt; ++k) {
        const std::size_t off = static_cast<std::size_t>(k) * nn;
        M.apply(p.data() + off, mp.data());
        for (std::size_t i = 0; i < nn; ++i) {
            out[off + i] = tau * mp[i];
            out[ny + off + i] = -tau * mp[i];
        }
    }
    return out;
}

Vector SpaceTimeSystem::beta_gradient() const
{
    const std::size_t nn = un(*this);
    const std::size_t ny = nn * static_cast<std::size_t>(nt);
    Vector g(2 * ny);
    for (int k = 0; k < nt; ++k) {
        const std::size_t off = static_cast<std::size_t>(k) * nn;
        const double s = beta * tau * qweights[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < nn; ++i) g[off + i] = g[ny + off + i] = s * lumped_d[i];
    }
    return g;
}

SpaceTimeSystem assemble_spacetime_matrices(SparseMatrix M, SparseMatrix L, int level,
                                            double tau, double horizon, double alpha,
                                            double beta, TimeQuadrature quad)
{
    if (tau <= 0.0) throw std::invalid_argument("assemble_spacetime: tau must be positive");
    const double steps = horizon / tau;
    const int nt = static_cast<int>(std::lround(steps));
    if (nt < 1 || std::abs(steps - nt) > 1e-9)
        throw std::invalid_argument("assemble_spacetime: tau must divide the horizon");

    SpaceTimeSystem s;
    s.level = level;
    s.n = M.rows();
    s.nt = nt;
    s.tau = tau;
    s.alpha = alpha;
    s.beta = beta;
    s.lumped_d = M.row_sums();
    SparseMatrix Ls = L;
    Ls.scale_values(tau);
    s.Mtl = sparse_add(1.0, M, 1.0, Ls);
    s.M = std::move(M);
    s.L = std::move(L);
    s.qweights.assign(static_cast<std::size_t>(nt), 1.0);
    if (quad == TimeQuadrature::trapezoid) {
        s.qweights.front() = 0.5;
        s.qweights.back() = 0.5;
    }
    return s;
}

SpaceTimeSystem assemble_spacetime(const ControlProblem& problem, const Grid& grid,
                                   TimeQuadrature quad)
{
    problem.validate();
    if (problem.pde != PdeKind::heat)
        throw std::invalid_argument("assemble_spacetime: expects the heat problem");
    if (problem.y_a)
        throw std::invalid_argument("assemble_spacetime: state bounds not supported in time");
    if (problem.observation)
        throw std::invalid_argument("assemble_spacetime: partial observation not supported in time");

    SpaceTimeSystem s = assemble_spacetime_matrices(
        assemble_mass(grid, MassVariant::consistent), assemble_stiffness_poisson(grid),
        grid.level, problem.tau, problem.horizon, problem.alpha, problem.beta, quad);

    const std::size_t nn = un(s);
    const std::size_t ny = nn * static_cast<std::size_t>(s.nt);
    if (problem.y_d.size() != nn || problem.f.size() != nn || problem.u_a.size() != nn)
        throw std::invalid_argument("assemble_spacetime: nodal data size mismatch");

    s.y_d.resize(ny);
    s.f.resize(ny);
    const Vector mf = s.M.apply(problem.f);
    for (int k = 0; k < s.nt; ++k) {
        const std::size_t off = static_cast<std::size_t>(k) * nn;
        for (std::size_t i = 0; i < nn; ++i) {
            s.y_d[off + i] = problem.y_d[i];
            // zero initial state: no extra term in the first block
            s.f[off + i] = s.tau * mf[i];
        }
    }

    auto [za, zb] = split_bounds(problem.u_a, problem.u_b);
    for (std::size_t i = 0; i < za.size(); ++i)
        if (zb[i] - za[i] < 1e-12) zb[i] = za[i] + 1e-12;
    s.z_a.resize(2 * ny);
    s.z_b.resize(2 * ny);
    for (int k = 0; k < s.nt; ++k) {
        const std::size_t off = static_cast<std::size_t>(k) * nn;
        for (std::size_t i = 0; i < nn; ++i) {
            s.z_a[off + i] = za[i];
            s.z_a[ny + off + i] = za[nn + i];
            s.z_b[off + i] = zb[i];
            s.z_b[ny + off + i] = zb[nn + i];
        }
    }
    return s;
}

Vector time_m_hat(const SpaceTimeSystem& sys, const ThetaBlocks& theta)
{
    const std::size_t nn = un(sys);
    const std::size_t ny = nn * static_cast<std::size_t>(sys.nt);
    if (theta.theta_w.size() != ny || theta.theta_y.size() != ny)
        throw std::invalid_argument("time_m_hat: theta size mismatch");
    const Vector dM = sys.M.diagonal_vector();
    Vector out(ny);
    for (int k = 0; k < sys.nt; ++k) {
        const double w = sys.qweights[static_cast<std::size_t>(k)];
        const std::size_t off = static_cast<std::size_t>(k) * nn;
        for (std::size_t i = 0; i < nn; ++i) {
            const double tw = theta.theta_w[off + i];
            const double tv = theta.theta_v[off + i];
            if (tw <= 0.0 || tv <= 0.0)
                throw std::invalid_argument("time_m_hat: theta must be positive");
            const double s = 1.0 / tw + 1.0 / tv;
            const double dc = w * dM[i];
            // cancellation-free form of
            // (tau/a) dM^2/dc - (1/a^2)(dM/dc)^2 (s + 1/(a tau dc))^{-1}
            const double bracket =
                sys.tau * sys.tau * dM[i] * dM[i] * s / (sys.alpha * sys.tau * dc * s + 1.0);
            if (bracket < -1e-14) throw std::runtime_error("time_m_hat: negative bracket");
            out[off + i] = std::sqrt(std::max(bracket, 0.0)) *
                           std::sqrt(sys.tau * dc + theta.theta_y[off + i]);
        }
    }
    return out;
}

TimeSchurApprox::TimeSchurApprox(const SpaceTimeSystem& sys, const ThetaBlocks& theta,
                                 InnerSolve mode, const MgOptions& mg)
    : sys_(&sys), theta_y_(theta.theta_y), m_hat_(time_m_hat(sys, theta)), opts_(mg)
{
    const std::size_t nn = un(sys);
    blocks_.reserve(static_cast<std::size_t>(sys.nt));
    for (int k = 0; k < sys.nt; ++k) {
        Vector d(nn);
        std::copy(m_hat_.begin() + static_cast<std::size_t>(k) * nn,
                  m_hat_.begin() + static_cast<std::size_t>(k + 1) * nn, d.begin());
        blocks_.push_back(sys.Mtl.plus_diagonal(d));
        if (mode == InnerSolve::multigrid)
            mg_.push_back(MgHierarchy::build(blocks_.back(), opts_));
        else
            lu_.emplace_back(blocks_.back());
    }
}

Vector TimeSchurApprox::solve_block(std::size_t k, const Vector& rhs) const
{
    return mg_.empty() ? lu_[k].solve(rhs) : mg_[k].solve(rhs, opts_.cycles, opts_.pre, opts_.post);
}

Vector TimeSchurApprox::apply_inverse(const Vector& r) const
{
    const SpaceTimeSystem& s = *sys_;
    const std::size_t nn = un(s);
    const int nt = s.nt;

    // forward substitution with (Ldt + Mhat)
    Vector t(r.size());
    Vector rhs(nn), tmp(nn);
    for (int k = 0; k < nt; ++k) {
        const std::size_t off = static_cast<std::size_t>(k) * nn;
        std::copy(r.begin() + off, r.begin() + off + nn, rhs.begin());
        if (k > 0) {
            s.M.apply(t.data() + off - nn, tmp.data());
            for (std::size_t i = 0; i < nn; ++i) rhs[i] += tmp[i];
        }
        const Vector xk = solve_block(static_cast<std::size_t>(k), rhs);
        std::copy(xk.begin(), xk.end(), t.begin() + off);
    }

    // middle multiplication by tau*Mc + Theta_y
    Vector u(r.size());
    for (int k = 0; k < nt; ++k) {
        const std::size_t off = static_cast<std::size_t>(k) * nn;
        s.M.apply(t.data() + off, u.data() + off);
        const double sc = s.tau * s.qweights[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < nn; ++i)
            u[off + i] = sc * u[off + i] + theta_y_[off + i] * t[off + i];
    }

    // backward substitution with the transpose (spatial blocks symmetric)
    Vector x(r.size());
    for (int k = nt - 1; k >= 0; --k) {
        const std::size_t off = static_cast<std::size_t>(k) * nn;
        std::copy(u.begin() + off, u.begin() + off + nn, rhs.begin());
        if (k + 1 < nt) {
            s.M.apply(x.data() + off + nn, tmp.data());
            for (std::size_t i = 0; i < nn; ++i) rhs[i] += tmp[i];
        }
        const Vector xk = solve_block(static_cast<std::size_t>(k), rhs);
        std::copy(xk.begin(), xk.end(), x.begin() + off);
    }
    return x;
}

IpmModel make_spacetime_model(const SpaceTimeSystem& sys)
{
    IpmModel m;
    const std::size_t ny = un(sys) * static_cast<std::size_t>(sys.nt);
    m.ny = static_cast<std::int32_t>(ny);
    m.nu = static_cast<std::int32_t>(ny);
    m.np = static_cast<std::int32_t>(ny);

    const SpaceTimeSystem* s = &sys;
    m.hy = [s](const Vector& v) { return s->apply_cost_mass(v); };
    m.hz = [s](const Vector& z) { return s->apply_control_hessian(z); };
    m.k_apply = [s](const Vector& v) { return s->apply_bidiag(v); };
    m.kt_apply = [s](const Vector& v) { return s->apply_bidiag_t(v); };
    m.b_apply = [s](const Vector& z) { return s->apply_coupling(z); };
    m.bt_apply = [s](const Vector& p) { return s->apply_coupling_t(p); };

    m.y_d = sys.y_d;
    m.beta_grad = sys.beta_gradient();
    m.f = sys.f;
    m.z_a = sys.z_a;
    m.z_b = sys.z_b;

    m.newton_solve = [s](const ThetaBlocks& theta, const Vector& r1, const Vector& r2,
                         const Vector& r3, const IpmParams& params) {
        IpmModel mv = make_spacetime_model(*s);
        const LinearOperator A = make_saddle_operator(mv, theta);
        const Vector rhs = concat(concat(r1, r2), r3);
        const std::size_t ny2 = un(*s) * static_cast<std::size_t>(s->nt);

        Vector x;
        SolveReport rep;
        if (params.solver == SolverKind::dense) {
            if (A.n > kDenseVerificationCap)
                throw std::invalid_argument("newton_solve: dense solver beyond verification cap");
            std::vector<double> dense(static_cast<std::size_t>(A.n) * A.n);
            Vector e(static_cast<std::size_t>(A.n), 0.0), col(static_cast<std::size_t>(A.n));
            for (std::int32_t j = 0; j < A.n; ++j) {
                e[j] = 1.0;
                A.apply_fn(e, col);
                e[j] = 0.0;
                for (std::int32_t i = 0; i < A.n; ++i)
                    dense[static_cast<std::size_t>(j) * A.n + i] = col[i];
            }
            DenseFactor lu(std::move(dense), A.n);
            x = lu.solve(rhs);
            rep.iterations = 1;
            rep.converged = true;
            Vector ax(rhs.size());
            A.apply_fn(x, ax);
            rep.relative_residual = norm2(rhs - ax) / std::max(norm2(rhs), 1e-300);
        } else if (params.solver == SolverKind::gmres_pt) {
            MgOptions mg;
            mg.level = s->level;
            mg.cycles = params.mg_cycles;
            mg.pre = params.mg_pre;
            mg.post = params.mg_post;

            // per-block Chebyshev for tau*w_k*M + Theta_y and the exact
            // diagonalized 2x2 control-block inverse
            const std::size_t nn = un(*s);
            std::vector<ChebyshevSemiIteration> cheb;
            cheb.reserve(static_cast<std::size_t>(s->nt));
            for (int k = 0; k < s->nt; ++k) {
                Vector th(nn);
                std::copy(theta.theta_y.begin() + static_cast<std::size_t>(k) * nn,
                          theta.theta_y.begin() + static_cast<std::size_t>(k + 1) * nn,
                          th.begin());
                cheb.emplace_back(s->M, s->tau * s->qweights[static_cast<std::size_t>(k)],
                                  std::move(th), params.cheb_steps);
            }
            const Vector dM = s->M.diagonal_vector();
            Vector ad(ny2), bd(ny2), cd(ny2);
            for (int k = 0; k < s->nt; ++k) {
                const double sc = s->alpha * s->tau * s->qweights[static_cast<std::size_t>(k)];
                const std::size_t off = static_cast<std::size_t>(k) * nn;
                for (std::size_t i = 0; i < nn; ++i) {
                    ad[off + i] = sc * dM[i] + theta.theta_w[off + i];
                    bd[off + i] = -sc * dM[i];
                    cd[off + i] = sc * dM[i] + theta.theta_v[off + i];
                }
            }
            TimeSchurApprox shat(*s, theta, InnerSolve::multigrid, mg);

            auto precond = [&](const Vector& r, Vector& out) {
                // block rows: y | w | v | p with the coupling [Ldt, -tau M, tau M, -Shat]
                Vector ry(r.begin(), r.begin() + ny2);
                Vector rw(r.begin() + ny2, r.begin() + 2 * ny2);
                Vector rv(r.begin() + 2 * ny2, r.begin() + 3 * ny2);
                Vector rp(r.begin() + 3 * ny2, r.end());

                Vector vy(ny2);
                for (int k = 0; k < s->nt; ++k) {
                    const std::size_t off = static_cast<std::size_t>(k) * nn;
                    Vector slice(ry.begin() + off, ry.begin() + off + nn);
                    const Vector sol = cheb[static_cast<std::size_t>(k)].apply(slice);
                    std::copy(sol.begin(), sol.end(), vy.begin() + off);
                }
                Vector vw, vv;
                block_2x2_inverse_apply(ad, bd, bd, cd, rw, rv, vw, vv);

                Vector t = s->apply_bidiag(vy);
                Vector zc(2 * ny2);
                std::copy(vw.begin(), vw.end(), zc.begin());
                std::copy(vv.begin(), vv.end(), zc.begin() + ny2);
                const Vector cz = s->apply_coupling(zc);
                for (std::size_t i = 0; i < ny2; ++i) t[i] += -cz[i] - rp[i];
                const Vector vp = shat.apply_inverse(t);

                out.resize(r.size());
                std::copy(vy.begin(), vy.end(), out.begin());
                std::copy(vw.begin(), vw.end(), out.begin() + ny2);
                std::copy(vv.begin(), vv.end(), out.begin() + 2 * ny2);
                std::copy(vp.begin(), vp.end(), out.begin() + 3 * ny2);
            };
            const LinearOperator P{A.n, precond};
            rep = gmres(A, P, rhs, x, params.linear_tol, params.linear_maxit);
        } else {
            throw std::invalid_argument("spacetime newton_solve: unsupported solver kind");
        }

        NewtonSolveResult out;
        out.dy.assign(x.begin(), x.begin() + ny2);
        out.dz.assign(x.begin() + ny2, x.begin() + 3 * ny2);
        out.dp.assign(x.begin() + 3 * ny2, x.end());
        out.report = std::move(rep);
        return out;
    };
    return m;
}

HeatSolveResult solve_heat_control(const ControlProblem& problem, const Grid& grid,
                                   const IpmParams& params, TimeQuadrature quad)
{
    HeatSolveResult r{.ipm = {}, .system = assemble_spacetime(problem, grid, quad)};
    const IpmModel model = make_spacetime_model(r.system);
    r.ipm = ipm_solve(model, params);
    return r;
}

} // namespace optcon
