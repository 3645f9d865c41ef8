// SPDX-License-Identifier: Apache-2.0

#include "optcon/ipm.hpp"

#include "optcon/dense_eig.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace optcon {

namespace {

void check_interior(const Vector& x, const Vector& lo, const Vector& hi, const char* what)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] > lo[i] && x[i] < hi[i]))
            throw std::runtime_error(std::string("ipm: lost strict interiority in ") + what);
}

void check_positive(const Vector& x, const char* what)
{
    for (double v : x)
        if (!(v > 0.0))
            throw std::runtime_error(std::string("ipm: multiplier not positive in ") + what);
}

} // namespace

ThetaBlocks build_theta(const IpmModel& model, const IpmState& state)
{
    const std::size_t nu = static_cast<std::size_t>(model.nu);
    const std::size_t ny = static_cast<std::size_t>(model.ny);
    ThetaBlocks th;
    th.theta_y.assign(ny, 0.0);
    th.theta_w.resize(nu);
    th.theta_v.resize(nu);

    for (std::size_t i = 0; i < 2 * nu; ++i) {
        const double lo = state.z[i] - model.z_a[i];
        const double hi = model.z_b[i] - state.z[i];
        if (lo <= 0.0 || hi <= 0.0) throw std::runtime_error("build_theta: lost interiority in z");
        const double val = state.lam_za[i] / lo + state.lam_zb[i] / hi;
        if (i < nu)
            th.theta_w[i] = val;
        else
            th.theta_v[i - nu] = val;
    }
    if (model.has_state_bounds()) {
        for (std::size_t i = 0; i < ny; ++i) {
            const double lo = state.y[i] - (*model.y_a)[i];
            const double hi = (*model.y_b)[i] - state.y[i];
            if (lo <= 0.0 || hi <= 0.0)
                throw std::runtime_error("build_theta: lost interiority in y");
            th.theta_y[i] = state.lam_ya[i] / lo + state.lam_yb[i] / hi;
        }
    }
    return th;
}

IpmResiduals ipm_residuals(const IpmModel& model, const IpmState& state)
{
    const std::size_t ny = static_cast<std::size_t>(model.ny);
    const std::size_t nz = 2 * static_cast<std::size_t>(model.nu);
    IpmResiduals r;

    // primal: K y - B z - f
    r.xp = model.k_apply(state.y);
    axpy(-1.0, model.b_apply(state.z), r.xp);
    axpy(-1.0, model.f, r.xp);

    // dual, state row: Hy (y - y_d) + K' p - lam_ya + lam_yb
    Vector diff = state.y;
    axpy(-1.0, model.y_d, diff);
    Vector xd_y = model.hy(diff);
    axpy(1.0, model.kt_apply(state.p), xd_y);
    if (model.has_state_bounds()) {
        axpy(-1.0, state.lam_ya, xd_y);
        axpy(1.0, state.lam_yb, xd_y);
    }
    // dual, control row: Hz z + beta_grad - B' p - lam_za + lam_zb
    Vector xd_z = model.hz(state.z);
    axpy(1.0, model.beta_grad, xd_z);
    axpy(-1.0, model.bt_apply(state.p), xd_z);
    axpy(-1.0, state.lam_za, xd_z);
    axpy(1.0, state.lam_zb, xd_z);
    r.xd = concat(xd_y, xd_z);

    // complementarity gap
    r.xc.clear();
    r.xc.reserve(2 * ny + 2 * nz);
    if (model.has_state_bounds()) {
        for (std::size_t i = 0; i < ny; ++i)
            r.xc.push_back((state.y[i] - (*model.y_a)[i]) * state.lam_ya[i] - state.mu);
        for (std::size_t i = 0; i < ny; ++i)
            r.xc.push_back(((*model.y_b)[i] - state.y[i]) * state.lam_yb[i] - state.mu);
    }
    for (std::size_t i = 0; i < nz; ++i)
        r.xc.push_back((state.z[i] - model.z_a[i]) * state.lam_za[i] - state.mu);
    for (std::size_t i = 0; i < nz; ++i)
        r.xc.push_back((model.z_b[i] - state.z[i]) * state.lam_zb[i] - state.mu);

    // RMS-normalized norms keep the stopping test mesh-independent
    r.norm_xp = norm2(r.xp) / std::sqrt(static_cast<double>(r.xp.size()));
    r.norm_xd = norm2(r.xd) / std::sqrt(static_cast<double>(r.xd.size()));
    r.norm_xc = norm2(r.xc) / std::sqrt(static_cast<double>(r.xc.size()));
    return r;
}

void newton_rhs(const IpmModel& model, const IpmState& state, double mu, Vector& r1, Vector& r2,
                Vector& r3)
{
    const std::size_t ny = static_cast<std::size_t>(model.ny);
    const std::size_t nz = 2 * static_cast<std::size_t>(model.nu);

    Vector diff = state.y;
    axpy(-1.0, model.y_d, diff);
    r1 = model.hy(diff);
    axpy(1.0, model.kt_apply(state.p), r1);
    if (model.has_state_bounds()) {
        for (std::size_t i = 0; i < ny; ++i) {
            r1[i] -= mu / (state.y[i] - (*model.y_a)[i]);
            r1[i] += mu / ((*model.y_b)[i] - state.y[i]);
        }
    }
    scale(-1.0, r1);

    r2 = model.hz(state.z);
    axpy(1.0, model.beta_grad, r2);
    axpy(-1.0, model.bt_apply(state.p), r2);
    for (std::size_t i = 0; i < nz; ++i) {
        r2[i] -= mu / (state.z[i] - model.z_a[i]);
        r2[i] += mu / (model.z_b[i] - state.z[i]);
    }
    scale(-1.0, r2);

    r3 = model.k_apply(state.y);
    axpy(-1.0, model.b_apply(state.z), r3);
    axpy(-1.0, model.f, r3);
    scale(-1.0, r3);
}

MultiplierSteps recover_multiplier_steps(const IpmModel& model, const IpmState& state,
                                         const Vector& dy, const Vector& dz, double mu)
{
    MultiplierSteps ms;
    const std::size_t nz = 2 * static_cast<std::size_t>(model.nu);
    ms.dlam_za.resize(nz);
    ms.dlam_zb.resize(nz);
    for (std::size_t i = 0; i < nz; ++i) {
        const double lo = state.z[i] - model.z_a[i];
        const double hi = model.z_b[i] - state.z[i];
        ms.dlam_za[i] = -state.lam_za[i] / lo * dz[i] - state.lam_za[i] + mu / lo;
        ms.dlam_zb[i] = state.lam_zb[i] / hi * dz[i] - state.lam_zb[i] + mu / hi;
    }
    if (model.has_state_bounds()) {
        const std::size_t ny = static_cast<std::size_t>(model.ny);
        ms.dlam_ya.resize(ny);
        ms.dlam_yb.resize(ny);
        for (std::size_t i = 0; i < ny; ++i) {
            const double lo = state.y[i] - (*model.y_a)[i];
            const double hi = (*model.y_b)[i] - state.y[i];
            ms.dlam_ya[i] = -state.lam_ya[i] / lo * dy[i] - state.lam_ya[i] + mu / lo;
            ms.dlam_yb[i] = state.lam_yb[i] / hi * dy[i] - state.lam_yb[i] + mu / hi;
        }
    }
    return ms;
}

namespace {

double ratio_to_box(const Vector& x, const Vector& dx, const Vector& lo, const Vector& hi)
{
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (dx[i] < 0.0) r = std::min(r, (lo[i] - x[i]) / dx[i]);
        if (dx[i] > 0.0) r = std::min(r, (hi[i] - x[i]) / dx[i]);
    }
    return r;
}

double ratio_to_zero(const Vector& lam, const Vector& dlam)
{
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lam.size(); ++i)
        if (dlam[i] < 0.0) r = std::min(r, -lam[i] / dlam[i]);
    return r;
}

} // namespace

std::pair<double, double> step_lengths(const IpmModel& model, const IpmState& state,
                                       const Vector& dy, const Vector& dz,
                                       const MultiplierSteps& msteps, double alpha0)
{
    double rp = ratio_to_box(state.z, dz, model.z_a, model.z_b);
    if (model.has_state_bounds())
        rp = std::min(rp, ratio_to_box(state.y, dy, *model.y_a, *model.y_b));
    double rd = std::min(ratio_to_zero(state.lam_za, msteps.dlam_za),
                         ratio_to_zero(state.lam_zb, msteps.dlam_zb));
    if (model.has_state_bounds())
        rd = std::min(rd, std::min(ratio_to_zero(state.lam_ya, msteps.dlam_ya),
                                   ratio_to_zero(state.lam_yb, msteps.dlam_yb)));

    const double ap = std::min(1.0, alpha0 * rp);
    const double ad = std::min(1.0, alpha0 * rd);
    return {ap, ad};
}

IpmState initial_point(const IpmModel& model, const IpmParams& params)
{
    IpmState s;
    const std::size_t ny = static_cast<std::size_t>(model.ny);
    const std::size_t nz = 2 * static_cast<std::size_t>(model.nu);

    s.y = model.y_d;
    if (model.has_state_bounds()) {
        for (std::size_t i = 0; i < ny; ++i) {
            const double delta = 1e-2 * ((*model.y_b)[i] - (*model.y_a)[i]);
            s.y[i] = std::min(std::max(s.y[i], (*model.y_a)[i] + delta), (*model.y_b)[i] - delta);
        }
        s.lam_ya.assign(ny, 1.0);
        s.lam_yb.assign(ny, 1.0);
    }
    s.z.resize(nz);
    for (std::size_t i = 0; i < nz; ++i) s.z[i] = 0.5 * (model.z_a[i] + model.z_b[i]);
    s.p.assign(static_cast<std::size_t>(model.np), 0.0);
    s.lam_za.assign(nz, 1.0);
    s.lam_zb.assign(nz, 1.0);
    s.mu = params.mu0;
    s.k = 0;
    return s;
}

LinearOperator make_saddle_operator(const IpmModel& model, const ThetaBlocks& theta)
{
    const std::size_t ny = static_cast<std::size_t>(model.ny);
    const std::size_t nu = static_cast<std::size_t>(model.nu);
    const std::size_t np = static_cast<std::size_t>(model.np);
    const std::int32_t dim = static_cast<std::int32_t>(ny + 2 * nu + np);

    return {dim, [&model, theta, ny, nu](const Vector& x, Vector& out) {
                const Vector xy(x.begin(), x.begin() + ny);
                const Vector xz(x.begin() + ny, x.begin() + ny + 2 * nu);
                const Vector xp(x.begin() + ny + 2 * nu, x.end());

                Vector ry = model.hy(xy);
                for (std::size_t i = 0; i < ny; ++i) ry[i] += theta.theta_y[i] * xy[i];
                axpy(1.0, model.kt_apply(xp), ry);

                Vector rz = model.hz(xz);
                for (std::size_t i = 0; i < nu; ++i) {
                    rz[i] += theta.theta_w[i] * xz[i];
                    rz[nu + i] += theta.theta_v[i] * xz[nu + i];
                }
                axpy(-1.0, model.bt_apply(xp), rz);

                Vector rp = model.k_apply(xy);
                axpy(-1.0, model.b_apply(xz), rp);

                out.resize(x.size());
                std::copy(ry.begin(), ry.end(), out.begin());
                std::copy(rz.begin(), rz.end(), out.begin() + ny);
                std::copy(rp.begin(), rp.end(), out.begin() + ny + 2 * nu);
            }};
}

IpmResult ipm_solve(const IpmModel& model, const IpmParams& params)
{
    if (!(params.alpha0 > 0.0 && params.alpha0 < 1.0))
        throw std::invalid_argument("ipm_solve: alpha0 must lie in (0,1)");
    if (!(params.sigma > 0.0 && params.sigma < 1.0))
        throw std::invalid_argument("ipm_solve: sigma must lie in (0,1)");
    if (params.mu0 <= 0.0) throw std::invalid_argument("ipm_solve: mu0 must be positive");

    IpmState state = initial_point(model, params);
    IpmResiduals res = ipm_residuals(model, state);

    IpmStats stats;
    stats.iterations.push_back({0, state.mu, res.norm_xp, res.norm_xd, res.norm_xc, 0, 0.0, true});

    // complementarity is converged when the pairwise products sit below the
    // tolerance, i.e. the barrier itself is below eps_c (products track mu on
    // the central path) and the centrality deviation is below eps_c too
    auto converged = [&](const IpmResiduals& r) {
        return r.norm_xp <= params.eps_p && r.norm_xd <= params.eps_d &&
               r.norm_xc <= params.eps_c && state.mu <= params.eps_c;
    };

    double mu = params.mu0;
    long total_lin = 0;
    while (!converged(res) && state.k < params.max_iterations) {
        mu = params.sigma * mu;

        const ThetaBlocks theta = build_theta(model, state);
        Vector r1, r2, r3;
        newton_rhs(model, state, mu, r1, r2, r3);
        NewtonSolveResult nsol = model.newton_solve(theta, r1, r2, r3, params);

        const MultiplierSteps msteps = recover_multiplier_steps(model, state, nsol.dy, nsol.dz, mu);
        const auto [ap, ad] = step_lengths(model, state, nsol.dy, nsol.dz, msteps, params.alpha0);

        axpy(ap, nsol.dy, state.y);
        axpy(ap, nsol.dz, state.z);
        axpy(ad, nsol.dp, state.p);
        axpy(ad, msteps.dlam_za, state.lam_za);
        axpy(ad, msteps.dlam_zb, state.lam_zb);
        if (model.has_state_bounds()) {
            axpy(ad, msteps.dlam_ya, state.lam_ya);
            axpy(ad, msteps.dlam_yb, state.lam_yb);
            check_interior(state.y, *model.y_a, *model.y_b, "y");
            check_positive(state.lam_ya, "lam_ya");
            check_positive(state.lam_yb, "lam_yb");
        }
        check_interior(state.z, model.z_a, model.z_b, "z");
        check_positive(state.lam_za, "lam_za");
        check_positive(state.lam_zb, "lam_zb");

        state.mu = mu;
        ++state.k;

        res = ipm_residuals(model, state);
        total_lin += nsol.report.iterations;
        stats.iterations.push_back({state.k, mu, res.norm_xp, res.norm_xd, res.norm_xc,
                                    nsol.report.iterations, nsol.report.relative_residual,
                                    nsol.report.converged});
    }

    stats.converged = converged(res);
    stats.nli = state.k;
    stats.av_li = state.k > 0 ? static_cast<double>(total_lin) / state.k : 0.0;

    IpmResult out;
    out.u = recover_control(state.z);
    out.sparsity = sparsity_metric(out.u);
    out.state = std::move(state);
    out.stats = std::move(stats);
    return out;
}

namespace {

// matvec-only part of the steady model; shared by the public maker and the
// Newton solver (which needs a saddle operator without a nested solver)
IpmModel steady_matvecs(const QpProblem& qp, std::shared_ptr<SparseMatrix> lt)
{
    IpmModel m;
    m.ny = qp.n;
    m.nu = qp.n;
    m.np = qp.n;

    const QpProblem* q = &qp;
    m.hy = [q](const Vector& v) { return q->M_obs.apply(v); };
    m.hz = [q](const Vector& z) {
        Vector out = q->apply_Mtilde(z);
        scale(q->alpha, out);
        return out;
    };
    m.k_apply = [q](const Vector& v) { return q->L.apply(v); };
    m.kt_apply = [lt](const Vector& v) { return lt->apply(v); };
    m.b_apply = [q](const Vector& z) { return q->apply_Mbar(z); };
    m.bt_apply = [q](const Vector& p) { return q->apply_Mbar_t(p); };

    m.y_d = qp.y_d;
    m.beta_grad = qp.beta_gradient();
    m.f = qp.f;
    m.z_a = qp.z_a;
    m.z_b = qp.z_b;
    m.y_a = qp.y_a;
    m.y_b = qp.y_b;
    return m;
}

NewtonSolveResult split_solution(const Vector& x, std::size_t ny, std::size_t nu, SolveReport rep)
{
    NewtonSolveResult r;
    r.dy.assign(x.begin(), x.begin() + ny);
    r.dz.assign(x.begin() + ny, x.begin() + ny + 2 * nu);
    r.dp.assign(x.begin() + ny + 2 * nu, x.end());
    r.report = std::move(rep);
    return r;
}

} // namespace

IpmModel make_steady_model(const QpProblem& qp)
{
    auto lt = std::make_shared<SparseMatrix>(qp.L.transposed());
    IpmModel m = steady_matvecs(qp, lt);

    const QpProblem* q = &qp;
    m.newton_solve = [q, lt](const ThetaBlocks& theta, const Vector& r1, const Vector& r2,
                             const Vector& r3, const IpmParams& params) {
        const IpmModel mv = steady_matvecs(*q, lt);
        const LinearOperator A = make_saddle_operator(mv, theta);
        const Vector rhs = concat(concat(r1, r2), r3);
        const std::size_t n = static_cast<std::size_t>(q->n);

        Vector x;
        SolveReport rep;
        MgOptions mg;
        mg.level = q->level;
        mg.cycles = params.mg_cycles;
        mg.pre = params.mg_pre;
        mg.post = params.mg_post;
        mg.rediscretize = q->op_assembler;
        switch (params.solver) {
        case SolverKind::dense: {
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
            break;
        }
        case SolverKind::minres_pd: {
            if (q->partial_observation)
                throw std::invalid_argument("minres-pd requires a nonsingular (1,1) block");
            Block11Approx b11(q->M_obs, theta.theta_y, q->M, q->alpha, theta.theta_w,
                              theta.theta_v, InnerSolve::multigrid, params.cheb_steps);
            SchurApprox shat(q->L, q->M_obs, theta.theta_y,
                             build_m_hat(q->alpha, q->M.diagonal_vector(), theta.theta_w,
                                         theta.theta_v, theta.theta_y),
                             InnerSolve::multigrid, mg);
            BlockDiagPrecond pd(std::move(b11), std::move(shat));
            const LinearOperator P{A.n, [&pd](const Vector& r, Vector& out) { out = pd.apply(r); }};
            rep = minres(A, P, rhs, x, params.linear_tol, params.linear_maxit);
            break;
        }
        case SolverKind::gmres_pt: {
            if (q->partial_observation)
                throw std::invalid_argument("gmres-pt requires a nonsingular (1,1) block");
            Block11Approx b11(q->M_obs, theta.theta_y, q->M, q->alpha, theta.theta_w,
                              theta.theta_v, InnerSolve::multigrid, params.cheb_steps);
            SchurApprox shat(q->L, q->M_obs, theta.theta_y,
                             build_m_hat(q->alpha, q->M.diagonal_vector(), theta.theta_w,
                                         theta.theta_v, theta.theta_y),
                             InnerSolve::multigrid, mg);
            BlockTriPrecond pt(std::move(b11), std::move(shat), q->L, q->M);
            const LinearOperator P{A.n, [&pt](const Vector& r, Vector& out) { out = pt.apply(r); }};
            rep = gmres(A, P, rhs, x, params.linear_tol, params.linear_maxit);
            break;
        }
        case SolverKind::gmres_ppi: {
            PermutedPrecond pp(q->L, q->M_obs, q->M, q->alpha, theta, InnerSolve::multigrid,
                               mg);
            const LinearOperator P{A.n, [&pp](const Vector& r, Vector& out) { out = pp.apply(r); }};
            rep = gmres(A, P, rhs, x, params.linear_tol, params.linear_maxit);
            break;
        }
        }
        return split_solution(x, n, n, std::move(rep));
    };
    return m;
}

ThetaBlocks build_theta(const QpProblem& qp, const IpmState& state)
{
    auto lt = std::make_shared<SparseMatrix>();
    return build_theta(steady_matvecs(qp, lt), state);
}

IpmResiduals ipm_residuals(const QpProblem& qp, const IpmState& state)
{
    auto lt = std::make_shared<SparseMatrix>(qp.L.transposed());
    return ipm_residuals(steady_matvecs(qp, lt), state);
}

} // namespace optcon
