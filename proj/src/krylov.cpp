// SPDX-License-Identifier: Apache-2.0

#include "optcon/krylov.hpp"

#include <cmath>
#include <stdexcept>

namespace optcon {

LinearOperator LinearOperator::from_matrix(const SparseMatrix& A)
{
    if (A.rows() != A.cols()) throw std::invalid_argument("LinearOperator: matrix not square");
    return {A.rows(), [&A](const Vector& x, Vector& y) { A.apply(x.data(), y.data()); }};
}

LinearOperator LinearOperator::identity(std::int32_t n)
{
    return {n, [](const Vector& x, Vector& y) { y = x; }};
}

namespace {

double true_relative_residual(const LinearOperator& A, const Vector& b, const Vector& x,
                              double bnorm, Vector& scratch)
{
    A.apply_fn(x, scratch);
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double d = b[i] - scratch[i];
        s += d * d;
    }
    return std::sqrt(s) / bnorm;
}

} // namespace

SolveReport minres(const LinearOperator& A, const LinearOperator& pinv, const Vector& b,
                   Vector& x, double tol, int maxit)
{
    const std::size_t n = b.size();
    SolveReport rep;
    x.assign(n, 0.0);

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        rep.converged = true;
        return rep;
    }

    Vector v_prev(n, 0.0), v = b;
    Vector z = pinv.apply(v);
    double gamma_sq = dot(z, v);
    if (!(gamma_sq > 0.0)) {
        rep.breakdown = true;
        rep.message = "minres: preconditioner not positive definite";
        rep.relative_residual = 1.0;
        return rep;
    }
    double gamma = std::sqrt(gamma_sq);
    double gamma_prev = 1.0;
    double eta = gamma;
    double c_prev = 1.0, c = 1.0, s_prev = 0.0, s = 0.0;
    Vector w_prev(n, 0.0), w(n, 0.0);
    Vector scratch(n);

    for (int j = 1; j <= maxit; ++j) {
        scale(1.0 / gamma, z);
        Vector az(n);
        A.apply_fn(z, az);
        const double delta = dot(az, z);

        Vector v_next = az;
        axpy(-delta / gamma, v, v_next);
        if (j > 1) axpy(-gamma / gamma_prev, v_prev, v_next);

        Vector z_next = pinv.apply(v_next);
        const double gn_sq = dot(z_next, v_next);
        if (gn_sq < 0.0) {
            rep.breakdown = true;
            rep.message = "minres: preconditioner lost definiteness";
            rep.iterations = j;
            rep.relative_residual = true_relative_residual(A, b, x, bnorm, scratch);
            return rep;
        }
        const double gamma_next = std::sqrt(gn_sq);

        const double a0 = c * delta - c_prev * s * gamma;
        const double a1 = std::sqrt(a0 * a0 + gamma_next * gamma_next);
        const double a2 = s * delta + c_prev * c * gamma;
        const double a3 = s_prev * gamma;
        if (a1 == 0.0) {
            rep.iterations = j;
            rep.relative_residual = true_relative_residual(A, b, x, bnorm, scratch);
            rep.converged = rep.relative_residual <= tol;
            return rep;
        }
        const double c_next = a0 / a1;
        const double s_next = gamma_next / a1;

        Vector w_next = z;
        axpy(-a3, w_prev, w_next);
        axpy(-a2, w, w_next);
        scale(1.0 / a1, w_next);

        axpy(c_next * eta, w_next, x);
        eta = -s_next * eta;

        v_prev.swap(v);
        v.swap(v_next);
        z.swap(z_next);
        gamma_prev = gamma;
        gamma = gamma_next;
        w_prev.swap(w);
        w.swap(w_next);
        c_prev = c;
        c = c_next;
        s_prev = s;
        s = s_next;

        rep.iterations = j;
        rep.precond_residual_history.push_back(std::abs(eta));
        rep.relative_residual = true_relative_residual(A, b, x, bnorm, scratch);
        if (rep.relative_residual <= tol) {
            rep.converged = true;
            return rep;
        }
        if (gamma == 0.0) break; // Krylov space exhausted
    }
    rep.message = rep.converged ? "" : "minres: max iterations reached";
    return rep;
}

SolveReport gmres(const LinearOperator& A, const LinearOperator& pinv, const Vector& b,
                  Vector& x, double tol, int maxit)
{
    const std::size_t n = b.size();
    SolveReport rep;
    x.assign(n, 0.0);

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        rep.converged = true;
        return rep;
    }

    std::vector<Vector> V; // Krylov basis of A*P^{-1}
    std::vector<Vector> Z; // preconditioned basis, x = Z*y
    std::vector<std::vector<double>> H;
    std::vector<double> cs, sn, g;

    V.push_back(scaled(1.0 / bnorm, b));
    g.push_back(bnorm);
    Vector scratch(n);

    for (int j = 0; j < maxit; ++j) {
        Z.push_back(pinv.apply(V[static_cast<std::size_t>(j)]));
        Vector w(n);
        A.apply_fn(Z.back(), w);

        std::vector<double> h(static_cast<std::size_t>(j) + 2, 0.0);
        for (int i = 0; i <= j; ++i) {
            h[i] = dot(w, V[static_cast<std::size_t>(i)]);
            axpy(-h[i], V[static_cast<std::size_t>(i)], w);
        }
        const double hnext = norm2(w);
        h[static_cast<std::size_t>(j) + 1] = hnext;

        for (int i = 0; i < j; ++i) {
            const double t = cs[i] * h[i] + sn[i] * h[i + 1];
            h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
            h[i] = t;
        }
        const double r = std::hypot(h[static_cast<std::size_t>(j)], hnext);
        if (r == 0.0) {
            rep.message = "gmres: zero pivot in Hessenberg triangularization";
            break;
        }
        cs.push_back(h[static_cast<std::size_t>(j)] / r);
        sn.push_back(hnext / r);
        h[static_cast<std::size_t>(j)] = r;
        g.push_back(-sn.back() * g.back());
        g[static_cast<std::size_t>(j)] *= cs.back();
        H.push_back(std::move(h));

        const bool basis_exhausted = hnext <= 1e-300;
        if (!basis_exhausted) V.push_back(scaled(1.0 / hnext, w));

        // assemble the current iterate and check the true residual
        const int m = j + 1;
        std::vector<double> y(static_cast<std::size_t>(m));
        for (int i = m - 1; i >= 0; --i) {
            double s = g[static_cast<std::size_t>(i)];
            for (int k2 = i + 1; k2 < m; ++k2) s -= H[static_cast<std::size_t>(k2)][i] * y[k2];
            y[static_cast<std::size_t>(i)] = s / H[static_cast<std::size_t>(i)][i];
        }
        x.assign(n, 0.0);
        for (int i = 0; i < m; ++i) axpy(y[static_cast<std::size_t>(i)], Z[static_cast<std::size_t>(i)], x);

        rep.iterations = m;
        rep.relative_residual = true_relative_residual(A, b, x, bnorm, scratch);
        if (rep.relative_residual <= tol) {
            rep.converged = true;
            return rep;
        }
        if (basis_exhausted) {
            rep.message = "gmres: Krylov space exhausted before tolerance";
            return rep;
        }
    }
    if (rep.message.empty()) rep.message = "gmres: max iterations reached";
    return rep;
}

} // namespace optcon
