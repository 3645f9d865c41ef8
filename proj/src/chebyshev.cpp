// SPDX-License-Identifier: Apache-2.0

#include "optcon/chebyshev.hpp"

#include <stdexcept>

namespace optcon {

ChebyshevSemiIteration::ChebyshevSemiIteration(const SparseMatrix& M, double scale,
                                               Vector extra_diag, int steps)
    : m_(&M), scale_(scale), extra_(std::move(extra_diag)), steps_(steps)
{
    if (M.rows() != M.cols()) throw std::invalid_argument("chebyshev: matrix not square");
    if (static_cast<std::int32_t>(extra_.size()) != M.rows())
        throw std::invalid_argument("chebyshev: diagonal size mismatch");
    if (steps_ < 1) throw std::invalid_argument("chebyshev: steps must be >= 1");
    for (double v : extra_)
        if (v < 0.0) throw std::invalid_argument("chebyshev: extra diagonal must be nonnegative");

    const Vector d = M.diagonal_vector();
    inv_diag_.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double di = scale_ * d[i] + extra_[i];
        if (di <= 0.0) throw std::invalid_argument("chebyshev: nonpositive diagonal");
        inv_diag_[i] = 1.0 / di;
    }

    // eigenvalue interval for the Jacobi-preconditioned matrix
    double lmin = 0.25, lmax = 2.25;
    if (M.is_diagonal()) { lmin = lmax = 1.0; }
    omega_ = 2.0 / (lmin + lmax);
    rho_ = (lmax - lmin) / (lmax + lmin);
}

void ChebyshevSemiIteration::matvec(const Vector& x, Vector& y) const
{
    m_->apply(x.data(), y.data());
    if (scale_ != 1.0) scale(scale_, y);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += extra_[i] * x[i];
}

Vector ChebyshevSemiIteration::apply(const Vector& b) const
{
    Vector x(b.size());
    apply(b, x);
    return x;
}

void ChebyshevSemiIteration::apply(const Vector& b, Vector& x) const
{
    const std::size_t n = b.size();
    if (static_cast<std::int32_t>(n) != m_->rows())
        throw std::invalid_argument("chebyshev: rhs size mismatch");

    Vector g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = omega_ * inv_diag_[i] * b[i];

    // two-term Chebyshev recurrence on the damped Jacobi iteration
    Vector prev(n, 0.0);
    Vector cur = g;
    Vector az(n), next(n);
    double w = 1.0;
    for (int step = 2; step <= steps_; ++step) {
        w = (step == 2) ? 1.0 / (1.0 - 0.5 * rho_ * rho_)
                        : 1.0 / (1.0 - 0.25 * rho_ * rho_ * w);
        matvec(cur, az);
        for (std::size_t i = 0; i < n; ++i) {
            const double s_cur = cur[i] - omega_ * inv_diag_[i] * az[i];
            next[i] = w * (s_cur + g[i] - prev[i]) + prev[i];
        }
        prev.swap(cur);
        cur.swap(next);
    }
    x = cur;
}

} // namespace optcon
