// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_KRYLOV_HPP
#define OPTCON_KRYLOV_HPP

#include "optcon/sparse.hpp"

#include <functional>
#include <string>

namespace optcon {

/// Matrix-free linear operator; matvecs must be deterministic and linear.
struct LinearOperator {
    std::int32_t n = 0;
    std::function<void(const Vector&, Vector&)> apply_fn;

    Vector apply(const Vector& x) const
    {
        Vector y(static_cast<std::size_t>(n));
        apply_fn(x, y);
        return y;
    }

    static LinearOperator from_matrix(const SparseMatrix& A);
    static LinearOperator identity(std::int32_t n);
};

struct SolveReport {
    int iterations = 0;
    /// recomputed ||b - Ax|| / ||b|| at exit
    double relative_residual = 0.0;
    bool converged = false;
    bool breakdown = false;
    std::string message;
    /// preconditioned residual norms per iteration (minres)
    std::vector<double> precond_residual_history;
};

/// Preconditioned MINRES for symmetric A with SPD preconditioner action
/// pinv(r) ~= P^{-1} r. Stops on the true (unpreconditioned) relative
/// residual, recomputed every iteration.
SolveReport minres(const LinearOperator& A, const LinearOperator& pinv, const Vector& b,
                   Vector& x, double tol = 1e-10, int maxit = 200);

/// Full (non-restarted) right-preconditioned GMRES. The recurrence monitors
/// the unpreconditioned residual directly; the report carries the recomputed
/// value at exit.
SolveReport gmres(const LinearOperator& A, const LinearOperator& pinv, const Vector& b,
                  Vector& x, double tol = 1e-10, int maxit = 200);

} // namespace optcon

#endif // OPTCON_KRYLOV_HPP
