// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_CHEBYSHEV_HPP
#define OPTCON_CHEBYSHEV_HPP

#include "optcon/sparse.hpp"

namespace optcon {

/// Chebyshev semi-iteration for scale*M + diag(extra), M a Q1 mass matrix
/// (or a diagonal lumped one) and extra >= 0. The Jacobi-preconditioned
/// spectrum sits in [1/4, 9/4] for 2D Q1 regardless of the added diagonal
/// (the diagonal only pulls eigenvalues toward 1), so the acceleration
/// interval is fixed. A fixed step count with zero initial guess makes the
/// map b -> x linear and symmetric positive definite, which is what lets it
/// serve as a preconditioner block.
class ChebyshevSemiIteration {
public:
    ChebyshevSemiIteration(const SparseMatrix& M, double scale, Vector extra_diag,
                           int steps = 20);

    Vector apply(const Vector& b) const;
    void apply(const Vector& b, Vector& x) const;

    int steps() const { return steps_; }

private:
    const SparseMatrix* m_;
    double scale_;
    Vector extra_;
    Vector inv_diag_;
    int steps_;
    double omega_;
    double rho_;

    void matvec(const Vector& x, Vector& y) const;
};

} // namespace optcon

#endif // OPTCON_CHEBYSHEV_HPP
