// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_MULTIGRID_HPP
#define OPTCON_MULTIGRID_HPP

#include "optcon/dense_eig.hpp"
#include "optcon/sparse.hpp"

#include <functional>
#include <optional>

namespace optcon {

/// Bilinear (Q1) prolongation from level-1 to level on the interior-node
/// grids; restriction is its transpose, so Galerkin coarsening reproduces
/// the directly assembled coarse FE operators.
SparseMatrix bilinear_prolongation(int fine_level);

/// Per-level base-operator assembler for operators whose Galerkin coarse
/// versions lose stability (convection-diffusion: SUPG must be rebuilt at
/// each level's own mesh size).
using LevelAssembler = std::function<SparseMatrix(int level)>;

struct MgOptions {
    int level = 0; // fine grid level; matrix dimension (2^level-1)^2
    int cycles = 3;
    int pre = 5;
    int post = 5;
    /// When set, coarse matrices are base(level_c) plus the Galerkin-coarsened
    /// remainder A_f - base(level_f); otherwise plain Galerkin R A P.
    LevelAssembler rediscretize;
};

/// Geometric multigrid hierarchy for grid-structured matrices (L + diagonal
/// perturbations). Coarsening down to level 2, which is solved exactly by a
/// dense factorization. Smoothing: forward Gauss-Seidel sweeps before the
/// coarse correction, backward sweeps after, which keeps the V-cycle
/// symmetric for symmetric matrices.
class MgHierarchy {
public:
    /// Plain Galerkin coarsening (the right choice for symmetric operators).
    static MgHierarchy build(const SparseMatrix& fine, int level);
    static MgHierarchy build(const SparseMatrix& fine, const MgOptions& opts);

    /// One V-cycle improving x in place.
    void v_cycle(const Vector& rhs, Vector& x, int pre = 5, int post = 5) const;

    /// Fixed linear map: `cycles` V-cycles from a zero initial guess.
    /// Throws on residual growth across cycles (divergence).
    Vector solve(const Vector& rhs, int cycles = 3, int pre = 5, int post = 5) const;

    /// number of prolongation operators (= fine level - 2)
    int depth() const { return static_cast<int>(prolong_.size()); }
    const SparseMatrix& level_matrix(std::size_t k) const { return matrices_[k]; }

private:
    std::vector<SparseMatrix> matrices_; // [0] = finest ... coarsest (level 2)
    std::vector<SparseMatrix> prolong_;  // prolong_[k]: level k+1 -> level k
    std::vector<SparseMatrix> restrict_; // transposes of prolong_
    std::optional<DenseFactor> coarse_;
    int fine_level_ = 0;

    void cycle(std::size_t k, const Vector& rhs, Vector& x, int pre, int post) const;
};

/// Forward (ascending rows) or backward Gauss-Seidel sweep on x.
void gauss_seidel_sweep(const SparseMatrix& A, const Vector& b, Vector& x, bool forward);

} // namespace optcon

#endif // OPTCON_MULTIGRID_HPP
