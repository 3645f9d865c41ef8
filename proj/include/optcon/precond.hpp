// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_PRECOND_HPP
#define OPTCON_PRECOND_HPP

#include "optcon/chebyshev.hpp"
#include "optcon/multigrid.hpp"
#include "optcon/sparse.hpp"

#include <optional>

namespace optcon {

/// Diagonal barrier blocks of the current Newton system. theta_y is zero
/// (but sized) when no state bounds are present.
struct ThetaBlocks {
    Vector theta_y;
    Vector theta_w;
    Vector theta_v;
};

/// Exact inverse application of [[A, B1],[B2, C]] with diagonal blocks given
/// as vectors, via the Schur-complement block-inverse identity.
void block_2x2_inverse_apply(const Vector& a, const Vector& b1, const Vector& b2,
                             const Vector& c, const Vector& r1, const Vector& r2,
                             Vector& x1, Vector& x2);

/// Diagonal of the matching term: (1/a)d - (1/a^2)(1/tw + 1/tv + 1/(a d))^{-1},
/// computed in the cancellation-free equivalent form d^2 s / (a d s + 1) with
/// s = 1/tw + 1/tv. Entrywise nonnegative for positive inputs.
Vector matching_bracket(double alpha, const Vector& d_M, const Vector& theta_w,
                        const Vector& theta_v);

/// M-hat = sqrt(bracket) .* sqrt(d_M + theta_y).
Vector build_m_hat(double alpha, const Vector& d_M, const Vector& theta_w,
                   const Vector& theta_v, const Vector& theta_y);

/// Dense (verification-scale) Schur complement in closed form:
/// S = L (M+Th_y)^{-1} L' + (1/a) M - (1/a^2)(Th_w^{-1}+Th_v^{-1}+(1/a)M^{-1})^{-1}.
SparseMatrix schur_exact(const SparseMatrix& L, const SparseMatrix& M,
                         const ThetaBlocks& theta, double alpha);

enum class InnerSolve { multigrid, dense };

/// Matching approximation S-hat = (L+Mhat)(M+Th_y)^{-1}(L+Mhat)' applied in
/// inverse form: solve(L+Mhat), multiply by M+Th_y, solve((L+Mhat)').
class SchurApprox {
public:
    SchurApprox(const SparseMatrix& L, const SparseMatrix& M_mid, Vector theta_y,
                Vector m_hat, InnerSolve mode, const MgOptions& mg);

    Vector apply_inverse(const Vector& r) const;
    const SparseMatrix& factor() const { return factor_; }

private:
    SparseMatrix factor_;   // L + diag(m_hat)
    SparseMatrix factor_t_; // its transpose
    const SparseMatrix* m_mid_;
    Vector theta_y_;
    std::optional<MgHierarchy> mg_, mg_t_;
    std::optional<DenseFactor> lu_, lu_t_;
    MgOptions opts_;
};

/// (1,1)-block approximation: Chebyshev semi-iteration for M+Th_y and the
/// exact inverse of the diagonalized 2x2 control block
/// [[a*D_M+Th_w, -a*D_M], [-a*D_M, a*D_M+Th_v]].
class Block11Approx {
public:
    Block11Approx(const SparseMatrix& M_state, const Vector& theta_y,
                  const SparseMatrix& M_control, double alpha, const Vector& theta_w,
                  const Vector& theta_v, InnerSolve mode = InnerSolve::multigrid,
                  int cheb_steps = 20);

    Vector apply_state(const Vector& r) const;
    void apply_control(const Vector& r1, const Vector& r2, Vector& x1, Vector& x2) const;
    const Vector& control_a() const { return a_; }
    const Vector& control_b() const { return b_; }
    const Vector& control_c() const { return c_; }

private:
    std::optional<ChebyshevSemiIteration> cheb_;
    std::optional<DenseFactor> state_lu_; // exact mode
    Vector a_, b_, c_;
};

/// Block diagonal preconditioner action on [r_y; r_w; r_v; r_p]; SPD, for
/// use inside MINRES.
class BlockDiagPrecond {
public:
    BlockDiagPrecond(Block11Approx block11, SchurApprox schur)
        : block11_(std::move(block11)), schur_(std::move(schur))
    {
    }
    Vector apply(const Vector& r) const;

private:
    Block11Approx block11_;
    SchurApprox schur_;
};

/// Block triangular preconditioner: same diagonal blocks with the coupling
/// row [L, -M, M, -S_hat]; for use inside GMRES.
class BlockTriPrecond {
public:
    BlockTriPrecond(Block11Approx block11, SchurApprox schur, const SparseMatrix& L,
                    const SparseMatrix& M_coupling)
        : block11_(std::move(block11)), schur_(std::move(schur)), L_(&L), M_(&M_coupling)
    {
    }
    Vector apply(const Vector& r) const;

private:
    Block11Approx block11_;
    SchurApprox schur_;
    const SparseMatrix* L_;
    const SparseMatrix* M_;
};

/// Matching approximation of the permuted Schur complement
/// S_Pi ~= (L' + M_l) L^{-1} (L + M_r), M_l = M+Th_y, M_r the diagonal
/// matching bracket.
class SPiHatOperator {
public:
    SPiHatOperator(const SparseMatrix& L, const SparseMatrix& M_obs, const Vector& theta_y,
                   Vector m_r, InnerSolve mode, const MgOptions& mg);

    Vector apply_inverse(const Vector& r) const;
    const SparseMatrix& left_factor() const { return left_; }
    const SparseMatrix& right_factor() const { return right_; }

private:
    const SparseMatrix* L_;
    SparseMatrix left_;  // L' + M_obs + diag(theta_y)
    SparseMatrix right_; // L + diag(m_r)
    std::optional<MgHierarchy> mg_left_, mg_right_;
    std::optional<DenseFactor> lu_left_, lu_right_;
    MgOptions opts_;
};

/// Permuted preconditioner for singular (1,1) blocks (partial observation).
/// Application on w = [w1; w2; w3] (y, z, p blocks):
///   v2 = (a*Dt_M+Th_z)^{-1} w2,  v1 = L^{-1}(Mbar v2 + w3),
///   v3 = S_Pi_hat^{-1}((M+Th_y) v1 - w1).
class PermutedPrecond {
public:
    PermutedPrecond(const SparseMatrix& L, const SparseMatrix& M_obs,
                    const SparseMatrix& M_control, double alpha, const ThetaBlocks& theta,
                    InnerSolve mode, const MgOptions& mg);

    Vector apply(const Vector& r) const;

private:
    const SparseMatrix* L_;
    const SparseMatrix* m_obs_;
    const SparseMatrix* m_control_;
    Vector theta_y_;
    Vector a_, b_, c_; // diagonalized control block
    SPiHatOperator spi_;
    std::optional<MgHierarchy> mg_L_;
    std::optional<DenseFactor> lu_L_;
    MgOptions opts_;
};

} // namespace optcon

#endif // OPTCON_PRECOND_HPP
