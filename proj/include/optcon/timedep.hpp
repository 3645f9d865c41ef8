// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_TIMEDEP_HPP
#define OPTCON_TIMEDEP_HPP

#include "optcon/ipm.hpp"

namespace optcon {

/// Backward-Euler space-time system for the heat control problem. The
/// constraint operator is block lower bidiagonal with diagonal blocks M+tau*L
/// and subdiagonal -M; the cost carries per-step quadrature weights.
struct SpaceTimeSystem {
    int level = 0;
    std::int32_t n = 0; // spatial unknowns per step
    int nt = 0;         // time steps, nt * tau = horizon
    double tau = 0.0;
    SparseMatrix M, L;
    SparseMatrix Mtl; // M + tau*L
    Vector lumped_d;  // spatial lumped-mass diagonal
    Vector qweights;  // cost quadrature weights per step (rectangle: all 1)

    Vector y_d; // stacked n*nt
    Vector f;   // stacked constraint right-hand side
    Vector z_a, z_b;
    double alpha = 0.0;
    double beta = 0.0;

    std::int64_t dim_y() const { return static_cast<std::int64_t>(n) * nt; }

    Vector apply_bidiag(const Vector& y) const;   // (M+tau L) y_k - M y_{k-1}
    Vector apply_bidiag_t(const Vector& y) const; // transpose
    /// tau * blkdiag(w_k M): the observation block without Theta
    Vector apply_cost_mass(const Vector& y) const;
    /// alpha*tau*Mtilde_c z (block form of the split-control Hessian)
    Vector apply_control_hessian(const Vector& z) const;
    Vector apply_coupling(const Vector& z) const;   // tau*Mbar z
    Vector apply_coupling_t(const Vector& p) const; // tau*Mbar' p
    Vector beta_gradient() const;
};

enum class TimeQuadrature { rectangle, trapezoid };

/// Assemble from spatial matrices (verification entry point; lumped-mass
/// studies pass the diagonal M here).
SpaceTimeSystem assemble_spacetime_matrices(SparseMatrix M, SparseMatrix L, int level,
                                            double tau, double horizon, double alpha,
                                            double beta,
                                            TimeQuadrature quad = TimeQuadrature::rectangle);

/// Assemble the heat-control space-time QP from a problem description.
/// Requires pde == heat, control constraints only.
SpaceTimeSystem assemble_spacetime(const ControlProblem& problem, const Grid& grid,
                                   TimeQuadrature quad = TimeQuadrature::rectangle);

/// Diagonal of the time-dependent matching matrix M-hat, stacked per step:
/// sqrt(tau^2 dM^2 s / (alpha tau d_c s + 1)) * sqrt(tau d_c + theta_y),
/// s = 1/theta_w + 1/theta_v, d_c = w_k dM.
Vector time_m_hat(const SpaceTimeSystem& sys, const ThetaBlocks& theta);

/// Matching Schur approximation (Ldt + Mhat)(tau Mc + Theta_y)^{-1}(...)'
/// applied in inverse form by block bidiagonal forward/backward substitution
/// with one multigrid hierarchy (or dense factor) per diagonal block.
class TimeSchurApprox {
public:
    TimeSchurApprox(const SpaceTimeSystem& sys, const ThetaBlocks& theta, InnerSolve mode,
                    const MgOptions& mg);
    Vector apply_inverse(const Vector& r) const;
    const Vector& m_hat() const { return m_hat_; }

private:
    const SpaceTimeSystem* sys_;
    Vector theta_y_;
    Vector m_hat_;
    std::vector<SparseMatrix> blocks_; // M + tau L + diag(m_hat_k)
    std::vector<MgHierarchy> mg_;
    std::vector<DenseFactor> lu_;
    MgOptions opts_;

    Vector solve_block(std::size_t k, const Vector& rhs) const;
};

/// IPM model over the space-time QP (block-triangular preconditioned GMRES).
IpmModel make_spacetime_model(const SpaceTimeSystem& sys);

struct HeatSolveResult {
    IpmResult ipm;
    SpaceTimeSystem system;
};

HeatSolveResult solve_heat_control(const ControlProblem& problem, const Grid& grid,
                                   const IpmParams& params,
                                   TimeQuadrature quad = TimeQuadrature::rectangle);

} // namespace optcon

#endif // OPTCON_TIMEDEP_HPP
