// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_IPM_HPP
#define OPTCON_IPM_HPP

#include "optcon/krylov.hpp"
#include "optcon/precond.hpp"
#include "optcon/qp.hpp"

#include <functional>
#include <optional>

namespace optcon {

enum class SolverKind { gmres_pt, minres_pd, gmres_ppi, dense };

struct IpmParams {
    double alpha0 = 0.995;      // fraction-to-boundary factor
    double sigma = 0.2;         // barrier reduction
    double eps_p = 1e-6;
    double eps_d = 1e-6;
    double eps_c = 1e-6;
    double mu0 = 1.0;
    int max_iterations = 100;
    double linear_tol = 1e-10;
    int linear_maxit = 200;
    int cheb_steps = 20;
    int mg_cycles = 3;
    int mg_pre = 5;
    int mg_post = 5;
    SolverKind solver = SolverKind::gmres_pt;
};

/// Primal-dual iterate. State-bound multipliers are empty when the problem
/// has no state box.
struct IpmState {
    Vector y, z, p;
    Vector lam_ya, lam_yb;
    Vector lam_za, lam_zb;
    double mu = 1.0;
    int k = 0;
};

struct IterationRecord {
    int k = 0;
    double mu = 0.0;
    double norm_xp = 0.0;
    double norm_xd = 0.0;
    double norm_xc = 0.0;
    int lin_iters = 0;
    double lin_relres = 0.0;
    bool lin_converged = true;
};

struct IpmStats {
    std::vector<IterationRecord> iterations; // [0] is the initial point
    bool converged = false;
    int nli = 0;        // Newton (interior point) iterations
    double av_li = 0.0; // average Krylov iterations per Newton solve
};

struct NewtonSolveResult {
    Vector dy, dz, dp;
    SolveReport report;
};

/// Problem-flavor abstraction consumed by the interior point loop: block
/// matvecs of the reduced saddle system, the bound data, and a Newton-system
/// solver that rebuilds its preconditioner from the current Theta blocks.
struct IpmModel {
    std::int32_t ny = 0; // state block size
    std::int32_t nu = 0; // control block size (z has 2*nu entries)
    std::int32_t np = 0; // adjoint block size (= ny)

    std::function<Vector(const Vector&)> hy;       // observation Hessian block
    std::function<Vector(const Vector&)> hz;       // alpha * Mtilde-type block
    std::function<Vector(const Vector&)> k_apply;  // constraint operator K
    std::function<Vector(const Vector&)> kt_apply; // K transpose
    std::function<Vector(const Vector&)> b_apply;  // control coupling B
    std::function<Vector(const Vector&)> bt_apply; // B transpose

    Vector y_d;
    Vector beta_grad; // gradient of the weighted-l1 term, length 2*nu
    Vector f;         // constraint right-hand side
    Vector z_a, z_b;
    std::optional<Vector> y_a, y_b;

    std::function<NewtonSolveResult(const ThetaBlocks&, const Vector& r1, const Vector& r2,
                                    const Vector& r3, const IpmParams&)>
        newton_solve;

    bool has_state_bounds() const { return y_a.has_value(); }
};

struct IpmResiduals {
    Vector xp, xd, xc;
    double norm_xp, norm_xd, norm_xc;
};

struct IpmResult {
    IpmState state;
    Vector u; // recovered control w - v
    SparsityReport sparsity;
    IpmStats stats;
};

struct MultiplierSteps {
    Vector dlam_ya, dlam_yb, dlam_za, dlam_zb;
};

/// Barrier diagonal blocks from the current iterate; throws when strict
/// interiority is lost.
ThetaBlocks build_theta(const IpmModel& model, const IpmState& state);

/// Primal/dual infeasibilities and complementarity gap at the iterate,
/// using the state's barrier parameter. Euclidean norms, unscaled.
IpmResiduals ipm_residuals(const IpmModel& model, const IpmState& state);

/// Right-hand side of the reduced Newton system at barrier mu.
void newton_rhs(const IpmModel& model, const IpmState& state, double mu, Vector& r1,
                Vector& r2, Vector& r3);

/// Closed-form multiplier steps from the primal Newton direction.
MultiplierSteps recover_multiplier_steps(const IpmModel& model, const IpmState& state,
                                         const Vector& dy, const Vector& dz, double mu);

/// Fraction-to-boundary step lengths: alpha = min(1, alpha0 * ratio).
std::pair<double, double> step_lengths(const IpmModel& model, const IpmState& state,
                                       const Vector& dy, const Vector& dz,
                                       const MultiplierSteps& msteps, double alpha0);

IpmState initial_point(const IpmModel& model, const IpmParams& params);

IpmResult ipm_solve(const IpmModel& model, const IpmParams& params);

/// Reduced Newton saddle operator [[Hy+Ty, 0, K'],[0, Hz+Tz, -B'],[K, -B, 0]]
/// acting on [y; z; p].
LinearOperator make_saddle_operator(const IpmModel& model, const ThetaBlocks& theta);

/// Steady-problem model over an assembled QP. The QP must outlive the model.
IpmModel make_steady_model(const QpProblem& qp);

// Convenience wrappers on the steady model (used heavily by tests).
ThetaBlocks build_theta(const QpProblem& qp, const IpmState& state);
IpmResiduals ipm_residuals(const QpProblem& qp, const IpmState& state);

} // namespace optcon

#endif // OPTCON_IPM_HPP
