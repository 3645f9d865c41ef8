// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_QP_HPP
#define OPTCON_QP_HPP

#include "optcon/fem.hpp"
#include "optcon/grid.hpp"
#include "optcon/sparse.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>

namespace optcon {

enum class PdeKind { poisson, convdiff, heat };

/// Continuous problem description with nodally interpolated data.
struct ControlProblem {
    PdeKind pde = PdeKind::poisson;
    double eps = 1e-1; // convection-diffusion diffusion coefficient
    double tau = 0.04; // heat time-step
    double horizon = 1.0;
    double alpha = 1e-2;
    double beta = 1e-2;
    Vector y_d;
    Vector f;
    Vector u_a, u_b;
    std::optional<Vector> y_a, y_b;
    std::optional<ObservationRegion> observation;

    void validate() const;
};

/// Split-variable bounds: z = [w; v] >= 0 with
/// z_a = [max(u_a,0); -min(u_b,0)], z_b = [max(u_b,0); -min(u_a,0)].
std::pair<Vector, Vector> split_bounds(const Vector& u_a, const Vector& u_b);

/// u = w - v
Vector recover_control(const Vector& z);

struct SparsityReport {
    double percent_below_threshold;
    double l1_norm;
};
SparsityReport sparsity_metric(const Vector& u, double threshold = 1e-2);

/// The discretized split-variable quadratic program
///   min 1/2 (y-y_d)' M_obs (y-y_d) + a/2 z' Mt z + b 1' Dbar z
///   s.t. L y - Mbar z = f,  z_a <= z <= z_b  (and optional state box),
/// with Mt = [M -M; -M M], Mbar = [M -M], Dbar = [D D] kept implicit.
struct QpProblem {
    std::int32_t n = 0;
    int level = 0;        // grid level (multigrid hierarchies key off it)
    SparseMatrix M;       // control-space mass
    SparseMatrix M_obs;   // observation mass (M, or singular partial mass)
    bool partial_observation = false;
    SparseMatrix L;
    Vector lumped_d; // diagonal of the lumped matrix D (basis integrals)
    Vector y_d;
    Vector f;
    Vector z_a, z_b;
    std::optional<Vector> y_a, y_b;
    double alpha = 0.0;
    double beta = 0.0;
    /// per-level reassembly of L for multigrid (set for convection-diffusion,
    /// where Galerkin coarsening loses the SUPG stabilization)
    std::function<SparseMatrix(int)> op_assembler;

    Vector apply_Mtilde(const Vector& z) const;     // Mt z
    Vector apply_Mbar(const Vector& z) const;       // Mbar z = M(w - v)
    Vector apply_Mbar_t(const Vector& p) const;     // [M p; -M p]
    Vector beta_gradient() const;                   // b * Dbar' 1 = b [d; d]
    double objective(const Vector& y, const Vector& z) const;
    bool has_state_bounds() const { return y_a.has_value(); }
};

/// Assemble the QP from a problem description on a grid. Optional lifting
/// folds nonzero Dirichlet data into the constraint right-hand side.
/// Rejects the heat PDE (space-time assembly lives elsewhere).
QpProblem build_qp(const ControlProblem& problem, const Grid& grid,
                   const Vector* lifting = nullptr);

/// Plain-text "key = value" problem/config files.
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

} // namespace optcon

#endif // OPTCON_QP_HPP
