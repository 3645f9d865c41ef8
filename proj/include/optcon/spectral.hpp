// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_SPECTRAL_HPP
#define OPTCON_SPECTRAL_HPP

#include "optcon/ipm.hpp"
#include "optcon/precond.hpp"

#include <string>

namespace optcon {

// Desk-scale certification of the preconditioner spectra. Everything here
// densifies and uses exact inner solves: it checks the analysis, not the
// iterative machinery.

struct IdealPrecondReport {
    Vector p1_eigenvalues; // sorted
    int minres_iterations = 0;
    int gmres_iterations = 0;
    double max_set_distance = 0.0; // distance of p1 spectrum to {1, (1+-sqrt5)/2}
    bool pass = false;
};

/// Ideal block-diagonal/triangular preconditioners on a small Newton system:
/// the P1-preconditioned spectrum is {1, (1+-sqrt5)/2} and Krylov converges
/// in 3 (minres) / 2 (gmres) iterations.
IdealPrecondReport verify_ideal_preconditioners(int ell = 3, double alpha = 1e-2,
                                                unsigned seed = 1234);

struct IntervalReport {
    double bound_lo = 0.0, bound_hi = 0.0; // proven interval
    double min_eig = 0.0, max_eig = 0.0;   // observed extremes over samples
    int samples = 0;
    bool pass = false;
};

/// Containment of the diagonalized control-block pencil spectrum in
/// [min(lmin(Dm^-1 M),1), max(lmax(Dm^-1 M),1)] for random positive Theta.
IntervalReport verify_theorem_interval(int ell, int num_samples,
                                       const std::vector<double>& alphas, bool lumped,
                                       unsigned seed = 4321);

struct SchurBoundReport {
    double min_eig = 0.0; // min over all samples
    double max_eig = 0.0;
    int samples = 0;
    bool pass = false; // lumped: min >= 1/2 - 1e-10
};

/// Lower bound of lambda(S_hat^{-1} S) with exact inner solves.
SchurBoundReport verify_schur_bound(int ell, int num_samples,
                                    const std::vector<double>& alphas, bool lumped,
                                    unsigned seed = 777);

struct ClusterReport {
    double min_eig = 0.0, max_eig = 0.0;
    bool pass = false;
};

/// The active-set limit (theta_w^-1 + theta_v^-1 -> inf, theta_y -> 0):
/// lambda([(L + a^{-1/2} M) M^{-1} (...)']^{-1} [L M^{-1} L' + a^{-1} M])
/// lies in [1/2, 1] for any alpha when L + L' is positive semidefinite.
ClusterReport verify_clustering_limit(int ell, PdeKind pde, double alpha);

struct ScatterReport {
    Vector eigenvalues; // sorted spectrum of S_hat^{-1} S at the final iterate
    double fraction_clustered = 0.0; // within [0.45, 1.05]
    int nli = 0;
};

/// Spectrum of the matching-preconditioned Schur complement at the final
/// interior point iterate; optionally dumped as CSV (index, value, tag),
/// with the barrier diagonals to a companion theta CSV when requested.
ScatterReport eigenvalue_scatter(PdeKind pde, int ell, double alpha, double beta,
                                 double sigma, const std::string& csv_path = "",
                                 const std::string& tag = "",
                                 const std::string& theta_csv_path = "");

/// Barrier-diagonal diagnostics (index, theta_y, theta_w, theta_v).
void dump_theta_csv(const ThetaBlocks& theta, const std::string& path);

/// Dense matching approximation (L+Mhat)(M+Theta_y)^{-1}(L+Mhat)' at
/// verification scale.
SparseMatrix schur_matching_dense(const SparseMatrix& L, const SparseMatrix& M,
                                  const ThetaBlocks& theta, double alpha);

} // namespace optcon

#endif // OPTCON_SPECTRAL_HPP
