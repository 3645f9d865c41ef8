// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_FEM_HPP
#define OPTCON_FEM_HPP

#include "optcon/grid.hpp"
#include "optcon/sparse.hpp"

#include <array>
#include <functional>

namespace optcon {

using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<std::array<double, 2>(double, double)>;

enum class MassVariant { consistent, lumped };

/// Q1 mass matrix; the lumped variant is diagonal with D_ii = integral of
/// basis function i (equal to the row sums of the consistent matrix).
SparseMatrix assemble_mass(const Grid& grid, MassVariant variant);

/// Q1 stiffness matrix for -Laplace with homogeneous Dirichlet elimination.
SparseMatrix assemble_stiffness_poisson(const Grid& grid);

/// Q1 convection-diffusion operator -eps*Laplace + wind.grad, with SUPG
/// streamline stabilization (delta_K = h/(2|w|_K) * max(0, 1 - 1/Pe_K)).
SparseMatrix assemble_convdiff(const Grid& grid, double eps, const VectorField& wind,
                               bool supg = true);

/// Recirculating wind of the convection-diffusion benchmark.
VectorField default_wind();

/// Partial-observation mass matrix: element contributions only from elements
/// fully contained in the region. Singular whenever the region misses part
/// of the domain.
SparseMatrix assemble_partial_mass(const Grid& grid, const ObservationRegion& region);

/// Nodal interpolation at interior nodes, lexicographic order.
Vector interpolate(const Grid& grid, const ScalarField& f);

/// RHS lifting for nonzero Dirichlet data g on the Poisson operator:
/// returns -L_ib * g restricted to interior nodes.
Vector poisson_dirichlet_lifting(const Grid& grid, const ScalarField& g);

} // namespace optcon

#endif // OPTCON_FEM_HPP
