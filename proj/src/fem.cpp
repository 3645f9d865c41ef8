// SPDX-License-Identifier: Apache-2.0

#include "optcon/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace optcon {

namespace {

// 2x2 Gauss rule on [-1,1]^2: exact for the Q1 mass and stiffness forms on
// axis-aligned squares.
constexpr double kGauss = 0.57735026918962576; // 1/sqrt(3)
constexpr std::array<std::array<double, 2>, 4> kQuadPts = {{
    {-kGauss, -kGauss}, {kGauss, -kGauss}, {kGauss, kGauss}, {-kGauss, kGauss}}};

// Q1 shape functions on the reference square, corner order SW, SE, NE, NW.
std::array<double, 4> shape(double xi, double eta)
{
    return {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
            0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
}

std::array<std::array<double, 2>, 4> shape_grad_ref(double xi, double eta)
{
    return {{{-0.25 * (1 - eta), -0.25 * (1 - xi)},
             {0.25 * (1 - eta), -0.25 * (1 + xi)},
             {0.25 * (1 + eta), 0.25 * (1 + xi)},
             {-0.25 * (1 + eta), 0.25 * (1 - xi)}}};
}

using ElementMatrix = std::array<std::array<double, 4>, 4>;

ElementMatrix element_mass(double h)
{
    ElementMatrix m{};
    const double detj = h * h / 4.0;
    for (const auto& q : kQuadPts) {
        const auto N = shape(q[0], q[1]);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m[i][j] += N[i] * N[j] * detj;
    }
    return m;
}

ElementMatrix element_stiffness(double h)
{
    ElementMatrix k{};
    const double detj = h * h / 4.0;
    const double scale = 2.0 / h; // reference-to-physical gradient factor
    for (const auto& q : kQuadPts) {
        const auto G = shape_grad_ref(q[0], q[1]);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                k[i][j] += scale * scale * (G[i][0] * G[j][0] + G[i][1] * G[j][1]) * detj;
    }
    return k;
}

ElementMatrix element_convdiff(const Grid& grid, std::int32_t ex, std::int32_t ey, double eps,
                               const VectorField& wind, bool supg)
{
    const double h = grid.h();
    const double x0 = ex * h;
    const double y0 = ey * h;
    const double detj = h * h / 4.0;
    const double scale = 2.0 / h;

    ElementMatrix a = element_stiffness(h);
    for (auto& row : a)
        for (auto& v : row) v *= eps;

    const auto wc = wind(x0 + 0.5 * h, y0 + 0.5 * h);
    const double wnorm = std::hypot(wc[0], wc[1]);
    double delta = 0.0;
    if (supg && wnorm > 1e-14) {
        const double peclet = wnorm * h / (2.0 * eps);
        delta = h / (2.0 * wnorm) * std::max(0.0, 1.0 - 1.0 / peclet);
    }

    for (const auto& q : kQuadPts) {
        const auto N = shape(q[0], q[1]);
        const auto G = shape_grad_ref(q[0], q[1]);
        const double xq = x0 + 0.5 * h * (q[0] + 1.0);
        const double yq = y0 + 0.5 * h * (q[1] + 1.0);
        const auto w = wind(xq, yq);
        std::array<double, 4> wgrad{};
        for (int i = 0; i < 4; ++i)
            wgrad[i] = scale * (w[0] * G[i][0] + w[1] * G[i][1]);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                a[i][j] += wgrad[j] * N[i] * detj;
                // streamline term; the strong diffusion residual vanishes for
                // Q1 on rectangles, so only w.grad survives in the residual
                if (delta > 0.0) a[i][j] += delta * wgrad[j] * wgrad[i] * detj;
            }
    }
    return a;
}

// Gather the four corner vertices of element (ex, ey); vertex coordinates are
// 0..ne in each direction, interior iff strictly inside.
struct ElementNodes {
    std::array<std::int32_t, 4> gx, gy;
};

ElementNodes element_nodes(std::int32_t ex, std::int32_t ey)
{
    return {{ex, ex + 1, ex + 1, ex}, {ey, ey, ey + 1, ey + 1}};
}

bool is_interior(const Grid& grid, std::int32_t gx, std::int32_t gy)
{
    return gx >= 1 && gx <= grid.nx() && gy >= 1 && gy <= grid.nx();
}

template <typename ElementFn>
SparseMatrix assemble(const Grid& grid, ElementFn&& element)
{
    const std::int32_t ne = grid.ne();
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(ne) * ne * 16);
    for (std::int32_t ey = 0; ey < ne; ++ey)
        for (std::int32_t ex = 0; ex < ne; ++ex) {
            const ElementMatrix a = element(ex, ey);
            const auto nodes = element_nodes(ex, ey);
            for (int i = 0; i < 4; ++i) {
                if (!is_interior(grid, nodes.gx[i], nodes.gy[i])) continue;
                const std::int32_t gi = grid.node_index(nodes.gx[i], nodes.gy[i]);
                for (int j = 0; j < 4; ++j) {
                    if (!is_interior(grid, nodes.gx[j], nodes.gy[j])) continue;
                    trip.push_back({gi, grid.node_index(nodes.gx[j], nodes.gy[j]), a[i][j]});
                }
            }
        }
    return SparseMatrix::from_triplets(grid.num_nodes(), grid.num_nodes(), std::move(trip));
}

} // namespace

SparseMatrix assemble_mass(const Grid& grid, MassVariant variant)
{
    const ElementMatrix m = element_mass(grid.h());
    SparseMatrix consistent = assemble(grid, [&](std::int32_t, std::int32_t) { return m; });
    if (variant == MassVariant::consistent) return consistent;
    return SparseMatrix::diagonal(consistent.row_sums());
}

SparseMatrix assemble_stiffness_poisson(const Grid& grid)
{
    const ElementMatrix k = element_stiffness(grid.h());
    return assemble(grid, [&](std::int32_t, std::int32_t) { return k; });
}

SparseMatrix assemble_convdiff(const Grid& grid, double eps, const VectorField& wind, bool supg)
{
    if (eps <= 0.0) throw std::invalid_argument("assemble_convdiff: eps must be positive");
    return assemble(grid, [&](std::int32_t ex, std::int32_t ey) {
        return element_convdiff(grid, ex, ey, eps, wind, supg);
    });
}

VectorField default_wind()
{
    return [](double x1, double x2) -> std::array<double, 2> {
        return {2.0 * x2 * (1.0 - x1 * x1), -2.0 * x1 * (1.0 - x2 * x2)};
    };
}

SparseMatrix assemble_partial_mass(const Grid& grid, const ObservationRegion& region)
{
    const double h = grid.h();
    const ElementMatrix m = element_mass(h);
    const ElementMatrix zero{};
    return assemble(grid, [&](std::int32_t ex, std::int32_t ey) {
        const bool observed = region.contains_box(ex * h, (ex + 1) * h, ey * h, (ey + 1) * h);
        return observed ? m : zero;
    });
}

Vector interpolate(const Grid& grid, const ScalarField& f)
{
    Vector v(static_cast<std::size_t>(grid.num_nodes()));
    for (std::int32_t i = 0; i < grid.num_nodes(); ++i) {
        v[i] = f(grid.node_x(i), grid.node_y(i));
        if (!std::isfinite(v[i])) throw std::runtime_error("interpolate: non-finite value");
    }
    return v;
}

Vector poisson_dirichlet_lifting(const Grid& grid, const ScalarField& g)
{
    const double h = grid.h();
    const ElementMatrix k = element_stiffness(h);
    Vector rhs(static_cast<std::size_t>(grid.num_nodes()), 0.0);
    const std::int32_t ne = grid.ne();
    for (std::int32_t ey = 0; ey < ne; ++ey)
        for (std::int32_t ex = 0; ex < ne; ++ex) {
            const auto nodes = element_nodes(ex, ey);
            for (int i = 0; i < 4; ++i) {
                if (!is_interior(grid, nodes.gx[i], nodes.gy[i])) continue;
                const std::int32_t gi = grid.node_index(nodes.gx[i], nodes.gy[i]);
                for (int j = 0; j < 4; ++j) {
                    if (is_interior(grid, nodes.gx[j], nodes.gy[j])) continue;
                    const double gval = g(nodes.gx[j] * h, nodes.gy[j] * h);
                    rhs[gi] -= k[i][j] * gval;
                }
            }
        }
    return rhs;
}

} // namespace optcon
