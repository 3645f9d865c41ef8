// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_GRID_HPP
#define OPTCON_GRID_HPP

#include <cstdint>
#include <stdexcept>

namespace optcon {

/// Uniform square grid on (0,1)^2 with mesh size h = 2^-level and
/// homogeneous-Dirichlet elimination: only interior nodes carry unknowns.
/// Interior nodes are indexed lexicographically, x fastest.
struct Grid {
    int level;

    explicit Grid(int level_) : level(level_)
    {
        if (level < 1 || level > 14) throw std::invalid_argument("Grid: level out of range");
    }

    double h() const { return 1.0 / static_cast<double>(std::int64_t(1) << level); }
    /// interior nodes per direction
    std::int32_t nx() const { return static_cast<std::int32_t>((std::int64_t(1) << level) - 1); }
    /// total interior nodes, (2^level - 1)^2
    std::int32_t num_nodes() const { return nx() * nx(); }
    /// elements per direction
    std::int32_t ne() const { return static_cast<std::int32_t>(std::int64_t(1) << level); }

    /// interior node index from 1-based vertex coordinates (gx, gy in [1, nx])
    std::int32_t node_index(std::int32_t gx, std::int32_t gy) const
    {
        return (gy - 1) * nx() + (gx - 1);
    }
    double node_x(std::int32_t idx) const { return (idx % nx() + 1) * h(); }
    double node_y(std::int32_t idx) const { return (idx / nx() + 1) * h(); }
};

/// Axis-aligned observation box inside the domain.
struct ObservationRegion {
    double a1, b1, a2, b2;

    ObservationRegion(double a1_, double b1_, double a2_, double b2_)
        : a1(a1_), b1(b1_), a2(a2_), b2(b2_)
    {
        if (a1 > b1 || a2 > b2) throw std::invalid_argument("ObservationRegion: empty box");
        if (b1 < 0.0 || a1 > 1.0 || b2 < 0.0 || a2 > 1.0)
            throw std::invalid_argument("ObservationRegion: box outside domain");
    }

    static ObservationRegion full() { return {0.0, 1.0, 0.0, 1.0}; }

    bool contains_box(double x0, double x1, double y0, double y1, double tol = 1e-12) const
    {
        return x0 >= a1 - tol && x1 <= b1 + tol && y0 >= a2 - tol && y1 <= b2 + tol;
    }
};

} // namespace optcon

#endif // OPTCON_GRID_HPP
