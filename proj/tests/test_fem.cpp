// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "optcon/dense_eig.hpp"
#include "optcon/fem.hpp"
#include "support/test_support.hpp"

#include <cmath>

using namespace optcon;

TEST_CASE("lumped mass equals row sums of consistent mass")
{
    for (int ell = 2; ell <= 5; ++ell) {
        Grid g(ell);
        auto M = assemble_mass(g, MassVariant::consistent);
        auto D = assemble_mass(g, MassVariant::lumped);
        CHECK(D.is_diagonal());
        const auto rs = M.row_sums();
        const auto d = D.diagonal_vector();
        for (std::int32_t i = 0; i < g.num_nodes(); ++i) {
            CHECK(std::abs(rs[i] - d[i]) <= 1e-14);
            CHECK(d[i] > 0.0);
        }
    }
}

TEST_CASE("total interior mass matches symbolic integration oracle")
{
    // oracle: 1'M1 = (integral of the interior partition-of-unity sum)^2.
    // In 1D the sum is 1 - (left half-hat) - (right half-hat), with exact
    // integrals h/2 and h/3 for the hat and its square, giving 1 - 4h/3.
    for (int ell = 2; ell <= 4; ++ell) {
        Grid g(ell);
        const double h = g.h();
        const double oracle_1d = 1.0 - 2.0 * (h / 2.0) - 2.0 * (h / 2.0) + 2.0 * (h / 3.0);
        const double oracle = oracle_1d * oracle_1d;

        auto M = assemble_mass(g, MassVariant::consistent);
        Vector ones(static_cast<std::size_t>(g.num_nodes()), 1.0);
        CHECK(dot(ones, M.apply(ones)) == doctest::Approx(oracle).epsilon(1e-13));
    }
}

TEST_CASE("poisson stiffness annihilates constants away from the boundary")
{
    Grid g(4);
    auto L = assemble_stiffness_poisson(g);
    Vector ones(static_cast<std::size_t>(g.num_nodes()), 1.0);
    const auto r = L.apply(ones);
    for (std::int32_t i = 0; i < g.num_nodes(); ++i) {
        const std::int32_t ix = i % g.nx(), iy = i / g.nx();
        const bool deep = ix >= 1 && ix < g.nx() - 1 && iy >= 1 && iy < g.nx() - 1;
        if (deep) CHECK(std::abs(r[i]) <= 1e-13);
    }
}

TEST_CASE("poisson stiffness is symmetric positive definite with the expected smallest eigenvalue")
{
    Grid g(3);
    auto L = assemble_stiffness_poisson(g);
    CHECK(L.is_symmetric());

    const auto ev = dense_eig_sym(L);
    CHECK(ev[0] > 0.0);

    // oracle: tensor structure L = K1 (x) M1 + M1 (x) K1 with tridiagonal
    // 1D factors whose spectra are closed-form
    const int n = g.nx();
    const double h = g.h();
    double min_tensor = 1e300;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            const double ki = 4.0 / h * std::pow(std::sin(i * M_PI * h / 2.0), 2);
            const double kj = 4.0 / h * std::pow(std::sin(j * M_PI * h / 2.0), 2);
            const double mi = h / 6.0 * (4.0 + 2.0 * std::cos(i * M_PI * h));
            const double mj = h / 6.0 * (4.0 + 2.0 * std::cos(j * M_PI * h));
            min_tensor = std::min(min_tensor, ki * mj + mi * kj);
        }
    CHECK(ev[0] == doctest::Approx(min_tensor).epsilon(1e-10));
    // leading-order behavior 2*pi^2*h^2 (mass scaling absorbs the h^2)
    CHECK(ev[0] == doctest::Approx(2.0 * M_PI * M_PI * h * h).epsilon(0.15));
}

TEST_CASE("poisson positive definiteness holds on levels up to 4")
{
    for (int ell = 3; ell <= 4; ++ell) {
        const auto ev = dense_eig_sym(assemble_stiffness_poisson(Grid(ell)));
        CHECK(ev[0] > 0.0);
    }
}

TEST_CASE("convection-diffusion with zero wind reduces to scaled poisson")
{
    Grid g(3);
    const double eps = 0.37;
    auto L = assemble_convdiff(g, eps, [](double, double) -> std::array<double, 2> {
        return {0.0, 0.0};
    });
    auto K = assemble_stiffness_poisson(g);
    K.scale_values(eps);
    const double scale = K.max_abs();
    for (std::int32_t i = 0; i < g.num_nodes(); ++i)
        for (std::int32_t k = L.row_ptr()[i]; k < L.row_ptr()[i + 1]; ++k)
            CHECK(std::abs(L.values()[k] - K.coeff(i, L.col_idx()[k])) <= 1e-15 * scale);
}

TEST_CASE("convection-diffusion rejects non-positive diffusion")
{
    CHECK_THROWS_AS((void)assemble_convdiff(Grid(3), 0.0, default_wind()), std::invalid_argument);
}

TEST_CASE("divergence-free wind: convection is dominated by its skew part, symmetric part stays PSD")
{
    Grid g(3);
    const double eps = 1e-1;
    auto L = assemble_convdiff(g, eps, default_wind(), false);
    auto K = assemble_stiffness_poisson(g);
    K.scale_values(eps);
    auto N = sparse_add(1.0, L, -1.0, K); // pure Galerkin convection

    const Eigen::MatrixXd Nd = testing::to_dense(N);
    const Eigen::MatrixXd sym = 0.5 * (Nd + Nd.transpose());
    const Eigen::MatrixXd skew = 0.5 * (Nd - Nd.transpose());
    CHECK(skew.norm() > 100.0 * sym.norm());

    for (int ell = 3; ell <= 4; ++ell) {
        auto Lfull = assemble_convdiff(Grid(ell), eps, default_wind(), true);
        const Eigen::MatrixXd Ld = testing::to_dense(Lfull);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Ld + Ld.transpose()),
                                                          Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues()(0) >= -1e-12);
    }
}

TEST_CASE("supg changes the operator only when wind is nonzero")
{
    Grid g(3);
    auto zero_wind = [](double, double) -> std::array<double, 2> { return {0.0, 0.0}; };
    auto A0 = assemble_convdiff(g, 1e-2, zero_wind, false);
    auto A1 = assemble_convdiff(g, 1e-2, zero_wind, true);
    CHECK(A0.values() == A1.values());

    auto B0 = assemble_convdiff(g, 1e-2, default_wind(), false);
    auto B1 = assemble_convdiff(g, 1e-2, default_wind(), true);
    CHECK((testing::to_dense(B0) - testing::to_dense(B1)).norm() > 1e-8);
}

TEST_CASE("partial mass: full region equals consistent mass, sliver vanishes")
{
    Grid g(3);
    auto M = assemble_mass(g, MassVariant::consistent);
    auto Mfull = assemble_partial_mass(g, ObservationRegion::full());
    CHECK((testing::to_dense(Mfull) - testing::to_dense(M)).norm() == 0.0);

    auto Msliver = assemble_partial_mass(g, {0.3, 0.3 + 1e-9, 0.0, 1.0});
    CHECK(Msliver.max_abs() == 0.0);
}

TEST_CASE("partial mass left half: trace matches element-counting oracle")
{
    for (int ell = 3; ell <= 5; ++ell) {
        Grid g(ell);
        const double h = g.h();
        auto M = assemble_partial_mass(g, {0.0, 0.5, 0.0, 1.0});

        // oracle: each observed element contributes h^2/9 to each interior
        // corner's diagonal entry
        double trace_oracle = 0.0;
        for (std::int32_t ey = 0; ey < g.ne(); ++ey)
            for (std::int32_t ex = 0; ex < g.ne(); ++ex) {
                if ((ex + 1) * h > 0.5 + 1e-12) continue;
                for (std::int32_t gx : {ex, ex + 1})
                    for (std::int32_t gy : {ey, ey + 1})
                        if (gx >= 1 && gx <= g.nx() && gy >= 1 && gy <= g.nx())
                            trace_oracle += h * h / 9.0;
            }
        double trace = 0.0;
        for (double v : M.diagonal_vector()) trace += v;
        CHECK(trace == doctest::Approx(trace_oracle).epsilon(1e-13));

        auto Mfull = assemble_mass(g, MassVariant::consistent);
        double trace_full = 0.0;
        for (double v : Mfull.diagonal_vector()) trace_full += v;
        CHECK(std::abs(trace / trace_full - 0.5) <= 2.0 * h);
    }
}

TEST_CASE("partial mass is a principal-pattern restriction of the full mass")
{
    Grid g(4);
    const double h = g.h();
    ObservationRegion region{0.25, 0.75, 0.25, 0.75};
    auto Ms = assemble_partial_mass(g, region);
    auto M = assemble_mass(g, MassVariant::consistent);

    // entries between nodes all of whose shared elements are observed match M
    for (std::int32_t i = 0; i < g.num_nodes(); ++i) {
        const double x = g.node_x(i), y = g.node_y(i);
        const bool interior_of_region = x >= region.a1 + h && x <= region.b1 - h &&
                                        y >= region.a2 + h && y <= region.b2 - h;
        if (!interior_of_region) continue;
        for (std::int32_t k = M.row_ptr()[i]; k < M.row_ptr()[i + 1]; ++k)
            CHECK(Ms.coeff(i, M.col_idx()[k]) == doctest::Approx(M.values()[k]).epsilon(1e-14));
    }
}

TEST_CASE("observation region validates its box")
{
    CHECK_THROWS_AS(ObservationRegion(1.5, 2.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ObservationRegion(0.5, 0.2, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("nodal interpolation")
{
    Grid g(3);
    const double h = g.h();

    auto c = interpolate(g, [](double, double) { return 4.25; });
    for (double v : c) CHECK(v == 4.25);

    auto x1 = interpolate(g, [](double x, double) { return x; });
    CHECK(x1[0] == doctest::Approx(h));

    auto yd = interpolate(g, [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); });
    for (std::int32_t i = 0; i < g.num_nodes(); ++i)
        CHECK(yd[i] == doctest::Approx(std::sin(M_PI * g.node_x(i)) * std::sin(M_PI * g.node_y(i))));
}

TEST_CASE("dirichlet lifting reproduces a harmonic bilinear function exactly")
{
    Grid g(3);
    auto L = assemble_stiffness_poisson(g);
    auto g_fun = [](double x, double y) { return x + 0.5 * y; };
    const auto rhs = poisson_dirichlet_lifting(g, g_fun);
    const auto y = testing::dense_solve(L, rhs);
    for (std::int32_t i = 0; i < g.num_nodes(); ++i)
        CHECK(y[i] == doctest::Approx(g_fun(g.node_x(i), g.node_y(i))).epsilon(1e-12));
}
