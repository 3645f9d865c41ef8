// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "optcon/dense_eig.hpp"
#include "optcon/qp.hpp"
#include "support/test_support.hpp"

#include <cstdio>
#include <random>

using namespace optcon;

namespace {

ControlProblem poisson_problem(const Grid& g, double alpha, double beta, double ua, double ub)
{
    ControlProblem p;
    p.pde = PdeKind::poisson;
    p.alpha = alpha;
    p.beta = beta;
    p.y_d = interpolate(g, [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); });
    p.f = Vector(static_cast<std::size_t>(g.num_nodes()), 0.0);
    p.u_a = Vector(static_cast<std::size_t>(g.num_nodes()), ua);
    p.u_b = Vector(static_cast<std::size_t>(g.num_nodes()), ub);
    return p;
}

} // namespace

TEST_CASE("split_bounds on the benchmark box")
{
    auto [za, zb] = split_bounds({-2.0}, {1.5});
    CHECK(za == Vector{0.0, 0.0});
    CHECK(zb == Vector{1.5, 2.0});
}

TEST_CASE("split_bounds pinned and one-sided cases")
{
    auto [za0, zb0] = split_bounds({0.0}, {0.0});
    CHECK(za0 == Vector{0.0, 0.0});
    CHECK(zb0 == Vector{0.0, 0.0});

    auto [za1, zb1] = split_bounds({-1.0}, {0.0});
    CHECK(za1 == Vector{0.0, 0.0});
    CHECK(zb1 == Vector{0.0, 1.0});

    CHECK_THROWS_AS(split_bounds({1.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("split bounds are nonnegative and ordered for random boxes")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> lo(-5.0, 0.0), hi(0.0, 5.0);
    Vector ua(50), ub(50);
    for (int i = 0; i < 50; ++i) {
        ua[i] = lo(rng);
        ub[i] = hi(rng);
    }
    auto [za, zb] = split_bounds(ua, ub);
    for (std::size_t i = 0; i < za.size(); ++i) {
        CHECK(za[i] >= 0.0);
        CHECK(za[i] <= zb[i]);
    }
}

TEST_CASE("recover_control")
{
    CHECK(recover_control({1, 0, 0, 2}) == Vector{1.0, -2.0});
    CHECK(recover_control({0, 0}) == Vector{0.0});
}

TEST_CASE("sparsity metric on the zero control")
{
    auto rep = sparsity_metric(Vector(100, 0.0));
    CHECK(rep.percent_below_threshold == 100.0);
    CHECK(rep.l1_norm == 0.0);
}

TEST_CASE("weighted l1 of the canonical split equals the lumped-weighted norm")
{
    Grid g(3);
    auto p = poisson_problem(g, 1e-2, 0.1, -2.0, 1.5);
    auto qp = build_qp(p, g);

    std::mt19937_64 rng(5);
    const std::size_t n = static_cast<std::size_t>(qp.n);
    const Vector u = testing::random_vector(n, rng, -2.0, 1.5);
    Vector z(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = std::max(u[i], 0.0);
        z[n + i] = std::max(-u[i], 0.0);
    }
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        weighted += qp.beta * qp.lumped_d[i] * (z[i] + z[n + i]);
    double du_l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) du_l1 += std::abs(qp.lumped_d[i] * u[i]);
    CHECK(weighted == doctest::Approx(qp.beta * du_l1).epsilon(1e-15));
}

TEST_CASE("split quadratic form matches the dense block oracle")
{
    Grid g(3);
    auto p = poisson_problem(g, 0.37, 1e-2, -2.0, 1.5);
    auto qp = build_qp(p, g);

    std::mt19937_64 rng(7);
    const std::size_t n = static_cast<std::size_t>(qp.n);
    const Vector z = testing::random_vector(2 * n, rng);

    const double quad = dot(z, qp.apply_Mtilde(z));

    // oracle: assemble the 2n x 2n block matrix densely
    const Eigen::MatrixXd Md = testing::to_dense(qp.M);
    Eigen::MatrixXd Mt(2 * n, 2 * n);
    Mt << Md, -Md, -Md, Md;
    const Eigen::VectorXd zd = testing::to_eigen(z);
    CHECK(quad == doctest::Approx(zd.dot(Mt * zd)).epsilon(1e-12));

    // and the definition through u = w - v
    Vector diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = z[i] - z[n + i];
    CHECK(quad == doctest::Approx(dot(diff, qp.M.apply(diff))).epsilon(1e-12));
}

TEST_CASE("objective with beta 0 and v 0 reduces to the smooth objective")
{
    Grid g(3);
    auto p = poisson_problem(g, 1e-1, 0.0, -2.0, 1.5);
    auto qp = build_qp(p, g);

    std::mt19937_64 rng(9);
    const std::size_t n = static_cast<std::size_t>(qp.n);
    const Vector y = testing::random_vector(n, rng);
    Vector z(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) z[i] = std::abs(testing::random_vector(1, rng)[0]);

    Vector w(z.begin(), z.begin() + n);
    Vector ydiff = y;
    axpy(-1.0, qp.y_d, ydiff);
    const double expected =
        0.5 * dot(ydiff, qp.M.apply(ydiff)) + 0.5 * qp.alpha * dot(w, qp.M.apply(w));
    CHECK(qp.objective(y, z) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("qp invariants: bounds ordered, Mtilde positive semidefinite")
{
    Grid g(3);
    auto p = poisson_problem(g, 1e-2, 1e-2, -2.0, 1.5);
    auto qp = build_qp(p, g);

    for (std::size_t i = 0; i < qp.z_a.size(); ++i) {
        CHECK(qp.z_a[i] >= 0.0);
        CHECK(qp.z_a[i] < qp.z_b[i]); // strict after pinned-component inflation
    }

    const std::size_t n = static_cast<std::size_t>(qp.n);
    const Eigen::MatrixXd Md = testing::to_dense(qp.M);
    Eigen::MatrixXd Mt(2 * n, 2 * n);
    Mt << Md, -Md, -Md, Md;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Mt, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(0) >= -1e-12);
}

TEST_CASE("pinned control components are opened by the inflation rule")
{
    Grid g(3);
    auto p = poisson_problem(g, 1e-2, 1e-2, -1.0, 0.0); // v side pinned at zero
    auto qp = build_qp(p, g);
    for (std::size_t i = 0; i < qp.z_a.size(); ++i) CHECK(qp.z_b[i] - qp.z_a[i] >= 1e-12);
}

TEST_CASE("the clamped point is feasible: L y = Mbar z + f is solvable")
{
    Grid g(3);
    auto p = poisson_problem(g, 1e-2, 1e-2, -2.0, 1.5);
    auto qp = build_qp(p, g);

    const std::size_t nz = qp.z_a.size();
    Vector z(nz);
    for (std::size_t i = 0; i < nz; ++i) z[i] = std::min(std::max(0.0, qp.z_a[i]), qp.z_b[i]);
    Vector rhs = qp.apply_Mbar(z);
    axpy(1.0, qp.f, rhs);
    const Vector y = testing::dense_solve(qp.L, rhs);
    CHECK(all_finite(y));
    const Vector check = qp.L.apply(y);
    for (std::size_t i = 0; i < check.size(); ++i)
        CHECK(check[i] == doctest::Approx(rhs[i]).epsilon(1e-10));
}

TEST_CASE("bound sign conventions are enforced")
{
    Grid g(3);
    auto p = poisson_problem(g, 1e-2, 1e-2, 0.5, 1.5); // lower bound positive: invalid
    CHECK_THROWS_AS((void)build_qp(p, g), std::invalid_argument);

    auto p2 = poisson_problem(g, -1.0, 1e-2, -2.0, 1.5);
    CHECK_THROWS_AS((void)build_qp(p2, g), std::invalid_argument);
}

TEST_CASE("heat problems are rejected by the steady builder")
{
    Grid g(3);
    auto p = poisson_problem(g, 1e-2, 1e-2, -2.0, 1.5);
    p.pde = PdeKind::heat;
    CHECK_THROWS_AS((void)build_qp(p, g), std::invalid_argument);
}

TEST_CASE("partial observation produces a singular observation mass")
{
    Grid g(3);
    auto p = poisson_problem(g, 1e-2, 1e-2, -2.0, 1.5);
    p.observation = ObservationRegion{0.2, 0.4, 0.4, 0.9};
    auto qp = build_qp(p, g);
    CHECK(qp.partial_observation);
    const auto ev = dense_eig_sym(qp.M_obs);
    CHECK(ev[0] >= -1e-14);
    CHECK(ev[0] <= 1e-14); // plenty of zero rows
}

TEST_CASE("key=value config parsing")
{
    const std::string path = "qp_config_test.txt";
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fprintf(f, "# comment line\npde = poisson\nell= 5\nalpha =1e-4\n"
                        "obs_box = 0.2,0.4,0.4,0.9 # trailing comment\n\nbad line\n");
        std::fclose(f);
    }
    auto kv = parse_key_value_file(path);
    CHECK(kv.at("pde") == "poisson");
    CHECK(kv.at("ell") == "5");
    CHECK(kv.at("alpha") == "1e-4");
    CHECK(kv.at("obs_box") == "0.2,0.4,0.4,0.9");
    CHECK(kv.size() == 4);
    std::remove(path.c_str());
}
