// SPDX-License-Identifier: Apache-2.0

#include "optcon/spectral.hpp"

#include "optcon/dense_eig.hpp"
#include "optcon/fem.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <random>

namespace optcon {

namespace {

Eigen::MatrixXd densify(const SparseMatrix& A)
{
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    for (std::int32_t i = 0; i < A.rows(); ++i)
        for (std::int32_t k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
            D(i, A.col_idx()[k]) = A.values()[k];
    return D;
}

SparseMatrix from_dense(const Eigen::MatrixXd& D)
{
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(D.rows()) * D.cols());
    for (Eigen::Index i = 0; i < D.rows(); ++i)
        for (Eigen::Index j = 0; j < D.cols(); ++j)
            if (D(i, j) != 0.0)
                t.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), D(i, j)});
    return SparseMatrix::from_triplets(static_cast<std::int32_t>(D.rows()),
                                       static_cast<std::int32_t>(D.cols()), std::move(t));
}

Vector log_uniform(std::size_t n, std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    Vector v(n);
    for (auto& x : v) x = std::pow(10.0, dist(rng));
    return v;
}

ControlProblem benchmark_problem(const Grid& g, PdeKind pde, double alpha, double beta)
{
    ControlProblem p;
    p.pde = pde;
    p.eps = 1e-1;
    p.alpha = alpha;
    p.beta = beta;
    if (pde == PdeKind::convdiff)
        p.y_d = interpolate(g, [](double x, double y) {
            return std::exp(-64.0 * ((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)));
        });
    else
        p.y_d = interpolate(g, [](double x, double y) {
            return std::sin(M_PI * x) * std::sin(M_PI * y);
        });
    p.f = Vector(static_cast<std::size_t>(g.num_nodes()), 0.0);
    p.u_a = Vector(static_cast<std::size_t>(g.num_nodes()), -2.0);
    p.u_b = Vector(static_cast<std::size_t>(g.num_nodes()), 1.5);
    return p;
}

} // namespace

SparseMatrix schur_matching_dense(const SparseMatrix& L, const SparseMatrix& M,
                                  const ThetaBlocks& theta, double alpha)
{
    const std::int32_t n = L.rows();
    if (n > 2000) throw std::invalid_argument("schur_matching_dense: verification scale exceeded");
    const Vector m_hat =
        build_m_hat(alpha, M.diagonal_vector(), theta.theta_w, theta.theta_v, theta.theta_y);
    Eigen::MatrixXd F = densify(L);
    for (std::int32_t i = 0; i < n; ++i) F(i, i) += m_hat[i];
    Eigen::MatrixXd My = densify(M);
    for (std::int32_t i = 0; i < n; ++i) My(i, i) += theta.theta_y[i];
    const Eigen::MatrixXd S = F * My.llt().solve(Eigen::MatrixXd(F.transpose()));
    return from_dense(S);
}

IdealPrecondReport verify_ideal_preconditioners(int ell, double alpha, unsigned seed)
{
    Grid g(ell);
    auto qp = build_qp(benchmark_problem(g, PdeKind::poisson, alpha, 1e-2), g);
    auto model = make_steady_model(qp);

    std::mt19937_64 rng(seed);
    const std::size_t n = static_cast<std::size_t>(qp.n);
    ThetaBlocks th;
    th.theta_y.assign(n, 0.0);
    th.theta_w = log_uniform(n, rng, -2, 2);
    th.theta_v = log_uniform(n, rng, -2, 2);

    const LinearOperator A = make_saddle_operator(model, th);
    const std::size_t dim = static_cast<std::size_t>(A.n);

    // densify the saddle operator
    Eigen::MatrixXd Ad(dim, dim);
    {
        Vector e(dim, 0.0), col(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            e[j] = 1.0;
            A.apply_fn(e, col);
            e[j] = 0.0;
            for (std::size_t i = 0; i < dim; ++i) Ad(i, j) = col[i];
        }
    }
    const std::size_t na = 3 * n; // (1,1)-block size (y and z rows)
    const Eigen::MatrixXd Ablk = Ad.topLeftCorner(na, na);
    const Eigen::MatrixXd B = Ad.bottomLeftCorner(n, na);
    const Eigen::LLT<Eigen::MatrixXd> allt(Ablk);
    const Eigen::MatrixXd S = B * allt.solve(Eigen::MatrixXd(B.transpose()));

    Eigen::MatrixXd P1 = Eigen::MatrixXd::Zero(dim, dim);
    P1.topLeftCorner(na, na) = Ablk;
    P1.bottomRightCorner(n, n) = S;

    IdealPrecondReport rep;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, P1, Eigen::EigenvaluesOnly);
    rep.p1_eigenvalues = Vector(es.eigenvalues().data(),
                                es.eigenvalues().data() + es.eigenvalues().size());
    const double golden = 0.5 * (1.0 + std::sqrt(5.0));
    const double target[3] = {1.0, golden, 1.0 - golden};
    for (double v : rep.p1_eigenvalues) {
        double d = 1e300;
        for (double t : target) d = std::min(d, std::abs(v - t));
        rep.max_set_distance = std::max(rep.max_set_distance, d);
    }

    // Krylov runs with the ideal blocks applied by dense factorization
    const Eigen::PartialPivLU<Eigen::MatrixXd> slu(S);
    const LinearOperator P1op{A.n, [&](const Vector& r, Vector& out) {
                                  out.resize(dim);
                                  Eigen::Map<const Eigen::VectorXd> rv(r.data(), dim);
                                  Eigen::VectorXd top = allt.solve(rv.head(na));
                                  Eigen::VectorXd bot = slu.solve(rv.tail(n));
                                  Eigen::Map<Eigen::VectorXd>(out.data(), dim) << top, bot;
                              }};
    const LinearOperator P2op{A.n, [&](const Vector& r, Vector& out) {
                                  out.resize(dim);
                                  Eigen::Map<const Eigen::VectorXd> rv(r.data(), dim);
                                  Eigen::VectorXd top = allt.solve(rv.head(na));
                                  Eigen::VectorXd bot = slu.solve(B * top - rv.tail(n));
                                  Eigen::Map<Eigen::VectorXd>(out.data(), dim) << top, bot;
                              }};
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector b(dim);
    for (auto& v : b) v = dist(rng);
    Vector x;
    const auto mrep = minres(A, P1op, b, x, 1e-10, 10);
    rep.minres_iterations = mrep.iterations;
    const auto grep = gmres(A, P2op, b, x, 1e-10, 10);
    rep.gmres_iterations = grep.iterations;

    rep.pass = rep.max_set_distance <= 1e-8 && mrep.converged && grep.converged &&
               rep.minres_iterations <= 3 && rep.gmres_iterations <= 3;
    return rep;
}

IntervalReport verify_theorem_interval(int ell, int num_samples,
                                       const std::vector<double>& alphas, bool lumped,
                                       unsigned seed)
{
    Grid g(ell);
    const SparseMatrix M =
        assemble_mass(g, lumped ? MassVariant::lumped : MassVariant::consistent);
    const Vector dM = M.diagonal_vector();
    const std::size_t n = static_cast<std::size_t>(M.rows());

    IntervalReport rep;
    {
        const Vector ev = generalized_eig(M, SparseMatrix::diagonal(dM));
        rep.bound_lo = std::min(ev.front(), 1.0);
        rep.bound_hi = std::max(ev.back(), 1.0);
    }
    rep.min_eig = 1e300;
    rep.max_eig = -1e300;

    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd Md = densify(M);
    for (int s = 0; s < num_samples; ++s) {
        const Vector tw = log_uniform(n, rng, -8, 8);
        const Vector tv = log_uniform(n, rng, -8, 8);
        for (double alpha : alphas) {
            Eigen::MatrixXd Anum(2 * n, 2 * n), Aden(2 * n, 2 * n);
            Anum << alpha * Md, -alpha * Md, -alpha * Md, alpha * Md;
            Aden.setZero();
            for (std::size_t i = 0; i < n; ++i) {
                Anum(i, i) += tw[i];
                Anum(n + i, n + i) += tv[i];
                Aden(i, i) = alpha * dM[i] + tw[i];
                Aden(i, n + i) = -alpha * dM[i];
                Aden(n + i, i) = -alpha * dM[i];
                Aden(n + i, n + i) = alpha * dM[i] + tv[i];
            }
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Anum, Aden,
                                                                         Eigen::EigenvaluesOnly);
            rep.min_eig = std::min(rep.min_eig, es.eigenvalues().minCoeff());
            rep.max_eig = std::max(rep.max_eig, es.eigenvalues().maxCoeff());
            ++rep.samples;
        }
    }
    if (lumped)
        rep.pass = std::abs(rep.min_eig - 1.0) <= 1e-12 && std::abs(rep.max_eig - 1.0) <= 1e-12;
    else
        rep.pass = rep.min_eig >= rep.bound_lo - 1e-10 && rep.max_eig <= rep.bound_hi + 1e-10;
    return rep;
}

SchurBoundReport verify_schur_bound(int ell, int num_samples,
                                    const std::vector<double>& alphas, bool lumped,
                                    unsigned seed)
{
    Grid g(ell);
    const SparseMatrix M =
        assemble_mass(g, lumped ? MassVariant::lumped : MassVariant::consistent);
    const SparseMatrix L = assemble_stiffness_poisson(g);
    const std::size_t n = static_cast<std::size_t>(M.rows());

    SchurBoundReport rep;
    rep.min_eig = 1e300;
    rep.max_eig = -1e300;
    std::mt19937_64 rng(seed);
    for (int s = 0; s < num_samples; ++s) {
        ThetaBlocks th;
        th.theta_w = log_uniform(n, rng, -6, 6);
        th.theta_v = log_uniform(n, rng, -6, 6);
        th.theta_y = log_uniform(n, rng, -6, 0);
        for (double alpha : alphas) {
            const SparseMatrix S = schur_exact(L, M, th, alpha);
            const SparseMatrix Shat = schur_matching_dense(L, M, th, alpha);
            const Vector ev = generalized_eig(S, Shat);
            rep.min_eig = std::min(rep.min_eig, ev.front());
            rep.max_eig = std::max(rep.max_eig, ev.back());
            ++rep.samples;
        }
    }
    rep.pass = !lumped || rep.min_eig >= 0.5 - 1e-10;
    return rep;
}

ClusterReport verify_clustering_limit(int ell, PdeKind pde, double alpha)
{
    Grid g(ell);
    const SparseMatrix M = assemble_mass(g, MassVariant::consistent);
    const SparseMatrix L = pde == PdeKind::poisson
                               ? assemble_stiffness_poisson(g)
                               : assemble_convdiff(g, 1e-1, default_wind(), true);

    const Eigen::MatrixXd Md = densify(M);
    const Eigen::MatrixXd Ld = densify(L);
    const Eigen::LLT<Eigen::MatrixXd> mllt(Md);
    const Eigen::MatrixXd S = Ld * mllt.solve(Eigen::MatrixXd(Ld.transpose())) + Md / alpha;
    const Eigen::MatrixXd F = Ld + Md / std::sqrt(alpha);
    const Eigen::MatrixXd Shat = F * mllt.solve(Eigen::MatrixXd(F.transpose()));

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (S + S.transpose()), 0.5 * (Shat + Shat.transpose()), Eigen::EigenvaluesOnly);
    ClusterReport rep;
    rep.min_eig = es.eigenvalues().minCoeff();
    rep.max_eig = es.eigenvalues().maxCoeff();
    rep.pass = rep.min_eig >= 0.5 - 1e-8 && rep.max_eig <= 1.0 + 1e-8;
    return rep;
}

void dump_theta_csv(const ThetaBlocks& theta, const std::string& path)
{
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("dump_theta_csv: cannot open " + path);
    std::fprintf(f, "index,theta_y,theta_w,theta_v\n");
    for (std::size_t i = 0; i < theta.theta_w.size(); ++i)
        std::fprintf(f, "%zu,%.17g,%.17g,%.17g\n", i,
                     i < theta.theta_y.size() ? theta.theta_y[i] : 0.0, theta.theta_w[i],
                     theta.theta_v[i]);
    std::fclose(f);
}

ScatterReport eigenvalue_scatter(PdeKind pde, int ell, double alpha, double beta, double sigma,
                                 const std::string& csv_path, const std::string& tag,
                                 const std::string& theta_csv_path)
{
    Grid g(ell);
    auto qp = build_qp(benchmark_problem(g, pde, alpha, beta), g);
    auto model = make_steady_model(qp);
    IpmParams params;
    params.sigma = sigma;
    params.solver = SolverKind::gmres_pt;
    const IpmResult res = ipm_solve(model, params);

    const ThetaBlocks th = build_theta(model, res.state);
    if (!theta_csv_path.empty()) dump_theta_csv(th, theta_csv_path);
    const SparseMatrix S = schur_exact(qp.L, qp.M, th, qp.alpha);
    const SparseMatrix Shat = schur_matching_dense(qp.L, qp.M, th, qp.alpha);

    ScatterReport rep;
    rep.eigenvalues = generalized_eig(S, Shat);
    rep.nli = res.stats.nli;
    std::size_t inside = 0;
    for (double v : rep.eigenvalues)
        if (v >= 0.45 && v <= 1.05) ++inside;
    rep.fraction_clustered = static_cast<double>(inside) / rep.eigenvalues.size();

    if (!csv_path.empty()) {
        std::FILE* f = std::fopen(csv_path.c_str(), "w");
        if (!f) throw std::runtime_error("eigenvalue_scatter: cannot open " + csv_path);
        std::fprintf(f, "index,eigenvalue,tag\n");
        for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i)
            std::fprintf(f, "%zu,%.17g,%s\n", i, rep.eigenvalues[i], tag.c_str());
        std::fclose(f);
    }
    return rep;
}

} // namespace optcon
