// SPDX-License-Identifier: Apache-2.0

#include "optcon/precond.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

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

} // namespace

void block_2x2_inverse_apply(const Vector& a, const Vector& b1, const Vector& b2,
                             const Vector& c, const Vector& r1, const Vector& r2,
                             Vector& x1, Vector& x2)
{
    const std::size_t n = a.size();
    if (b1.size() != n || b2.size() != n || c.size() != n || r1.size() != n || r2.size() != n)
        throw std::invalid_argument("block_2x2_inverse_apply: size mismatch");
    x1.resize(n);
    x2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0.0) throw std::runtime_error("block_2x2_inverse_apply: singular pivot block");
        const double schur = c[i] - b2[i] * b1[i] / a[i];
        if (schur == 0.0) throw std::runtime_error("block_2x2_inverse_apply: singular Schur block");
        x2[i] = (r2[i] - b2[i] * r1[i] / a[i]) / schur;
        x1[i] = (r1[i] - b1[i] * x2[i]) / a[i];
    }
}

Vector matching_bracket(double alpha, const Vector& d_M, const Vector& theta_w,
                        const Vector& theta_v)
{
    const std::size_t n = d_M.size();
    if (theta_w.size() != n || theta_v.size() != n)
        throw std::invalid_argument("matching_bracket: size mismatch");
    if (alpha <= 0.0) throw std::invalid_argument("matching_bracket: alpha must be positive");
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (d_M[i] <= 0.0 || theta_w[i] <= 0.0 || theta_v[i] <= 0.0)
            throw std::invalid_argument("matching_bracket: inputs must be positive");
        const double s = 1.0 / theta_w[i] + 1.0 / theta_v[i];
        out[i] = d_M[i] * d_M[i] * s / (alpha * d_M[i] * s + 1.0);
        if (out[i] < -1e-14) throw std::runtime_error("matching_bracket: negative bracket entry");
        out[i] = std::max(out[i], 0.0);
    }
    return out;
}

Vector build_m_hat(double alpha, const Vector& d_M, const Vector& theta_w,
                   const Vector& theta_v, const Vector& theta_y)
{
    Vector b = matching_bracket(alpha, d_M, theta_w, theta_v);
    if (theta_y.size() != d_M.size()) throw std::invalid_argument("build_m_hat: size mismatch");
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (theta_y[i] < 0.0) throw std::invalid_argument("build_m_hat: theta_y must be nonnegative");
        b[i] = std::sqrt(b[i]) * std::sqrt(d_M[i] + theta_y[i]);
    }
    return b;
}

SparseMatrix schur_exact(const SparseMatrix& L, const SparseMatrix& M,
                         const ThetaBlocks& theta, double alpha)
{
    const std::int32_t n = L.rows();
    if (n > 2000) throw std::invalid_argument("schur_exact: verification scale exceeded");

    const Eigen::MatrixXd Ld = densify(L);
    const Eigen::MatrixXd Md = densify(M);
    Eigen::MatrixXd My = Md;
    for (std::int32_t i = 0; i < n; ++i) My(i, i) += theta.theta_y[i];

    Eigen::LLT<Eigen::MatrixXd> llt(My);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("schur_exact: M + Theta_y not positive definite");

    Eigen::MatrixXd S = Ld * llt.solve(Eigen::MatrixXd(Ld.transpose()));

    Eigen::MatrixXd T = Md.inverse() / alpha;
    for (std::int32_t i = 0; i < n; ++i)
        T(i, i) += 1.0 / theta.theta_w[i] + 1.0 / theta.theta_v[i];
    S += Md / alpha - T.inverse() / (alpha * alpha);
    return from_dense(S);
}

SchurApprox::SchurApprox(const SparseMatrix& L, const SparseMatrix& M_mid, Vector theta_y,
                         Vector m_hat, InnerSolve mode, const MgOptions& mg)
    : m_mid_(&M_mid), theta_y_(std::move(theta_y)), opts_(mg)
{
    factor_ = L.plus_diagonal(m_hat);
    factor_t_ = factor_.transposed();
    if (mode == InnerSolve::multigrid) {
        mg_.emplace(MgHierarchy::build(factor_, opts_));
        MgOptions t = opts_;
        if (opts_.rediscretize) {
            const LevelAssembler base = opts_.rediscretize;
            t.rediscretize = [base](int l) { return base(l).transposed(); };
        }
        mg_t_.emplace(MgHierarchy::build(factor_t_, t));
    } else {
        lu_.emplace(factor_);
        lu_t_.emplace(factor_t_);
    }
}

Vector SchurApprox::apply_inverse(const Vector& r) const
{
    Vector t1 = mg_ ? mg_->solve(r, opts_.cycles, opts_.pre, opts_.post) : lu_->solve(r);
    Vector t2 = m_mid_->apply(t1);
    for (std::size_t i = 0; i < t2.size(); ++i) t2[i] += theta_y_[i] * t1[i];
    return mg_t_ ? mg_t_->solve(t2, opts_.cycles, opts_.pre, opts_.post) : lu_t_->solve(t2);
}

Block11Approx::Block11Approx(const SparseMatrix& M_state, const Vector& theta_y,
                             const SparseMatrix& M_control, double alpha,
                             const Vector& theta_w, const Vector& theta_v, InnerSolve mode,
                             int cheb_steps)
{
    if (mode == InnerSolve::multigrid)
        cheb_.emplace(M_state, 1.0, theta_y, cheb_steps);
    else
        state_lu_.emplace(M_state.plus_diagonal(theta_y));

    const Vector d = M_control.diagonal_vector();
    const std::size_t n = d.size();
    a_.resize(n);
    b_.resize(n);
    c_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        a_[i] = alpha * d[i] + theta_w[i];
        b_[i] = -alpha * d[i];
        c_[i] = alpha * d[i] + theta_v[i];
    }
}

Vector Block11Approx::apply_state(const Vector& r) const
{
    return cheb_ ? cheb_->apply(r) : state_lu_->solve(r);
}

void Block11Approx::apply_control(const Vector& r1, const Vector& r2, Vector& x1,
                                  Vector& x2) const
{
    block_2x2_inverse_apply(a_, b_, b_, c_, r1, r2, x1, x2);
}

namespace {

struct SaddleSlices {
    Vector y, w, v, p;
};

SaddleSlices slice(const Vector& r, std::size_t ny, std::size_t nu)
{
    if (r.size() != 2 * ny + 2 * nu)
        throw std::invalid_argument("preconditioner: rhs size mismatch");
    SaddleSlices s;
    s.y.assign(r.begin(), r.begin() + ny);
    s.w.assign(r.begin() + ny, r.begin() + ny + nu);
    s.v.assign(r.begin() + ny + nu, r.begin() + ny + 2 * nu);
    s.p.assign(r.begin() + ny + 2 * nu, r.end());
    return s;
}

Vector join(const Vector& y, const Vector& w, const Vector& v, const Vector& p)
{
    Vector out;
    out.reserve(y.size() + w.size() + v.size() + p.size());
    out.insert(out.end(), y.begin(), y.end());
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), v.begin(), v.end());
    out.insert(out.end(), p.begin(), p.end());
    return out;
}

} // namespace

Vector BlockDiagPrecond::apply(const Vector& r) const
{
    const std::size_t nu = block11_.control_a().size();
    const std::size_t ny = (r.size() - 2 * nu) / 2;
    const auto s = slice(r, ny, nu);
    const Vector vy = block11_.apply_state(s.y);
    Vector vw, vv;
    block11_.apply_control(s.w, s.v, vw, vv);
    const Vector vp = schur_.apply_inverse(s.p);
    return join(vy, vw, vv, vp);
}

Vector BlockTriPrecond::apply(const Vector& r) const
{
    const std::size_t nu = block11_.control_a().size();
    const std::size_t ny = (r.size() - 2 * nu) / 2;
    const auto s = slice(r, ny, nu);
    const Vector vy = block11_.apply_state(s.y);
    Vector vw, vv;
    block11_.apply_control(s.w, s.v, vw, vv);

    // coupling row [L, -M, M, -S_hat]
    Vector t = L_->apply(vy);
    Vector mw = M_->apply(vw);
    Vector mv = M_->apply(vv);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += -mw[i] + mv[i] - s.p[i];
    const Vector vp = schur_.apply_inverse(t);
    return join(vy, vw, vv, vp);
}

SPiHatOperator::SPiHatOperator(const SparseMatrix& L, const SparseMatrix& M_obs,
                               const Vector& theta_y, Vector m_r, InnerSolve mode,
                               const MgOptions& mg)
    : L_(&L), opts_(mg)
{
    left_ = sparse_add(1.0, L.transposed(), 1.0, M_obs).plus_diagonal(theta_y);
    right_ = L.plus_diagonal(m_r);
    if (mode == InnerSolve::multigrid) {
        MgOptions t = opts_;
        if (opts_.rediscretize) {
            const LevelAssembler base = opts_.rediscretize;
            t.rediscretize = [base](int l) { return base(l).transposed(); };
        }
        mg_left_.emplace(MgHierarchy::build(left_, t));
        mg_right_.emplace(MgHierarchy::build(right_, opts_));
    } else {
        lu_left_.emplace(left_);
        lu_right_.emplace(right_);
    }
}

Vector SPiHatOperator::apply_inverse(const Vector& r) const
{
    Vector t1 =
        mg_left_ ? mg_left_->solve(r, opts_.cycles, opts_.pre, opts_.post) : lu_left_->solve(r);
    Vector t2 = L_->apply(t1);
    return mg_right_ ? mg_right_->solve(t2, opts_.cycles, opts_.pre, opts_.post)
                     : lu_right_->solve(t2);
}

PermutedPrecond::PermutedPrecond(const SparseMatrix& L, const SparseMatrix& M_obs,
                                 const SparseMatrix& M_control, double alpha,
                                 const ThetaBlocks& theta, InnerSolve mode, const MgOptions& mg)
    : L_(&L), m_obs_(&M_obs), m_control_(&M_control), theta_y_(theta.theta_y),
      spi_(L, M_obs, theta.theta_y,
           matching_bracket(alpha, M_control.diagonal_vector(), theta.theta_w, theta.theta_v),
           mode, mg),
      opts_(mg)
{
    const Vector d = M_control.diagonal_vector();
    const std::size_t n = d.size();
    a_.resize(n);
    b_.resize(n);
    c_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        a_[i] = alpha * d[i] + theta.theta_w[i];
        b_[i] = -alpha * d[i];
        c_[i] = alpha * d[i] + theta.theta_v[i];
    }
    if (mode == InnerSolve::multigrid)
        mg_L_.emplace(MgHierarchy::build(L, opts_));
    else
        lu_L_.emplace(L);
}

Vector PermutedPrecond::apply(const Vector& r) const
{
    const std::size_t nu = a_.size();
    const std::size_t ny = (r.size() - 2 * nu) / 2;
    const auto s = slice(r, ny, nu);

    Vector v2w, v2v;
    block_2x2_inverse_apply(a_, b_, b_, c_, s.w, s.v, v2w, v2v);

    Vector diff(nu);
    for (std::size_t i = 0; i < nu; ++i) diff[i] = v2w[i] - v2v[i];
    Vector rhs1 = m_control_->apply(diff);
    axpy(1.0, s.p, rhs1);
    const Vector v1 =
        mg_L_ ? mg_L_->solve(rhs1, opts_.cycles, opts_.pre, opts_.post) : lu_L_->solve(rhs1);

    Vector t = m_obs_->apply(v1);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += theta_y_[i] * v1[i] - s.y[i];
    const Vector v3 = spi_.apply_inverse(t);

    return join(v1, v2w, v2v, v3);
}

} // namespace optcon
