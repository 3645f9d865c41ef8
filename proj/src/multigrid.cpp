// SPDX-License-Identifier: Apache-2.0

#include "optcon/multigrid.hpp"

#include <cmath>
#include <stdexcept>

namespace optcon {

SparseMatrix bilinear_prolongation(int fine_level)
{
    if (fine_level < 3) throw std::invalid_argument("bilinear_prolongation: level must be >= 3");
    const std::int32_t nxf = static_cast<std::int32_t>((std::int64_t(1) << fine_level) - 1);
    const std::int32_t nxc = static_cast<std::int32_t>((std::int64_t(1) << (fine_level - 1)) - 1);

    // 1D interpolation weights from coarse vertex I to fine vertex i (both
    // 1-based interior); boundary (Dirichlet) neighbors are dropped
    auto stencil_1d = [nxc](std::int32_t i) {
        std::vector<std::pair<std::int32_t, double>> s;
        if (i % 2 == 0) {
            s.emplace_back(i / 2, 1.0);
        } else {
            if ((i - 1) / 2 >= 1) s.emplace_back((i - 1) / 2, 0.5);
            if ((i + 1) / 2 <= nxc) s.emplace_back((i + 1) / 2, 0.5);
        }
        return s;
    };

    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(nxf) * nxf * 4);
    for (std::int32_t j = 1; j <= nxf; ++j) {
        const auto sy = stencil_1d(j);
        for (std::int32_t i = 1; i <= nxf; ++i) {
            const auto sx = stencil_1d(i);
            const std::int32_t fine = (j - 1) * nxf + (i - 1);
            for (const auto& [J, wy] : sy)
                for (const auto& [I, wx] : sx)
                    t.push_back({fine, (J - 1) * nxc + (I - 1), wx * wy});
        }
    }
    return SparseMatrix::from_triplets(nxf * nxf, nxc * nxc, std::move(t));
}

void gauss_seidel_sweep(const SparseMatrix& A, const Vector& b, Vector& x, bool forward)
{
    const std::int32_t n = A.rows();
    const auto& rowptr = A.row_ptr();
    const auto& colidx = A.col_idx();
    const auto& val = A.values();
    auto update_row = [&](std::int32_t i) {
        double s = b[i];
        double diag = 0.0;
        for (std::int32_t k = rowptr[i]; k < rowptr[i + 1]; ++k) {
            const std::int32_t j = colidx[k];
            if (j == i)
                diag = val[k];
            else
                s -= val[k] * x[j];
        }
        x[i] = s / diag;
    };
    if (forward)
        for (std::int32_t i = 0; i < n; ++i) update_row(i);
    else
        for (std::int32_t i = n - 1; i >= 0; --i) update_row(i);
}

MgHierarchy MgHierarchy::build(const SparseMatrix& fine, int level)
{
    MgOptions opts;
    opts.level = level;
    return build(fine, opts);
}

MgHierarchy MgHierarchy::build(const SparseMatrix& fine, const MgOptions& opts)
{
    const int level = opts.level;
    if (level < 3) throw std::invalid_argument("MgHierarchy: fine level must be >= 3");
    const std::int64_t expected = ((std::int64_t(1) << level) - 1) * ((std::int64_t(1) << level) - 1);
    if (fine.rows() != fine.cols() || fine.rows() != expected)
        throw std::invalid_argument("MgHierarchy: matrix size does not match grid level");

    MgHierarchy h;
    h.fine_level_ = level;
    h.matrices_.push_back(fine);

    // with a rediscretizer, only the remainder A - base is Galerkin-coarsened;
    // the base operator is reassembled at each level's own mesh size
    SparseMatrix remainder;
    if (opts.rediscretize)
        remainder = sparse_add(1.0, fine, -1.0, opts.rediscretize(level));

    for (int l = level; l > 2; --l) {
        SparseMatrix P = bilinear_prolongation(l);
        SparseMatrix R = P.transposed();
        SparseMatrix coarse;
        if (opts.rediscretize) {
            remainder = sparse_multiply(R, sparse_multiply(remainder, P));
            coarse = sparse_add(1.0, opts.rediscretize(l - 1), 1.0, remainder);
        } else {
            coarse = sparse_multiply(R, sparse_multiply(h.matrices_.back(), P));
        }
        h.prolong_.push_back(std::move(P));
        h.restrict_.push_back(std::move(R));
        h.matrices_.push_back(std::move(coarse));
    }
    h.coarse_.emplace(h.matrices_.back());
    return h;
}

void MgHierarchy::cycle(std::size_t k, const Vector& rhs, Vector& x, int pre, int post) const
{
    if (k + 1 == matrices_.size()) {
        x = coarse_->solve(rhs);
        return;
    }
    const SparseMatrix& A = matrices_[k];
    for (int s = 0; s < pre; ++s) gauss_seidel_sweep(A, rhs, x, true);

    Vector r(rhs.size());
    A.apply(x.data(), r.data());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
    Vector rc = restrict_[k].apply(r);

    Vector ec(rc.size(), 0.0);
    cycle(k + 1, rc, ec, pre, post);

    const Vector e = prolong_[k].apply(ec);
    axpy(1.0, e, x);

    for (int s = 0; s < post; ++s) gauss_seidel_sweep(A, rhs, x, false);
}

void MgHierarchy::v_cycle(const Vector& rhs, Vector& x, int pre, int post) const
{
    if (rhs.size() != x.size() || static_cast<std::int32_t>(rhs.size()) != matrices_[0].rows())
        throw std::invalid_argument("v_cycle: size mismatch");
    cycle(0, rhs, x, pre, post);
}

Vector MgHierarchy::solve(const Vector& rhs, int cycles, int pre, int post) const
{
    Vector x(rhs.size(), 0.0);
    double prev_res = norm2(rhs);
    if (prev_res == 0.0) return x;
    Vector r(rhs.size());
    for (int c = 0; c < cycles; ++c) {
        cycle(0, rhs, x, pre, post);
        matrices_[0].apply(x.data(), r.data());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
        const double res = norm2(r);
        if (res > 10.0 * prev_res)
            throw std::runtime_error("MgHierarchy::solve: residual growth, cycle diverged");
        prev_res = res;
    }
    return x;
}

} // namespace optcon
