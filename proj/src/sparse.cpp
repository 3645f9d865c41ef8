// SPDX-License-Identifier: Apache-2.0

#include "optcon/sparse.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace optcon {

SparseMatrix SparseMatrix::from_triplets(std::int32_t nrows, std::int32_t ncols,
                                         std::vector<Triplet> triplets)
{
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
            throw std::out_of_range("from_triplets: index out of bounds");
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseMatrix m;
    m.nrows_ = nrows;
    m.ncols_ = ncols;
    m.rowptr_.assign(static_cast<std::size_t>(nrows) + 1, 0);
    m.colidx_.reserve(triplets.size());
    m.val_.reserve(triplets.size());

    std::size_t i = 0;
    while (i < triplets.size()) {
        const std::int32_t r = triplets[i].row;
        const std::int32_t c = triplets[i].col;
        double s = 0.0;
        while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c)
            s += triplets[i++].value;
        m.colidx_.push_back(c);
        m.val_.push_back(s);
        m.rowptr_[static_cast<std::size_t>(r) + 1] = static_cast<std::int32_t>(m.val_.size());
    }
    for (std::size_t r = 1; r < m.rowptr_.size(); ++r)
        m.rowptr_[r] = std::max(m.rowptr_[r], m.rowptr_[r - 1]);
    return m;
}

SparseMatrix SparseMatrix::identity(std::int32_t n)
{
    return diagonal(Vector(static_cast<std::size_t>(n), 1.0));
}

SparseMatrix SparseMatrix::diagonal(const Vector& d)
{
    std::vector<Triplet> t;
    t.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        t.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(i), d[i]});
    return from_triplets(static_cast<std::int32_t>(d.size()),
                         static_cast<std::int32_t>(d.size()), std::move(t));
}

Vector SparseMatrix::apply(const Vector& x) const
{
    if (static_cast<std::int32_t>(x.size()) != ncols_)
        throw std::invalid_argument("spmv: dimension mismatch");
    Vector y(static_cast<std::size_t>(nrows_));
    apply(x.data(), y.data());
    return y;
}

void SparseMatrix::apply(const double* x, double* y) const
{
    kernels::csr_spmv(static_cast<std::size_t>(nrows_), rowptr_.data(), colidx_.data(),
                      val_.data(), x, y);
}

void SparseMatrix::apply_add(double a, const double* x, double* y) const
{
    for (std::int32_t i = 0; i < nrows_; ++i) {
        double s = 0.0;
        for (std::int32_t k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
            s += val_[k] * x[colidx_[k]];
        y[i] += a * s;
    }
}

SparseMatrix SparseMatrix::transposed() const
{
    std::vector<Triplet> t;
    t.reserve(val_.size());
    for (std::int32_t i = 0; i < nrows_; ++i)
        for (std::int32_t k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
            t.push_back({colidx_[k], i, val_[k]});
    return from_triplets(ncols_, nrows_, std::move(t));
}

double SparseMatrix::coeff(std::int32_t i, std::int32_t j) const
{
    if (i < 0 || i >= nrows_ || j < 0 || j >= ncols_)
        throw std::out_of_range("coeff: index out of bounds");
    const auto begin = colidx_.begin() + rowptr_[i];
    const auto end = colidx_.begin() + rowptr_[i + 1];
    const auto it = std::lower_bound(begin, end, j);
    if (it != end && *it == j) return val_[static_cast<std::size_t>(it - colidx_.begin())];
    return 0.0;
}

Vector SparseMatrix::diagonal_vector() const
{
    const std::int32_t n = std::min(nrows_, ncols_);
    Vector d(static_cast<std::size_t>(n), 0.0);
    for (std::int32_t i = 0; i < n; ++i) d[i] = coeff(i, i);
    return d;
}

Vector SparseMatrix::row_sums() const
{
    Vector s(static_cast<std::size_t>(nrows_), 0.0);
    for (std::int32_t i = 0; i < nrows_; ++i)
        for (std::int32_t k = rowptr_[i]; k < rowptr_[i + 1]; ++k) s[i] += val_[k];
    return s;
}

bool SparseMatrix::is_diagonal() const
{
    for (std::int32_t i = 0; i < nrows_; ++i)
        for (std::int32_t k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
            if (colidx_[k] != i && val_[k] != 0.0) return false;
    return true;
}

double SparseMatrix::max_abs() const
{
    double m = 0.0;
    for (double v : val_) m = std::max(m, std::abs(v));
    return m;
}

bool SparseMatrix::is_symmetric(double rel_tol) const
{
    if (nrows_ != ncols_) return false;
    const double tol = rel_tol * std::max(max_abs(), 1e-300);
    for (std::int32_t i = 0; i < nrows_; ++i)
        for (std::int32_t k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
            if (std::abs(val_[k] - coeff(colidx_[k], i)) > tol) return false;
    return true;
}

SparseMatrix SparseMatrix::plus_diagonal(const Vector& d) const
{
    if (static_cast<std::int32_t>(d.size()) != nrows_ || nrows_ != ncols_)
        throw std::invalid_argument("plus_diagonal: dimension mismatch");
    std::vector<Triplet> t;
    t.reserve(val_.size() + d.size());
    for (std::int32_t i = 0; i < nrows_; ++i)
        for (std::int32_t k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
            t.push_back({i, colidx_[k], val_[k]});
    for (std::size_t i = 0; i < d.size(); ++i)
        t.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(i), d[i]});
    return from_triplets(nrows_, ncols_, std::move(t));
}

void SparseMatrix::scale_values(double a)
{
    kernels::scale(a, val_.data(), val_.size());
}

SparseMatrix sparse_add(double a, const SparseMatrix& A, double b, const SparseMatrix& B)
{
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw std::invalid_argument("sparse_add: dimension mismatch");
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(A.nnz() + B.nnz()));
    for (std::int32_t i = 0; i < A.rows(); ++i)
        for (std::int32_t k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
            t.push_back({i, A.col_idx()[k], a * A.values()[k]});
    for (std::int32_t i = 0; i < B.rows(); ++i)
        for (std::int32_t k = B.row_ptr()[i]; k < B.row_ptr()[i + 1]; ++k)
            t.push_back({i, B.col_idx()[k], b * B.values()[k]});
    return SparseMatrix::from_triplets(A.rows(), A.cols(), std::move(t));
}

SparseMatrix sparse_multiply(const SparseMatrix& A, const SparseMatrix& B)
{
    if (A.cols() != B.rows()) throw std::invalid_argument("sparse_multiply: dimension mismatch");
    std::vector<Triplet> t;
    // row-wise accumulation with a dense scratch over B's columns
    std::vector<double> acc(static_cast<std::size_t>(B.cols()), 0.0);
    std::vector<std::int32_t> marked;
    for (std::int32_t i = 0; i < A.rows(); ++i) {
        marked.clear();
        for (std::int32_t ka = A.row_ptr()[i]; ka < A.row_ptr()[i + 1]; ++ka) {
            const std::int32_t j = A.col_idx()[ka];
            const double av = A.values()[ka];
            for (std::int32_t kb = B.row_ptr()[j]; kb < B.row_ptr()[j + 1]; ++kb) {
                const std::int32_t c = B.col_idx()[kb];
                if (acc[c] == 0.0) marked.push_back(c);
                acc[c] += av * B.values()[kb];
            }
        }
        std::sort(marked.begin(), marked.end());
        for (std::int32_t c : marked) {
            t.push_back({i, c, acc[c]});
            acc[c] = 0.0;
        }
    }
    return SparseMatrix::from_triplets(A.rows(), B.cols(), std::move(t));
}

void write_matrix_market(const std::string& path, const SparseMatrix& A, bool symmetric)
{
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("write_matrix_market: cannot open " + path);
    std::fprintf(f, "%%%%MatrixMarket matrix coordinate real %s\n",
                 symmetric ? "symmetric" : "general");
    std::int64_t count = 0;
    if (symmetric) {
        for (std::int32_t i = 0; i < A.rows(); ++i)
            for (std::int32_t k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
                if (A.col_idx()[k] <= i) ++count;
    } else {
        count = A.nnz();
    }
    std::fprintf(f, "%" PRId32 " %" PRId32 " %" PRId64 "\n", A.rows(), A.cols(), count);
    for (std::int32_t i = 0; i < A.rows(); ++i)
        for (std::int32_t k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k) {
            const std::int32_t j = A.col_idx()[k];
            if (symmetric && j > i) continue;
            std::fprintf(f, "%" PRId32 " %" PRId32 " %.17g\n", i + 1, j + 1, A.values()[k]);
        }
    std::fclose(f);
}

SparseMatrix read_matrix_market(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_matrix_market: cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("read_matrix_market: empty file");

    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    for (auto* s : {&object, &format, &field, &symmetry})
        std::transform(s->begin(), s->end(), s->begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate" ||
        field != "real" || (symmetry != "general" && symmetry != "symmetric"))
        throw std::runtime_error("read_matrix_market: malformed header: " + header);
    const bool symmetric = symmetry == "symmetric";

    std::string line;
    std::int64_t nr = -1, nc = -1, nz = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ls(line);
        if (!(ls >> nr >> nc >> nz)) throw std::runtime_error("read_matrix_market: bad size line");
        break;
    }
    if (nr < 0) throw std::runtime_error("read_matrix_market: missing size line");

    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(symmetric ? 2 * nz : nz));
    std::int64_t seen = 0;
    while (seen < nz && std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ls(line);
        std::int64_t i, j;
        double v;
        if (!(ls >> i >> j >> v)) throw std::runtime_error("read_matrix_market: bad entry line");
        if (i < 1 || i > nr || j < 1 || j > nc)
            throw std::runtime_error("read_matrix_market: index out of range");
        // 1-based on disk, 0-based internally
        t.push_back({static_cast<std::int32_t>(i - 1), static_cast<std::int32_t>(j - 1), v});
        if (symmetric && i != j)
            t.push_back({static_cast<std::int32_t>(j - 1), static_cast<std::int32_t>(i - 1), v});
        ++seen;
    }
    if (seen != nz) throw std::runtime_error("read_matrix_market: truncated entries");
    return SparseMatrix::from_triplets(static_cast<std::int32_t>(nr),
                                       static_cast<std::int32_t>(nc), std::move(t));
}

} // namespace optcon
