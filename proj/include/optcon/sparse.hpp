// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_SPARSE_HPP
#define OPTCON_SPARSE_HPP

#include "optcon/vector.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace optcon {

struct Triplet {
    std::int32_t row;
    std::int32_t col;
    double value;
};

/// Compressed-row sparse matrix. Column indices are sorted within each row
/// and (row, col) pairs are unique; assembly goes through a triplet buffer
/// that is compacted on build.
class SparseMatrix {
public:
    SparseMatrix() = default;

    static SparseMatrix from_triplets(std::int32_t nrows, std::int32_t ncols,
                                      std::vector<Triplet> triplets);
    static SparseMatrix identity(std::int32_t n);
    static SparseMatrix diagonal(const Vector& d);

    std::int32_t rows() const { return nrows_; }
    std::int32_t cols() const { return ncols_; }
    std::int64_t nnz() const { return static_cast<std::int64_t>(val_.size()); }

    const std::vector<std::int32_t>& row_ptr() const { return rowptr_; }
    const std::vector<std::int32_t>& col_idx() const { return colidx_; }
    const std::vector<double>& values() const { return val_; }
    std::vector<double>& values() { return val_; }

    /// y = A*x
    Vector apply(const Vector& x) const;
    void apply(const double* x, double* y) const;
    /// y += a * A*x
    void apply_add(double a, const double* x, double* y) const;

    SparseMatrix transposed() const;

    /// Entry lookup (zero when not stored).
    double coeff(std::int32_t i, std::int32_t j) const;

    Vector diagonal_vector() const;
    Vector row_sums() const;

    bool is_diagonal() const;

    /// max |A_ij| over stored entries.
    double max_abs() const;

    /// |A_ij - A_ji| <= tol * max|A| for every stored pair.
    bool is_symmetric(double rel_tol = 1e-14) const;

    /// A + diag(d) (pattern union; inserts missing diagonal entries).
    SparseMatrix plus_diagonal(const Vector& d) const;

    void scale_values(double a);

private:
    std::int32_t nrows_ = 0;
    std::int32_t ncols_ = 0;
    std::vector<std::int32_t> rowptr_{0};
    std::vector<std::int32_t> colidx_;
    std::vector<double> val_;
};

/// a*A + b*B with pattern union.
SparseMatrix sparse_add(double a, const SparseMatrix& A, double b, const SparseMatrix& B);

/// C = A*B (deterministic row-wise accumulation, sorted columns).
SparseMatrix sparse_multiply(const SparseMatrix& A, const SparseMatrix& B);

/// Matrix Market coordinate format, 1-based indices, "real general" or
/// "real symmetric" (lower triangle stored on write when symmetric=true).
void write_matrix_market(const std::string& path, const SparseMatrix& A, bool symmetric = false);
SparseMatrix read_matrix_market(const std::string& path);

} // namespace optcon

#endif // OPTCON_SPARSE_HPP
