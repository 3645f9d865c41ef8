// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_DENSE_EIG_HPP
#define OPTCON_DENSE_EIG_HPP

#include "optcon/sparse.hpp"

#include <complex>
#include <memory>

namespace optcon {

/// Verification-scale cap for anything that densifies a sparse matrix.
inline constexpr std::int32_t kDenseVerificationCap = 5000;

/// Eigenvalues (ascending) of a symmetric matrix, computed on a densified
/// copy. Throws for non-symmetric input or sizes above the verification cap.
Vector dense_eig_sym(const SparseMatrix& A);

/// Eigenvalues of B^{-1}A for B symmetric positive definite. When A is
/// symmetric the pencil is reduced by Cholesky similarity and the result is
/// real (ascending); otherwise the complex spectrum of B^{-1}A is returned.
Vector generalized_eig(const SparseMatrix& A, const SparseMatrix& B);
std::vector<std::complex<double>> generalized_eig_complex(const SparseMatrix& A,
                                                          const SparseMatrix& B);

/// LU factorization of a densified sparse matrix (coarse-grid solves, dense
/// Newton systems at desk scale). Deterministic partial pivoting.
class DenseFactor {
public:
    explicit DenseFactor(const SparseMatrix& A);
    /// Column-major n-by-n data.
    DenseFactor(std::vector<double> data, std::int32_t n);
    ~DenseFactor();
    DenseFactor(DenseFactor&&) noexcept;
    DenseFactor& operator=(DenseFactor&&) noexcept;

    Vector solve(const Vector& rhs) const;
    std::int32_t size() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace optcon

#endif // OPTCON_DENSE_EIG_HPP
