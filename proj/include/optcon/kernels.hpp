// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_KERNELS_HPP
#define OPTCON_KERNELS_HPP

#include <cstddef>
#include <cstdint>

namespace optcon::kernels {

/// Arithmetic backends. `avx2` is selected at startup when the CPU supports
/// it; `set_backend` can force either (throws if unsupported by the CPU).
enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend b);
const char* backend_name();
bool cpu_has_avx2();

// Hot vector kernels. All loops are deterministic: a fixed backend implies a
// fixed reduction order, so repeated runs are bit-identical.
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);          // y += a*x
void scale(double a, double* x, std::size_t n);                          // x *= a
void mul(const double* x, const double* y, double* z, std::size_t n);    // z = x.*y

/// y = A*x for a CSR matrix with int32 indices.
void csr_spmv(std::size_t nrows, const std::int32_t* rowptr,
              const std::int32_t* colidx, const double* val,
              const double* x, double* y);

// Reference (scalar) and AVX2 implementations, exposed so the equivalence
// tests can drive both directly regardless of the active backend.
namespace scalar_impl {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void mul(const double* x, const double* y, double* z, std::size_t n);
void csr_spmv(std::size_t nrows, const std::int32_t* rowptr,
              const std::int32_t* colidx, const double* val,
              const double* x, double* y);
} // namespace scalar_impl

#if defined(__x86_64__) || defined(_M_X64)
#define OPTCON_HAVE_AVX2_KERNELS 1
namespace avx2_impl {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void mul(const double* x, const double* y, double* z, std::size_t n);
void csr_spmv(std::size_t nrows, const std::int32_t* rowptr,
              const std::int32_t* colidx, const double* val,
              const double* x, double* y);
} // namespace avx2_impl
#endif

} // namespace optcon::kernels

#endif // OPTCON_KERNELS_HPP
