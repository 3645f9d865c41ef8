// SPDX-License-Identifier: Apache-2.0

#include "optcon/kernels.hpp"

#include <stdexcept>

namespace optcon::kernels {

namespace scalar_impl {

double dot(const double* x, const double* y, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void mul(const double* x, const double* y, double* z, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

void csr_spmv(std::size_t nrows, const std::int32_t* rowptr,
              const std::int32_t* colidx, const double* val,
              const double* x, double* y)
{
    for (std::size_t i = 0; i < nrows; ++i) {
        double s = 0.0;
        for (std::int32_t k = rowptr[i]; k < rowptr[i + 1]; ++k)
            s += val[k] * x[colidx[k]];
        y[i] = s;
    }
}

} // namespace scalar_impl

namespace {

struct Dispatch {
    Backend backend;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
    void (*mul)(const double*, const double*, double*, std::size_t);
    void (*csr_spmv)(std::size_t, const std::int32_t*, const std::int32_t*,
                     const double*, const double*, double*);
};

constexpr Dispatch scalar_table = {
    Backend::scalar,   scalar_impl::dot, scalar_impl::axpy,
    scalar_impl::scale, scalar_impl::mul, scalar_impl::csr_spmv,
};

#ifdef OPTCON_HAVE_AVX2_KERNELS
constexpr Dispatch avx2_table = {
    Backend::avx2,    avx2_impl::dot, avx2_impl::axpy,
    avx2_impl::scale, avx2_impl::mul, avx2_impl::csr_spmv,
};
#endif

const Dispatch* select_default()
{
#ifdef OPTCON_HAVE_AVX2_KERNELS
    if (cpu_has_avx2()) return &avx2_table;
#endif
    return &scalar_table;
}

const Dispatch*& table()
{
    static const Dispatch* t = select_default();
    return t;
}

} // namespace

bool cpu_has_avx2()
{
#ifdef OPTCON_HAVE_AVX2_KERNELS
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

Backend active_backend() { return table()->backend; }

const char* backend_name()
{
    return table()->backend == Backend::avx2 ? "avx2" : "scalar";
}

void set_backend(Backend b)
{
    if (b == Backend::scalar) {
        table() = &scalar_table;
        return;
    }
#ifdef OPTCON_HAVE_AVX2_KERNELS
    if (cpu_has_avx2()) {
        table() = &avx2_table;
        return;
    }
#endif
    throw std::runtime_error("kernels: AVX2 backend not supported on this CPU");
}

double dot(const double* x, const double* y, std::size_t n) { return table()->dot(x, y, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { table()->axpy(a, x, y, n); }
void scale(double a, double* x, std::size_t n) { table()->scale(a, x, n); }
void mul(const double* x, const double* y, double* z, std::size_t n) { table()->mul(x, y, z, n); }
void csr_spmv(std::size_t nrows, const std::int32_t* rowptr,
              const std::int32_t* colidx, const double* val,
              const double* x, double* y)
{
    table()->csr_spmv(nrows, rowptr, colidx, val, x, y);
}

} // namespace optcon::kernels
