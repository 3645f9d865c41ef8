// SPDX-License-Identifier: Apache-2.0

#ifndef OPTCON_VECTOR_HPP
#define OPTCON_VECTOR_HPP

#include "optcon/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace optcon {

using Vector = std::vector<double>;

inline double dot(const Vector& x, const Vector& y)
{
    if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
    return kernels::dot(x.data(), y.data(), x.size());
}

inline double norm2(const Vector& x)
{
    return std::sqrt(kernels::dot(x.data(), x.data(), x.size()));
}

/// y += a*x
inline void axpy(double a, const Vector& x, Vector& y)
{
    if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
    kernels::axpy(a, x.data(), y.data(), x.size());
}

inline void scale(double a, Vector& x) { kernels::scale(a, x.data(), x.size()); }

inline Vector scaled(double a, Vector x)
{
    scale(a, x);
    return x;
}

/// z = x .* y
inline Vector hadamard(const Vector& x, const Vector& y)
{
    if (x.size() != y.size()) throw std::invalid_argument("hadamard: size mismatch");
    Vector z(x.size());
    kernels::mul(x.data(), y.data(), z.data(), x.size());
    return z;
}

inline Vector operator+(Vector a, const Vector& b)
{
    axpy(1.0, b, a);
    return a;
}

inline Vector operator-(Vector a, const Vector& b)
{
    axpy(-1.0, b, a);
    return a;
}

inline bool all_finite(const Vector& x)
{
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

inline void require_finite(const Vector& x, const char* where)
{
    if (!all_finite(x)) throw std::runtime_error(std::string(where) + ": non-finite entry");
}

/// Concatenate blocks into one vector.
inline Vector concat(const Vector& a, const Vector& b)
{
    Vector r;
    r.reserve(a.size() + b.size());
    r.insert(r.end(), a.begin(), a.end());
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

inline Vector segment(const Vector& x, std::size_t begin, std::size_t len)
{
    if (begin + len > x.size()) throw std::out_of_range("segment: out of range");
    return Vector(x.begin() + begin, x.begin() + begin + len);
}

} // namespace optcon

#endif // OPTCON_VECTOR_HPP
