// SPDX-License-Identifier: Apache-2.0

#include "optcon/dense_eig.hpp"

#include <Eigen/Dense>

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

void check_cap(const SparseMatrix& A, const char* where)
{
    if (A.rows() > kDenseVerificationCap || A.cols() > kDenseVerificationCap)
        throw std::invalid_argument(std::string(where) + ": size exceeds verification cap");
}

} // namespace

Vector dense_eig_sym(const SparseMatrix& A)
{
    check_cap(A, "dense_eig_sym");
    if (!A.is_symmetric()) throw std::invalid_argument("dense_eig_sym: matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(densify(A), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return Vector(ev.data(), ev.data() + ev.size());
}

Vector generalized_eig(const SparseMatrix& A, const SparseMatrix& B)
{
    check_cap(A, "generalized_eig");
    if (A.rows() != B.rows() || A.cols() != B.cols() || A.rows() != A.cols())
        throw std::invalid_argument("generalized_eig: dimension mismatch");
    if (!B.is_symmetric()) throw std::invalid_argument("generalized_eig: B not symmetric");

    const Eigen::MatrixXd Bd = densify(B);
    Eigen::LLT<Eigen::MatrixXd> llt(Bd);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("generalized_eig: B not positive definite");

    const Eigen::MatrixXd Ad = densify(A);
    if (A.is_symmetric(1e-12)) {
        // Cholesky similarity: eig(B^{-1}A) = eig(L^{-1} A L^{-T})
        const Eigen::MatrixXd L = llt.matrixL();
        const Eigen::MatrixXd C =
            L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(
                L.triangularView<Eigen::Lower>().solve(Ad).transpose())).transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (C + C.transpose()),
                                                          Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        return Vector(ev.data(), ev.data() + ev.size());
    }
    // non-symmetric A: real parts of the complex spectrum, sorted ascending
    const auto cplx = generalized_eig_complex(A, B);
    Vector re(cplx.size());
    for (std::size_t i = 0; i < cplx.size(); ++i) re[i] = cplx[i].real();
    std::sort(re.begin(), re.end());
    return re;
}

std::vector<std::complex<double>> generalized_eig_complex(const SparseMatrix& A,
                                                          const SparseMatrix& B)
{
    check_cap(A, "generalized_eig_complex");
    const Eigen::MatrixXd Bd = densify(B);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Bd);
    const Eigen::MatrixXd C = lu.solve(densify(A));
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    const auto& ev = es.eigenvalues();
    std::vector<std::complex<double>> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

struct DenseFactor::Impl {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    std::int32_t n;
};

DenseFactor::DenseFactor(const SparseMatrix& A)
{
    check_cap(A, "DenseFactor");
    if (A.rows() != A.cols()) throw std::invalid_argument("DenseFactor: matrix not square");
    impl_ = std::make_unique<Impl>();
    impl_->n = A.rows();
    impl_->lu.compute(densify(A));
}

DenseFactor::DenseFactor(std::vector<double> data, std::int32_t n)
{
    if (static_cast<std::size_t>(n) * static_cast<std::size_t>(n) != data.size())
        throw std::invalid_argument("DenseFactor: bad data size");
    impl_ = std::make_unique<Impl>();
    impl_->n = n;
    impl_->lu.compute(Eigen::Map<const Eigen::MatrixXd>(data.data(), n, n));
}

DenseFactor::~DenseFactor() = default;
DenseFactor::DenseFactor(DenseFactor&&) noexcept = default;
DenseFactor& DenseFactor::operator=(DenseFactor&&) noexcept = default;

Vector DenseFactor::solve(const Vector& rhs) const
{
    if (static_cast<std::int32_t>(rhs.size()) != impl_->n)
        throw std::invalid_argument("DenseFactor::solve: dimension mismatch");
    Eigen::VectorXd x = impl_->lu.solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), impl_->n));
    return Vector(x.data(), x.data() + x.size());
}

std::int32_t DenseFactor::size() const { return impl_->n; }

} // namespace optcon
