#include "reslab/banded.hpp"
#include "reslab/error.hpp"

#include "lapacke_cpp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace reslab {

CVec Tridiag::apply(const CVec& x) const
{
    const int n = size();
    CVec y = diag.cwiseProduct(x);
    if (n > 1) {
        y.head(n - 1) += upper.cwiseProduct(x.tail(n - 1));
        y.tail(n - 1) += lower.cwiseProduct(x.head(n - 1));
    }
    return y;
}

CMat Tridiag::apply_block(const CMat& x) const
{
    CMat y(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) y.col(j) = apply(CVec(x.col(j)));
    return y;
}

Tridiag Tridiag::adjoint() const
{
    Tridiag t;
    t.diag = diag.conjugate();
    t.lower = upper.conjugate();
    t.upper = lower.conjugate();
    return t;
}

Tridiag Tridiag::affine(cplx alpha, cplx beta) const
{
    Tridiag t;
    t.diag = beta * diag;
    t.diag.array() += alpha;
    t.lower = beta * lower;
    t.upper = beta * upper;
    return t;
}

CMat Tridiag::dense() const
{
    const int n = size();
    CMat m = CMat::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = diag(i);
    for (int i = 0; i + 1 < n; ++i) {
        m(i, i + 1) = upper(i);
        m(i + 1, i) = lower(i);
    }
    return m;
}

TridiagLU::TridiagLU(const Tridiag& m) : n_(m.size())
{
    dl_.assign(m.lower.data(), m.lower.data() + m.lower.size());
    d_.assign(m.diag.data(), m.diag.data() + m.diag.size());
    du_.assign(m.upper.data(), m.upper.data() + m.upper.size());
    du2_.assign(std::max(n_ - 2, 1), cplx(0.0));
    ipiv_.assign(n_, 0);
    // 1-norm for the condition estimate
    for (int j = 0; j < n_; ++j) {
        double s = std::abs(d_[j]);
        if (j > 0) s += std::abs(du_[j - 1]);
        if (j + 1 < n_) s += std::abs(dl_[j]);
        anorm_ = std::max(anorm_, s);
    }
    if (n_ == 1) dl_.resize(1), du_.resize(1);
    lapack_int info = LAPACKE_zgttrf(n_, dl_.data(), d_.data(), du_.data(), du2_.data(), ipiv_.data());
    if (info < 0) throw Error(ErrorKind::FactorizationFailure, "gttrf argument " + std::to_string(-info));
    if (info > 0) throw Error(ErrorKind::FactorizationFailure, "exactly singular pivot at row " + std::to_string(info));
}

CVec TridiagLU::solve(const CVec& rhs) const
{
    CVec x = rhs;
    lapack_int info = LAPACKE_zgttrs(LAPACK_COL_MAJOR, 'N', n_, 1, dl_.data(), d_.data(), du_.data(), du2_.data(),
                                     ipiv_.data(), reinterpret_cast<lapack_complex_double*>(x.data()), n_);
    if (info != 0) throw Error(ErrorKind::FactorizationFailure, "gttrs failed");
    return x;
}

CMat TridiagLU::solve_block(const CMat& rhs) const
{
    CMat x = rhs;
    lapack_int info = LAPACKE_zgttrs(LAPACK_COL_MAJOR, 'N', n_, static_cast<lapack_int>(x.cols()), dl_.data(),
                                     d_.data(), du_.data(), du2_.data(), ipiv_.data(),
                                     reinterpret_cast<lapack_complex_double*>(x.data()), n_);
    if (info != 0) throw Error(ErrorKind::FactorizationFailure, "gttrs failed");
    return x;
}

double TridiagLU::rcond() const
{
    double rc = 0.0;
    lapack_int info =
        LAPACKE_zgtcon('1', n_, dl_.data(), d_.data(), du_.data(), du2_.data(), ipiv_.data(), anorm_, &rc);
    if (info != 0) throw Error(ErrorKind::FactorizationFailure, "gtcon failed");
    return rc;
}

cplx TridiagLU::det_phase() const
{
    cplx ph = 1.0;
    for (int i = 0; i < n_; ++i) {
        ph *= d_[i] / std::abs(d_[i]);
        if (ipiv_[i] != i + 1) ph = -ph;
        ph /= std::abs(ph);
    }
    return ph;
}

double TridiagLU::log_abs_det() const
{
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += std::log(std::abs(d_[i]));
    return s;
}

BandMatrix::BandMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1)
{
    ab_.assign(static_cast<size_t>(ldab_) * n_, cplx(0.0));
}

cplx& BandMatrix::at(int i, int j)
{
    if (i - j > kl_ || j - i > ku_ || i < 0 || j < 0 || i >= n_ || j >= n_)
        throw Error(ErrorKind::InvalidParameter, "band entry out of range");
    return ab_[static_cast<size_t>(j) * ldab_ + kl_ + ku_ + i - j];
}

const cplx& BandMatrix::at(int i, int j) const
{
    return const_cast<BandMatrix*>(this)->at(i, j);
}

void BandMatrix::set(int i, int j, cplx v) { at(i, j) = v; }
void BandMatrix::add(int i, int j, cplx v) { at(i, j) += v; }

cplx BandMatrix::get(int i, int j) const
{
    if (i - j > kl_ || j - i > ku_) return 0.0;
    return at(i, j);
}

CVec BandMatrix::apply(const CVec& x) const
{
    CVec y = CVec::Zero(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) y(i) += at(i, j) * x(j);
    return y;
}

CVec BandMatrix::solve(const CVec& rhs) const
{
    std::vector<cplx> ab = ab_;
    std::vector<lapack_int> ipiv(n_);
    CVec x = rhs;
    lapack_int info = LAPACKE_zgbsv(LAPACK_COL_MAJOR, n_, kl_, ku_, 1, ab.data(), ldab_, ipiv.data(),
                                    reinterpret_cast<lapack_complex_double*>(x.data()), n_);
    if (info != 0) throw Error(ErrorKind::FactorizationFailure, "gbsv failed with info " + std::to_string(info));
    return x;
}

}  // namespace reslab
