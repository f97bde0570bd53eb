#pragma once

#include "reslab/types.hpp"

#include <vector>

namespace reslab {

// tridiagonal complex matrix: lower(i) = A(i+1,i), upper(i) = A(i,i+1)
struct Tridiag {
    CVec lower, diag, upper;

    Tridiag() = default;
    explicit Tridiag(int n) : lower(CVec::Zero(n - 1)), diag(CVec::Zero(n)), upper(CVec::Zero(n - 1)) {}

    int size() const { return static_cast<int>(diag.size()); }
    CVec apply(const CVec& x) const;
    CMat apply_block(const CMat& x) const;
    Tridiag adjoint() const;
    // alpha * I + beta * this
    Tridiag affine(cplx alpha, cplx beta) const;
    CMat dense() const;
};

// LU with partial pivoting (LAPACK gttrf)
class TridiagLU {
public:
    explicit TridiagLU(const Tridiag& m);

    CVec solve(const CVec& rhs) const;
    CMat solve_block(const CMat& rhs) const;
    // reciprocal condition number estimate in the 1-norm
    double rcond() const;
    // det / |det| and log|det|, accumulated without overflow
    cplx det_phase() const;
    double log_abs_det() const;

private:
    int n_ = 0;
    double anorm_ = 0.0;
    std::vector<cplx> dl_, d_, du_, du2_;
    std::vector<int> ipiv_;
};

// general band matrix in LAPACK storage, solved with gbsv
class BandMatrix {
public:
    BandMatrix(int n, int kl, int ku);
    void set(int i, int j, cplx v);
    void add(int i, int j, cplx v);
    cplx get(int i, int j) const;
    int size() const { return n_; }
    CVec apply(const CVec& x) const;
    CVec solve(const CVec& rhs) const;

private:
    int n_, kl_, ku_, ldab_;
    std::vector<cplx> ab_;
    cplx& at(int i, int j);
    const cplx& at(int i, int j) const;
};

}  // namespace reslab
