#pragma once

#include "reslab/model.hpp"
#include "reslab/types.hpp"

#include <array>
#include <vector>

namespace reslab {

struct InterfaceParams {
    cplx theta0 = 0.0;
    cplx theta = 0.0;
    double h = 0.1;
    cplx c_plus = 2.0;   // e^{theta0/2} + e^{3 theta0/2}
    cplx c_minus = 0.0;  // e^{theta0/2} - e^{3 theta0/2}

    InterfaceParams() = default;
    InterfaceParams(cplx theta0_, double h_, cplx theta_ = 0.0);
};

struct ScatteringCoeffs {
    cplx a_coef, b_coef, t_coef, r_coef;
    cplx d;
    double k = 0.0;
    int side = 1;
};

ScatteringCoeffs free_coeffs(double k, const InterfaceParams& params, double a, double b);

// value and derivative mismatches of the free ansatz at a and at b
std::array<cplx, 4> interface_residuals(const ScatteringCoeffs& s, const InterfaceParams& params, double a, double b);

double intertwiner_deviation(const InterfaceParams& params, const std::vector<double>& k_grid, double a = -1.0,
                             double b = 1.0);

struct GeneralizedEigenfunction {
    double k = 0.0;
    RVec x;           // nodes of [a,b]
    CVec interior;    // psi on those nodes
    ScatteringCoeffs coeffs;
    double weighted_sup = 0.0;
    double bc_residual = 0.0;  // relative Robin residual
};

// filled-well generalized eigenfunction through the interior Robin problem
GeneralizedEigenfunction generalized_eigenfunction(const PotentialSpec& spec, double k, const InterfaceParams& params,
                                                   const Grid& grid);

}  // namespace reslab
