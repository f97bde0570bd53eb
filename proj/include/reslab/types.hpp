#pragma once

#include <complex>
#include <Eigen/Dense>

namespace reslab {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// square root with arg z in [-pi/2, 3pi/2); the cut is the negative imaginary axis
cplx sqrt_branch(cplx z);

// L2 norm with grid weight dx
double l2_norm(const CVec& u, double dx);

}  // namespace reslab
