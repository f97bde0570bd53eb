#include "reslab/scattering.hpp"
#include "reslab/banded.hpp"
#include "reslab/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace reslab {

InterfaceParams::InterfaceParams(cplx theta0_, double h_, cplx theta_) : theta0(theta0_), theta(theta_), h(h_)
{
    if (!(h > 0.0)) throw Error(ErrorKind::InvalidParameter, "h must be positive");
    if (std::abs(theta.imag()) >= kPi / 4) throw Error(ErrorKind::InvalidParameter, "|Im theta| must be below pi/4");
    c_plus = std::exp(theta0 / 2.0) + std::exp(1.5 * theta0);
    c_minus = std::exp(theta0 / 2.0) - std::exp(1.5 * theta0);
}

ScatteringCoeffs free_coeffs(double k, const InterfaceParams& params, double a, double b)
{
    if (k == 0.0) throw Error(ErrorKind::InvalidParameter, "k must be nonzero");
    if (params.theta != cplx(0.0)) throw Error(ErrorKind::InvalidParameter, "free coefficients need theta = 0");
    const double h = params.h;
    const double L = b - a;
    const double kp = std::abs(k);
    const cplx cp = params.c_plus, cm = params.c_minus;
    const cplx e = std::exp(kI * kp * L / h);
    const cplx ea = std::exp(2.0 * kI * kp * a / h);
    ScatteringCoeffs s;
    s.k = k;
    s.side = k > 0 ? 1 : -1;
    s.d = cp * cp / e - cm * cm * e;
    if (std::abs(s.d) < 1e-14) throw Error(ErrorKind::DegenerateDenominator, "|d(theta0,k)| below 1e-14");
    if (std::abs(params.theta0) <= 0.2 && std::abs(s.d) < 1.0)
        throw Error(ErrorKind::DegenerateDenominator, "|d| < 1 in the small-theta0 regime");
    s.a_coef = 2.0 * cp / e / s.d;
    s.b_coef = -2.0 * cm * ea * e / s.d;
    s.t_coef = (cp * cp - cm * cm) / e / s.d;
    s.r_coef = -2.0 * kI * cp * cm * ea * std::sin(kp * L / h) / s.d;
    if (k < 0) {
        // incoming from the right
        const cplx ph = std::exp(4.0 * kI * k * a / h) * std::exp(2.0 * kI * k * L / h);
        s.b_coef *= ph;
        s.r_coef *= ph;
    }
    return s;
}

std::array<cplx, 4> interface_residuals(const ScatteringCoeffs& s, const InterfaceParams& params, double a, double b)
{
    const double h = params.h, k = s.k;
    const cplx q = std::exp(-params.theta0 / 2.0), p = std::exp(-1.5 * params.theta0);
    auto ep = [&](double x) { return std::exp(kI * k * x / h); };
    auto em = [&](double x) { return std::exp(-kI * k * x / h); };
    const cplx ik = kI * k;  // h * d/dx of e^{ikx/h}
    auto mid = [&](double x) { return s.a_coef * ep(x) + s.b_coef * em(x); };
    auto dmid = [&](double x) { return ik * (s.a_coef * ep(x) - s.b_coef * em(x)); };
    cplx left, dleft, right, dright;
    if (k > 0) {
        left = ep(a) + s.r_coef * em(a);
        dleft = ik * (ep(a) - s.r_coef * em(a));
        right = s.t_coef * ep(b);
        dright = ik * s.t_coef * ep(b);
    } else {
        left = s.t_coef * ep(a);
        dleft = ik * s.t_coef * ep(a);
        right = ep(b) + s.r_coef * em(b);
        dright = ik * (ep(b) - s.r_coef * em(b));
    }
    return {mid(a) - q * left, dmid(a) - p * dleft, mid(b) - q * right, dmid(b) - p * dright};
}

double intertwiner_deviation(const InterfaceParams& params, const std::vector<double>& k_grid, double a, double b)
{
    if (std::abs(params.theta0) > 0.2) throw Error(ErrorKind::InvalidParameter, "needs |theta0| <= 0.2");
    double worst = 0.0;
    for (double k : k_grid) {
        const auto s = free_coeffs(k, params, a, b);
        const double dev =
            std::abs(s.a_coef - 1.0) + std::abs(s.b_coef) + std::abs(s.t_coef - 1.0) + std::abs(s.r_coef);
        worst = std::max(worst, dev);
    }
    return worst;
}

GeneralizedEigenfunction generalized_eigenfunction(const PotentialSpec& spec, double k, const InterfaceParams& params,
                                                   const Grid& grid)
{
    if (k == 0.0) throw Error(ErrorKind::InvalidParameter, "k must be nonzero");
    if (spec.inf_barrier() - k * k < spec.c()) {
        std::ostringstream os;
        os << "tunneling regime needs V - k^2 >= c, got inf V - k^2 = " << spec.inf_barrier() - k * k;
        throw Error(ErrorKind::InvalidParameter, os.str());
    }
    spec.check_on_grid(grid);
    const double h = params.h, dx = grid.dx;
    const int i0 = grid.idx_a, m = grid.idx_b - grid.idx_a;
    const RVec vfull = spec.sample_barrier(grid);
    RVec v(m + 1);
    for (int i = 0; i <= m; ++i) v(i) = vfull(i0 + i);
    const double a = grid.a(), b = grid.b();
    const cplx kappa = std::abs(k) * std::exp(-params.theta0);
    const cplx data = 2.0 * kI * k * std::exp(-1.5 * params.theta0) * std::exp(kI * k * (k > 0 ? a : b) / h);
    const cplx ga = k > 0 ? data : 0.0;
    const cplx gb = k > 0 ? 0.0 : data;

    const double s = h * h / (dx * dx);
    Tridiag t(m + 1);
    CVec rhs = CVec::Zero(m + 1);
    for (int i = 1; i < m; ++i) {
        t.diag(i) = 2 * s + v(i) - k * k;
        t.lower(i - 1) = -s;
        t.upper(i) = -s;
    }
    // one-sided second-order Robin rows, far neighbour eliminated with the adjacent interior row
    const double q1 = dx * dx * (v(1) - k * k) / (h * h);
    const double qm = dx * dx * (v(m - 1) - k * k) / (h * h);
    t.diag(0) = -h / dx + kI * kappa;
    t.upper(0) = h / (2 * dx) * (2 - q1);
    rhs(0) = ga;
    t.diag(m) = h / dx - kI * kappa;
    t.lower(m - 1) = h / (2 * dx) * (qm - 2);
    rhs(m) = gb;

    TridiagLU lu(t);
    const double rc = lu.rcond();
    if (rc < 1e-13) {
        std::ostringstream os;
        os << "Robin system numerically singular, rcond = " << rc;
        throw Error(ErrorKind::SingularRobinSystem, os.str());
    }
    GeneralizedEigenfunction g;
    g.k = k;
    g.interior = lu.solve(rhs);
    g.x.resize(m + 1);
    for (int i = 0; i <= m; ++i) g.x(i) = grid.x(i0 + i);
    const CVec& u = g.interior;

    const cplx ra = h * (-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2 * dx) + kI * kappa * u(0) - ga;
    const cplx rb = h * (3.0 * u(m) - 4.0 * u(m - 1) + u(m - 2)) / (2 * dx) - kI * kappa * u(m) - gb;
    g.bc_residual = (std::abs(ra) + std::abs(rb)) / std::abs(data);

    const cplx half = std::exp(params.theta0 / 2.0);
    auto& c = g.coeffs;
    c.k = k;
    c.side = k > 0 ? 1 : -1;
    // interior amplitudes are not plane-wave coefficients once V is present
    c.a_coef = c.b_coef = c.d = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    if (k > 0) {
        const cplx ea = std::exp(kI * k * a / h);
        c.r_coef = (half * u(0) - ea) * ea;
        c.t_coef = half * u(m) * std::exp(-kI * k * b / h);
    } else {
        const cplx eb = std::exp(kI * k * b / h);
        c.r_coef = (half * u(m) - eb) * eb;
        c.t_coef = half * u(0) * std::exp(-kI * k * a / h);
    }
    const double src = k > 0 ? a : b;
    double wsup = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double phi = agmon_distance(grid, vfull, k * k, src, g.x(i));
        wsup = std::max(wsup, std::exp(phi / h) * std::abs(u(i)));
    }
    g.weighted_sup = wsup;
    return g;
}

}  // namespace reslab
