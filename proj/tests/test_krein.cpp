#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "reslab/error.hpp"
#include "reslab/fit.hpp"
#include "reslab/krein.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

using namespace reslab;

namespace {

PotentialSpec single_delta(double alpha) { return constant_barrier(0, 1, 1.0, 0.2, {{0.5, alpha, {}}}); }

// continuum resonances of the alpha = 1 benchmark from the exact interior solutions
struct ResonanceOracle {
    double h;
    double tau;
    cplx z;
};
const ResonanceOracle kOracle[] = {
    {0.1, 0.0, {0.75324536944837912, -0.006218264967848118}},
    {0.1, 1e-5, {0.75324539653630537, -0.0062183217926279142}},
    {0.1, 1e-4, {0.7532456403504673, -0.006218833234149613}},
    {0.1, 1e-3, {0.75324808075353329, -0.0062239494820003794}},
    {0.1, 0.2, {0.75390630536613584, -0.0074441907940906083}},
    {0.066, 0.0, {0.75025512703608805, -0.00044734883684841863}},
    {0.05, 0.0, {0.75002268549042871, -3.9352014492581e-5}},
};

}  // namespace

TEST_CASE("interior boundary value problems")
{
    auto spec = constant_barrier(0, 1, 1.0, 0.2);
    Grid g = build_grid(0, 1, 4000, 0, 1);
    SemiclassicalParams p(0.1, 0.2);
    auto u2 = solve_interior_bvp(spec, 0.5, p, g, BvpKind::U2);
    auto u3 = solve_interior_bvp(spec, 0.5, p, g, BvpKind::U3);
    const double kap = std::sqrt(0.5) / 0.1;
    double err = 0;
    for (int i = 0; i < u2.u.size(); ++i) {
        const double x = g.x(i);
        err = std::max(err, std::abs(u2.u(i) - std::sinh(kap * x) / std::sinh(kap)));
        err = std::max(err, std::abs(u3.u(i) - std::sinh(kap * (1 - x)) / std::sinh(kap)));
    }
    CHECK(err < 1e-6);
    CHECK(u2.u(0) == cplx(0.0));
    CHECK(u2.u(u2.u.size() - 1) == cplx(1.0));
    CHECK(u3.u(0) == cplx(1.0));
    CHECK(u3.u(u3.u.size() - 1) == cplx(0.0));
    CHECK(u2.residual < 1e-12);
    CHECK(std::abs(u2.du_b - kap / std::tanh(kap)) / std::abs(u2.du_b) < 1e-5);

    // |u2'(a)| ~ e^{-d_Ag(a,b)/h}
    std::vector<double> inv_h, logd;
    for (double h : {0.1, 0.05, 0.025}) {
        auto s = solve_interior_bvp(spec, 0.5, SemiclassicalParams(h, 0.2), g, BvpKind::U2);
        inv_h.push_back(1 / h);
        logd.push_back(std::log(std::abs(s.du_a)));
    }
    const double slope = fit_line(inv_h, logd).slope;
    CHECK(slope == doctest::Approx(-std::sqrt(0.5)).epsilon(0.15));

    // lowest eigenvalue of the discrete Dirichlet problem
    Grid coarse = build_grid(0, 1, 100, 0, 1);
    const double lam1 = 1.0 + 2 * 0.01 / (coarse.dx * coarse.dx) * (1 - std::cos(kPi * coarse.dx));
    CHECK_THROWS_AS(solve_interior_bvp(spec, lam1, p, coarse, BvpKind::U2), Error);
}

TEST_CASE("Krein matrices")
{
    auto spec = constant_barrier(0, 1, 1.0, 0.2);
    Grid g = build_grid(0, 1, 2000, 0, 1);
    const double h = 0.1;
    InterfaceParams ip(0.0, h);
    const cplx z = -1.0;
    auto u2 = solve_interior_bvp(spec, z, SemiclassicalParams(h, 0.2), g, BvpKind::U2);
    auto u3 = solve_interior_bvp(spec, z, SemiclassicalParams(h, 0.2), g, BvpKind::U3);
    auto km = q_matrix(z, ip, u2, u3);
    CHECK((km.b_mat * km.b_mat - Eigen::Matrix4cd::Identity()).norm() == 0.0);

    // block factorization: h^8 det = Delta+ Delta- det(1 + R M^{-1})
    const cplx ext = kI * h / sqrt_branch(z);
    const cplx dp = 1.0 + ext * u2.du_b, dm = 1.0 - ext * u3.du_a;
    Eigen::Matrix4cd minv = Eigen::Matrix4cd::Zero();
    minv(0, 0) = 1.0 / dp;
    minv(0, 1) = u2.du_b / dp;
    minv(1, 0) = -ext / dp;
    minv(1, 1) = 1.0 / dp;
    minv(2, 2) = -1.0 / dm;
    minv(2, 3) = -ext / dm;
    minv(3, 2) = -u3.du_a / dm;
    minv(3, 3) = -1.0 / dm;
    Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
    r(0, 2) = u3.du_b;
    r(3, 1) = -u2.du_a;
    const cplx product = dp * dm * (Eigen::Matrix4cd::Identity() + r * minv).determinant();
    CHECK(std::abs(km.char_value - product) < 1e-10 * std::abs(product));

    // continuum value for V = 1, z = -1: u2'(b) = -u3'(a) = k coth k, u2'(a) = -u3'(b) = k / sinh k
    Grid fine = build_grid(0, 1, 8000, 0, 1);
    km = q_matrix(z, ip, solve_interior_bvp(spec, z, SemiclassicalParams(h, 0.2), fine, BvpKind::U2),
                  solve_interior_bvp(spec, z, SemiclassicalParams(h, 0.2), fine, BvpKind::U3));
    const double k = std::sqrt(2.0) / h;
    const double co = k / std::tanh(k), cs = k / std::sinh(k);
    Eigen::Matrix4cd exact;
    exact << 1.0, -co, -cs, 0.0, ext, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, ext, 0.0, -cs, -co, -1.0;
    CHECK(std::abs(km.char_value - exact.determinant()) < 1e-5 * std::abs(exact.determinant()));

    for (cplx zz : {cplx(-1.0, 0.0), cplx(-0.5, 0.2), cplx(-2.0, -0.1)}) {
        auto a2 = solve_interior_bvp(spec, zz, SemiclassicalParams(h, 0.2), g, BvpKind::U2);
        auto a3 = solve_interior_bvp(spec, zz, SemiclassicalParams(h, 0.2), g, BvpKind::U3);
        auto q0 = q_matrix(zz, InterfaceParams(0.0, h, 0.0), a2, a3).q;
        for (double t : {0.1, 0.2}) {
            auto qt = q_matrix(zz, InterfaceParams(0.0, h, cplx(0, t)), a2, a3).q;
            CHECK((qt - q0).norm() < 1e-12 * q0.norm());
        }
    }
}

TEST_CASE("characteristic function")
{
    auto spec = constant_barrier(0, 1, 1.0, 0.2);
    Grid g = build_grid(0, 1, 2000, 0, 1);
    for (double z : {0.3, 0.6, 0.9})
        CHECK(std::abs(char_function(z, spec, InterfaceParams(0.0, 0.1), g)) > 1e-3);

    auto wells = single_delta(1.0);
    CounterRng rng(3);
    // reflection maps the outgoing exterior root onto itself only where both roots lie on the
    // Im > 0 sheet, i.e. Re(z e^{2 theta}) < 0; on the continuation sheet it maps outgoing to incoming
    for (int n = 0; n < 20; ++n) {
        const cplx z(rng.next(-2.0, -0.3), rng.next(-0.3, 0.3));
        const cplx th0(rng.next(-0.05, 0.05), rng.next(0.0, 0.2));
        const cplx lhs = char_function(std::conj(z), wells, InterfaceParams(std::conj(th0), 0.1, std::conj(th0)), g);
        const cplx rhs = std::conj(char_function(z, wells, InterfaceParams(th0, 0.1, th0), g));
        CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(rhs));
    }

    for (cplx z : {cplx(-1.0, 0.0), cplx(-0.4, 0.3), cplx(-1.5, -0.05)}) {
        std::vector<cplx> vals;
        for (double t : {0.0, 0.1, 0.2})
            vals.push_back(char_function(z, wells, InterfaceParams(cplx(0, 0.1), 0.1, cplx(0, t)), g));
        double spread = 0;
        for (auto v : vals) spread = std::max(spread, std::abs(v - vals[0]));
        CHECK(spread < 1e-8 * std::abs(vals[0]));
    }
}

TEST_CASE("Dirichlet eigenpairs")
{
    const double h = 0.1;
    Grid g = build_grid(0, 1, 2000, 0, 1);
    auto spec = single_delta(2.0);
    auto eig = dirichlet_eigs(spec, SemiclassicalParams(h, 0.2), g, -1.0, 1.0);
    REQUIRE(eig.lambdas.size() == 1);
    CHECK(eig.lambdas(0) < 1.0);

    // tridiagonal QL from Eigen as an independent eigensolver
    const int n = static_cast<int>(eig.x.size());
    const double s = h * h / (g.dx * g.dx);
    RVec d(n), e = RVec::Constant(n - 1, -s);
    const RVec pot = spec.sample_barrier(g) + spec.sample_wells(g, h);
    for (int i = 0; i < n; ++i) d(i) = 2 * s + pot(eig.first_node + i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ql;
    ql.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    CHECK(std::abs(ql.eigenvalues()(0) - eig.lambdas(0)) < 1e-9);
    CHECK(ql.eigenvalues()(1) > 1.0);

    const RVec phi = eig.phis.col(0).real();
    Eigen::Index imax;
    phi.cwiseAbs().maxCoeff(&imax);
    CHECK(std::abs(eig.x(imax) - 0.5) < 1e-12);
    CHECK(std::abs(phi(imax - 40) - phi(imax + 40)) < 1e-8 * phi(imax));

    auto many = dirichlet_eigs(single_delta(1.0), SemiclassicalParams(h, 0.2), g, 0.0, 3.0);
    REQUIRE(many.lambdas.size() >= 3);
    const RVec potm = single_delta(1.0).sample_barrier(g) + single_delta(1.0).sample_wells(g, h);
    for (int j = 0; j < many.lambdas.size(); ++j) {
        const CVec v = many.phis.col(j);
        CVec hv(n);
        for (int i = 0; i < n; ++i) {
            cplx acc = (2 * s + potm(many.first_node + i)) * v(i);
            if (i > 0) acc -= s * v(i - 1);
            if (i + 1 < n) acc -= s * v(i + 1);
            hv(i) = acc;
        }
        // residual relative to the operator norm 4 h^2/dx^2
        CHECK((hv - many.lambdas(j) * v).norm() * std::sqrt(g.dx) < 1e-10 * 4 * s);
        for (int k = 0; k < many.lambdas.size(); ++k) {
            const double ip = (many.phis.col(j).adjoint() * many.phis.col(k)).value().real() * g.dx;
            CHECK(std::abs(ip - (j == k ? 1.0 : 0.0)) < 1e-10);
        }
    }

    CHECK_THROWS_AS(dirichlet_eigs(constant_barrier(0, 1, 1.0, 0.2), SemiclassicalParams(h, 0.2), g, 0.2, 0.8),
                    Error);
}

TEST_CASE("Dirichlet eigenfunction decays at the Agmon rate")
{
    auto spec = single_delta(1.0);
    for (double h : {0.05, 0.03}) {
        Grid g = build_grid(0, 1, 4000, 0, 1);
        auto eig = dirichlet_eigs(spec, SemiclassicalParams(h, 0.2), g, 0.2, 0.8);
        const RVec v = spec.sample_barrier(g);
        std::vector<double> xs, ys;
        for (int i = 0; i < eig.x.size(); ++i) {
            const double x = eig.x(i);
            if (x < 0.15 || x > 0.45) continue;
            xs.push_back(-agmon_distance(g, v, eig.lambdas(0), x, 0.5) / h);
            ys.push_back(std::log(std::abs(eig.phis(i, 0))));
        }
        CHECK(fit_line(xs, ys).slope == doctest::Approx(1.0).epsilon(0.1));
    }
}

TEST_CASE("resonances of the single-delta benchmark")
{
    auto spec = single_delta(1.0);
    for (const auto& o : kOracle) {
        if (o.tau != 0.0 && o.tau != 0.2) continue;
        Grid g = build_grid(0, 1, 4000, 0, 1);
        InterfaceParams ip(cplx(0, o.tau), o.h);
        auto res = find_resonances(spec, ip, g, 0.2, 0.8);
        REQUIRE(res.records.size() == 1);
        const auto& r = res.records[0];
        CHECK(std::abs(res.winding[0] - 1.0) < 1e-3);
        CHECK(res.cluster_size[0] == 1);
        CHECK(r.z_res.imag() <= 1e-12);
        CHECK(r.newton_residual <= 1e-10 * r.char_scale);
        MESSAGE("h = " << o.h << " tau = " << o.tau << " z = " << r.z_res << " oracle " << o.z);
        // second-order discretization of the continuum resonance
        CHECK(std::abs(r.z_res.real() - o.z.real()) < 2e-6);
        CHECK(std::abs(r.z_res.imag() - o.z.imag()) < 2e-3 * std::abs(o.z.imag()));
        CHECK(r.fgr / r.gamma > 0.5);
        CHECK(r.fgr / r.gamma < 2.0);
    }
}

TEST_CASE("resonance shift is linear in theta0")
{
    auto spec = single_delta(1.0);
    Grid g = build_grid(0, 1, 4000, 0, 1);
    ResonanceOptions opts;
    opts.with_fgr = false;
    const cplx z0 = find_resonances(spec, InterfaceParams(0.0, 0.1), g, 0.2, 0.8, opts).records[0].z_res;
    std::vector<double> ratio;
    for (double t : {1e-3, 1e-4, 1e-5}) {
        const cplx zt = find_resonances(spec, InterfaceParams(cplx(0, t), 0.1), g, 0.2, 0.8, opts).records[0].z_res;
        ratio.push_back(std::abs(zt - z0) / t);
        for (const auto& o : kOracle)
            if (o.h == 0.1 && o.tau == t) {
                const cplx shift = o.z - kOracle[0].z;
                CHECK(std::abs((zt - z0) - shift) < 0.02 * std::abs(shift));
            }
    }
    for (double r : ratio) CHECK(r / ratio[0] == doctest::Approx(1.0).epsilon(0.5));
}

TEST_CASE("Fermi golden rule")
{
    Grid g = build_grid(0, 1, 4000, 0, 1);
    auto spec = single_delta(1.0);
    auto eig = dirichlet_eigs(spec, SemiclassicalParams(0.1, 0.2), g, 0.2, 0.8);
    const cplx z = kOracle[0].z;
    const double f0 = fermi_golden_rule(spec, InterfaceParams(0.0, 0.1), g, eig, 0, z);
    const double f5 = fermi_golden_rule(spec, InterfaceParams(cplx(0, 1e-5), 0.1), g, eig, 0, z);
    CHECK(std::abs(f0 - f5) <= 1e-2 * f0);
    // continuum value from the exact eigenfunctions
    CHECK(f0 == doctest::Approx(0.00627539007243).epsilon(2e-3));
    CHECK(fermi_golden_rule(constant_barrier(0, 1, 1.0, 0.2), InterfaceParams(0.0, 0.1), g, eig, 0, z) == 0.0);
}

TEST_CASE("Krein resolvent against the monolithic interface solve")
{
    auto spec = single_delta(1.0);
    const double h = 0.1;
    InterfaceParams ip(cplx(0, 0.2), h, cplx(0, 0.2));
    Grid g = build_grid(-12, 13, 10000, 0, 1);
    CounterRng rng(21);
    for (int n = 0; n < 3; ++n) {
        const double phi = rng.next(0, 2 * kPi);
        const cplx z = 0.75 + 0.1 * std::exp(kI * phi);
        const CVec f = oracle::random_bumps(g, rng, -1.5, 2.5);
        KreinResolvent kr(spec, ip, g, z);
        const PiecewiseSamples uk = kr.apply(f);
        const PiecewiseSamples um = oracle::monolithic_resolvent(spec, ip, g, z, f);
        const double rel = (uk - um).l2_norm(g.dx) / um.l2_norm(g.dx);
        MESSAGE("z = " << z << " relative difference " << rel);
        CHECK(rel < 1e-6);
    }

    // the correction has rank four
    KreinResolvent kr(spec, ip, g, cplx(0.7, 0.05));
    Eigen::MatrixXcd cols(g.n_points + 2, 8);
    for (int k = 0; k < 8; ++k) {
        const PiecewiseSamples c = kr.correction(oracle::random_bumps(g, rng, -1.5, 2.5, 2));
        cols.col(k) << c.left, c.interior, c.right;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(cols);
    const RVec sv = svd.singularValues();
    int rank = 0;
    for (int k = 0; k < sv.size(); ++k)
        if (sv(k) > 1e-10 * sv(0)) ++rank;
    CHECK(rank == 4);
}

TEST_CASE("nearly free interior reproduces the free resolvent")
{
    // V = 1e-6 on (0,1): the Krein route must reproduce the free Green function away from the data
    const double eps = 1e-6;
    auto spec = constant_barrier(0, 1, eps, eps);
    const double h = 0.1;
    const cplx z(0.5, 0.3);
    Grid g = build_grid(-10, 11, 2000, 0, 1);
    CVec f(g.n_points);
    for (int i = 0; i < g.n_points; ++i) f(i) = std::exp(-0.5 * std::pow((g.x(i) + 1.5) / 0.2, 2));
    const PiecewiseSamples u = krein_resolvent_apply(spec, InterfaceParams(0.0, h), g, z, f);
    const cplx k = std::sqrt(z);
    double err = 0, scale = 0;
    for (int i = g.idx_a; i <= g.idx_b; i += 50) {
        cplx acc = 0.0;
        for (int j = 0; j < g.n_points; ++j)
            acc += kI / (2 * h * k) * std::exp(kI * k * std::abs(g.x(i) - g.x(j)) / h) * f(j) * g.dx;
        err = std::max(err, std::abs(acc - u.interior(i - g.idx_a)));
        scale = std::max(scale, std::abs(acc));
    }
    CHECK(err < 1e-3 * scale);
}
