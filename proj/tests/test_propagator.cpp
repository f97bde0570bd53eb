#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "reslab/adiabatic.hpp"
#include "reslab/error.hpp"
#include "reslab/fit.hpp"
#include "reslab/propagator.hpp"

#include <Eigen/LU>

#include <cmath>
#include <vector>

using namespace reslab;

namespace {

SchemeConfig figure4(std::optional<PotentialSpec> pot = std::nullopt)
{
    SchemeConfig c;
    c.grid = scheme_grid(30);
    c.dt = 0.8;
    c.n_steps = 400;
    c.h_over_ell = 0.03;
    c.potential = std::move(pot);
    c.snapshot_every = 1;
    return c;
}

double packet_k(const Grid& g) { return 2 * kPi / (8 * g.dx); }

PotentialSpec barrier08() { return constant_barrier(-1, 1, 0.8, 0.2); }

// plain three-point Laplacian written out densely
CMat standard_laplacian(const Grid& g)
{
    const int n = g.n_points;
    CMat m = CMat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        m(j, j) = -2.0;
        if (j > 0) m(j, j - 1) = 1.0;
        if (j + 1 < n) m(j, j + 1) = 1.0;
    }
    return m / (g.dx * g.dx);
}

}  // namespace

TEST_CASE("theta0 = 0 gives the standard Laplacian exactly")
{
    const Grid g = scheme_grid(30);
    const CMat mod = modified_laplacian(g, 0.0).dense();
    CHECK((mod - standard_laplacian(g)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(mod == mod.transpose());
}

TEST_CASE("modified rows at the interfaces")
{
    const Grid g = scheme_grid(30);
    const cplx th(0.0, 0.09);
    const CVec ones = CVec::Ones(g.n_points);
    const CVec y = modified_laplacian_apply(ones, th, g);
    const double inv = 1.0 / (g.dx * g.dx);
    const cplx row_b = inv * (1.0 - (1.0 + std::exp(-th)) + std::exp(-1.5 * th));
    const cplx row_a = inv * (1.0 - (1.0 + std::exp(th)) + std::exp(1.5 * th));
    CHECK(std::abs(y(g.idx_b) - row_b) < 1e-9 * inv);
    CHECK(std::abs(y(g.idx_a) - row_a) < 1e-9 * inv);
    CHECK(std::abs(y(g.idx_b + 1) - inv * (std::exp(0.5 * th) - 1.0)) < 1e-9 * inv);
    CHECK(std::abs(y(g.idx_a + 1) - inv * (std::exp(-0.5 * th) - 1.0)) < 1e-9 * inv);
    // every other row annihilates constants, the two grid ends see the Dirichlet wall
    for (int j = 1; j < g.n_points - 1; ++j) {
        if (j == g.idx_a || j == g.idx_a + 1 || j == g.idx_b || j == g.idx_b + 1) continue;
        CHECK(std::abs(y(j)) == 0.0);
    }

    const CMat m = modified_laplacian(g, th).dense();
    CHECK((m - m.transpose()).norm() > 0.0);
}

TEST_CASE("distance to the standard stencil is linear in theta0 and sits in four rows")
{
    const Grid g = scheme_grid(30);
    const CMat m0 = modified_laplacian(g, 0.0).dense();
    std::vector<double> ratios;
    for (double im : {1e-2, 1e-3, 1e-4}) {
        const CMat d = modified_laplacian(g, cplx(0.0, im)).dense() - m0;
        ratios.push_back(d.norm() / im);
        int rows = 0;
        for (int i = 0; i < d.rows(); ++i)
            if (d.row(i).norm() > 0.0) ++rows;
        CHECK(rows == 4);
    }
    CHECK(std::abs(ratios[1] / ratios[2] - 1.0) < 1e-2);
    CHECK(std::abs(ratios[0] / ratios[2] - 1.0) < 5e-2);
}

TEST_CASE("theta0 = 0 trajectory equals the standard Crank-Nicolson run")
{
    SchemeConfig c = figure4(barrier08());
    c.tbc = TbcMode::Dirichlet;
    c.n_steps = 100;
    const Grid& g = c.grid;
    const CVec u0 = WavePacket(-3, 0.2, packet_k(g)).sample(g);
    const WaveTrajectory tr = evolve(c, u0);

    CMat h = -c.h_over_ell * c.h_over_ell * standard_laplacian(g);
    for (int j = 0; j < g.n_points; ++j)
        if (g.x(j) >= -1 - 1e-12 && g.x(j) <= 1 + 1e-12) h(j, j) += 0.8;
    const CMat eye = CMat::Identity(g.n_points, g.n_points);
    const Eigen::PartialPivLU<CMat> lu(eye + 0.5 * kI * c.dt * h);
    const CMat rhs = eye - 0.5 * kI * c.dt * h;
    CVec u = u0;
    double worst = 0.0;
    for (int n = 1; n <= c.n_steps; ++n) {
        u = lu.solve(rhs * u);
        worst = std::max(worst, (tr.snapshots[n] - u).norm() / u.norm());
    }
    CHECK(worst < 1e-13);

    // the run is reproducible bit for bit
    const WaveTrajectory again = evolve(c, u0);
    CHECK(again.snapshots.back() == tr.snapshots.back());
}

TEST_CASE("Dirichlet walls and a Hermitian scheme conserve the norm")
{
    SchemeConfig c = figure4(barrier08());
    c.tbc = TbcMode::Dirichlet;
    c.dt = 1e-3;
    c.n_steps = 200;
    const CVec u0 = WavePacket(0, 0.2, packet_k(c.grid)).sample(c.grid);
    const WaveTrajectory tr = evolve(c, u0);
    for (std::size_t n = 1; n < tr.norms.size(); ++n)
        CHECK(std::abs(tr.norms[n] - tr.norms[n - 1]) < 1e-12 * tr.norms[0]);
}

TEST_CASE("transparent boundary matches the padded domain")
{
    for (double x0 : {-3.0, 3.0}) {
        for (const bool barrier : {false, true}) {
            SchemeConfig c = figure4(barrier ? std::optional(barrier08()) : std::nullopt);
            c.theta0 = cplx(0.0, 0.05);
            const CVec u0 = WavePacket(x0, 0.2, packet_k(c.grid)).sample(c.grid);
            const WaveTrajectory exact = evolve(c, u0);
            c.tbc = TbcMode::Padded;
            const WaveTrajectory padded = evolve(c, u0);
            REQUIRE(exact.snapshots.size() == padded.snapshots.size());
            double worst = 0.0;
            for (std::size_t n = 0; n < exact.snapshots.size(); ++n) {
                const double d = l2_norm(exact.snapshots[n] - padded.snapshots[n], c.grid.dx);
                worst = std::max(worst, d / l2_norm(padded.snapshots[n], c.grid.dx));
            }
            CHECK(worst <= 1e-6);
        }
    }
}

TEST_CASE("zero data stays zero")
{
    SchemeConfig c = figure4(barrier08());
    c.theta0 = cplx(0.0, 0.09);
    const WaveTrajectory tr = evolve(c, CVec::Zero(c.grid.n_points));
    for (const auto& s : tr.snapshots) CHECK(s.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("outgoing packet is not reflected by the truncation")
{
    // the packet starts near x = 3 and runs out through x = 5
    SchemeConfig c = figure4();
    const CVec u0 = WavePacket(3, 0.2, packet_k(c.grid)).sample(c.grid);
    const double incident = std::pow(l2_norm(u0, c.grid.dx), 2);
    const WaveTrajectory exact = evolve(c, u0);
    c.tbc = TbcMode::Padded;
    const WaveTrajectory padded = evolve(c, u0);
    const double reflected = std::pow(l2_norm(exact.snapshots.back() - padded.snapshots.back(), c.grid.dx), 2);
    CHECK(reflected <= 1e-5 * incident);
    // most of the packet has left by then
    CHECK(exact.norms.back() < 0.5 * exact.norms.front());
}

TEST_CASE("transparent boundary rejects a potential at the truncation points")
{
    SchemeConfig c = figure4();
    c.grid = build_grid(-1, 1, 30, -1, 1);
    c.potential = barrier08();
    CHECK_THROWS_AS(CrankNicolson{c}, Error);
}

TEST_CASE("free packet leaves the domain with the figure 4 parameters")
{
    SchemeConfig c = figure4();
    const CVec u0 = WavePacket(-3, 0.2, packet_k(c.grid)).sample(c.grid);
    const WaveTrajectory tr = evolve(c, u0);
    const double mass = std::pow(tr.norms.back() / tr.norms.front(), 2);
    MESSAGE("interior mass fraction at N dt: " << mass);
    CHECK(mass <= 1e-4);
}

TEST_CASE("free packet leaves the domain when run twice as long")
{
    SchemeConfig c = figure4();
    c.n_steps = 800;
    c.snapshot_every = 100;
    const CVec u0 = WavePacket(-3, 0.2, packet_k(c.grid)).sample(c.grid);
    const WaveTrajectory tr = evolve(c, u0);
    CHECK(std::pow(tr.norms.back() / tr.norms.front(), 2) <= 1e-4);
}

TEST_CASE("barrier splits the incoming packet")
{
    SchemeConfig c = figure4(barrier08());
    const Grid& g = c.grid;
    const CVec u0 = WavePacket(-3, 0.2, packet_k(g)).sample(g);
    c.n_steps = 150;
    const WaveTrajectory tr = evolve(c, u0);
    const CVec& u = tr.snapshots.back();
    double left = 0.0, right = 0.0;
    for (int j = 0; j < g.n_points; ++j) (g.x(j) < -1 ? left : right) += std::norm(u(j)) * g.dx;
    CHECK(left > 0.5 * (left + right));
    CHECK(right > 1e-6 * (left + right));
}

TEST_CASE("relative difference metric")
{
    SchemeConfig c = figure4();
    c.n_steps = 50;
    const CVec u0 = WavePacket(-3, 0.2, packet_k(c.grid)).sample(c.grid);
    const WaveTrajectory a = evolve(c, u0);
    CHECK(relative_difference_metric(a, a, 1.0) == 0.0);
    c.n_steps = 40;
    CHECK_THROWS_AS(relative_difference_metric(a, evolve(c, u0), 1.0), Error);
}

TEST_CASE("D over theta0 is a line and follows the three-case ordering")
{
    std::vector<double> ims;
    for (int i = 1; i <= 9; ++i) ims.push_back(0.01 * i);
    const SchemeConfig free = figure4();
    const SchemeConfig bar = figure4(barrier08());
    const double k = packet_k(free.grid);
    const auto d_free = theta0_sweep(free, WavePacket(-3, 0.2, k), ims);
    const auto d_left = theta0_sweep(bar, WavePacket(-3, 0.2, k), ims);
    const auto d_mid = theta0_sweep(bar, WavePacket(0, 0.2, k), ims);
    for (const auto* set : {&d_free, &d_left, &d_mid}) {
        std::vector<double> x, y;
        for (const auto& p : *set) x.push_back(p.im_theta0), y.push_back(p.d);
        CHECK(fit_through_origin(x, y).r2 >= 0.99);
        for (std::size_t i = 1; i < y.size(); ++i) CHECK(y[i] > y[i - 1]);
    }
    for (std::size_t i = 0; i < ims.size(); ++i) {
        CHECK(d_left[i].d < d_free[i].d);
        CHECK(d_mid[i].d > d_left[i].d);
    }
}

TEST_CASE("deformed evolution contracts")
{
    const SchemeConfig c = figure4();
    const CVec u0 = WavePacket(0, 0.2, packet_k(c.grid)).sample(c.grid);
    for (double tau : {0.05, 0.2}) {
        const auto probe =
            assemble_deformed_hamiltonian(barrier08(), tau, SemiclassicalParams(0.03, 0.2), c.grid, 0.0).probe;
        CHECK(probe.worst_probe >= -1e-10);
        CHECK(probe.min_hermitian_eig >= -1e-10);
        const WaveTrajectory tr = contraction_evolution(barrier08(), tau, c, u0);
        REQUIRE(tr.norms.size() == 401);
        for (std::size_t n = 1; n < tr.norms.size(); ++n) CHECK(tr.norms[n] <= tr.norms[n - 1] * (1 + 1e-10));
        CHECK(tr.norms.back() < tr.norms.front());
    }
}

TEST_CASE("the opposite rotation is not accretive")
{
    const Grid g = scheme_grid(30);
    Tridiag m = modified_laplacian(g, cplx(0.0, -0.2), cplx(0.0, -0.2)).affine(0.0, -0.03 * 0.03);
    const auto probe = accretivity_probe(m, 7);
    CHECK(probe.min_hermitian_eig < -1e-6);
}
