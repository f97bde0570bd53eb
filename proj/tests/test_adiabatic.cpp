#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "reslab/adiabatic.hpp"
#include "reslab/error.hpp"
#include "reslab/krein.hpp"
#include "reslab/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace reslab;

namespace {

const SemiclassicalParams kParams(0.05, 0.2);

PathOptions bench_path(int intervals = 200)
{
    PathOptions o;
    o.tau = 0.3;
    o.lambda0 = 0.75;
    o.intervals = intervals;
    return o;
}

CMat probe_frame(const Grid& g, const SpectralProjector& p, std::uint64_t seed)
{
    CounterRng rng(seed);
    CMat x(g.n_points, 3);
    x.col(0) = p.right.col(0);
    for (int j = 1; j < 3; ++j) {
        // smooth bumps, so H X stays of moderate size
        const double c = rng.next(-0.5, 1.5), w = rng.next(0.1, 0.3);
        for (int i = 0; i < g.n_points; ++i) {
            const double t = (g.x(i) - c) / w;
            x(i, j) = std::exp(cplx(-0.5 * t * t, 10 * t));
        }
    }
    for (int j = 0; j < 3; ++j) x.col(j).normalize();
    return x;
}

}  // namespace

TEST_CASE("tau = 0 gives the standard discrete Schroedinger operator")
{
    const PotentialSpec spec = driven_delta_benchmark();
    const Grid g = benchmark_grid(100);
    const DeformedHamiltonian dh = assemble_deformed_hamiltonian(spec, 0.0, kParams, g, 0.3);
    const int n = g.n_points;
    const double s = kParams.h * kParams.h / (g.dx * g.dx);
    const double alpha = 1.0 + 0.2 * std::sin(2 * kPi * 0.3);
    const int jc = g.node_of(0.5);
    for (int j = 0; j < n; ++j) {
        double v = (j >= g.idx_a && j <= g.idx_b) ? 1.0 : 0.0;
        if (j == jc) v -= alpha * kParams.h / g.dx;
        CHECK(dh.matrix.diag(j) == cplx(2 * s + v));
        if (j + 1 < n) {
            CHECK(dh.matrix.upper(j) == cplx(-s));
            CHECK(dh.matrix.lower(j) == cplx(-s));
        }
    }
}

TEST_CASE("assembly preconditions")
{
    const Grid g = benchmark_grid(100);
    CHECK_THROWS_AS(assemble_deformed_hamiltonian(driven_delta_benchmark(), 0.9, kParams, g, 0.0), Error);
    CHECK_THROWS_AS(constant_barrier(0, 1, 1.0, 0.2, {{0.5, -1.0, {}}}), Error);
    const auto dh = assemble_deformed_hamiltonian(driven_delta_benchmark(), 0.3, kParams, g, 0.0);
    CHECK(dh.probe.probes == 100);
    CHECK(dh.probe.worst_probe >= -1e-10);
    CHECK(dh.probe.min_hermitian_eig >= -1e-10);
}

TEST_CASE("complex scaled eigenvalue matches the characteristic determinant root")
{
    const PotentialSpec spec = constant_barrier(0, 1, 1.0, 0.2, {{0.5, 1.0, {}}});
    const Grid g = benchmark_grid(2000);
    const double h = 0.1, tau = 0.3;
    const auto dh = assemble_deformed_hamiltonian(spec, tau, SemiclassicalParams(h, 0.2), g, 0.0);
    const SpectralProjector p = spectral_projector(dh, 0.75, 1);
    const cplx z_ecs = p.eigenvalues(0);
    CHECK(z_ecs.imag() < 0.0);
    CHECK(std::arg(z_ecs) > -2 * tau);

    ResonanceOptions ro;
    ro.n0 = 1;
    ro.with_fgr = false;
    const ResonanceSearch rs = find_resonances(spec, InterfaceParams(cplx(0.0, tau), h, cplx(0.0, tau)), g, 0.5, 0.9, ro);
    REQUIRE(rs.records.size() == 1);
    CHECK(std::abs(rs.records[0].z_res - z_ecs) / std::abs(z_ecs) <= 1e-4);
}

TEST_CASE("exterior spectrum lies along the rotated ray")
{
    const double tau = 0.3;
    const Grid g = benchmark_grid(60);
    const auto dh = assemble_deformed_hamiltonian(driven_delta_benchmark(), tau, SemiclassicalParams(0.05, 0.2), g, 0.0);
    const CMat full = dh.matrix.dense();
    std::vector<int> ext;
    for (int j = 0; j < g.n_points; ++j)
        if (j <= g.idx_a || j > g.idx_b) ext.push_back(j);
    const int m = static_cast<int>(ext.size());
    CMat block(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) block(i, j) = full(ext[i], ext[j]);
    Eigen::ComplexEigenSolver<CMat> es(block, false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + m);
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
    REQUIRE(m >= 100);
    for (int i = 0; i < 100; ++i) {
        const double angle = -std::arg(ev[i]);
        CHECK(angle >= 0.95 * 2 * tau);
        CHECK(angle <= 1.05 * 2 * tau);
    }
}

TEST_CASE("spectral projector invariants")
{
    const Grid g = benchmark_grid(200);
    const auto dh = assemble_deformed_hamiltonian(driven_delta_benchmark(), 0.3, kParams, g, 0.1);
    const SpectralProjector p = spectral_projector(dh, 0.75, 1);
    CHECK(p.rank() == 1);
    const auto d = projector_diagnostics(dh, p);
    CHECK(d.idempotence <= 1e-8);
    CHECK(d.commutation <= 1e-6);
    CHECK(d.contour_agreement <= 1e-6);

    ProjectorOptions wide;
    wide.radius = 0.8;
    CHECK_THROWS_AS(spectral_projector(dh, 0.75, 1, wide), Error);
}

TEST_CASE("resonant projector is close to the Dirichlet projector")
{
    const PotentialSpec spec = constant_barrier(0, 1, 1.0, 0.2, {{0.5, 1.0, {}}});
    std::vector<double> misses;
    for (double h : {0.1, 0.05}) {
        const Grid g = benchmark_grid(400);
        const SemiclassicalParams params(h, 0.2);
        const auto dh = assemble_deformed_hamiltonian(spec, 0.3, params, g, 0.0);
        const SpectralProjector p = spectral_projector(dh, 0.75, 1);
        const DirichletEigenpairs de = dirichlet_eigs(spec, params, g, 0.5, 0.9);
        REQUIRE(de.lambdas.size() == 1);
        CVec phi = CVec::Zero(g.n_points);
        phi.segment(de.first_node, de.phis.rows()) = de.phis.col(0);
        const CVec r = p.right.col(0);
        const double overlap = std::abs(phi.dot(r)) / (phi.norm() * r.norm());
        const double s0 = s0_barrier_action(spec, de.lambdas(0), g);
        CHECK(overlap >= 1.0 - std::exp(-s0 / (8 * h)));
        misses.push_back(1.0 - overlap);
    }
    CHECK(misses[1] < misses[0]);
}

TEST_CASE("transport along a frozen path is the identity")
{
    const PotentialSpec spec = driven_delta_benchmark(1.0, 0.2, DriveKind::Frozen);
    const Grid g = benchmark_grid(200);
    const ProjectorPath path = build_projector_path(spec, kParams, g, bench_path(20));
    const CMat x = probe_frame(g, path.projectors[path.index(0)], 3);
    const TransportOperator tr = parallel_transport(path, 0, 20, x);
    CHECK((tr.output.back() - x).norm() <= 1e-8 * x.norm());
    const TransportOperator still = parallel_transport(path, 4, 4, x);
    CHECK(still.output.back() == x);
}

TEST_CASE("transport intertwines the projectors and is invertible")
{
    const PotentialSpec spec = driven_delta_benchmark();
    const Grid g = benchmark_grid(200);
    const ProjectorPath path = build_projector_path(spec, kParams, g, bench_path());
    CHECK(path.max_jump <= 0.1);
    const CMat x = probe_frame(g, path.projectors[path.index(0)], 5);
    const TransportOperator fwd = parallel_transport(path, 0, 200, x);
    CHECK(intertwining_defect(path, 0, fwd) <= 1e-6);
    const TransportOperator back = parallel_transport(path, 200, 0, fwd.output.back());
    CHECK((back.output.back() - x).norm() <= 1e-8 * x.norm());
    CHECK_THROWS_AS(parallel_transport(path, 0, 3, x), Error);
}

TEST_CASE("coarse sampling of the projector path is rejected")
{
    const PotentialSpec spec = driven_delta_benchmark(1.0, 0.5);
    const Grid g = benchmark_grid(200);
    CHECK_THROWS_AS(build_projector_path(spec, kParams, g, bench_path(4)), Error);
}

TEST_CASE("adiabatic error scales linearly in eps")
{
    const PotentialSpec spec = driven_delta_benchmark();
    const Grid g = benchmark_grid(200);
    AdiabaticOptions o;
    o.path = bench_path();
    const AdiabaticReport rep = adiabatic_error_curve(spec, kParams, g, o);
    MESSAGE("errors " << rep.errors[0] << " " << rep.errors[1] << " " << rep.errors[2] << " slope "
                      << rep.fitted_slope);
    CHECK(rep.fitted_slope >= 0.8);
    CHECK(rep.fitted_slope <= 1.2);
    for (std::size_t i = 1; i < rep.errors.size(); ++i) CHECK(rep.errors[i] <= 1.1 * rep.errors[i - 1]);
    for (const auto& run : rep.runs) CHECK(run.max_norm_growth <= 1e-8);
    CHECK(rep.intertwining <= 1e-6);
    CHECK(rep.idempotence <= 1e-8);
}

TEST_CASE("frozen potential: the resonant state only rotates")
{
    const PotentialSpec spec = driven_delta_benchmark(1.0, 0.2, DriveKind::Frozen);
    const Grid g = benchmark_grid(200);
    AdiabaticOptions o;
    o.path = bench_path(40);
    const ProjectorPath path = build_projector_path(spec, kParams, g, o.path);
    const AdiabaticRun run = adiabatic_run(spec, kParams, g, path, 1e-3, o);
    CHECK(run.max_error <= 1e-6);
}

TEST_CASE("source terms stay within the contraction bound")
{
    const PotentialSpec spec = driven_delta_benchmark();
    const Grid g = benchmark_grid(200);
    AdiabaticOptions o;
    o.path = bench_path(100);
    const double eps = 3e-3;
    const ProjectorPath path = build_projector_path(spec, kParams, g, o.path);
    const AdiabaticRun plain = adiabatic_run(spec, kParams, g, path, eps, o);

    CVec bump(g.n_points);
    for (int i = 0; i < g.n_points; ++i) bump(i) = std::exp(-std::pow((g.x(i) + 1.0) / 0.2, 2));
    bump /= l2_norm(bump, g.dx);
    SourceTerm src;
    src.r_s = 1e-3 * bump;
    const double r_amp = 1e-6;
    src.r = [bump, r_amp](double t) { return CVec(r_amp * std::cos(3 * t) * bump); };
    o.source = src;
    const AdiabaticRun forced = adiabatic_run(spec, kParams, g, path, eps, o);
    const double bound = plain.max_error + 1e-3 + (1.0 / eps) * (o.path.t1 - o.path.t0) * r_amp;
    CHECK(forced.max_error <= bound);
    CHECK(forced.max_error != plain.max_error);
}

TEST_CASE("first superadiabatic correction")
{
    const PotentialSpec spec = driven_delta_benchmark();
    const Grid g = benchmark_grid(200);
    const ProjectorPath path = build_projector_path(spec, kParams, g, bench_path());
    const CMat x = probe_frame(g, path.projectors[path.index(0)], 9);
    for (int k : {0, 25, 75, 100, 125, 175}) {
        const E1Result e = superadiabatic_E1(path, spec, kParams, g, k, x);
        CHECK(e.pdot_norm > 0.1);
        CHECK(e.commutator_residual <= 1e-4);
        CHECK(e.offdiag_ratio <= 1e-6);
    }
    CHECK_THROWS_AS(superadiabatic_E1(path, spec, kParams, g, 0, x, 64), Error);

    const PotentialSpec frozen = driven_delta_benchmark(1.0, 0.2, DriveKind::Frozen);
    const ProjectorPath still = build_projector_path(frozen, kParams, g, bench_path(10));
    const E1Result moving = superadiabatic_E1(path, spec, kParams, g, 0, x);
    const E1Result zero = superadiabatic_E1(still, frozen, kParams, g, 2, x);
    CHECK(zero.e1_frame.norm() <= 1e-8 * moving.e1_frame.norm());
}
