#include "reslab/adiabatic.hpp"
#include "reslab/error.hpp"
#include "reslab/fit.hpp"
#include "reslab/propagator.hpp"
#include "reslab/rng.hpp"

#include "lapacke_cpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace reslab {

namespace {

CMat random_frame(int n, int cols, std::uint64_t seed)
{
    CounterRng rng(seed);
    CMat x(n, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = cplx(rng.next(-1, 1), rng.next(-1, 1));
    return x;
}

double tridiag_norm(const Tridiag& m)
{
    double best = 0.0;
    const int n = m.size();
    for (int i = 0; i < n; ++i) {
        double s = std::abs(m.diag(i));
        if (i > 0) s += std::abs(m.lower(i - 1));
        if (i + 1 < n) s += std::abs(m.upper(i));
        best = std::max(best, s);
    }
    return best;
}

// the Laplacian part does not depend on t, only the diagonal does
struct DeformedBuilder {
    Tridiag kinetic;
    const PotentialSpec* spec;
    double h;
    Grid grid;

    DeformedBuilder(const PotentialSpec& s, double tau, double h_, const Grid& g)
        : kinetic(modified_laplacian(g, cplx(0.0, tau), cplx(0.0, tau)).affine(0.0, -h_ * h_)), spec(&s), h(h_),
          grid(g)
    {
    }

    Tridiag at(double t) const
    {
        Tridiag m = kinetic;
        m.diag += scheme_potential(*spec, grid, h, t).cast<cplx>();
        return m;
    }
};

void check_drive(const PotentialSpec& spec, double t)
{
    for (const auto& d : spec.wells_delta()) {
        if (!(d.amplitude(t) > 0.0)) {
            std::ostringstream os;
            os << "delta amplitude at x = " << d.c << " is not positive at t = " << t;
            throw Error(ErrorKind::InvalidParameter, os.str());
        }
    }
}

// winding of det(w - H) around the circle
int det_winding(const Tridiag& h, const CircleContour& c)
{
    auto phase = [&](double phi) {
        const cplx w = c.center + c.radius * std::exp(cplx(0.0, phi));
        return TridiagLU(h.affine(w, -1.0)).det_phase();
    };
    double total = 0.0;
    const int n = std::max(c.nodes, 16);
    cplx prev = phase(0.0);
    for (int k = 0; k < n; ++k) {
        const double a = 2 * kPi * k / n, b = 2 * kPi * (k + 1) / n;
        // refine the arc until the phase increments are small
        std::vector<std::pair<double, double>> stack{{a, b}};
        while (!stack.empty()) {
            auto [lo, hi] = stack.back();
            stack.pop_back();
            const cplx next = phase(hi);
            const double d = std::arg(next / prev);
            if (std::abs(d) > 0.5 && hi - lo > 1e-9) {
                stack.push_back({0.5 * (lo + hi), hi});
                stack.push_back({lo, 0.5 * (lo + hi)});
                continue;
            }
            total += d;
            prev = next;
        }
    }
    return static_cast<int>(std::lround(total / (2 * kPi)));
}

// two-sided Rayleigh quotient iteration from a shift
void refine_pair(const Tridiag& h, const Tridiag& ha, cplx& sigma, CVec& r, CVec& l, const ProjectorOptions& opts,
                 double hnorm)
{
    for (int it = 0; it < opts.max_iterations; ++it) {
        const TridiagLU lu(h.affine(-sigma, 1.0));
        const TridiagLU lua(ha.affine(-std::conj(sigma), 1.0));
        r = lu.solve(r);
        l = lua.solve(l);
        r /= r.norm();
        l /= l.norm();
        const cplx lr = l.dot(r);
        const cplx next = l.dot(h.apply(r)) / lr;
        const double res = (h.apply(r) - next * r).norm() / hnorm;
        const double resl = (ha.apply(l) - std::conj(next) * l).norm() / hnorm;
        const bool done = std::abs(next - sigma) <= opts.tol * std::max(1.0, std::abs(next)) ||
                          std::max(res, resl) <= opts.tol;
        sigma = next;
        if (done) return;
    }
}

}  // namespace

PotentialSpec driven_delta_benchmark(double alpha0, double amplitude, DriveKind kind)
{
    if (!(alpha0 > 0.0)) throw Error(ErrorKind::InvalidParameter, "alpha0 must be positive");
    if (!(std::abs(amplitude) < 1.0)) throw Error(ErrorKind::InvalidParameter, "drive amplitude must lie in (-1, 1)");
    DeltaWell d{0.5, alpha0, {}};
    if (kind == DriveKind::Sine)
        d.alpha_of_t = [alpha0, amplitude](double t) { return alpha0 * (1.0 + amplitude * std::sin(2 * kPi * t)); };
    return constant_barrier(0.0, 1.0, 1.0, 0.2, {d});
}

Grid benchmark_grid(int points_per_unit, double pad) { return build_grid(-pad, 1.0 + pad, points_per_unit, 0.0, 1.0); }

AccretivityReport accretivity_probe(const Tridiag& m, std::uint64_t seed, int count)
{
    const int n = m.size();
    AccretivityReport rep;
    rep.probes = count;
    rep.worst_probe = std::numeric_limits<double>::infinity();
    CounterRng rng(seed);
    for (int p = 0; p < count; ++p) {
        CVec u(n);
        for (int i = 0; i < n; ++i) u(i) = cplx(rng.next(-1, 1), rng.next(-1, 1));
        // Re <u, iHu> = -Im <u, Hu>
        const double q = -u.dot(m.apply(u)).imag() / u.squaredNorm();
        rep.worst_probe = std::min(rep.worst_probe, q);
    }
    // Hermitian part of iH, made real symmetric by a diagonal unitary change of basis
    std::vector<double> d(n), e(std::max(n - 1, 1));
    for (int i = 0; i < n; ++i) d[i] = -m.diag(i).imag();
    for (int i = 0; i + 1 < n; ++i) e[i] = std::abs(0.5 * kI * (m.upper(i) - std::conj(m.lower(i))));
    std::vector<double> w(n), z(1);
    std::vector<lapack_int> isuppz(2 * n);
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, 1, 0.0,
                                           &found, w.data(), z.data(), 1, isuppz.data());
    if (info != 0 || found < 1) throw Error(ErrorKind::FactorizationFailure, "dstevr failed on the Hermitian part");
    rep.min_hermitian_eig = w[0];
    return rep;
}

DeformedHamiltonian assemble_deformed_hamiltonian(const PotentialSpec& spec, double tau,
                                                  const SemiclassicalParams& params, const Grid& grid, double t,
                                                  std::uint64_t seed)
{
    if (!(tau >= 0.0 && tau < kPi / 4)) throw Error(ErrorKind::InvalidParameter, "tau must lie in [0, pi/4)");
    check_drive(spec, t);
    DeformedHamiltonian dh;
    dh.matrix = DeformedBuilder(spec, tau, params.h, grid).at(t);
    dh.tau = tau;
    dh.t = t;
    dh.h = params.h;
    dh.grid = grid;
    dh.probe = accretivity_probe(dh.matrix, seed);
    if (dh.probe.worst_probe < -1e-10) {
        std::ostringstream os;
        os << "worst Re<u, iHu>/|u|^2 = " << dh.probe.worst_probe;
        throw Error(ErrorKind::AccretivityProbeFailed, os.str());
    }
    return dh;
}

CMat contour_projector_apply(const Tridiag& h, const CircleContour& c, const CMat& x)
{
    CMat acc = CMat::Zero(x.rows(), x.cols());
    for (int k = 0; k < c.nodes; ++k) {
        const cplx e = c.radius * std::exp(cplx(0.0, 2 * kPi * k / c.nodes));
        acc += (e / static_cast<double>(c.nodes)) * TridiagLU(h.affine(c.center + e, -1.0)).solve_block(x);
    }
    return acc;
}

double lowrank_norm(const CMat& u, const CMat& v)
{
    Eigen::HouseholderQR<CMat> qu(u), qv(v);
    const Eigen::Index k = u.cols();
    const CMat ru = qu.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const CMat rv = qv.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<CMat> svd(ru * rv.adjoint());
    return svd.singularValues()(0);
}

SpectralProjector spectral_projector(const DeformedHamiltonian& ham, cplx lambda0, int ell, const ProjectorOptions& opts)
{
    const Tridiag& h = ham.matrix;
    const Tridiag ha = h.adjoint();
    const int n = h.size();
    if (ell < 1 || ell >= n) throw Error(ErrorKind::InvalidParameter, "cluster size out of range");
    const double hnorm = tridiag_norm(h);

    CVec shifts(ell);
    CMat right(n, ell);
    if (opts.guesses && opts.guesses->size() == ell) {
        shifts = *opts.guesses;
        const CMat x = random_frame(n, ell, 3);
        for (int j = 0; j < ell; ++j) right.col(j) = TridiagLU(h.affine(-shifts(j), 1.0)).solve(CVec(x.col(j)));
    } else {
        // block shift-invert with Rayleigh-Ritz on an orthonormal basis
        const TridiagLU lu(h.affine(-lambda0, 1.0));
        CMat q = random_frame(n, ell, 3);
        CVec ritz = CVec::Zero(ell);
        Eigen::ComplexEigenSolver<CMat> es;
        for (int it = 0; it < 40; ++it) {
            q = Eigen::HouseholderQR<CMat>(lu.solve_block(q)).householderQ() * CMat::Identity(n, ell);
            es.compute(q.adjoint() * h.apply_block(q));
            const CVec next = es.eigenvalues();
            const bool done = (next - ritz).norm() <= 1e-10 * std::max(1.0, next.norm());
            ritz = next;
            if (done && it > 2) break;
        }
        shifts = ritz;
        right = q * es.eigenvectors();
    }

    SpectralProjector p;
    p.t = ham.t;
    p.eigenvalues.resize(ell);
    p.right.resize(n, ell);
    p.left.resize(n, ell);
    const CMat lstart = random_frame(n, ell, 5);
    for (int j = 0; j < ell; ++j) {
        cplx sigma = shifts(j);
        CVec r = right.col(j);
        CVec l = TridiagLU(ha.affine(-std::conj(sigma), 1.0)).solve(CVec(lstart.col(j)));
        refine_pair(h, ha, sigma, r, l, opts, hnorm);
        p.eigenvalues(j) = sigma;
        p.right.col(j) = r;
        p.left.col(j) = l;
    }
    for (int i = 0; i < ell; ++i)
        for (int j = 0; j < i; ++j)
            if (std::abs(p.eigenvalues(i) - p.eigenvalues(j)) <= 1e-10 * std::max(1.0, std::abs(p.eigenvalues(i))))
                throw Error(ErrorKind::ClusterNotIsolated, "two eigenpairs converged to the same eigenvalue");

    const CMat gram = p.left.adjoint() * p.right;
    for (int j = 0; j < ell; ++j) {
        if (std::abs(gram(j, j)) < 1e-10) {
            std::ostringstream os;
            os << "|<l, r>| = " << std::abs(gram(j, j)) << " for eigenvalue " << p.eigenvalues(j);
            throw Error(ErrorKind::BiorthogonalityBreakdown, os.str());
        }
    }
    p.right = p.right * gram.inverse();

    const cplx center = p.eigenvalues.mean();
    double spread = 0.0;
    for (int j = 0; j < ell; ++j) spread = std::max(spread, std::abs(p.eigenvalues(j) - center));
    p.contour.center = center;
    p.contour.radius = opts.radius ? *opts.radius : std::max(0.5 * ham.h, 4.0 * spread);
    p.contour.nodes = opts.contour_nodes;
    if (p.contour.radius <= spread) throw Error(ErrorKind::ClusterNotIsolated, "contour radius below cluster spread");
    const int wind = det_winding(h, p.contour);
    if (wind != ell) {
        std::ostringstream os;
        os << "contour around " << center << " with radius " << p.contour.radius << " encloses " << wind
           << " eigenvalues, expected " << ell;
        throw Error(ErrorKind::ClusterNotIsolated, os.str());
    }
    return p;
}

ProjectorDiagnostics projector_diagnostics(const DeformedHamiltonian& ham, const SpectralProjector& p,
                                           std::uint64_t seed)
{
    ProjectorDiagnostics d;
    const int ell = p.rank();
    const CMat defect = p.right * (p.left.adjoint() * p.right - CMat::Identity(ell, ell));
    const double pnorm = lowrank_norm(p.right, p.left);
    d.idempotence = defect.norm() == 0.0 ? 0.0 : lowrank_norm(defect, p.left) / pnorm;

    const int n = ham.matrix.size();
    const CMat x = random_frame(n, 4, seed);
    const CMat comm = ham.matrix.apply_block(p.apply(x)) - p.apply(ham.matrix.apply_block(x));
    d.commutation = comm.norm() / (tridiag_norm(ham.matrix) * pnorm * x.norm());

    CMat frame(n, ell + 2);
    frame << p.right, x.leftCols(2);
    for (Eigen::Index j = 0; j < frame.cols(); ++j) frame.col(j).normalize();
    const CMat diff = p.apply(frame) - contour_projector_apply(ham.matrix, p.contour, frame);
    for (Eigen::Index j = 0; j < frame.cols(); ++j) d.contour_agreement = std::max(d.contour_agreement, diff.col(j).norm());
    return d;
}

ProjectorPath build_projector_path(const PotentialSpec& spec, const SemiclassicalParams& params, const Grid& grid,
                                   const PathOptions& opts)
{
    if (opts.intervals < 2 || opts.intervals % 2 != 0)
        throw Error(ErrorKind::InvalidParameter, "path intervals must be even and at least 2");
    if (!(opts.t1 > opts.t0)) throw Error(ErrorKind::InvalidParameter, "need t1 > t0");
    ProjectorPath path;
    path.dt = (opts.t1 - opts.t0) / opts.intervals;
    path.tau = opts.tau;
    ProjectorOptions popts = opts.projector;
    for (int k = -2; k <= opts.intervals + 2; ++k) {
        const double t = opts.t0 + k * path.dt;
        const DeformedHamiltonian dh = assemble_deformed_hamiltonian(spec, opts.tau, params, grid, t, opts.seed);
        SpectralProjector p = spectral_projector(dh, opts.lambda0, opts.ell, popts);
        if (!path.projectors.empty()) {
            const SpectralProjector& q = path.projectors.back();
            CMat u(p.right.rows(), 2 * opts.ell), v(p.right.rows(), 2 * opts.ell);
            u << p.right, -q.right;
            v << p.left, q.left;
            const double jump = lowrank_norm(u, v);
            path.max_jump = std::max(path.max_jump, jump);
            if (jump > 0.1) {
                std::ostringstream os;
                os << "||P(t + dt) - P(t)|| = " << jump << " at t = " << t << "; use more intervals";
                throw Error(ErrorKind::StepTooCoarse, os.str());
            }
        }
        popts.guesses = p.eigenvalues;
        path.times.push_back(t);
        path.projectors.push_back(std::move(p));
    }
    return path;
}

namespace {

// P'(t_i) z by the fourth order centered difference
CMat projector_rate(const ProjectorPath& path, int i, const CMat& z)
{
    const auto& ps = path.projectors;
    const CMat d = 8.0 * (ps[i + 1].apply(z) - ps[i - 1].apply(z)) - (ps[i + 2].apply(z) - ps[i - 2].apply(z));
    return d / (12 * path.dt);
}

struct TransportRhs {
    const ProjectorPath& path;

    // -[P, P'] Y at path index i
    CMat operator()(int i, const CMat& y) const
    {
        const SpectralProjector& p = path.projectors[i];
        auto pdot = [&](const CMat& z) { return projector_rate(path, i, z); };
        return pdot(p.apply(y)) - p.apply(pdot(y));
    }
};

}  // namespace

TransportOperator parallel_transport(const ProjectorPath& path, int k_s, int k_t, const CMat& input)
{
    const int kmax = path.intervals();
    if (k_s < 0 || k_t < 0 || k_s > kmax || k_t > kmax || (k_t - k_s) % 2 != 0)
        throw Error(ErrorKind::InvalidParameter, "transport endpoints must be path samples of equal parity");
    TransportOperator tr;
    tr.input = input;
    tr.s = path.times[path.index(k_s)];
    tr.t = path.times[path.index(k_t)];
    const TransportRhs f{path};
    const int dir = k_t >= k_s ? 1 : -1;
    const double step = 2 * dir * path.dt;
    CMat y = input;
    tr.output.push_back(y);
    tr.times.push_back(tr.s);
    for (int k = k_s; k != k_t; k += 2 * dir) {
        const int i0 = path.index(k), i1 = path.index(k + dir), i2 = path.index(k + 2 * dir);
        const CMat a1 = f(i0, y);
        const CMat a2 = f(i1, y + 0.5 * step * a1);
        const CMat a3 = f(i1, y + 0.5 * step * a2);
        const CMat a4 = f(i2, y + step * a3);
        y += (step / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        tr.output.push_back(y);
        tr.times.push_back(path.times[i2]);
    }
    return tr;
}

double intertwining_defect(const ProjectorPath& path, int k_s, const TransportOperator& tr)
{
    const SpectralProjector& ps = path.projectors[path.index(k_s)];
    const double xn = tr.input.norm();
    const int dir = tr.t >= tr.s ? 1 : -1;
    double worst = 0.0;
    // transport is linear, so Phi P(s) X is the transport of P(s) X
    const TransportOperator tp = parallel_transport(
        path, k_s, k_s + dir * 2 * (static_cast<int>(tr.output.size()) - 1), ps.apply(tr.input));
    for (std::size_t m = 0; m < tr.output.size(); ++m) {
        const int k = k_s + dir * 2 * static_cast<int>(m);
        const SpectralProjector& p = path.projectors[path.index(k)];
        worst = std::max(worst, (p.apply(tr.output[m]) - tp.output[m]).norm() / xn);
    }
    return worst;
}

namespace {

double l2(const CVec& u, double dx) { return std::sqrt(dx) * u.norm(); }

CMat small_expm(const CMat& a)
{
    Eigen::ComplexEigenSolver<CMat> es(a);
    const CMat& v = es.eigenvectors();
    return v * es.eigenvalues().array().exp().matrix().asDiagonal() * v.inverse();
}

}  // namespace

AdiabaticRun adiabatic_run(const PotentialSpec& spec, const SemiclassicalParams& params, const Grid& grid,
                           const ProjectorPath& path, double eps, const AdiabaticOptions& opts)
{
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidParameter, "eps must be positive");
    const int kmax = path.intervals();
    const int ell = path.projectors[path.index(0)].rank();
    const double dx = grid.dx;
    const DeformedBuilder builder(spec, opts.path.tau, params.h, grid);
    const SpectralProjector& ps = path.projectors[path.index(0)];
    const double lref = opts.lambda_ref ? *opts.lambda_ref : ps.eigenvalues(0).real();
    const double t0 = path.times[path.index(0)];

    // u_s = P(s) u_s: the first right eigenvector, unit norm
    CVec us = ps.right.col(0);
    us /= l2(us, dx);
    const CVec c0 = ps.left.adjoint() * us;
    const TransportOperator tr = parallel_transport(path, 0, kmax, ps.right);

    // reduced coefficients c(t_k) at the even samples, in the frame rotating with lref
    std::vector<CVec> coef{c0};
    const cplx mi_eps = -kI / eps;
    if (ell == 1) {
        cplx phase_int = 0.0;
        for (int k = 0; k < kmax; k += 2) {
            const cplx z0 = path.projectors[path.index(k)].eigenvalues(0) - lref;
            const cplx z1 = path.projectors[path.index(k + 1)].eigenvalues(0) - lref;
            const cplx z2 = path.projectors[path.index(k + 2)].eigenvalues(0) - lref;
            phase_int += (path.dt / 3.0) * (z0 + 4.0 * z1 + z2);
            coef.push_back(c0 * std::exp(mi_eps * phase_int));
        }
    } else {
        auto reduced = [&](int m) {
            const SpectralProjector& p = path.projectors[path.index(2 * m)];
            const CMat c = p.left.adjoint() * tr.output[m];
            CMat diag = (p.eigenvalues.array() - lref).matrix().asDiagonal();
            return CMat(c.inverse() * diag * c);
        };
        CVec c = c0;
        for (int m = 0; 2 * m < kmax; ++m) {
            c = small_expm(mi_eps * path.dt * reduced(m + 1)) * (small_expm(mi_eps * path.dt * reduced(m)) * c);
            coef.push_back(c);
        }
    }

    AdiabaticRun run;
    run.eps = eps;
    CVec w = us;
    if (opts.source) w += opts.source->r_s;
    const double n0 = l2(us, dx);
    auto cn_step = [&](const CVec& v, double t, double dt) {
        Tridiag m = builder.at(t + 0.5 * dt);
        m.diag.array() -= lref;
        const cplx a = 0.5 * kI * dt / eps;
        CVec rhs = m.affine(1.0, -a).apply(v);
        if (opts.source) {
            const double tm = t + 0.5 * dt;
            rhs += (mi_eps * dt * std::exp(cplx(0.0, lref * (tm - t0) / eps))) * opts.source->r(tm);
        }
        return CVec(TridiagLU(m.affine(1.0, a)).solve(rhs));
    };
    auto record = [&](int m, double t) {
        const CVec approx = tr.output[m] * coef[m];
        const double err = l2(w - approx, dx) / n0;
        run.times.push_back(t);
        run.errors.push_back(err);
        run.max_error = std::max(run.max_error, err);
        run.final_error = err;
        run.max_norm_growth = std::max(run.max_norm_growth, l2(w, dx) - n0);
    };
    record(0, t0);
    double t = t0;
    double dt = std::min(2 * path.dt, 1e-2 * eps);
    for (int m = 1; 2 * m <= kmax; ++m) {
        const double t_next = path.times[path.index(2 * m)];
        while (t < t_next - 1e-14) {
            const double h = std::min(dt, t_next - t);
            const CVec full = cn_step(w, t, h);
            const CVec half = cn_step(cn_step(w, t, 0.5 * h), t + 0.5 * h, 0.5 * h);
            const double err = l2(half - full, dx) / 3.0;
            const double grow = err > 0.0 ? 0.9 * std::cbrt(opts.local_tol / err) : 2.0;
            if (err <= opts.local_tol) {
                w = half;
                t += h;
                ++run.steps;
                dt = h * std::clamp(grow, 0.2, 2.0);
            } else {
                ++run.rejected;
                dt = h * std::clamp(grow, 0.1, 0.9);
                if (dt < 1e-14 * std::max(1.0, std::abs(t)))
                    throw Error(ErrorKind::StepTooCoarse, "time step underflow in the full evolution");
            }
        }
        t = t_next;
        record(m, t);
    }
    return run;
}

AdiabaticReport adiabatic_error_curve(const PotentialSpec& spec_path, const SemiclassicalParams& params,
                                      const Grid& grid, const AdiabaticOptions& opts)
{
    if (opts.eps_values.size() < 2) throw Error(ErrorKind::InvalidParameter, "need at least two eps values");
    if (!std::is_sorted(opts.eps_values.rbegin(), opts.eps_values.rend()))
        throw Error(ErrorKind::InvalidParameter, "eps values must be sorted descending");
    const ProjectorPath path = build_projector_path(spec_path, params, grid, opts.path);
    AdiabaticReport rep;
    rep.max_jump = path.max_jump;
    const int kmax = path.intervals();
    const SpectralProjector& ps = path.projectors[path.index(0)];
    CMat probe(ps.right.rows(), ps.rank() + 1);
    probe << ps.right, random_frame(static_cast<int>(ps.right.rows()), 1, 13);
    rep.intertwining = intertwining_defect(path, 0, parallel_transport(path, 0, kmax, probe));
    for (int k = 0; k <= kmax; ++k) {
        const SpectralProjector& p = path.projectors[path.index(k)];
        const int ell = p.rank();
        const CMat defect = p.right * (p.left.adjoint() * p.right - CMat::Identity(ell, ell));
        if (defect.norm() > 0.0)
            rep.idempotence = std::max(rep.idempotence, lowrank_norm(defect, p.left) / lowrank_norm(p.right, p.left));
    }
    std::vector<double> lx, ly;
    for (double eps : opts.eps_values) {
        AdiabaticRun run = adiabatic_run(spec_path, params, grid, path, eps, opts);
        rep.eps_values.push_back(eps);
        rep.errors.push_back(run.max_error);
        rep.final_errors.push_back(run.final_error);
        lx.push_back(std::log(eps));
        ly.push_back(std::log(run.max_error));
        rep.runs.push_back(std::move(run));
    }
    rep.fitted_slope = fit_line(lx, ly).slope;
    return rep;
}

E1Result superadiabatic_E1(const ProjectorPath& path, const PotentialSpec& spec, const SemiclassicalParams& params,
                           const Grid& grid, int k, const CMat& frame, int nodes)
{
    if (k < 0 || k > path.intervals()) throw Error(ErrorKind::InvalidParameter, "sample index out of range");
    if (nodes < 128) throw Error(ErrorKind::InvalidParameter, "E1 quadrature needs at least 128 nodes");
    const int i = path.index(k);
    const SpectralProjector& p = path.projectors[i];
    auto pdot = [&](const CMat& z) { return projector_rate(path, i, z); };
    // X = Q P' P - P P' Q
    auto offdiag = [&](const CMat& z) {
        const CMat pz = p.apply(z);
        const CMat a = pdot(pz);
        const CMat b = pdot(z - pz);
        return CMat((a - p.apply(a)) - p.apply(b));
    };
    const Tridiag h = DeformedBuilder(spec, path.tau, params.h, grid).at(path.times[i]);
    const Eigen::Index m = frame.cols();
    CMat y(frame.rows(), 3 * m);
    y << frame, h.apply_block(frame), p.apply(frame);
    // E1 = -(1/2 pi) \oint G X G dw with G = (w - H)^{-1}
    CMat acc = CMat::Zero(y.rows(), y.cols());
    const CircleContour& c = p.contour;
    for (int q = 0; q < nodes; ++q) {
        const cplx e = c.radius * std::exp(cplx(0.0, 2 * kPi * q / nodes));
        const TridiagLU g(h.affine(c.center + e, -1.0));
        acc += e * g.solve_block(offdiag(g.solve_block(y)));
    }
    acc *= -kI / static_cast<double>(nodes);
    E1Result out;
    out.frame = frame;
    out.e1_frame = acc.leftCols(m);
    out.pdot_frame = pdot(frame);
    out.pdot_norm = out.pdot_frame.norm();
    const CMat comm = h.apply_block(out.e1_frame) - acc.middleCols(m, m);
    out.commutator_residual = (comm - kI * out.pdot_frame).norm() / out.pdot_norm;
    const double e1n = out.e1_frame.norm();
    out.offdiag_ratio = e1n > 0.0 ? p.apply(acc.rightCols(m)).norm() / e1n : 0.0;
    return out;
}

}  // namespace reslab
