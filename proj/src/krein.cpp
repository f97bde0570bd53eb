#include "reslab/krein.hpp"
#include "reslab/error.hpp"

#include "lapacke_cpp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace reslab {

namespace {

// diagonal of H_D - z on the interior nodes of [a,b], without the 2h^2/dx^2 part
RVec interior_potential(const PotentialSpec& spec, double h, const Grid& grid, bool include_wells)
{
    spec.check_on_grid(grid);
    const RVec v = spec.sample_barrier(grid);
    const int m = grid.idx_b - grid.idx_a - 1;
    RVec out = v.segment(grid.idx_a + 1, m);
    if (include_wells) out += spec.sample_wells(grid, h).segment(grid.idx_a + 1, m);
    return out;
}

Tridiag dirichlet_matrix(const RVec& pot, double h, double dx, cplx z)
{
    const int m = static_cast<int>(pot.size());
    const double s = h * h / (dx * dx);
    Tridiag t(m);
    for (int i = 0; i < m; ++i) t.diag(i) = 2 * s + pot(i) - z;
    t.lower.setConstant(-s);
    t.upper.setConstant(-s);
    return t;
}

struct InteriorPair {
    InteriorBVPSolution u2, u3;
    cplx dir_phase;
    double rcond;
};

InteriorPair interior_pair(const RVec& pot, double h, double dx, cplx z)
{
    if (pot.size() < 3) throw Error(ErrorKind::InvalidParameter, "interval [a,b] needs at least four nodes");
    const int m = static_cast<int>(pot.size());
    const double s = h * h / (dx * dx);
    const Tridiag t = dirichlet_matrix(pot, h, dx, z);
    TridiagLU lu(t);
    const double rc = lu.rcond();
    if (rc < 1e-14) {
        std::ostringstream os;
        os << "z = " << z << " is numerically a Dirichlet eigenvalue, rcond = " << rc;
        throw Error(ErrorKind::NearDirichletEigenvalue, os.str());
    }
    InteriorPair out;
    out.rcond = rc;
    out.dir_phase = lu.det_phase();
    // the Dirichlet data are propagated with the difference form of the same three-point equations;
    // an LU solve of the s-scaled matrix loses about eps * 4s / |z - lambda_j| near a Dirichlet eigenvalue
    for (BvpKind which : {BvpKind::U2, BvpKind::U3}) {
        CVec y = CVec::Zero(m + 2);
        if (which == BvpKind::U2) {
            y(1) = 1.0;
            cplx d = 1.0;
            for (int i = 1; i <= m; ++i) {
                d += (pot(i - 1) - z) / s * y(i);
                y(i + 1) = y(i) + d;
            }
        } else {
            y(m) = 1.0;
            cplx d = 1.0;
            for (int i = m; i >= 1; --i) {
                d += (pot(i - 1) - z) / s * y(i);
                y(i - 1) = y(i) + d;
            }
        }
        const cplx end = which == BvpKind::U2 ? y(m + 1) : y(0);
        if (end == 0.0 || !std::isfinite(std::abs(end)))
            throw Error(ErrorKind::NearDirichletEigenvalue, "boundary value of the shooting solution vanished");
        InteriorBVPSolution sol;
        sol.which = which;
        sol.z = z;
        sol.u = y / end;
        if (which == BvpKind::U2)
            sol.u(m + 1) = 1.0;
        else
            sol.u(0) = 1.0;
        const CVec& u = sol.u;
        sol.du_a = (-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2 * dx);
        sol.du_b = (3.0 * u(m + 1) - 4.0 * u(m) + u(m - 1)) / (2 * dx);
        double rmax = 0.0;
        for (int i = 1; i <= m; ++i) {
            const cplx r = -s * (u(i - 1) - 2.0 * u(i) + u(i + 1)) + (pot(i - 1) - z) * u(i);
            rmax = std::max(rmax, std::abs(r));
        }
        sol.residual = rmax / (s * u.cwiseAbs().maxCoeff());
        (which == BvpKind::U2 ? out.u2 : out.u3) = std::move(sol);
    }
    return out;
}

cplx exterior_root_branch(cplx z, cplx theta)
{
    const cplx w = z * std::exp(2.0 * theta);
    const double mag = std::abs(w);
    if (mag == 0.0 || (std::abs(w.real()) <= 1e-14 * mag && w.imag() < 0))
        throw Error(ErrorKind::BranchCutHit, "z e^{2 theta} lies on the square-root cut");
    return sqrt_branch(w);
}

}  // namespace

InteriorBVPSolution solve_interior_bvp(const PotentialSpec& spec, cplx z, const SemiclassicalParams& params,
                                       const Grid& grid, BvpKind which, bool include_wells)
{
    const RVec pot = interior_potential(spec, params.h, grid, include_wells);
    InteriorPair p = interior_pair(pot, params.h, grid.dx, z);
    return which == BvpKind::U2 ? p.u2 : p.u3;
}

KreinMatrices q_matrix_with_root(cplx root, const InterfaceParams& params, const InteriorBVPSolution& u2,
                                 const InteriorBVPSolution& u3)
{
    const double h = params.h, h2 = h * h;
    const cplx th = params.theta, th0 = params.theta0;
    const cplx ext = kI * h * std::exp(th) / root;
    KreinMatrices km;
    km.q.setZero();
    km.q(0, 0) = ext / h2;
    km.q(1, 1) = -u2.du_b / h2;
    km.q(1, 2) = u3.du_b / h2;
    km.q(2, 1) = -u2.du_a / h2;
    km.q(2, 2) = u3.du_a / h2;
    km.q(3, 3) = ext / h2;
    km.a_mat.setZero();
    km.a_mat(0, 0) = -std::exp(-1.5 * th0) / h2;
    km.a_mat(1, 1) = -std::exp(0.5 * th0) / h2;
    km.a_mat(2, 2) = std::exp(0.5 * th0) / h2;
    km.a_mat(3, 3) = std::exp(-1.5 * th0) / h2;
    km.b_mat.setZero();
    km.b_mat(0, 1) = km.b_mat(1, 0) = km.b_mat(2, 3) = km.b_mat(3, 2) = 1.0;
    const Eigen::Matrix4cd scaled = h2 * (km.b_mat * km.q - km.a_mat);
    km.char_value = scaled.determinant();
    return km;
}

KreinMatrices q_matrix(cplx z, const InterfaceParams& params, const InteriorBVPSolution& u2,
                       const InteriorBVPSolution& u3)
{
    return q_matrix_with_root(exterior_root_branch(z, params.theta), params, u2, u3);
}

CharEvaluation char_evaluate(cplx z, const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid,
                             bool include_wells)
{
    const cplx root = exterior_root_branch(z, params.theta);
    const RVec pot = interior_potential(spec, params.h, grid, include_wells);
    InteriorPair p = interior_pair(pot, params.h, grid.dx, z);
    CharEvaluation ce;
    ce.value = q_matrix_with_root(root, params, p.u2, p.u3).char_value;
    ce.dir_phase = p.dir_phase;
    ce.rcond = p.rcond;
    return ce;
}

cplx char_function(cplx z, const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid,
                   bool include_wells)
{
    return char_evaluate(z, spec, params, grid, include_wells).value;
}

DirichletEigenpairs dirichlet_eigs(const PotentialSpec& spec, const SemiclassicalParams& params, const Grid& grid,
                                   double lo, double hi)
{
    if (!(lo < hi)) throw Error(ErrorKind::InvalidParameter, "empty eigenvalue window");
    const RVec pot = interior_potential(spec, params.h, grid, true);
    const int n = static_cast<int>(pot.size());
    const double s = params.h * params.h / (grid.dx * grid.dx);
    std::vector<double> d(n), e(n), w(n);
    std::vector<lapack_int> isuppz(2 * n);
    lapack_int found = 0;

    auto reset = [&] {
        for (int i = 0; i < n; ++i) d[i] = 2 * s + pot(i);
        std::fill(e.begin(), e.end(), -s);
    };
    reset();
    double dummy = 0.0;
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'A', n, d.data(), e.data(), 0, 0, 0, 0, 0.0, &found,
                                     w.data(), &dummy, 1, isuppz.data());
    if (info != 0) throw Error(ErrorKind::FactorizationFailure, "dstevr failed on the Dirichlet operator");
    DirichletEigenpairs out;
    out.all_lambdas = Eigen::Map<RVec>(w.data(), found);

    reset();
    lapack_int count = 0;
    for (int i = 0; i < found; ++i)
        if (w[i] > lo && w[i] <= hi) ++count;
    if (count == 0) {
        std::ostringstream os;
        os << "no Dirichlet eigenvalue in (" << lo << ", " << hi << "]";
        throw Error(ErrorKind::EmptyWindow, os.str());
    }
    std::vector<double> zv(static_cast<size_t>(n) * (count + 2));
    info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'V', n, d.data(), e.data(), lo, hi, 0, 0, 0.0, &found, w.data(),
                          zv.data(), n, isuppz.data());
    if (info != 0 || found == 0) throw Error(ErrorKind::FactorizationFailure, "dstevr failed in the window");

    out.lambdas = Eigen::Map<RVec>(w.data(), found);
    out.phis.resize(n, found);
    const double scale = 1.0 / std::sqrt(grid.dx);
    for (int j = 0; j < found; ++j) {
        Eigen::Map<RVec> col(zv.data() + static_cast<size_t>(j) * n, n);
        Eigen::Index imax = 0;
        col.cwiseAbs().maxCoeff(&imax);
        const double sign = col(imax) < 0 ? -1.0 : 1.0;
        out.phis.col(j) = (sign * scale * col).cast<cplx>();
    }
    out.first_node = grid.idx_a + 1;
    out.x.resize(n);
    for (int i = 0; i < n; ++i) out.x(i) = grid.x(out.first_node + i);

    double gap = std::numeric_limits<double>::infinity();
    for (double lam : out.all_lambdas) {
        if (lam > lo && lam <= hi) continue;
        for (double mu : out.lambdas) gap = std::min(gap, std::abs(lam - mu));
    }
    out.cluster_gap = gap;
    return out;
}

double count_zeros(const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid, const ContourRect& r,
                   int min_nodes)
{
    auto phase = [&](cplx z) {
        CharEvaluation ce = char_evaluate(z, spec, params, grid);
        if (ce.value == 0.0) throw Error(ErrorKind::CountMismatch, "characteristic function vanishes on the contour");
        return ce.value / std::abs(ce.value) * ce.dir_phase;
    };
    const cplx corners[5] = {{r.re_lo, r.im_lo}, {r.re_hi, r.im_lo}, {r.re_hi, r.im_hi}, {r.re_lo, r.im_hi},
                             {r.re_lo, r.im_lo}};
    double perimeter = 0.0;
    for (int s = 0; s < 4; ++s) perimeter += std::abs(corners[s + 1] - corners[s]);

    double total = 0.0;
    std::function<void(cplx, cplx, cplx, cplx, int)> walk = [&](cplx z0, cplx p0, cplx z1, cplx p1, int depth) {
        const double d = std::arg(p1 / p0);
        if (std::abs(d) > 0.3 && depth < 40) {
            const cplx zm = 0.5 * (z0 + z1);
            const cplx pm = phase(zm);
            walk(z0, p0, zm, pm, depth + 1);
            walk(zm, pm, z1, p1, depth + 1);
            return;
        }
        total += d;
    };
    for (int s = 0; s < 4; ++s) {
        const cplx z0 = corners[s], z1 = corners[s + 1];
        const int nodes = std::max(8, static_cast<int>(std::ceil(min_nodes * std::abs(z1 - z0) / perimeter)));
        cplx zp = z0, pp = phase(z0);
        for (int k = 1; k <= nodes; ++k) {
            const cplx zk = z0 + (z1 - z0) * (static_cast<double>(k) / nodes);
            const cplx pk = phase(zk);
            walk(zp, pp, zk, pk, 0);
            zp = zk;
            pp = pk;
        }
    }
    return total / (2 * kPi);
}

double fermi_golden_rule(const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid,
                         const DirichletEigenpairs& eigs, int j, cplx z_res)
{
    if (!spec.has_wells()) return 0.0;
    const double lam = z_res.real();
    if (!(lam > 0)) throw Error(ErrorKind::InvalidParameter, "Fermi golden rule needs Re z > 0");
    const double k = std::sqrt(lam), h = params.h;
    const PotentialSpec filled = spec.without_wells();
    const InterfaceParams ip(params.theta0, h);
    double sum = 0.0;
    for (double sk : {k, -k}) {
        GeneralizedEigenfunction ge = generalized_eigenfunction(filled, sk, ip, grid);
        auto phi_at = [&](int node) -> cplx {
            const int idx = node - eigs.first_node;
            if (idx < 0 || idx >= eigs.phis.rows()) return 0.0;
            return eigs.phis(idx, j);
        };
        cplx pair = 0.0;
        for (const auto& dw : spec.wells_delta()) {
            const int node = grid.node_of(dw.c);
            pair += dw.amplitude(0.0) * h * ge.interior(node - grid.idx_a) * std::conj(phi_at(node));
        }
        if (!spec.wells_bounded().empty()) {
            const int m = grid.idx_b - grid.idx_a;
            for (int i = 0; i <= m; ++i) {
                const int node = grid.idx_a + i;
                const double wgt = (i == 0 || i == m) ? 0.5 : 1.0;
                pair += wgt * grid.dx * spec.well_bounded(grid.x(node)) * ge.interior(i) * std::conj(phi_at(node));
            }
        }
        sum += std::norm(pair);
    }
    return sum / (4 * h * k);
}

ResonanceSearch find_resonances(const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid, double lo,
                                double hi, const ResonanceOptions& opts)
{
    InterfaceParams ip(params.theta0, params.h, params.theta0);
    const double h = params.h;
    ResonanceSearch out;
    out.eigs = dirichlet_eigs(spec, SemiclassicalParams(h, spec.c()), grid, lo, hi);
    const RVec& lam = out.eigs.lambdas;
    const double half = opts.xi * h;
    const double depth = std::pow(h, opts.n0);

    // clusters of window eigenvalues closer than the contour half-width
    std::vector<std::pair<int, int>> clusters;
    if (opts.lambda0) {
        int first = -1, last = -1;
        for (int j = 0; j < lam.size(); ++j)
            if (std::abs(lam(j) - *opts.lambda0) < half) {
                if (first < 0) first = j;
                last = j;
            }
        if (first < 0) throw Error(ErrorKind::EmptyWindow, "no Dirichlet eigenvalue within xi h of lambda0");
        clusters.push_back({first, last});
    } else {
        int start = 0;
        for (int j = 1; j <= lam.size(); ++j)
            if (j == lam.size() || lam(j) - lam(j - 1) >= half) {
                clusters.push_back({start, j - 1});
                start = j;
            }
    }

    auto charv = [&](cplx z) { return char_function(z, spec, ip, grid); };

    for (auto [first, last] : clusters) {
        const double center = opts.lambda0 ? *opts.lambda0 : 0.5 * (lam(first) + lam(last));
        const double spread = opts.lambda0 ? 0.0 : 0.5 * (lam(last) - lam(first));
        ContourRect rect{center - half - spread, center + half + spread, -depth, depth / 4};
        std::vector<double> seeds;
        for (double mu : out.eigs.all_lambdas)
            if (mu > rect.re_lo && mu < rect.re_hi) seeds.push_back(mu);

        auto g = [&](cplx z) {
            cplx v = charv(z);
            for (double mu : seeds) v *= (z - mu);
            return v;
        };

        std::vector<ResonanceRecord> found;
        for (size_t s = 0; s < seeds.size(); ++s) {
            cplx z(seeds[s], -1e-3 * depth);
            std::ostringstream trace;
            bool ok = false;
            int it = 0;
            double best = std::numeric_limits<double>::infinity();
            int stall = 0;
            for (; it < opts.max_newton; ++it) {
                const cplx gz = g(z);
                const double dz = 1e-7 * std::max(std::abs(z), 1.0);
                const cplx dg = (g(z + dz) - g(z - dz)) / (2 * dz);
                cplx step = gz / dg;
                const double cap = 0.25 * half;
                if (std::abs(step) > cap) step *= cap / std::abs(step);
                z -= step;
                trace << " " << z;
                const double res = std::abs(gz);
                if (res < best * 0.5) {
                    best = res;
                    stall = 0;
                } else if (++stall >= 3 && std::abs(step) < 1e-9 * std::abs(z)) {
                    ok = true;
                    break;
                }
                if (std::abs(step) < 1e-13 * std::abs(z)) {
                    ok = true;
                    break;
                }
            }
            if (!ok) {
                std::ostringstream os;
                os << "Newton from lambda = " << seeds[s] << " did not converge; iterates:" << trace.str();
                throw Error(ErrorKind::NewtonDiverged, os.str());
            }
            bool dup = false;
            for (auto& r : found)
                if (std::abs(r.z_res - z) < 1e-8 * std::max(1.0, std::abs(z))) {
                    ++r.multiplicity;
                    dup = true;
                }
            if (dup) continue;
            ResonanceRecord rec;
            rec.lambda_j = seeds[s];
            rec.z_res = z;
            rec.gamma = -z.imag();
            rec.newton_residual = std::abs(charv(z));
            rec.char_scale = std::abs(charv(cplx(seeds[s], 0.1)));
            rec.theta0 = params.theta0;
            rec.h = h;
            rec.iterations = it + 1;
            int jw = -1;
            for (int j = 0; j < lam.size(); ++j)
                if (std::abs(lam(j) - seeds[s]) < 1e-9 * std::max(1.0, std::abs(seeds[s]))) jw = j;
            rec.j = jw;
            if (opts.with_fgr && jw >= 0) {
                try {
                    rec.fgr = fermi_golden_rule(spec, params, grid, out.eigs, jw, z);
                } catch (const Error&) {
                    rec.fgr = std::numeric_limits<double>::quiet_NaN();
                }
            }
            found.push_back(rec);
        }

        const double wind = opts.verify_count ? count_zeros(spec, ip, grid, rect, opts.contour_nodes)
                                              : std::numeric_limits<double>::quiet_NaN();
        if (opts.verify_count) {
            int inside = 0;
            for (const auto& r : found)
                if (r.z_res.real() > rect.re_lo && r.z_res.real() < rect.re_hi && r.z_res.imag() > rect.im_lo &&
                    r.z_res.imag() < rect.im_hi)
                    inside += r.multiplicity;
            if (std::abs(wind - inside) > 1e-3) {
                std::ostringstream os;
                os << "argument principle counts " << wind << " zeros, Newton found " << inside << " inside [" << rect.re_lo
                   << ", " << rect.re_hi << "] x [" << rect.im_lo << ", " << rect.im_hi << "]";
                throw Error(ErrorKind::CountMismatch, os.str());
            }
        }
        out.contours.push_back(rect);
        out.winding.push_back(wind);
        out.cluster_size.push_back(static_cast<int>(seeds.size()));
        for (auto& r : found) out.records.push_back(r);
    }
    return out;
}

double PiecewiseSamples::l2_norm(double dx) const
{
    auto part = [&](const CVec& v) {
        if (v.size() < 2) return 0.0;
        double s = 0.5 * (std::norm(v(0)) + std::norm(v(v.size() - 1)));
        for (int i = 1; i + 1 < v.size(); ++i) s += std::norm(v(i));
        return s * dx;
    };
    return std::sqrt(part(left) + part(interior) + part(right));
}

PiecewiseSamples PiecewiseSamples::operator-(const PiecewiseSamples& o) const
{
    return {left - o.left, interior - o.interior, right - o.right};
}

KreinResolvent::KreinResolvent(const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid, cplx z,
                               bool include_wells)
    : grid_(grid), params_(params), z_(z)
{
    const double h = params.h, dx = grid.dx;
    const int ia = grid.idx_a, ib = grid.idx_b, n = grid.n_points;
    if (ia < 3 || n - 1 - ib < 3) throw Error(ErrorKind::InvalidParameter, "grid needs exterior nodes on both sides");
    const cplx w = z * std::exp(2.0 * params.theta);
    root_ = std::sqrt(w);
    if (root_.imag() < 0) root_ = -root_;
    if (std::abs(root_.imag()) <= 1e-14 * std::abs(root_))
        throw Error(ErrorKind::BranchCutHit, "z lies on the essential spectrum ray e^{-2 theta} R_+");

    const RVec pot = interior_potential(spec, h, grid, include_wells);
    InteriorPair p = interior_pair(pot, h, dx, z);
    u2_ = p.u2;
    u3_ = p.u3;
    t_int_ = dirichlet_matrix(pot, h, dx, z);
    lu_int_.emplace(t_int_);

    const cplx se = h * h * std::exp(-2.0 * params.theta) / (dx * dx);
    // left exterior unknowns are nodes 1..ia, Neumann at ia by a mirrored ghost node
    t_left_ = Tridiag(ia);
    t_left_.diag.setConstant(2.0 * se - z);
    t_left_.lower.setConstant(-se);
    t_left_.upper.setConstant(-se);
    t_left_.lower(ia - 2) = -2.0 * se;
    lu_left_.emplace(t_left_);
    const int nr = n - 1 - ib;
    t_right_ = Tridiag(nr);
    t_right_.diag.setConstant(2.0 * se - z);
    t_right_.lower.setConstant(-se);
    t_right_.upper.setConstant(-se);
    t_right_.upper(0) = -2.0 * se;
    lu_right_.emplace(t_right_);

    km_ = q_matrix_with_root(root_, params, u2_, u3_);
    const Eigen::Matrix4cd scaled = h * h * (km_.b_mat * km_.q - km_.a_mat);
    Eigen::FullPivLU<Eigen::Matrix4cd> lu(scaled);
    const double rc = 1.0 / (scaled.cwiseAbs().rowwise().sum().maxCoeff() *
                             lu.inverse().cwiseAbs().rowwise().sum().maxCoeff());
    if (!(rc > 1e-12)) {
        std::ostringstream os;
        os << "Bq - A is nearly singular at z = " << z << " (rcond " << rc << ")";
        throw Error(ErrorKind::NearResonance, os.str());
    }
    coupling_ = h * h * lu.inverse() * km_.b_mat;
}

PiecewiseSamples KreinResolvent::nd_apply(const CVec& f) const
{
    const int ia = grid_.idx_a, ib = grid_.idx_b, n = grid_.n_points;
    if (f.size() != n) throw Error(ErrorKind::ShapeMismatch, "f must be sampled on every grid node");
    PiecewiseSamples out;
    out.left = CVec::Zero(ia + 1);
    out.left.tail(ia) = lu_left_->solve(f.segment(1, ia));
    const int m = ib - ia - 1;
    out.interior = CVec::Zero(m + 2);
    out.interior.segment(1, m) = lu_int_->solve(f.segment(ia + 1, m));
    const int nr = n - 1 - ib;
    out.right = CVec::Zero(nr + 1);
    out.right.head(nr) = lu_right_->solve(f.segment(ib, nr));
    return out;
}

Eigen::Vector4cd KreinResolvent::pairings(const PiecewiseSamples& nd) const
{
    const double dx = grid_.dx;
    const cplx e = std::exp(-0.5 * params_.theta);
    const CVec& u = nd.interior;
    const int last = static_cast<int>(u.size()) - 1;
    Eigen::Vector4cd p;
    p(0) = e * nd.right(0);
    p(1) = (3.0 * u(last) - 4.0 * u(last - 1) + u(last - 2)) / (2 * dx);
    p(2) = (-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2 * dx);
    p(3) = e * nd.left(nd.left.size() - 1);
    return p;
}

PiecewiseSamples KreinResolvent::gamma(int i) const
{
    const int ia = grid_.idx_a, ib = grid_.idx_b, n = grid_.n_points;
    const double h = params_.h;
    PiecewiseSamples g{CVec::Zero(ia + 1), CVec::Zero(ib - ia + 1), CVec::Zero(n - ib)};
    const cplx c14 = kI * std::exp(1.5 * params_.theta) / (h * root_);
    switch (i) {
    case 0:
        for (int k = 0; k < g.right.size(); ++k) g.right(k) = c14 * std::exp(kI * root_ * (k * grid_.dx) / h);
        break;
    case 1:
        g.interior = -u2_.u / (h * h);
        break;
    case 2:
        g.interior = u3_.u / (h * h);
        break;
    case 3:
        for (int k = 0; k <= ia; ++k) g.left(k) = c14 * std::exp(kI * root_ * ((ia - k) * grid_.dx) / h);
        break;
    default:
        throw Error(ErrorKind::InvalidParameter, "gamma index out of range");
    }
    return g;
}

PiecewiseSamples KreinResolvent::correction(const CVec& f) const
{
    return correction_from(nd_apply(f));
}

PiecewiseSamples KreinResolvent::correction_from(const PiecewiseSamples& nd) const
{
    const Eigen::Vector4cd w = coupling_ * pairings(nd);
    const int ia = grid_.idx_a, ib = grid_.idx_b, n = grid_.n_points;
    PiecewiseSamples c{CVec::Zero(ia + 1), CVec::Zero(ib - ia + 1), CVec::Zero(n - ib)};
    for (int i = 0; i < 4; ++i) {
        PiecewiseSamples g = gamma(i);
        c.left += w(i) * g.left;
        c.interior += w(i) * g.interior;
        c.right += w(i) * g.right;
    }
    return c;
}

PiecewiseSamples KreinResolvent::apply(const CVec& f) const
{
    const PiecewiseSamples nd = nd_apply(f);
    return nd - correction_from(nd);
}

PiecewiseSamples krein_resolvent_apply(const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid,
                                       cplx z, const CVec& f)
{
    return KreinResolvent(spec, params, grid, z).apply(f);
}

}  // namespace reslab
