#include "reslab/propagator.hpp"
#include "reslab/adiabatic.hpp"
#include "reslab/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace reslab {

TbcMode parse_tbc_mode(const std::string& name)
{
    if (name == "exact") return TbcMode::Exact;
    if (name == "padded") return TbcMode::Padded;
    if (name == "dirichlet") return TbcMode::Dirichlet;
    throw Error(ErrorKind::ConstraintViolation, "scheme.tbc must be one of exact, padded, dirichlet (got '" + name + "')");
}

const char* tbc_mode_name(TbcMode mode)
{
    switch (mode) {
    case TbcMode::Exact: return "exact";
    case TbcMode::Padded: return "padded";
    case TbcMode::Dirichlet: return "dirichlet";
    }
    return "?";
}

Grid scheme_grid(int j_per_unit, double half_width)
{
    return build_grid(-half_width, half_width, j_per_unit, -1.0, 1.0);
}

WavePacket::WavePacket(double x0_, double sigma_, double k_) : x0(x0_), sigma(sigma_), k(k_)
{
    if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidParameter, "packet sigma must be positive");
}

CVec WavePacket::sample(const Grid& g) const
{
    CVec u(g.n_points);
    for (int i = 0; i < g.n_points; ++i) {
        const double y = g.x(i) - x0;
        u(i) = std::exp(cplx(-y * y / (2 * sigma * sigma), k * y));
    }
    return u;
}

Tridiag modified_laplacian(const Grid& g, cplx theta0, cplx theta)
{
    const int n = g.n_points, ia = g.idx_a, ib = g.idx_b;
    if (ia < 1 || ib + 2 > n - 1 || ib - ia < 3)
        throw Error(ErrorKind::NonRepresentableInterface, "interfaces too close to each other or to the grid ends");
    const cplx t = theta0 + theta;
    const cplx eta = std::exp(-2.0 * theta);
    const double inv = 1.0 / (g.dx * g.dx);
    Tridiag m(n);
    for (int j = 0; j < n; ++j) {
        m.diag(j) = -2.0;
        if (j > 0) m.lower(j - 1) = 1.0;
        if (j + 1 < n) m.upper(j) = 1.0;
    }
    // node ib holds u(b-), node ia holds u(a-)
    m.diag(ib) = -(1.0 + std::exp(-t));
    m.upper(ib) = std::exp(-1.5 * t);
    m.lower(ib) = std::exp(0.5 * t);
    m.diag(ia) = -(1.0 + std::exp(t));
    m.upper(ia) = std::exp(1.5 * t);
    m.lower(ia) = std::exp(-0.5 * t);
    for (int j = 0; j < n; ++j) {
        const bool exterior = j <= ia || j > ib;
        const cplx s = exterior ? eta * inv : cplx(inv);
        m.diag(j) *= s;
        if (j > 0) m.lower(j - 1) *= s;
        if (j + 1 < n) m.upper(j) *= s;
    }
    return m;
}

CVec modified_laplacian_apply(const CVec& u, cplx theta0, const Grid& g)
{
    if (u.size() != g.n_points) throw Error(ErrorKind::ShapeMismatch, "vector length differs from the grid");
    return modified_laplacian(g, theta0).apply(u);
}

RVec scheme_potential(const std::optional<PotentialSpec>& potential, const Grid& g, double h, double t)
{
    if (!potential) return RVec::Zero(g.n_points);
    potential->check_on_grid(g);
    return potential->sample_barrier(g, t) + potential->sample_wells(g, h, t);
}

Tridiag scheme_hamiltonian(const SchemeConfig& cfg)
{
    const double d = cfg.h_over_ell * cfg.h_over_ell;
    Tridiag m = modified_laplacian(cfg.grid, cfg.theta0, cfg.theta).affine(0.0, -d);
    m.diag += scheme_potential(cfg.potential, cfg.grid, cfg.h_over_ell).cast<cplx>();
    return m;
}

TransparentBoundary::TransparentBoundary(cplx d_coef, double dt, double dx, int max_steps)
{
    r_ = kI * d_coef * dt / (2 * dx * dx);
    const cplx inv_r = 1.0 / r_;
    const cplx p = 2.0 + inv_r;
    // s^2 - (2 + 1/r) s + 1 = 0, decaying root
    const cplx disc = std::sqrt(p * p - 4.0);
    cplx s0 = 0.5 * (p - disc);
    if (std::abs(s0) > 1.0) s0 = 0.5 * (p + disc);
    s_.assign(max_steps + 2, 0.0);
    s_[0] = s0;
    const cplx denom = 2.0 * s0 - p;
    for (int n = 1; n < static_cast<int>(s_.size()); ++n) {
        cplx conv = 0.0, sq_prev = 0.0;
        for (int k = 1; k < n; ++k) conv += s_[k] * s_[n - k];
        for (int k = 0; k < n; ++k) sq_prev += s_[k] * s_[n - 1 - k];
        cplx rhs = conv + sq_prev + (inv_r - 2.0) * s_[n - 1];
        if (n == 1) rhs += 1.0;
        s_[n] = -rhs / denom;
    }
}

cplx TransparentBoundary::rhs_history(int n) const
{
    if (static_cast<int>(history_.size()) != n + 1)
        throw Error(ErrorKind::ShapeMismatch, "boundary history does not match the step count");
    if (n + 1 >= static_cast<int>(s_.size())) throw Error(ErrorKind::InvalidParameter, "more steps than the kernel holds");
    cplx acc = 0.0;
    for (int k = 0; k <= n; ++k) acc += (s_[n + 1 - k] + s_[n - k]) * history_[k];
    return r_ * acc;
}

BoundaryRow transparent_bc_update(const TransparentBoundary& boundary, int step)
{
    return {-boundary.r() * boundary.s0(), boundary.rhs_history(step)};
}

namespace {

double inf_norm(const Tridiag& m)
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

void check_free_edges(const SchemeConfig& cfg, const Tridiag& ham)
{
    const int n = cfg.grid.n_points;
    const double d = cfg.h_over_ell * cfg.h_over_ell;
    const cplx expect = 2.0 * d * std::exp(-2.0 * cfg.theta) / (cfg.grid.dx * cfg.grid.dx);
    for (int j : {0, 1, n - 2, n - 1}) {
        if (std::abs(ham.diag(j) - expect) > 1e-12 * std::abs(expect))
            throw Error(ErrorKind::UnsupportedPotentialAtBoundary,
                        "transparent boundary needs V = 0 and the plain stencil near the truncation points");
    }
}

}  // namespace

CrankNicolson::CrankNicolson(const SchemeConfig& cfg, const Tridiag& hamiltonian) : cfg_(cfg), ham_(hamiltonian)
{
    setup();
}

CrankNicolson::CrankNicolson(const SchemeConfig& cfg) : cfg_(cfg), ham_(scheme_hamiltonian(cfg)) { setup(); }

void CrankNicolson::setup()
{
    if (!(cfg_.dt > 0.0)) throw Error(ErrorKind::InvalidParameter, "dt must be positive");
    if (ham_.size() != cfg_.grid.n_points) throw Error(ErrorKind::ShapeMismatch, "Hamiltonian size differs from grid");
    const cplx half = 0.5 * kI * cfg_.dt;
    lhs_ = ham_.affine(1.0, half);
    rhs_ = ham_.affine(1.0, -half);
    if (cfg_.tbc == TbcMode::Exact) {
        check_free_edges(cfg_, ham_);
        const cplx d = cfg_.h_over_ell * cfg_.h_over_ell * std::exp(-2.0 * cfg_.theta);
        left_.emplace(d, cfg_.dt, cfg_.grid.dx, std::max(cfg_.n_steps, 1));
        right_.emplace(d, cfg_.dt, cfg_.grid.dx, std::max(cfg_.n_steps, 1));
        lhs_.diag(0) += -left_->r() * left_->s0();
        lhs_.diag(lhs_.size() - 1) += -right_->r() * right_->s0();
    }
    lu_.emplace(lhs_);
}

void CrankNicolson::step(CVec& u)
{
    const int n = static_cast<int>(u.size());
    if (n != ham_.size()) throw Error(ErrorKind::ShapeMismatch, "state size differs from the Hamiltonian");
    CVec b = rhs_.apply(u);
    if (left_) {
        if (n_ == 0) left_->record(u(0)), right_->record(u(n - 1));
        b(0) += transparent_bc_update(*left_, n_).rhs;
        b(n - 1) += transparent_bc_update(*right_, n_).rhs;
    }
    u = lu_->solve(b);
    ++n_;
    if (left_) left_->record(u(0)), right_->record(u(n - 1));
}

TbcMemory CrankNicolson::memory() const
{
    TbcMemory m;
    if (left_) m.left = left_->history(), m.right = right_->history();
    return m;
}

void crank_nicolson_step(CVec& u, CrankNicolson& stepper) { stepper.step(u); }

namespace {

WaveTrajectory run(const SchemeConfig& cfg, const Tridiag& ham, const CVec& u0, int lo, int count)
{
    WaveTrajectory tr;
    tr.dt = cfg.dt;
    const double dx = cfg.grid.dx;
    const double scale = cfg.dt * inf_norm(ham);
    if (scale > 50.0) {
        std::ostringstream os;
        os << "dt * ||H|| = " << scale << " exceeds 50, time accuracy is poor";
        tr.warnings.push_back(os.str());
    }
    CrankNicolson cn(cfg, ham);
    CVec u = u0;
    const int every = std::max(cfg.snapshot_every, 1);
    auto store = [&](int n) {
        const CVec w = u.segment(lo, count);
        tr.norms.push_back(l2_norm(w, dx));
        if (n % every == 0 || n == cfg.n_steps) {
            tr.steps.push_back(n);
            tr.snapshots.push_back(w);
        }
    };
    store(0);
    for (int n = 1; n <= cfg.n_steps; ++n) {
        cn.step(u);
        store(n);
        if (!std::isfinite(tr.norms.back())) throw Error(ErrorKind::FactorizationFailure, "non-finite state");
    }
    tr.tbc_memory = cn.memory();
    return tr;
}

}  // namespace

WaveTrajectory evolve(const SchemeConfig& cfg, const CVec& u0)
{
    if (u0.size() != cfg.grid.n_points) throw Error(ErrorKind::ShapeMismatch, "initial state size differs from grid");
    if (cfg.tbc != TbcMode::Padded) {
        WaveTrajectory tr = run(cfg, scheme_hamiltonian(cfg), u0, 0, cfg.grid.n_points);
        tr.grid = cfg.grid;
        return tr;
    }
    const Grid& g = cfg.grid;
    const int ppu = static_cast<int>(std::lround(1.0 / g.dx));
    if (cfg.pad_to < std::max(-g.x_min, g.x_max))
        throw Error(ErrorKind::InvalidParameter, "padded domain must contain the grid");
    SchemeConfig big = cfg;
    big.grid = build_grid(-cfg.pad_to, cfg.pad_to, ppu, g.a(), g.b());
    big.tbc = TbcMode::Dirichlet;
    const int lo = big.grid.node_of(g.x_min);
    CVec v = CVec::Zero(big.grid.n_points);
    v.segment(lo, g.n_points) = u0;
    WaveTrajectory tr = run(big, scheme_hamiltonian(big), v, lo, g.n_points);
    tr.grid = g;
    return tr;
}

double relative_difference_metric(const WaveTrajectory& traj, const WaveTrajectory& ref, double u_init_norm)
{
    if (traj.steps != ref.steps || traj.snapshots.size() != ref.snapshots.size())
        throw Error(ErrorKind::ShapeMismatch, "trajectories store different steps");
    if (!(u_init_norm > 0.0)) throw Error(ErrorKind::InvalidParameter, "initial norm must be positive");
    const double dx = traj.grid.dx;
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        if (traj.snapshots[i].size() != ref.snapshots[i].size())
            throw Error(ErrorKind::ShapeMismatch, "snapshot sizes differ");
        worst = std::max(worst, l2_norm(traj.snapshots[i] - ref.snapshots[i], dx));
    }
    return 100.0 * worst / u_init_norm;
}

std::vector<ComparePoint> theta0_sweep(SchemeConfig cfg, const WavePacket& packet, const std::vector<double>& im_list)
{
    cfg.snapshot_every = 1;
    const CVec u0 = packet.sample(cfg.grid);
    const double n0 = l2_norm(u0, cfg.grid.dx);
    cfg.theta0 = 0.0;
    const WaveTrajectory ref = evolve(cfg, u0);
    std::vector<ComparePoint> out;
    for (double im : im_list) {
        cfg.theta0 = cplx(0.0, im);
        out.push_back({im, relative_difference_metric(evolve(cfg, u0), ref, n0)});
    }
    return out;
}

WaveTrajectory contraction_evolution(const PotentialSpec& spec, double tau, const SchemeConfig& cfg, const CVec& u0)
{
    if (!(tau > 0.0 && tau < kPi / 2)) throw Error(ErrorKind::InvalidParameter, "tau must lie in (0, pi/2)");
    const DeformedHamiltonian dh =
        assemble_deformed_hamiltonian(spec, tau, SemiclassicalParams(cfg.h_over_ell, spec.c()), cfg.grid, 0.0);
    SchemeConfig c = cfg;
    c.theta0 = cplx(0.0, tau);
    c.theta = cplx(0.0, tau);
    c.tbc = TbcMode::Dirichlet;
    WaveTrajectory tr = run(c, dh.matrix, u0, 0, cfg.grid.n_points);
    tr.grid = cfg.grid;
    return tr;
}

}  // namespace reslab
