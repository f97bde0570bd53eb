#include "reslab/model.hpp"
#include "reslab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace reslab {

namespace {

// a position is on the lattice when it is a node up to round-off
constexpr double kSnapTol = 1e-9;

int snap(double x_min, double dx, double pos, const char* what)
{
    const double r = (pos - x_min) / dx;
    const double n = std::round(r);
    if (std::abs(r - n) > kSnapTol) {
        std::ostringstream os;
        os << what << " = " << pos << " is not a grid node (offset " << (r - n) << " dx)";
        throw Error(ErrorKind::NonRepresentableInterface, os.str());
    }
    return static_cast<int>(n);
}

}  // namespace

RVec Grid::nodes() const
{
    RVec x(n_points);
    for (int i = 0; i < n_points; ++i) x(i) = this->x(i);
    return x;
}

int Grid::node_of(double pos) const
{
    return snap(x_min, dx, pos, "position");
}

Grid build_grid(double x_min, double x_max, int points_per_unit, double a, double b)
{
    if (!(x_min <= a && a < b && b <= x_max))
        throw Error(ErrorKind::InvalidParameter, "need x_min <= a < b <= x_max");
    if (points_per_unit <= 0) throw Error(ErrorKind::InvalidParameter, "points_per_unit must be positive");
    const double cells = (x_max - x_min) * points_per_unit;
    if (std::abs(cells - std::round(cells)) > kSnapTol * std::max(1.0, cells))
        throw Error(ErrorKind::NonRepresentableInterface, "domain length is not a whole number of cells");
    Grid g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.n_points = static_cast<int>(std::round(cells)) + 1;
    g.dx = (x_max - x_min) / (g.n_points - 1);
    g.idx_a = snap(x_min, g.dx, a, "a");
    g.idx_b = snap(x_min, g.dx, b, "b");
    return g;
}

PotentialSpec::PotentialSpec(double a, double b, double c, ScalarFn barrier, std::vector<BoundedWell> wells_bounded,
                             std::vector<DeltaWell> wells_delta, ScalarFn time_profile)
    : a_(a), b_(b), c_(c), barrier_(std::move(barrier)), wells_bounded_(std::move(wells_bounded)),
      wells_delta_(std::move(wells_delta)), time_profile_(std::move(time_profile))
{
    if (!(a < b)) throw Error(ErrorKind::InvalidPotential, "need a < b");
    if (!(c > 0.0)) throw Error(ErrorKind::InvalidPotential, "structural constant c must be positive");
    if (!barrier_) throw Error(ErrorKind::InvalidPotential, "missing barrier");
    inf_v_ = std::numeric_limits<double>::infinity();
    double sup_v = 0.0;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double x = a + (b - a) * i / n;
        const double v = barrier_(x);
        inf_v_ = std::min(inf_v_, v);
        sup_v = std::max(sup_v, std::abs(v));
    }
    if (inf_v_ < c) {
        std::ostringstream os;
        os << "min V = " << inf_v_ << " is below c = " << c;
        throw Error(ErrorKind::InvalidPotential, os.str());
    }
    if (sup_v > 1.0 / c) {
        std::ostringstream os;
        os << "sup |V| = " << sup_v << " exceeds 1/c = " << 1.0 / c;
        throw Error(ErrorKind::InvalidPotential, os.str());
    }
    for (const auto& w : wells_bounded_) {
        if (!(a < w.lo && w.lo < w.hi && w.hi < b))
            throw Error(ErrorKind::InvalidPotential, "bounded well support must sit inside (a,b)");
        for (int i = 0; i <= 200; ++i) {
            const double x = w.lo + (w.hi - w.lo) * i / 200;
            if (std::abs(w.profile(x)) > 1.0 / c) throw Error(ErrorKind::InvalidPotential, "|W1| exceeds 1/c");
        }
    }
    double mass = 0.0;
    for (const auto& d : wells_delta_) {
        if (!(a < d.c && d.c < b)) throw Error(ErrorKind::InvalidPotential, "delta position must lie in (a,b)");
        if (!(d.alpha > 0.0)) throw Error(ErrorKind::InvalidPotential, "delta amplitude must be positive");
        mass += std::abs(d.alpha);
    }
    if (mass > 1.0 / c) throw Error(ErrorKind::InvalidPotential, "total delta mass exceeds h/c");
}

bool PotentialSpec::time_dependent() const
{
    if (time_profile_) return true;
    for (const auto& d : wells_delta_)
        if (d.alpha_of_t) return true;
    return false;
}

double PotentialSpec::barrier(double x, double t) const
{
    if (x < a_ || x > b_) return 0.0;
    const double v = barrier_(x);
    return time_profile_ ? time_profile_(t) * v : v;
}

double PotentialSpec::well_bounded(double x) const
{
    double w = 0.0;
    for (const auto& wb : wells_bounded_)
        if (x > wb.lo && x < wb.hi) w += wb.profile(x);
    return w;
}

RVec PotentialSpec::sample_barrier(const Grid& g, double t) const
{
    RVec v(g.n_points);
    for (int i = 0; i < g.n_points; ++i) {
        if (i < g.idx_a || i > g.idx_b)
            v(i) = 0.0;
        else
            v(i) = barrier(g.x(i), t);
    }
    return v;
}

RVec PotentialSpec::sample_wells(const Grid& g, double h, double t) const
{
    RVec w = RVec::Zero(g.n_points);
    for (int i = 0; i < g.n_points; ++i) w(i) = -well_bounded(g.x(i));
    for (const auto& d : wells_delta_) {
        const int j = g.node_of(d.c);
        w(j) -= d.amplitude(t) * h / g.dx;
    }
    return w;
}

void PotentialSpec::check_on_grid(const Grid& g) const
{
    if (std::abs(g.a() - a_) > 1e-9 * g.dx || std::abs(g.b() - b_) > 1e-9 * g.dx)
        throw Error(ErrorKind::NonRepresentableInterface, "grid interfaces do not match the potential's (a,b)");
    for (const auto& d : wells_delta_) g.node_of(d.c);
}

PotentialSpec PotentialSpec::without_wells() const
{
    return PotentialSpec(a_, b_, c_, barrier_, {}, {}, time_profile_);
}

PotentialSpec constant_barrier(double a, double b, double v0, double c, std::vector<DeltaWell> deltas)
{
    return PotentialSpec(a, b, c, [v0](double) { return v0; }, {}, std::move(deltas));
}

PotentialSpec table_barrier(double a, double b, std::vector<double> xs, std::vector<double> vs, double c,
                            std::vector<DeltaWell> deltas)
{
    if (xs.size() != vs.size() || xs.size() < 2) throw Error(ErrorKind::InvalidPotential, "bad barrier table");
    for (size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw Error(ErrorKind::InvalidPotential, "table abscissae must increase");
    if (xs.front() > a || xs.back() < b) throw Error(ErrorKind::InvalidPotential, "table must cover [a,b]");
    auto fn = [xs, vs](double x) {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        if (it == xs.begin()) return vs.front();
        if (it == xs.end()) return vs.back();
        const size_t k = static_cast<size_t>(it - xs.begin());
        const double s = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return (1 - s) * vs[k - 1] + s * vs[k];
    };
    return PotentialSpec(a, b, c, fn, {}, std::move(deltas));
}

SemiclassicalParams::SemiclassicalParams(double h_, double c_, std::optional<double> lambda0_)
    : h(h_), c(c_), lambda0(lambda0_)
{
    if (!(h > 0.0 && h <= 1.0)) throw Error(ErrorKind::InvalidParameter, "h must lie in (0,1]");
    if (!(c > 0.0)) throw Error(ErrorKind::InvalidParameter, "c must be positive");
}

void SemiclassicalParams::check_against(const PotentialSpec& spec) const
{
    if (!lambda0) return;
    if (*lambda0 < c || *lambda0 > spec.inf_barrier() - c) {
        std::ostringstream os;
        os << "lambda0 = " << *lambda0 << " must lie in [c, inf V - c] = [" << c << ", " << spec.inf_barrier() - c
           << "]";
        throw Error(ErrorKind::ConstraintViolation, os.str());
    }
}

double agmon_distance(const Grid& g, const RVec& v, double lambda, double x, double y)
{
    if (x > y) std::swap(x, y);
    auto f = [&](int i) { return std::sqrt(std::max(v(i) - lambda, 0.0)); };
    // integrand at an arbitrary point by linear interpolation of the node values
    auto f_at = [&](double p, int& cell) {
        double r = (p - g.x_min) / g.dx;
        cell = std::clamp(static_cast<int>(std::floor(r)), 0, g.n_points - 2);
        const double s = r - cell;
        return (1 - s) * f(cell) + s * f(cell + 1);
    };
    int cx = 0, cy = 0;
    const double fx = f_at(x, cx);
    const double fy = f_at(y, cy);
    if (cx == cy) return 0.5 * (fx + fy) * (y - x);
    double s = 0.5 * (fx + f(cx + 1)) * (g.x(cx + 1) - x);
    for (int i = cx + 1; i < cy; ++i) s += 0.5 * (f(i) + f(i + 1)) * g.dx;
    s += 0.5 * (f(cy) + fy) * (y - g.x(cy));
    return s;
}

double s0_barrier_action(const PotentialSpec& spec, double lambda0, const Grid& g)
{
    if (!spec.has_wells()) throw Error(ErrorKind::NoWell, "S0 needs at least one well");
    const RVec v = spec.sample_barrier(g);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& d : spec.wells_delta()) lo = std::min(lo, d.c), hi = std::max(hi, d.c);
    for (const auto& w : spec.wells_bounded()) lo = std::min(lo, w.lo), hi = std::max(hi, w.hi);
    return std::min(agmon_distance(g, v, lambda0, spec.a(), lo), agmon_distance(g, v, lambda0, hi, spec.b()));
}

}  // namespace reslab
