#pragma once

#include "reslab/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace reslab {

struct Grid {
    double x_min = 0.0;
    double x_max = 0.0;
    int n_points = 0;
    double dx = 0.0;
    int idx_a = 0;
    int idx_b = 0;

    double x(int i) const { return x_min + i * dx; }
    double a() const { return x(idx_a); }
    double b() const { return x(idx_b); }
    RVec nodes() const;
    // node index of a position that must sit on the lattice
    int node_of(double pos) const;
};

Grid build_grid(double x_min, double x_max, int points_per_unit, double a, double b);

using ScalarFn = std::function<double(double)>;

struct BoundedWell {
    ScalarFn profile;  // W1 >= 0 on its support
    double lo = 0.0, hi = 0.0;
};

struct DeltaWell {
    double c = 0.0;
    double alpha = 0.0;
    ScalarFn alpha_of_t;  // optional time profile, replaces alpha when set

    double amplitude(double t) const { return alpha_of_t ? alpha_of_t(t) : alpha; }
};

// barrier V on [a,b] (zero outside), wells W1 + sum alpha_j h delta(x - c_j)
class PotentialSpec {
public:
    PotentialSpec(double a, double b, double c, ScalarFn barrier, std::vector<BoundedWell> wells_bounded = {},
                  std::vector<DeltaWell> wells_delta = {}, ScalarFn time_profile = {});

    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }
    const std::vector<BoundedWell>& wells_bounded() const { return wells_bounded_; }
    const std::vector<DeltaWell>& wells_delta() const { return wells_delta_; }
    bool has_wells() const { return !wells_bounded_.empty() || !wells_delta_.empty(); }
    bool time_dependent() const;

    // barrier value at x (0 outside [a,b])
    double barrier(double x, double t = 0.0) const;
    double inf_barrier() const { return inf_v_; }
    // bounded part of the well, W1(x)
    double well_bounded(double x) const;

    RVec sample_barrier(const Grid& g, double t = 0.0) const;
    // diagonal of -W^h on the grid: -W1 and -alpha h/dx at delta nodes
    RVec sample_wells(const Grid& g, double h, double t = 0.0) const;
    // throws when a delta does not sit on a node of g
    void check_on_grid(const Grid& g) const;

    PotentialSpec without_wells() const;

private:
    double a_, b_, c_;
    ScalarFn barrier_;
    std::vector<BoundedWell> wells_bounded_;
    std::vector<DeltaWell> wells_delta_;
    ScalarFn time_profile_;
    double inf_v_ = 0.0;
};

PotentialSpec constant_barrier(double a, double b, double v0, double c, std::vector<DeltaWell> deltas = {});
// piecewise-linear table barrier; xs strictly increasing and covering [a,b]
PotentialSpec table_barrier(double a, double b, std::vector<double> xs, std::vector<double> vs, double c,
                            std::vector<DeltaWell> deltas = {});

struct SemiclassicalParams {
    double h = 0.1;
    double c = 0.2;
    std::optional<double> lambda0;

    SemiclassicalParams() = default;
    SemiclassicalParams(double h_, double c_, std::optional<double> lambda0_ = std::nullopt);
    // checks c <= lambda0 <= inf V - c when lambda0 is set
    void check_against(const PotentialSpec& spec) const;
};

// trapezoid value of int_x^y sqrt((V - lambda)_+), V sampled on g
double agmon_distance(const Grid& g, const RVec& v, double lambda, double x, double y);

double s0_barrier_action(const PotentialSpec& spec, double lambda0, const Grid& g);

}  // namespace reslab
