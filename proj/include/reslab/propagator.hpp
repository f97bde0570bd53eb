#pragma once

#include "reslab/banded.hpp"
#include "reslab/model.hpp"
#include "reslab/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace reslab {

enum class TbcMode { Exact, Padded, Dirichlet };

TbcMode parse_tbc_mode(const std::string& name);
const char* tbc_mode_name(TbcMode mode);

struct SchemeConfig {
    Grid grid;  // rescaled variable, interfaces at -1 and 1
    double dt = 0.8;
    int n_steps = 400;
    cplx theta0 = 0.0;
    cplx theta = 0.0;  // exterior scaling, zero for the plain interface problem
    double h_over_ell = 0.03;
    std::optional<PotentialSpec> potential;  // empty means V = 0
    TbcMode tbc = TbcMode::Exact;
    int snapshot_every = 10;
    double pad_to = 40.0;  // half width of the padded domain
};

// grid [-5, 5] with J nodes per unit and interfaces at -1 and 1, as in the wave packet experiments
Grid scheme_grid(int j_per_unit = 30, double half_width = 5.0);

struct WavePacket {
    double x0 = -3.0;
    double sigma = 0.2;
    double k = 0.0;

    WavePacket(double x0_, double sigma_, double k_);
    CVec sample(const Grid& g) const;
};

// (1/dx^2) times the second difference with the fictive point stencils at the interfaces;
// theta enters the stencils as theta0 + theta and scales the exterior rows by e^{-2 theta}
Tridiag modified_laplacian(const Grid& g, cplx theta0, cplx theta = 0.0);
CVec modified_laplacian_apply(const CVec& u, cplx theta0, const Grid& g);

// barrier sampled pointwise on the closed interval [a, b], plus the wells
RVec scheme_potential(const std::optional<PotentialSpec>& potential, const Grid& g, double h, double t = 0.0);

// -(h/ell)^2 Delta + V
Tridiag scheme_hamiltonian(const SchemeConfig& cfg);

// convolution closure of one truncation point for the Crank-Nicolson scheme of i u_t = -D u_xx
class TransparentBoundary {
public:
    TransparentBoundary(cplx d_coef, double dt, double dx, int max_steps);

    // s0 enters the diagonal of the boundary row once and for all
    cplx s0() const { return s_[0]; }
    cplx kernel(int n) const { return s_.at(n); }
    // r times the history terms added to the right hand side of the boundary row before step n -> n+1
    cplx rhs_history(int n) const;
    void record(cplx u_boundary) { history_.push_back(u_boundary); }
    const std::vector<cplx>& history() const { return history_; }
    cplx r() const { return r_; }

private:
    cplx r_;
    std::vector<cplx> s_;
    std::vector<cplx> history_;
};

// closure row for one boundary: diagonal coefficient and right hand side contribution at a step
struct BoundaryRow {
    cplx diag_shift;
    cplx rhs;
};
BoundaryRow transparent_bc_update(const TransparentBoundary& boundary, int step);

struct TbcMemory {
    std::vector<cplx> left, right;  // boundary values u_0^n and u_{N}^n for n = 0..steps
};

struct WaveTrajectory {
    std::vector<int> steps;
    std::vector<CVec> snapshots;
    std::vector<double> norms;  // L2 norm at every step, including step 0
    TbcMemory tbc_memory;
    Grid grid;
    double dt = 0.0;
    std::vector<std::string> warnings;
};

class CrankNicolson {
public:
    CrankNicolson(const SchemeConfig& cfg, const Tridiag& hamiltonian);
    explicit CrankNicolson(const SchemeConfig& cfg);

    void step(CVec& u);
    int steps_taken() const { return n_; }
    const Tridiag& hamiltonian() const { return ham_; }
    TbcMemory memory() const;

private:
    void setup();
    SchemeConfig cfg_;
    Tridiag ham_;
    Tridiag lhs_, rhs_;
    std::optional<TridiagLU> lu_;
    std::optional<TransparentBoundary> left_, right_;
    int n_ = 0;
};

void crank_nicolson_step(CVec& u, CrankNicolson& stepper);

// evolves u0 for cfg.n_steps; with Padded the run happens on [-pad_to, pad_to] and is restricted back
WaveTrajectory evolve(const SchemeConfig& cfg, const CVec& u0);

// max_n 100 ||u^n - v^n|| / ||u_I||; both trajectories need every step stored
double relative_difference_metric(const WaveTrajectory& traj, const WaveTrajectory& ref, double u_init_norm);

struct ComparePoint {
    double im_theta0;
    double d;
};
// D_{theta0} for a list of Im theta0 against the theta0 = 0 run of the same configuration
std::vector<ComparePoint> theta0_sweep(SchemeConfig cfg, const WavePacket& packet, const std::vector<double>& im_list);

// CN evolution of the deformed Hamiltonian with theta = theta0 = i tau and Dirichlet truncation
WaveTrajectory contraction_evolution(const PotentialSpec& spec, double tau, const SchemeConfig& cfg, const CVec& u0);

}  // namespace reslab
