#pragma once

#include "reslab/banded.hpp"
#include "reslab/model.hpp"
#include "reslab/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace reslab {

enum class DriveKind { Sine, Frozen };

// V = 1 on (0,1), one delta well at 0.5 with alpha(t) = alpha0 (1 + amplitude sin 2 pi t)
PotentialSpec driven_delta_benchmark(double alpha0 = 1.0, double amplitude = 0.2, DriveKind kind = DriveKind::Sine);
// [-pad, 1 + pad] with interfaces at 0 and 1
Grid benchmark_grid(int points_per_unit = 200, double pad = 3.0);

struct AccretivityReport {
    double worst_probe = 0.0;        // min over probes of Re<u, iHu> / ||u||^2
    double min_hermitian_eig = 0.0;  // smallest eigenvalue of the Hermitian part of iH
    int probes = 0;
};

// Re<u, iHu> over `count` random probes and the exact bound from the Hermitian part
AccretivityReport accretivity_probe(const Tridiag& m, std::uint64_t seed, int count = 100);

struct DeformedHamiltonian {
    Tridiag matrix;
    double tau = 0.0;
    double t = 0.0;
    double h = 0.0;
    Grid grid;
    AccretivityReport probe;
};

// H_{i tau, V(t) - W(t)}(i tau) with the fictive point stencils; Dirichlet data at the grid ends
DeformedHamiltonian assemble_deformed_hamiltonian(const PotentialSpec& spec, double tau,
                                                  const SemiclassicalParams& params, const Grid& grid, double t,
                                                  std::uint64_t seed = 7);

struct CircleContour {
    cplx center = 0.0;
    double radius = 0.0;
    int nodes = 64;
};

struct SpectralProjector {
    CMat right;  // n x ell
    CMat left;   // n x ell, left^* right = I
    CVec eigenvalues;
    double t = 0.0;
    CircleContour contour;

    int rank() const { return static_cast<int>(right.cols()); }
    CMat apply(const CMat& x) const { return right * (left.adjoint() * x); }
};

struct ProjectorOptions {
    std::optional<double> radius;  // default max(h/2, 4 * cluster spread)
    int contour_nodes = 64;
    int max_iterations = 60;
    double tol = 1e-13;
    std::optional<CVec> guesses;  // eigenvalue guesses, e.g. from the previous time sample
};

// shift-invert for the ell right and left eigenpairs nearest lambda0, checked by the winding of det(w - H)
SpectralProjector spectral_projector(const DeformedHamiltonian& ham, cplx lambda0, int ell,
                                     const ProjectorOptions& opts = {});

// (1/2 pi i) \oint (w - H)^{-1} X dw by the trapezoid rule on the circle
CMat contour_projector_apply(const Tridiag& h, const CircleContour& c, const CMat& x);

// largest singular value of u v^*
double lowrank_norm(const CMat& u, const CMat& v);

struct ProjectorDiagnostics {
    double idempotence = 0.0;  // ||P^2 - P|| / ||P||
    double commutation = 0.0;  // ||HP - PH|| / (||H|| ||P||) on random probes
    double contour_agreement = 0.0;  // ||P_eig X - P_contour X|| / ||X|| on the frame
};
ProjectorDiagnostics projector_diagnostics(const DeformedHamiltonian& ham, const SpectralProjector& p,
                                           std::uint64_t seed = 11);

struct ProjectorPath {
    std::vector<double> times;  // t0 - 2 dt, ..., t1 + 2 dt
    std::vector<SpectralProjector> projectors;
    double dt = 0.0;
    double tau = 0.0;
    double max_jump = 0.0;  // max ||P(t_{k+1}) - P(t_k)||

    // index of the sample at time t0 + k dt
    int index(int k) const { return k + 2; }
    int intervals() const { return static_cast<int>(times.size()) - 5; }
};

struct PathOptions {
    double tau = 0.3;
    double t0 = 0.0, t1 = 1.0;
    int intervals = 400;  // even
    int ell = 1;
    cplx lambda0 = 0.0;
    std::uint64_t seed = 7;  // accretivity probes
    ProjectorOptions projector;
};

ProjectorPath build_projector_path(const PotentialSpec& spec, const SemiclassicalParams& params, const Grid& grid,
                                   const PathOptions& opts);

struct TransportOperator {
    CMat input;   // vectors at time s
    std::vector<CMat> output;  // Phi(t_k, s) input at the even samples between s and t
    std::vector<double> times;
    double s = 0.0, t = 0.0;
};

// classical RK4 for d/dt Phi = -[P, P'] Phi with step 2 dt and fourth order centered P';
// k_s and k_t are sample offsets of equal parity
TransportOperator parallel_transport(const ProjectorPath& path, int k_s, int k_t, const CMat& input);

// ||P(t) Phi(t,s) X - Phi(t,s) P(s) X|| / ||X|| maximized over the stored times
double intertwining_defect(const ProjectorPath& path, int k_s, const TransportOperator& tr);

struct SourceTerm {
    CVec r_s;  // added to the initial datum
    std::function<CVec(double)> r;  // added to the right hand side
};

struct AdiabaticOptions {
    PathOptions path;
    std::vector<double> eps_values{1e-2, 3e-3, 1e-3};
    double local_tol = 1e-8;
    std::optional<double> lambda_ref;  // phase removed from both evolutions, default Re z(t0)
    std::optional<SourceTerm> source;
};

struct AdiabaticRun {
    double eps = 0.0;
    double max_error = 0.0;
    double final_error = 0.0;
    double max_norm_growth = 0.0;  // max_t ||u(t)|| - ||u_s||
    int steps = 0;
    int rejected = 0;
    std::vector<double> times;
    std::vector<double> errors;
};

struct AdiabaticReport {
    std::vector<double> eps_values;
    std::vector<double> errors;
    std::vector<double> final_errors;
    double fitted_slope = 0.0;
    double intertwining = 0.0;
    double idempotence = 0.0;
    double max_jump = 0.0;
    std::vector<AdiabaticRun> runs;
};

// full problem i eps u' = H(t) u against the reduced one transported by Phi_0
AdiabaticRun adiabatic_run(const PotentialSpec& spec, const SemiclassicalParams& params, const Grid& grid,
                           const ProjectorPath& path, double eps, const AdiabaticOptions& opts);

AdiabaticReport adiabatic_error_curve(const PotentialSpec& spec_path, const SemiclassicalParams& params,
                                      const Grid& grid, const AdiabaticOptions& opts);

struct E1Result {
    CMat frame;
    CMat e1_frame;     // E1 X
    CMat pdot_frame;   // dP/dt X
    double commutator_residual = 0.0;  // ||[H, E1] X - i P' X|| / ||P' X||
    double offdiag_ratio = 0.0;        // ||P E1 P X|| / ||E1 X||
    double pdot_norm = 0.0;            // ||P' X||
};

// first superadiabatic correction at sample k of the path, applied to a probe frame
E1Result superadiabatic_E1(const ProjectorPath& path, const PotentialSpec& spec, const SemiclassicalParams& params,
                           const Grid& grid, int k, const CMat& frame, int nodes = 128);

}  // namespace reslab
