#pragma once

#include "reslab/banded.hpp"
#include "reslab/model.hpp"
#include "reslab/scattering.hpp"
#include "reslab/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace reslab {

enum class BvpKind { U2, U3 };

struct InteriorBVPSolution {
    CVec u;  // samples on the nodes of [a,b], boundary values included
    cplx du_a = 0.0, du_b = 0.0;
    cplx z = 0.0;
    BvpKind which = BvpKind::U2;
    double residual = 0.0;  // relative residual on interior nodes
};

// (-h^2 d^2 + V - W - z) u = 0 on (a,b) with Dirichlet data (0,1) for u2 and (1,0) for u3
InteriorBVPSolution solve_interior_bvp(const PotentialSpec& spec, cplx z, const SemiclassicalParams& params,
                                       const Grid& grid, BvpKind which, bool include_wells = true);

struct KreinMatrices {
    Eigen::Matrix4cd q;
    Eigen::Matrix4cd a_mat;
    Eigen::Matrix4cd b_mat;
    // det(h^2 (Bq - A)) = h^8 det(Bq - A)
    cplx char_value;
};

// exterior momentum sqrt(z e^{2 theta}) uses the branch of sqrt_branch
KreinMatrices q_matrix(cplx z, const InterfaceParams& params, const InteriorBVPSolution& u2,
                       const InteriorBVPSolution& u3);
// same, with the exterior root supplied by the caller
KreinMatrices q_matrix_with_root(cplx root, const InterfaceParams& params, const InteriorBVPSolution& u2,
                                 const InteriorBVPSolution& u3);

// h^8 det(Bq(z, theta, V - W) - A) on the interior nodes of grid; theta is params.theta
cplx char_function(cplx z, const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid,
                   bool include_wells = true);

struct CharEvaluation {
    cplx value;      // h^8 det(Bq - A)
    cplx dir_phase;  // det(H_D - z) / |det(H_D - z)|
    double rcond = 0.0;
};
CharEvaluation char_evaluate(cplx z, const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid,
                             bool include_wells = true);

struct DirichletEigenpairs {
    RVec lambdas;
    CMat phis;   // columns, real valued, sum |phi|^2 dx = 1
    RVec x;      // interior nodes (a and b excluded)
    int first_node = 0;  // grid index of x(0)
    double cluster_gap = 0.0;  // distance from the window eigenvalues to the rest of the spectrum
    RVec all_lambdas;
};

DirichletEigenpairs dirichlet_eigs(const PotentialSpec& spec, const SemiclassicalParams& params, const Grid& grid,
                                   double lo, double hi);

struct ResonanceRecord {
    int j = 0;
    double lambda_j = 0.0;
    cplx z_res = 0.0;
    double gamma = 0.0;
    double fgr = 0.0;
    double newton_residual = 0.0;
    double char_scale = 0.0;  // |char(lambda_j + 0.1 i)|
    cplx theta0 = 0.0;
    double h = 0.0;
    int multiplicity = 1;
    int iterations = 0;
};

struct ResonanceOptions {
    int n0 = 2;
    double xi = 1.0;
    std::optional<double> lambda0;
    int max_newton = 80;
    int contour_nodes = 256;
    bool verify_count = true;
    bool with_fgr = true;
};

struct ContourRect {
    double re_lo, re_hi, im_lo, im_hi;
};

struct ResonanceSearch {
    std::vector<ResonanceRecord> records;
    std::vector<ContourRect> contours;
    std::vector<double> winding;
    std::vector<int> cluster_size;
    DirichletEigenpairs eigs;
};

// winding number of char(z) det(H_D - z) around the rectangle, which counts the resonances inside
double count_zeros(const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid, const ContourRect& r,
                   int min_nodes = 256);

// resonances seeded at the Dirichlet eigenvalues in [lo, hi]; interface parameters theta0, exterior theta = theta0
ResonanceSearch find_resonances(const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid, double lo,
                                double hi, const ResonanceOptions& opts = {});

double fermi_golden_rule(const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid,
                         const DirichletEigenpairs& eigs, int j, cplx z_res);

// samples of a function with jumps at a and b
struct PiecewiseSamples {
    CVec left;      // nodes 0..idx_a, value at idx_a is u(a-)
    CVec interior;  // nodes idx_a..idx_b, u(a+) .. u(b-)
    CVec right;     // nodes idx_b..n-1, value at idx_b is u(b+)

    double l2_norm(double dx) const;
    PiecewiseSamples operator-(const PiecewiseSamples& o) const;
};

// resolvent of H_{theta0,V-W}(theta) through the Krein formula; the exterior is truncated at the grid ends
// with Dirichlet data, and the exterior root has positive imaginary part
class KreinResolvent {
public:
    KreinResolvent(const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid, cplx z,
                   bool include_wells = true);

    PiecewiseSamples nd_apply(const CVec& f) const;
    // Gamma_2 of the decoupled resolvent, equal to the pairings with gamma(e_j, conj z, conj theta)
    Eigen::Vector4cd pairings(const PiecewiseSamples& nd) const;
    PiecewiseSamples correction(const CVec& f) const;
    PiecewiseSamples correction_from(const PiecewiseSamples& nd) const;
    PiecewiseSamples apply(const CVec& f) const;

    const KreinMatrices& matrices() const { return km_; }
    // gamma(e_i, z, theta) sampled piecewise
    PiecewiseSamples gamma(int i) const;

private:
    Grid grid_;
    InterfaceParams params_;
    cplx z_, root_;
    Tridiag t_int_, t_left_, t_right_;
    std::optional<TridiagLU> lu_int_, lu_left_, lu_right_;
    InteriorBVPSolution u2_, u3_;
    KreinMatrices km_;
    Eigen::Matrix4cd coupling_;  // (Bq - A)^{-1} B
};

PiecewiseSamples krein_resolvent_apply(const PotentialSpec& spec, const InterfaceParams& params, const Grid& grid,
                                       cplx z, const CVec& f);

}  // namespace reslab
