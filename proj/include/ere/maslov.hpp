#pragma once

#include "ere/flow.hpp"
#include "ere/symplectic.hpp"
#include "ere/types.hpp"

#include <functional>
#include <vector>

namespace ere {

struct CrossingRecord {
    double time = 0;
    int kernel_dim = 0;  // dim Lambda(t) intersect W
    int m_plus = 0, m_minus = 0;
    int signature = 0;  // m_plus - m_minus
    bool regular = true;
    bool at_start = false, at_end = false;
};

struct IndexDiagnostics {
    bool degenerate = false;             // unresolved irregular crossing
    bool perturbed = false;              // resolved via B -> B - sigma I
    double sigma = 0;
    bool persistent_intersection = false;
    bool converged = true;               // truncation settled (half-clinic runs)
    bool sensitivity_ok = true;          // integer stable under horizon changes
    double final_gap = -1;
    double stop_time = 0;
    std::string note;
};

// Integer Maslov index with its crossing ledger. The endpoint convention is
// fixed: m_plus of the crossing form at the left end, interior signatures,
// minus m_minus at the right end. `rs` carries the half-integer variant
// (half signatures at both ends) computed from the same records.
struct IndexReport {
    int index = 0;
    double rs = 0;
    std::vector<CrossingRecord> crossings;
    std::pair<int, int> endpoint_contributions{0, 0};
    IndexDiagnostics diagnostics;
};

// A continuous path of Lagrangian frames over [t0, t1]. `frame` must be
// gauge-continuous (sign changes of stacked determinants are meaningful);
// `coeff` gives the symmetric B(t) generating the path via J_amb B, used for
// crossing forms (finite differences are used when absent). `perturbed`
// rebuilds the path for the shifted coefficient B - sigma I and enables
// resolution of degenerate crossings.
struct LagrangianPath {
    int dim = 0;  // ambient half-dimension; frames are 2*dim x dim
    double t0 = 0, t1 = 0;
    std::vector<double> samples;
    std::function<Mat(double)> frame;
    std::function<Mat(double)> coeff;
    std::function<LagrangianPath(double)> perturbed;
    Mat J_amb;
    IndexDiagnostics carried;  // provenance from path construction
};

// Path gamma(t) V0 for gamma' = J B(t) gamma in the standard space.
LagrangianPath coefficient_path(const std::function<Mat(double)>& B, const Mat& F0, double a,
                                double b, const OdeOptions& opts = {});

// Wrap an integrated frame path (J_eff, coeff) as a LagrangianPath. `rebuild`
// supplies the sigma-shifted variant; pass nullptr to disable perturbation.
LagrangianPath path_from_frame(FramePath fp, Mat J_amb,
                               std::function<LagrangianPath(double)> rebuild = nullptr);

// Restriction to [a, b] within the original interval.
LagrangianPath restrict_path(const LagrangianPath& p, double a, double b);

// Path t -> graph of gamma(t) in the doubled space (-w (+) w), realized as a
// frame path from the diagonal.
LagrangianPath graph_path(const FundamentalPath& gamma, const OdeOptions& opts = {});

IndexReport maslov_index(const LagrangianPath& path, const Mat& W, const Tolerances& tol = {});
double maslov_rs(const LagrangianPath& path, const Mat& W, const Tolerances& tol = {});

// Crossing form restricted to the intersection of path(t) with W, expressed
// in an orthonormal intersection basis. Throws if the intersection is empty
// or no derivative source is available.
Mat crossing_form(const LagrangianPath& path, const Mat& W, double t, const Tolerances& tol = {});

// Difference mu(V0, Lambda) - mu(V1, Lambda) along any path connecting L0 to
// L1; uses the four-graph signature formula when all graph representations
// over the Dirichlet/Neumann splitting are well conditioned, otherwise an
// explicit unitary connecting path.
int hormander_index(const Mat& V0, const Mat& V1, const Mat& L0, const Mat& L1,
                    const Tolerances& tol = {});

// Unitary-geodesic connecting path from span L0 to span L1 (constant
// coefficient, so crossing forms are exact).
LagrangianPath connect_lagrangians(const Mat& L0, const Mat& L1);

struct PM1Result {
    IndexReport i1;   // index already shifted: mu(Delta, Gr gamma) - k
    IndexReport im1;  // mu(Gr(-I), Gr gamma)
    int nu1 = 0, num1 = 0;
    bool end_degenerate_1 = false, end_degenerate_m1 = false;
};

// Maslov-type indices of a fundamental solution through the doubled-space
// graph construction.
PM1Result index_pm1(const FundamentalPath& gamma, const Tolerances& tol = {},
                    const OdeOptions& opts = {});

} // namespace ere
