#pragma once

#include "ere/maslov.hpp"
#include "ere/models.hpp"
#include "ere/types.hpp"

#include <optional>
#include <vector>

namespace ere {

// Sides of the two zero-energy orbits, identified with half-lines of the
// rescaled time: l0^- and l_+^+ run over tau >= 0, l0^+ and l_+^- over
// tau <= 0, the full orbits over all of R.
enum class ClinicSide { l0_minus, l0_plus, lplus_minus, lplus_plus, l0_full, lplus_full };
std::string side_name(ClinicSide s);

struct TruncationPolicy {
    double t_max = 0;  // 0 -> max(200, 40 / min_j eta_j)
    double convergence_tol = 1e-6;
    double window = 5.0;
    bool sensitivity_check = true;  // integer must be stable under 1.2x horizon
};

struct HalfClinicProblem {
    ClinicSide side = ClinicSide::lplus_minus;
    CentralConfig cfg;
    Mat V0;  // initial Lagrangian (i_plus sides only)
    Mat V1;  // Maslov reference
    TruncationPolicy trunc;
};

double auto_horizon(const CentralConfig& cfg, const TruncationPolicy& trunc);

// Maslov index along the chosen side: i_plus sides transport V0 forward until
// the frame settles on the unstable subspace of the forward equilibrium;
// i_minus and full-line sides seed the unstable frame at -T and transport it
// forward. Non-settling runs return converged = false diagnostics instead of
// a trusted index.
IndexReport half_clinic_index(const HalfClinicProblem& prob, const Tolerances& tol = {},
                              const OdeOptions& opts = {});

// Closed-form indices on l0 for nondegenerate R with lambda_1 > -1/8,
// assembled from the per-eigenvalue scalar cases.
struct L0Table {
    int i_minus_vd_l0p = 0;
    int i_minus_vn_l0p = 0;
    int i_plus_vd_vd_l0m = 0;
    int i_plus_vd_vn_l0m = 0;
    int i_plus_vn_vd_l0m = 0;
    int i_plus_vn_vn_l0m = 0;
};
L0Table l0_analytic_indices(const CentralConfig& cfg);

// Scalar building block: the four l0^- entries for one eigenvalue r.
int scalar_l0_index(int reference_dirichlet, int initial_dirichlet, double r);

// Full-line index i(V1; l_+) by unstable-frame transport.
IndexReport heteroclinic_index_lplus(const CentralConfig& cfg, const Mat& V1,
                                     const TruncationPolicy& trunc = {},
                                     const Tolerances& tol = {}, const OdeOptions& opts = {});

struct ZeroTrace {
    std::vector<double> times;  // zero locations, strictly increasing
    std::vector<std::pair<double, double>> curve;  // decimated (tau, y6) samples
    bool converged = false;
    enum class Tail { settled, growing } tail = Tail::settled;
};

struct ExteriorResult {
    ZeroTrace trace;
    IndexReport report;
};

// Exterior-algebra zero counting on the second wedge power (k = 2 only).
// Supported problems: the reversed half-line on l_+^- (reference transported
// backwards, zeros of the Dirichlet pairing coordinate), and the full line
// on l_+ with Dirichlet reference. The coefficient of e3 ^ e4 in the wedge
// of the transported plane vanishes exactly on Dirichlet crossings; growth
// is removed by the e^{-sigma tau} rescaling with sigma the positive
// spectral mass of the limiting matrix.
ExteriorResult exterior_index_4d(const HalfClinicProblem& prob, double horizon = 0,
                                 const Tolerances& tol = {}, const OdeOptions& opts = {});

// Induced matrix on the second wedge power Lambda^2 R^n (rows/cols ordered
// e_i ^ e_j, i < j, lexicographic).
Mat wedge2_matrix(const Mat& A);
Vec wedge2_of_plane(const Mat& F);  // Pluecker coordinates of a 2-column frame

struct BrakeSplit {
    int i_minus_plus_lpm = 0;   // i_-(V^+(N_hat); l_+^-), numerical
    int i_minus_minus_lpm = 0;  // i_-(V^-(N_hat); l_+^-), numerical
    // Analytic l0^- entries through the invariant-subspace splitting:
    int i_plus_vplus_vd_l0m = 0, i_plus_vminus_vd_l0m = 0;
    int i_plus_vplus_vn_l0m = 0, i_plus_vminus_vn_l0m = 0;
    int i_plus_vplus_vplus_l0m = 0, i_plus_vminus_vminus_l0m = 0;
    int i_plus_vminus_vplus_l0m = 0, i_plus_vplus_vminus_l0m = 0;
    IndexDiagnostics diagnostics;
};
BrakeSplit brake_split(const CentralConfig& cfg, const TruncationPolicy& trunc = {},
                       const Tolerances& tol = {}, const OdeOptions& opts = {});

enum class ProbeStatus { stable, jump_detected, inconclusive };
std::string probe_status_name(ProbeStatus s);

struct ProbeResult {
    ProbeStatus status = ProbeStatus::inconclusive;
    double candidate_param = 0;  // meaningful when a jump was detected
    std::vector<std::pair<double, int>> values;  // (parameter, i(V_d; l_+))
    std::vector<int> fingerprints;  // per entry: also encodes the brake pair
    std::string note;
};

// Heuristic collision-nondegeneracy probe: recompute i(V_d; l_+) (and, for
// brake-symmetric families, the half-line pair i_-(V^+-(N_hat); l_+^-)) at
// the parameter and at offsets +-h for h in {1e-3, 1e-4}; a jump or a
// convergence failure marks a candidate degenerate parameter.
ProbeResult nondegeneracy_probe(Family family, double param, const TruncationPolicy& trunc = {},
                                const Tolerances& tol = {}, const OdeOptions& opts = {});

} // namespace ere
