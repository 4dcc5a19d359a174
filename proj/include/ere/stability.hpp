#pragma once

#include "ere/collision.hpp"
#include "ere/flow.hpp"
#include "ere/maslov.hpp"
#include "ere/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ere {

struct MorseIndices {
    int mu_d = 0, mu_n = 0;   // mu(V_d, gamma V_d), mu(V_n, gamma V_n)
    int phi_d = 0, phi_n = 0; // Morse indices: phi_d = mu_d - k, phi_n = mu_n
    int nu_d = 0, nu_n = 0;   // endpoint kernels dim(V . /\ gamma(T) V .)
    bool d_degenerate = false, n_degenerate = false;
    TimeDomain domain = TimeDomain::true_anomaly;
    IndexDiagnostics diag_d, diag_n;
};

MorseIndices morse_indices(const CentralConfig& cfg, double e, const OdeOptions& opts = {},
                           const Tolerances& tol = {},
                           std::optional<TimeDomain> domain = std::nullopt);

enum class HypCert { hyperbolic_certified, not_certified };

struct HyperbolicityEvidence {
    HypCert status = HypCert::not_certified;
    MorseIndices morse;
    MonodromyReport mono;
    bool coherent = true;  // certified implies eigenvalue-hyperbolic
};

// Certifies hyperbolicity from phi_n == phi_d plus a nondegenerate Neumann
// problem, and cross-checks the certificate against the monodromy spectrum.
// Throws InternalConsistencyError when the certificate contradicts the
// eigenvalues.
HyperbolicityEvidence hyperbolicity_check(const CentralConfig& cfg, double e,
                                          const OdeOptions& opts = {}, const Tolerances& tol = {});

struct StabilityCell {
    double param = 0, e = 0;
    int i1 = 0, im1 = 0;
    int mu_d = 0, mu_n = 0;
    int nu1 = 0, num1 = 0;
    std::string classification;
    std::string status = "ok";
    std::string domain = "true_anomaly";
    double drift = 0;
    double wall_ms = 0;
    bool converged = true, degenerate = false;
};

StabilityCell compute_cell(Family family, double param, double e, const OdeOptions& opts = {},
                           const Tolerances& tol = {});

// Kernel dimensions of gamma(T) -+ I through the half-period brake pairings
// (principal-angle based, insensitive to the monodromy norm). Requires N.
std::pair<int, int> brake_kernel_dims(const CentralConfig& cfg, const FundamentalPath& path,
                                      double tol = 1e-6);

// Row-major sweep over the parameter/eccentricity grid; cells are computed
// in parallel but emitted in deterministic order, and per-cell failures are
// isolated into status != "ok" rows.
std::vector<StabilityCell> sweep(Family family, const std::vector<double>& params,
                                 const std::vector<double>& es, int jobs = 1,
                                 const OdeOptions& opts = {}, const Tolerances& tol = {});

enum class CurveKind { one_degenerate, minus_one_plus, minus_one_minus };
std::string curve_kind_name(CurveKind k);

struct DegenerateCurvePoint {
    double e = 0;
    double delta = 0;
    double bracket_width = 0;
    int branch = 0;            // j label from the index jump across the root
    bool coincident = false;   // a root of the opposite pairing lies within 1e-6
};

struct DegenerateCurve {
    CurveKind kind;
    int branch = 0;
    std::vector<DegenerateCurvePoint> points;
};

struct CurveTraceOptions {
    double delta_min = 1e-3;
    double delta_max = 0.125 - 1e-4;  // near-collision default; extended when roots are missing
    double delta_max_extended = 7.0;
    int scan_points = 60;
    int j_max = 1;
    double bisect_width = 1e-8;
};

// Locates +1-degenerate roots (det(M - I) sign changes) and the two families
// of -1-degenerate roots (brake-pairing sign changes) along delta for each
// requested eccentricity; branch labels come from the Maslov-type index jump
// across each root.
std::vector<DegenerateCurve> trace_degenerate_curves(const std::vector<double>& e_list,
                                                     const CurveTraceOptions& copts = {},
                                                     const OdeOptions& opts = {},
                                                     const Tolerances& tol = {});

struct NearCollisionRow {
    double e = 0;
    int mu_d = 0, mu_n = 0, i1 = 0, im1 = 0;
    bool matched = false;
};

struct NearCollisionReport {
    std::vector<NearCollisionRow> rows;
    int target_mu_d = 0, target_mu_n = 0;
    int target_i1 = 0, target_im1 = 0;
    bool has_pm1_targets = false;  // requires the brake decomposition
    int i_vd_lplus = 0;
    double first_match_e = -1;
    bool monotone_tail = true;  // once matched, matched for all larger e
    ProbeStatus probe = ProbeStatus::inconclusive;
};

// Tabulates (mu_d, mu_n, i1, im1) along an eccentricity sequence against the
// independently computed collision-index targets mu_d -> k + i(V_d; l_+),
// mu_n -> 2 phi(R) + i(V_d; l_+), i_{+-1} -> phi(R) + i(V_d; l_+).
NearCollisionReport near_collision_report(const CentralConfig& cfg,
                                          const std::vector<double>& e_seq,
                                          const OdeOptions& opts = {}, const Tolerances& tol = {});

} // namespace ere
