#pragma once

#include "ere/models.hpp"
#include "ere/ode.hpp"
#include "ere/symplectic.hpp"
#include "ere/types.hpp"

#include <complex>
#include <functional>
#include <optional>

namespace ere {

enum class TimeDomain { true_anomaly, blowup_tau };

// Sampled symplectic fundamental solution gamma(t) of gamma' = J B(t) gamma,
// gamma(a) = I, with lazy symplectic renormalization: whenever the residual
// ||g^T J g - J|| exceeds tol.drift the checkpoint is replaced by its
// symplectic polar projection. `drift` records the worst residual seen.
struct FundamentalPath {
    int k = 0;
    double t0 = 0, t1 = 0;
    TimeDomain domain = TimeDomain::true_anomaly;
    OdeSolution sol;
    std::function<Mat(double)> coeff;
    double drift = 0;

    Mat eval(double t) const { return sol.eval(t); }
    const Mat& monodromy() const { return sol.checkpoints.back(); }
};

FundamentalPath integrate_fundamental(const std::function<Mat(double)>& B, int k, double a,
                                      double b, const OdeOptions& opts = {},
                                      const Tolerances& tol = {});

// Path of orthonormal frames F(t) under F' = G(t) F with re-orthonormalization
// (positive-determinant gauge) after every accepted step. Optionally stops
// once the frame has settled onto `target`: gap below `tol` and monotonically
// decreasing over the trailing `window`.
struct FrameStopPolicy {
    Mat target;
    double gap_tol = 1e-6;
    double window = 5.0;
    double min_time = 0.0;  // do not stop before this time
};

struct FrameConvergence {
    bool requested = false;
    bool converged = false;
    double final_gap = -1;
    double stop_time = 0;
};

struct FramePath {
    double t0 = 0, t1 = 0;
    OdeSolution sol;
    std::function<Mat(double)> coeff;  // B_eff(t): generator = J_eff * B_eff
    FrameConvergence convergence;

    Mat eval(double t) const { return sol.eval(t); }
};

FramePath integrate_frame(const Mat& J_eff, const std::function<Mat(double)>& coeff, Mat F0,
                          double a, double b, const OdeOptions& opts = {},
                          const std::optional<FrameStopPolicy>& stop = std::nullopt);

enum class SpectralClass { hyperbolic, elliptic, elliptic_hyperbolic, spectrally_stable_degenerate };
std::string spectral_class_name(SpectralClass c);

struct MonodromyReport {
    Mat M;
    Eigen::VectorXcd eigenvalues;
    SpectralClass classification = SpectralClass::elliptic;
    std::string ambiguity;  // candidate labels when on-band spectra are Jordan-ambiguous
    double tr1 = 0, tr2 = 0;  // lambda + 1/lambda per eigenvalue pair (k = 2 only)
    bool traces_complex = false;
    double det_residual_plus = 0;   // |det(M - I)|
    double det_residual_minus = 0;  // |det(M + I)|
    int nu1 = 0, num1 = 0;          // dim ker(M -+ I) at relative tolerance
};

MonodromyReport classify(const Mat& M, const Tolerances& tol = {});

// Full-period runs are parametrized from the collision passage (true anomaly
// measured from t = pi, where q is minimal) by default: that is the base
// point at which the period decomposes into the l0 and l_+ segments of the
// blow-up plane, and the point the near-collision index limits refer to.
// Pass collision_origin = false for the t = 0 parametrization.
struct TrueAnomalyRun {
    FundamentalPath path;
    MonodromyReport report;
};
TrueAnomalyRun monodromy_true_anomaly(const CentralConfig& cfg, double e,
                                      const OdeOptions& opts = {}, const Tolerances& tol = {},
                                      bool collision_origin = true);

// Coupled blow-up run: (q, Q) integrated together with accumulated physical
// time t' = q until t = 2 pi, then the linear system gamma' = J hat_B gamma
// over [0, T].
struct BlowupRun {
    FundamentalPath path;  // domain = blowup_tau, over [0, T]
    MonodromyReport report;
    OdeSolution orbit;     // states (q, Q, t) as 3x1 matrices
    double T = 0;          // tau-period: accumulated true anomaly reaches 2 pi
    double e_hat = 0;
    double energy_drift = 0;  // max |E(tau) + e_hat| along the orbit

    BlowUpPoint at(double tau) const;
};

BlowupRun blowup_flow(const CentralConfig& cfg, double e, const OdeOptions& opts = {},
                      const Tolerances& tol = {}, bool collision_origin = true);

// Optional diagnostic: the two clocks give conjugate monodromies, so the
// graph of gamma(T) must meet the diagonal and the graph of -I in the same
// dimensions in both domains. Checked at the endpoints of the conjugation
// family only.
struct ConjugationCheck {
    int nu1_true = 0, nu1_blowup = 0;
    int num1_true = 0, num1_blowup = 0;
    bool consistent = false;
};
ConjugationCheck conjugation_endpoint_check(const CentralConfig& cfg, double e,
                                            const OdeOptions& opts = {},
                                            const Tolerances& tol = {});

// Domain selection: the true-anomaly system degenerates as e -> 1; switch to
// the blow-up clock when 1 - e < `threshold`.
TimeDomain choose_domain(double e, double threshold = 1e-3);

// Fundamental path of the reduced system in the requested domain, together
// with its spectral report. The blow-up monodromy is similar to the
// true-anomaly one, so reports agree up to conjugation.
struct DomainRun {
    FundamentalPath path;
    MonodromyReport report;
};
DomainRun domain_run(const CentralConfig& cfg, double e, TimeDomain domain,
                     const OdeOptions& opts = {}, const Tolerances& tol = {},
                     bool collision_origin = true);

} // namespace ere
