#include "ere/flow.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <deque>

namespace ere {

FundamentalPath integrate_fundamental(const std::function<Mat(double)>& B, int k, double a,
                                      double b, const OdeOptions& opts, const Tolerances& tol) {
    const Mat J = standard_J(k);
    MatrixRhs rhs = [&B, J](double t, const Mat& y, Mat& dy) { dy = J * B(t) * y; };
    FundamentalPath fp;
    fp.k = k;
    fp.t0 = a;
    fp.t1 = b;
    fp.coeff = B;
    double drift = 0;
    // The raw residual scales like ||y||^2; drift records its normalized
    // value and renormalization triggers well inside the budget.
    StepMonitor monitor = [&](double, Mat& y) {
        const double scale = std::max(1.0, y.squaredNorm());
        const double res = symplectic_residual_wrt(y, J) / scale;
        drift = std::max(drift, res);
        if (res > 0.2 * tol.drift) y = symplectize(y);
        return StepAction::proceed;
    };
    fp.sol = integrate_ode(rhs, Mat::Identity(2 * k, 2 * k), a, b, opts, monitor);
    fp.drift = drift;
    return fp;
}

FramePath integrate_frame(const Mat& J_eff, const std::function<Mat(double)>& coeff, Mat F0,
                          double a, double b, const OdeOptions& opts,
                          const std::optional<FrameStopPolicy>& stop) {
    MatrixRhs rhs = [&coeff, &J_eff](double t, const Mat& y, Mat& dy) { dy = J_eff * (coeff(t) * y); };
    FramePath fp;
    fp.t0 = a;
    fp.t1 = b;
    fp.coeff = coeff;

    std::deque<std::pair<double, double>> gap_window;
    FrameConvergence conv;
    conv.requested = stop.has_value();

    StepMonitor monitor = [&](double t, Mat& y) {
        y = orthonormalize(y);
        if (!stop) return StepAction::proceed;
        const double gap = subspace_gap(y, stop->target);
        conv.final_gap = gap;
        gap_window.emplace_back(t, gap);
        while (!gap_window.empty() && gap_window.front().first < t - stop->window)
            gap_window.pop_front();
        if (t < stop->min_time || gap >= stop->gap_tol) return StepAction::proceed;
        if (gap_window.size() < 3 || gap_window.front().first > t - 0.9 * stop->window)
            return StepAction::proceed;
        for (size_t i = 1; i < gap_window.size(); ++i)
            if (gap_window[i].second > gap_window[i - 1].second * (1 + 1e-9))
                return StepAction::proceed;
        conv.converged = true;
        conv.stop_time = t;
        return StepAction::stop;
    };

    fp.sol = integrate_ode(rhs, orthonormalize(std::move(F0)), a, b, opts, monitor);
    if (conv.requested && !conv.converged) conv.stop_time = fp.sol.b;
    fp.convergence = conv;
    fp.t1 = fp.sol.b;
    return fp;
}

std::string spectral_class_name(SpectralClass c) {
    switch (c) {
        case SpectralClass::hyperbolic: return "hyperbolic";
        case SpectralClass::elliptic: return "elliptic";
        case SpectralClass::elliptic_hyperbolic: return "elliptic_hyperbolic";
        case SpectralClass::spectrally_stable_degenerate: return "spectrally_stable_degenerate";
    }
    return "?";
}

namespace {

// Numerical kernel of M -+ I: the threshold scales with the matrix norm
// (integration errors enter at that scale), not with sigma_max of the
// difference, whose dynamic range is huge for strongly hyperbolic monodromies.
int kernel_dim(const Mat& A, double rel_tol, double mat_scale) {
    Eigen::JacobiSVD<Mat> svd(A);
    const auto& s = svd.singularValues();
    const double thresh = rel_tol * std::max(1.0, mat_scale);
    int dim = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) < thresh) ++dim;
    return dim;
}

} // namespace

MonodromyReport classify(const Mat& M, const Tolerances& tol) {
    MonodromyReport rep;
    rep.M = M;
    const int n = static_cast<int>(M.rows());
    Eigen::EigenSolver<Mat> es(M);
    rep.eigenvalues = es.eigenvalues();

    const Mat I = Mat::Identity(n, n);
    rep.det_residual_plus = std::abs((M - I).determinant());
    rep.det_residual_minus = std::abs((M + I).determinant());
    rep.nu1 = kernel_dim(M - I, 1e-7, M.norm());
    rep.num1 = kernel_dim(M + I, 1e-7, M.norm());

    // A nontrivial Jordan structure at +-1 splits the numerical eigenvalues
    // by the square root of the matrix error, far outside the strict band;
    // the SVD-based kernel tests resolve those cases.
    const double ambiguous_band = 1e-4;
    int on_band = 0, off_band = 0;
    for (int i = 0; i < n; ++i) {
        const double r = std::abs(rep.eigenvalues(i));
        const double dist = std::abs(r - 1.0);
        bool on = dist < tol.unit_circle;
        if (!on && dist < ambiguous_band) {
            const bool near_plus = std::abs(rep.eigenvalues(i) - 1.0) < ambiguous_band;
            const bool near_minus = std::abs(rep.eigenvalues(i) + 1.0) < ambiguous_band;
            if ((near_plus && rep.nu1 > 0) || (near_minus && rep.num1 > 0))
                on = true;
            else
                rep.ambiguity = "near-unit eigenvalue without kernel certificate";
        }
        (on ? on_band : off_band)++;
    }
    if (off_band == 0) {
        bool degenerate = rep.nu1 > 0 || rep.num1 > 0;
        for (int i = 0; i < n && !degenerate; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::abs(rep.eigenvalues(i) - rep.eigenvalues(j)) < 1e-6 &&
                    std::abs(std::imag(rep.eigenvalues(i))) < 1e-6) {
                    degenerate = true;
                    rep.ambiguity = "elliptic|spectrally_stable_degenerate";
                    break;
                }
        rep.classification = degenerate ? SpectralClass::spectrally_stable_degenerate
                                        : SpectralClass::elliptic;
    } else if (on_band == 0) {
        rep.classification = SpectralClass::hyperbolic;
    } else {
        rep.classification = SpectralClass::elliptic_hyperbolic;
    }

    if (n == 4) {
        // Quadratic split of the reciprocal characteristic polynomial:
        // rho^2 - a rho + (b - 2) = 0 with rho = lambda + 1/lambda.
        const double a = M.trace();
        const double b = 0.5 * (a * a - (M * M).trace());
        const double disc = a * a - 4 * (b - 2);
        if (disc >= 0) {
            rep.tr1 = 0.5 * (a + std::sqrt(disc));
            rep.tr2 = 0.5 * (a - std::sqrt(disc));
        } else {
            rep.tr1 = rep.tr2 = 0.5 * a;
            rep.traces_complex = true;
        }
    }
    return rep;
}

TrueAnomalyRun monodromy_true_anomaly(const CentralConfig& cfg, double e, const OdeOptions& opts,
                                      const Tolerances& tol, bool collision_origin) {
    const double shift = collision_origin ? M_PI : 0.0;
    auto B = [cfg, e, shift](double t) { return essential_B(t + shift, cfg, e); };
    TrueAnomalyRun run{integrate_fundamental(B, cfg.k, 0.0, 2 * M_PI, opts, tol), {}};
    run.report = classify(run.path.monodromy(), tol);
    return run;
}

BlowUpPoint BlowupRun::at(double tau) const {
    const Mat s = orbit.eval(tau);
    return {s(0, 0), s(1, 0)};
}

BlowupRun blowup_flow(const CentralConfig& cfg, double e, const OdeOptions& opts,
                      const Tolerances& tol, bool collision_origin) {
    BlowupRun run;
    BlowUpPoint p0 = orbit_initialization(e, &run.e_hat);
    // Start at the other extremum of q (the collision passage): same energy
    // level, base point (sqrt(1 - e), 0).
    if (collision_origin) p0 = BlowUpPoint{std::sqrt(1.0 - e), 0.0};

    // Pass 1: the planar orbit plus accumulated true anomaly, stopped once a
    // full period t = 2 pi has been collected.
    OdeOptions orbit_opts = opts;
    orbit_opts.abs_tol = std::min(opts.abs_tol, 1e-12);
    orbit_opts.rel_tol = std::min(opts.rel_tol, 1e-12);
    MatrixRhs rhs = [](double, const Mat& y, Mat& dy) {
        const BlowUpPoint p{y(0, 0), y(1, 0)};
        const auto v = blowup_rhs(p);
        dy.resize(3, 1);
        dy(0, 0) = v(0);
        dy(1, 0) = v(1);
        dy(2, 0) = p.q;
    };
    Mat y0(3, 1);
    y0 << p0.q, p0.Q, 0.0;
    double energy_drift = 0;
    const double e_hat = run.e_hat;
    StepMonitor monitor = [&](double, Mat& y) {
        const BlowUpPoint p{y(0, 0), y(1, 0)};
        energy_drift = std::max(energy_drift, std::abs(p.energy() + e_hat));
        return y(2, 0) >= 2 * M_PI ? StepAction::stop : StepAction::proceed;
    };
    // Generous horizon; the period grows only logarithmically in 1/(1-e).
    const double horizon = 64.0 + 8.0 * std::log(1.0 / (1.0 - e));
    run.orbit = integrate_ode(rhs, y0, 0.0, horizon, orbit_opts, monitor);
    if (!run.orbit.stopped_early)
        throw ConvergenceError("blowup_flow: period not reached within horizon at e_hat = " +
                               std::to_string(run.e_hat));
    run.energy_drift = energy_drift;

    // Localize T with t(T) = 2 pi on the last segment.
    double lo = run.orbit.segments.back().t0, hi = run.orbit.b;
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (run.orbit.eval(mid)(2, 0) < 2 * M_PI ? lo : hi) = mid;
    }
    run.T = 0.5 * (lo + hi);

    const OdeSolution& orbit = run.orbit;
    const CentralConfig cfg_copy = cfg;
    auto Bhat = [orbit, cfg_copy](double tau) {
        const Mat s = orbit.eval(tau);
        return hat_B(BlowUpPoint{s(0, 0), s(1, 0)}, cfg_copy);
    };
    run.path = integrate_fundamental(Bhat, cfg.k, 0.0, run.T, opts, tol);
    run.path.domain = TimeDomain::blowup_tau;
    run.report = classify(run.path.monodromy(), tol);
    return run;
}

ConjugationCheck conjugation_endpoint_check(const CentralConfig& cfg, double e,
                                            const OdeOptions& opts, const Tolerances& tol) {
    ConjugationCheck ck;
    const Mat Mt = monodromy_true_anomaly(cfg, e, opts, tol).path.monodromy();
    const Mat Mb = blowup_flow(cfg, e, opts, tol).path.monodromy();
    const Mat I = Mat::Identity(2 * cfg.k, 2 * cfg.k);
    ck.nu1_true = kernel_dim(Mt - I, 1e-7, Mt.norm());
    ck.nu1_blowup = kernel_dim(Mb - I, 1e-7, Mb.norm());
    ck.num1_true = kernel_dim(Mt + I, 1e-7, Mt.norm());
    ck.num1_blowup = kernel_dim(Mb + I, 1e-7, Mb.norm());
    ck.consistent = ck.nu1_true == ck.nu1_blowup && ck.num1_true == ck.num1_blowup;
    return ck;
}

TimeDomain choose_domain(double e, double threshold) {
    return (1.0 - e < threshold) ? TimeDomain::blowup_tau : TimeDomain::true_anomaly;
}

DomainRun domain_run(const CentralConfig& cfg, double e, TimeDomain domain, const OdeOptions& opts,
                     const Tolerances& tol, bool collision_origin) {
    if (domain == TimeDomain::true_anomaly) {
        auto r = monodromy_true_anomaly(cfg, e, opts, tol, collision_origin);
        return {std::move(r.path), std::move(r.report)};
    }
    auto r = blowup_flow(cfg, e, opts, tol, collision_origin);
    return {std::move(r.path), std::move(r.report)};
}

} // namespace ere
