#include "ere/stability.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace ere {

namespace {

struct DomainPath {
    FundamentalPath path;
    MonodromyReport report;
    TimeDomain domain;
};

DomainPath make_domain_path(const CentralConfig& cfg, double e, const OdeOptions& opts,
                            const Tolerances& tol, std::optional<TimeDomain> forced) {
    const TimeDomain d = forced ? *forced : choose_domain(e);
    DomainRun run = domain_run(cfg, e, d, opts, tol);
    return {std::move(run.path), std::move(run.report), d};
}

IndexReport boundary_index(const FundamentalPath& gamma, const Mat& V, const Tolerances& tol,
                           const OdeOptions& opts) {
    auto B = gamma.coeff;
    LagrangianPath p = coefficient_path(B, V, gamma.t0, gamma.t1, opts);
    return maslov_index(p, V, tol);
}

} // namespace

MorseIndices morse_indices(const CentralConfig& cfg, double e, const OdeOptions& opts,
                           const Tolerances& tol, std::optional<TimeDomain> domain) {
    DomainPath dp = make_domain_path(cfg, e, opts, tol, domain);
    const int k = cfg.k;
    const Mat Vd = dirichlet_frame(k);
    const Mat Vn = neumann_frame(k);

    MorseIndices mi;
    mi.domain = dp.domain;
    IndexReport rd = boundary_index(dp.path, Vd, tol, opts);
    IndexReport rn = boundary_index(dp.path, Vn, tol, opts);
    mi.mu_d = rd.index;
    mi.mu_n = rn.index;
    mi.phi_d = mi.mu_d - k;
    mi.phi_n = mi.mu_n;
    mi.diag_d = rd.diagnostics;
    mi.diag_n = rn.diagnostics;

    const Mat M = dp.path.monodromy();
    mi.nu_d = intersection_dim(Vd, orthonormalize(M * Vd), 1e-6);
    mi.nu_n = intersection_dim(Vn, orthonormalize(M * Vn), 1e-6);
    mi.d_degenerate = mi.nu_d > 0;
    mi.n_degenerate = mi.nu_n > 0;
    return mi;
}

HyperbolicityEvidence hyperbolicity_check(const CentralConfig& cfg, double e,
                                          const OdeOptions& opts, const Tolerances& tol) {
    DomainPath dp = make_domain_path(cfg, e, opts, tol, std::nullopt);
    HyperbolicityEvidence ev;
    ev.morse = morse_indices(cfg, e, opts, tol);
    ev.mono = dp.report;
    const bool certified = (ev.morse.phi_n == ev.morse.phi_d) && ev.morse.nu_n == 0;
    ev.status = certified ? HypCert::hyperbolic_certified : HypCert::not_certified;
    if (certified && ev.mono.classification != SpectralClass::hyperbolic) {
        ev.coherent = false;
        throw InternalConsistencyError(
            "hyperbolicity_check: certificate (phi_n == phi_d, nondegenerate Neumann problem) "
            "contradicts the monodromy spectrum");
    }
    return ev;
}

std::pair<int, int> brake_kernel_dims(const CentralConfig& cfg, const FundamentalPath& path,
                                      double tol) {
    if (!cfg.N) throw DomainError("brake_kernel_dims: configuration lacks N");
    const Mat H = path.eval(0.5 * (path.t0 + path.t1));
    const Mat Vp = orthonormalize(brake_frame(cfg, +1));
    const Mat Vm = orthonormalize(brake_frame(cfg, -1));
    auto dim = [&](const Mat& ref, const Mat& mov) {
        return intersection_dim(ref, orthonormalize(H * mov), tol);
    };
    return {dim(Vp, Vp) + dim(Vm, Vm), dim(Vp, Vm) + dim(Vm, Vp)};
}

StabilityCell compute_cell(Family family, double param, double e, const OdeOptions& opts,
                           const Tolerances& tol) {
    const auto t_start = std::chrono::steady_clock::now();
    StabilityCell cell;
    cell.param = param;
    cell.e = e;
    try {
        const CentralConfig cfg = build_config(family, param);
        DomainPath dp = make_domain_path(cfg, e, opts, tol, std::nullopt);
        cell.domain = dp.domain == TimeDomain::true_anomaly ? "true_anomaly" : "blowup_tau";
        cell.drift = dp.path.drift;
        cell.classification = spectral_class_name(dp.report.classification);

        PM1Result pm = index_pm1(dp.path, tol, opts);
        cell.i1 = pm.i1.index;
        cell.im1 = pm.im1.index;
        cell.nu1 = pm.nu1;
        cell.num1 = pm.num1;
        if (cfg.N) {
            auto [n1, nm1] = brake_kernel_dims(cfg, dp.path);
            cell.nu1 = n1;
            cell.num1 = nm1;
        }
        cell.degenerate = pm.i1.diagnostics.degenerate || pm.im1.diagnostics.degenerate;

        MorseIndices mi = morse_indices(cfg, e, opts, tol, dp.domain);
        cell.mu_d = mi.mu_d;
        cell.mu_n = mi.mu_n;
        cell.converged = !cell.degenerate;
    } catch (const std::exception& ex) {
        cell.status = std::string("error: ") + ex.what();
        cell.converged = false;
    }
    cell.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    return cell;
}

std::vector<StabilityCell> sweep(Family family, const std::vector<double>& params,
                                 const std::vector<double>& es, int jobs, const OdeOptions& opts,
                                 const Tolerances& tol) {
    std::vector<std::pair<double, double>> grid;
    for (double p : params)
        for (double e : es) grid.emplace_back(p, e);
    std::vector<StabilityCell> cells(grid.size());

    jobs = std::max(1, jobs);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= grid.size()) break;
            cells[i] = compute_cell(family, grid[i].first, grid[i].second, opts, tol);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return cells;
}

std::string curve_kind_name(CurveKind k) {
    switch (k) {
        case CurveKind::one_degenerate: return "phi";
        case CurveKind::minus_one_plus: return "psi_plus";
        case CurveKind::minus_one_minus: return "psi_minus";
    }
    return "?";
}

namespace {

// Signed root detectors along delta at fixed e. Periodic and antiperiodic
// kernels decompose through the brake involution into half-period
// connections between the brake frames, giving scalar functions with simple
// sign changes even where det(M -+ I) only touches zero (the degenerate
// curves carry two-dimensional kernels):
//   [0] phi, even part:  det([V+ | gamma(T/2) V+])
//   [1] psi_plus:        det([V+ | gamma(T/2) V-])
//   [2] psi_minus:       det([V- | gamma(T/2) V+])
//   [3] phi, odd part:   det([V- | gamma(T/2) V-])
std::array<double, 4> curve_detectors(Family family, double e, double delta,
                                      const OdeOptions& opts, const Tolerances& tol) {
    const CentralConfig cfg = build_config(family, delta);
    DomainRun run = domain_run(cfg, e, choose_domain(e), opts, tol);
    const Mat H = run.path.eval(0.5 * (run.path.t0 + run.path.t1));
    const Mat Vp = orthonormalize(brake_frame(cfg, +1));
    const Mat Vm = orthonormalize(brake_frame(cfg, -1));
    auto pairing = [&](const Mat& ref, const Mat& mov) {
        Mat S(H.rows(), H.cols());
        S << ref, orthonormalize(H * mov);
        return S.determinant();
    };
    return {pairing(Vp, Vp), pairing(Vp, Vm), pairing(Vm, Vp), pairing(Vm, Vm)};
}

int i1_at(Family family, double e, double delta, const OdeOptions& opts, const Tolerances& tol) {
    const CentralConfig cfg = build_config(family, delta);
    DomainRun run = domain_run(cfg, e, choose_domain(e), opts, tol);
    return index_pm1(run.path, tol, opts).i1.index;
}

int im1_at(Family family, double e, double delta, const OdeOptions& opts, const Tolerances& tol) {
    const CentralConfig cfg = build_config(family, delta);
    DomainRun run = domain_run(cfg, e, choose_domain(e), opts, tol);
    return index_pm1(run.path, tol, opts).im1.index;
}

} // namespace

std::vector<DegenerateCurve> trace_degenerate_curves(const std::vector<double>& e_list,
                                                     const CurveTraceOptions& copts,
                                                     const OdeOptions& opts,
                                                     const Tolerances& tol) {
    const Family family = Family::euler;
    std::vector<DegenerateCurve> curves;
    auto curve_for = [&](CurveKind kind, int branch) -> DegenerateCurve& {
        for (auto& c : curves)
            if (c.kind == kind && c.branch == branch) return c;
        curves.push_back(DegenerateCurve{kind, branch, {}});
        return curves.back();
    };

    for (double e : e_list) {
        // Scan grid, denser toward both ends of the window.
        std::vector<double> deltas;
        for (int i = 0; i < copts.scan_points; ++i) {
            const double u = static_cast<double>(i) / (copts.scan_points - 1);
            deltas.push_back(copts.delta_min +
                             (copts.delta_max - copts.delta_min) * (0.5 - 0.5 * std::cos(M_PI * u)));
        }

        struct Root {
            int detector;  // 0..3
            double delta;
            double width;
        };
        std::vector<Root> roots;

        auto detect = [&](double d) { return curve_detectors(family, e, d, opts, tol); };

        auto bisect_root = [&](int w, double lo, double hi, double flo) {
            while (hi - lo > copts.bisect_width) {
                const double mid = 0.5 * (lo + hi);
                const double fm = detect(mid)[static_cast<size_t>(w)];
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            return std::pair<double, double>(0.5 * (lo + hi), hi - lo);
        };

        auto scan_cell = [&](double d0, double d1, const std::array<double, 4>& f0,
                             const std::array<double, 4>& f1) {
            for (int w = 0; w < 4; ++w) {
                const double a = f0[static_cast<size_t>(w)], b2 = f1[static_cast<size_t>(w)];
                if (a == 0.0 || (a < 0) == (b2 < 0)) continue;
                auto [root, width] = bisect_root(w, d0, d1, a);
                roots.push_back({w, root, width});
            }
        };

        std::vector<std::array<double, 4>> vals(deltas.size());
        for (size_t i = 0; i < deltas.size(); ++i) vals[i] = detect(deltas[i]);
        for (size_t i = 0; i + 1 < deltas.size(); ++i)
            scan_cell(deltas[i], deltas[i + 1], vals[i], vals[i + 1]);

        // The degenerate curves reach the (0, 1/8) window only deep in the
        // collision regime; extend the scan upward until every family has
        // its requested number of roots (or the extended ceiling is hit).
        // A +1-degenerate branch has one leg per parity detector, so both
        // are required.
        auto family_counts = [&]() {
            std::array<int, 4> n{0, 0, 0, 0};
            for (const auto& r : roots) ++n[static_cast<size_t>(r.detector)];
            return n;
        };
        if (copts.delta_max_extended > copts.delta_max) {
            double prev_d = copts.delta_max;
            std::array<double, 4> prev = detect(prev_d);
            const double step = 0.02;
            for (double d = copts.delta_max + step; d <= copts.delta_max_extended; d += step) {
                const auto n = family_counts();
                if (n[0] >= copts.j_max && n[1] >= copts.j_max && n[2] >= copts.j_max &&
                    n[3] >= copts.j_max)
                    break;
                const auto cur = detect(d);
                scan_cell(prev_d, d, prev, cur);
                prev_d = d;
                prev = cur;
            }
        }

        std::sort(roots.begin(), roots.end(),
                  [](const Root& a, const Root& b) { return a.delta < b.delta; });

        // Merge phi roots found by both parity detectors at the same delta
        // (the +1-degenerate kernel is two-dimensional there).
        std::vector<Root> merged;
        for (const auto& r : roots) {
            const bool is_phi = r.detector == 0 || r.detector == 3;
            if (is_phi && !merged.empty() &&
                (merged.back().detector == 0 || merged.back().detector == 3) &&
                std::abs(merged.back().delta - r.delta) < 64 * copts.bisect_width)
                continue;
            merged.push_back(r);
        }

        // Branch labels from index jumps: i1 = 2j + 1 just below the j-th +1
        // branch (stepping left past the paired parity leg if needed),
        // i_{-1} alternating 2j / 2j + 1 across the -1 roots.
        for (const auto& r : merged) {
            double off = std::max(0.005, 50 * r.width);
            DegenerateCurvePoint pt;
            pt.e = e;
            pt.delta = r.delta;
            pt.bracket_width = r.width;
            if (r.detector == 0 || r.detector == 3) {
                int left = i1_at(family, e, std::max(r.delta - off, 1e-8), opts, tol);
                for (int tries = 0; left % 2 == 0 && tries < 6; ++tries) {
                    off *= 2;
                    left = i1_at(family, e, std::max(r.delta - off, 1e-8), opts, tol);
                }
                pt.branch = (left - 1) / 2;
                curve_for(CurveKind::one_degenerate, pt.branch).points.push_back(pt);
            } else {
                const int left = im1_at(family, e, std::max(r.delta - off, 1e-8), opts, tol);
                // i_{-1} = 2j just below psi_j^s and 2j+1 just below psi_j^l.
                pt.branch = (left % 2 == 0) ? left / 2 : (left - 1) / 2;
                for (const auto& other : merged)
                    if (other.detector != r.detector && other.detector != 0 && other.detector != 3 &&
                        std::abs(other.delta - r.delta) < 1e-6)
                        pt.coincident = true;
                curve_for(r.detector == 1 ? CurveKind::minus_one_plus : CurveKind::minus_one_minus,
                          pt.branch)
                    .points.push_back(pt);
            }
        }
    }
    return curves;
}

NearCollisionReport near_collision_report(const CentralConfig& cfg,
                                          const std::vector<double>& e_seq,
                                          const OdeOptions& opts, const Tolerances& tol) {
    NearCollisionReport rep;
    if (!cfg.hyperbolic)
        throw DomainError("near_collision_report: lambda_1(R) must exceed -1/8");
    if (!cfg.nondegenerate)
        throw DomainError("near_collision_report: R must be nondegenerate");

    IndexReport il = heteroclinic_index_lplus(cfg, dirichlet_frame(cfg.k), {}, tol, opts);
    if (!il.diagnostics.converged)
        throw ConvergenceError("near_collision_report: l_+ transport did not settle; the "
                               "configuration may be collision degenerate");
    rep.i_vd_lplus = il.index;
    rep.target_mu_d = cfg.k + il.index;
    rep.target_mu_n = 2 * cfg.morse_phi + il.index;
    rep.has_pm1_targets = cfg.N.has_value();
    if (rep.has_pm1_targets) {
        rep.target_i1 = cfg.morse_phi + il.index;
        rep.target_im1 = rep.target_i1;
    }
    rep.probe = cfg.family == Family::custom
                    ? ProbeStatus::inconclusive
                    : nondegeneracy_probe(cfg.family, cfg.param, {}, tol, opts).status;

    bool seen_match = false;
    for (double e : e_seq) {
        NearCollisionRow row;
        row.e = e;
        MorseIndices mi = morse_indices(cfg, e, opts, tol);
        row.mu_d = mi.mu_d;
        row.mu_n = mi.mu_n;
        DomainRun run = domain_run(cfg, e, choose_domain(e), opts, tol);
        PM1Result pm = index_pm1(run.path, tol, opts);
        row.i1 = pm.i1.index;
        row.im1 = pm.im1.index;
        row.matched = row.mu_d == rep.target_mu_d && row.mu_n == rep.target_mu_n &&
                      (!rep.has_pm1_targets ||
                       (row.i1 == rep.target_i1 && row.im1 == rep.target_im1));
        if (row.matched && !seen_match) {
            seen_match = true;
            rep.first_match_e = e;
        }
        if (seen_match && !row.matched) rep.monotone_tail = false;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace ere
