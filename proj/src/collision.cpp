#include "ere/collision.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace ere {

namespace {

Heteroclinic orbit_of(ClinicSide s) {
    switch (s) {
        case ClinicSide::l0_minus:
        case ClinicSide::l0_plus:
        case ClinicSide::l0_full: return Heteroclinic::l0;
        default: return Heteroclinic::lplus;
    }
}

bool is_forward_side(ClinicSide s) {
    return s == ClinicSide::l0_minus || s == ClinicSide::lplus_plus;
}

bool is_full_side(ClinicSide s) {
    return s == ClinicSide::l0_full || s == ClinicSide::lplus_full;
}

// Equilibrium reached as tau -> +infty (P_- on l0, P_+ on l_+) and its
// backward counterpart.
int forward_equilibrium_sign(Heteroclinic orbit) { return orbit == Heteroclinic::l0 ? -1 : +1; }

std::function<Mat(double)> side_coeff(const CentralConfig& cfg, Heteroclinic orbit) {
    CentralConfig c = cfg;
    return [c, orbit](double tau) { return hat_B(heteroclinic(orbit, tau), c); };
}

void require_hyperbolic(const CentralConfig& cfg, const char* who) {
    if (!cfg.hyperbolic)
        throw DomainError(std::string(who) +
                          ": limiting equilibria are hyperbolic iff lambda_1(R) > -1/8; got "
                          "lambda_1 = " + std::to_string(cfg.lambda1));
}

struct SideRun {
    LagrangianPath path;
    FrameConvergence convergence;
};

// Builds the Lagrangian path realizing the requested side with truncation.
SideRun build_side_path(const HalfClinicProblem& prob, double T, const OdeOptions& opts) {
    const CentralConfig& cfg = prob.cfg;
    const Heteroclinic orbit = orbit_of(prob.side);
    auto B = side_coeff(cfg, orbit);
    const Mat J = standard_J(cfg.k);
    const int fwd = forward_equilibrium_sign(orbit);

    SideRun run;
    if (is_forward_side(prob.side)) {
        FrameStopPolicy stop;
        stop.target = equilibrium_data(cfg, fwd).V_u;
        stop.gap_tol = prob.trunc.convergence_tol;
        stop.window = prob.trunc.window;
        stop.min_time = 2.0;
        FramePath fp = integrate_frame(J, B, prob.V0, 0.0, T, opts, stop);
        run.convergence = fp.convergence;
        Mat V0 = prob.V0;
        CentralConfig cc = cfg;
        auto rebuild = [cc, orbit, V0, T, opts](double sigma) {
            auto Bs = [cc, orbit, sigma](double tau) -> Mat {
                return hat_B(heteroclinic(orbit, tau), cc) -
                       sigma * Mat::Identity(2 * cc.k, 2 * cc.k);
            };
            LagrangianPath q = coefficient_path(Bs, V0, 0.0, T, opts);
            q.perturbed = nullptr;
            return q;
        };
        run.path = path_from_frame(std::move(fp), J, rebuild);
        return run;
    }

    const double a = -T;
    const double b = is_full_side(prob.side) ? T : 0.0;
    const Mat seed = equilibrium_data(cfg, -fwd).V_u;
    std::optional<FrameStopPolicy> stop;
    if (is_full_side(prob.side)) {
        FrameStopPolicy sp;
        sp.target = equilibrium_data(cfg, fwd).V_u;
        sp.gap_tol = prob.trunc.convergence_tol;
        sp.window = prob.trunc.window;
        sp.min_time = 5.0;
        stop = sp;
    }
    FramePath fp = integrate_frame(J, B, seed, a, b, opts, stop);
    run.convergence = fp.convergence;
    CentralConfig cc = cfg;
    Mat seed_c = seed;
    auto rebuild = [cc, orbit, seed_c, a, b, opts](double sigma) {
        auto Bs = [cc, orbit, sigma](double tau) -> Mat {
            return hat_B(heteroclinic(orbit, tau), cc) - sigma * Mat::Identity(2 * cc.k, 2 * cc.k);
        };
        LagrangianPath q = coefficient_path(Bs, seed_c, a, b, opts);
        q.perturbed = nullptr;
        return q;
    };
    run.path = path_from_frame(std::move(fp), J, rebuild);
    return run;
}

IndexReport run_once(const HalfClinicProblem& prob, double T, const Tolerances& tol,
                     const OdeOptions& opts) {
    SideRun run = build_side_path(prob, T, opts);
    IndexReport rep = maslov_index(run.path, prob.V1, tol);
    if (is_forward_side(prob.side) || is_full_side(prob.side)) {
        rep.diagnostics.converged = run.convergence.converged;
        rep.diagnostics.final_gap = run.convergence.final_gap;
        rep.diagnostics.stop_time = run.convergence.stop_time;
        if (!run.convergence.converged)
            rep.diagnostics.note = "frame did not settle on the unstable limit within the horizon; "
                                   "crossing count kept growing";
    }
    return rep;
}

} // namespace

std::string side_name(ClinicSide s) {
    switch (s) {
        case ClinicSide::l0_minus: return "l0-";
        case ClinicSide::l0_plus: return "l0+";
        case ClinicSide::lplus_minus: return "l+-";
        case ClinicSide::lplus_plus: return "l++";
        case ClinicSide::l0_full: return "l0";
        case ClinicSide::lplus_full: return "l+";
    }
    return "?";
}

double auto_horizon(const CentralConfig& cfg, const TruncationPolicy& trunc) {
    if (trunc.t_max > 0) return trunc.t_max;
    if (!cfg.hyperbolic) return 200.0;
    const double eta_min = std::sqrt(0.125 + cfg.lambda1);
    return std::max(200.0, 40.0 / eta_min);
}

IndexReport half_clinic_index(const HalfClinicProblem& prob, const Tolerances& tol,
                              const OdeOptions& opts) {
    require_hyperbolic(prob.cfg, "half_clinic_index");
    if (is_forward_side(prob.side) && prob.V0.size() == 0)
        throw DomainError("half_clinic_index: forward sides need an initial Lagrangian V0");
    const double T = auto_horizon(prob.cfg, prob.trunc);
    IndexReport rep = run_once(prob, T, tol, opts);
    if (prob.trunc.sensitivity_check && rep.diagnostics.converged) {
        IndexReport longer = run_once(prob, 1.2 * T, tol, opts);
        if (longer.index != rep.index) {
            IndexReport shorter = run_once(prob, 0.8 * T, tol, opts);
            rep.diagnostics.sensitivity_ok = false;
            rep.diagnostics.note = "index not stable under horizon changes: " +
                                   std::to_string(shorter.index) + "/" + std::to_string(rep.index) +
                                   "/" + std::to_string(longer.index);
        }
    }
    return rep;
}

int scalar_l0_index(int reference_dirichlet, int initial_dirichlet, double r) {
    if (!(r > -0.125) || r == 0.0)
        throw DomainError("scalar_l0_index: need r > -1/8 and r != 0");
    if (reference_dirichlet && initial_dirichlet) return 1;
    if (reference_dirichlet && !initial_dirichlet) return r < 0 ? 1 : 0;
    if (!reference_dirichlet && initial_dirichlet) return 0;
    return r < 0 ? 1 : 0;
}

L0Table l0_analytic_indices(const CentralConfig& cfg) {
    require_hyperbolic(cfg, "l0_analytic_indices");
    if (!cfg.nondegenerate)
        throw DomainError("l0_analytic_indices: R has a zero eigenvalue; the Neumann problem "
                          "on l0 is degenerate");
    L0Table t;
    t.i_minus_vd_l0p = 0;
    t.i_minus_vn_l0p = 0;
    for (int j = 0; j < cfg.k; ++j) {
        const double r = cfg.eigenvalues(j);
        t.i_plus_vd_vd_l0m += scalar_l0_index(1, 1, r);
        t.i_plus_vd_vn_l0m += scalar_l0_index(1, 0, r);
        t.i_plus_vn_vd_l0m += scalar_l0_index(0, 1, r);
        t.i_plus_vn_vn_l0m += scalar_l0_index(0, 0, r);
    }
    return t;
}

IndexReport heteroclinic_index_lplus(const CentralConfig& cfg, const Mat& V1,
                                     const TruncationPolicy& trunc, const Tolerances& tol,
                                     const OdeOptions& opts) {
    HalfClinicProblem prob;
    prob.side = ClinicSide::lplus_full;
    prob.cfg = cfg;
    prob.V1 = V1;
    prob.trunc = trunc;
    return half_clinic_index(prob, tol, opts);
}

Mat wedge2_matrix(const Mat& A) {
    const int n = static_cast<int>(A.rows());
    std::vector<std::vector<int>> pos(n, std::vector<int>(n, -1));
    std::vector<std::pair<int, int>> idx;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            pos[i][j] = static_cast<int>(idx.size());
            idx.emplace_back(i, j);
        }
    const int m = static_cast<int>(idx.size());
    Mat W = Mat::Zero(m, m);
    // A^(2) (e_i ^ e_j) = (A e_i) ^ e_j + e_i ^ (A e_j).
    for (int c = 0; c < m; ++c) {
        const auto [i, j] = idx[c];
        for (int p = 0; p < n; ++p) {
            if (p != j) {
                if (p < j)
                    W(pos[p][j], c) += A(p, i);
                else
                    W(pos[j][p], c) -= A(p, i);
            }
            if (p != i) {
                if (p > i)
                    W(pos[i][p], c) += A(p, j);
                else
                    W(pos[p][i], c) -= A(p, j);
            }
        }
    }
    return W;
}

Vec wedge2_of_plane(const Mat& F) {
    const int n = static_cast<int>(F.rows());
    if (F.cols() != 2) throw DomainError("wedge2_of_plane: need exactly two columns");
    std::vector<std::pair<int, int>> idx;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) idx.emplace_back(i, j);
    Vec y(static_cast<int>(idx.size()));
    for (size_t r = 0; r < idx.size(); ++r)
        y(static_cast<int>(r)) = F(idx[r].first, 0) * F(idx[r].second, 1) -
                                 F(idx[r].second, 0) * F(idx[r].first, 1);
    return y;
}

ExteriorResult exterior_index_4d(const HalfClinicProblem& prob, double horizon,
                                 const Tolerances& tol, const OdeOptions& opts) {
    const CentralConfig& cfg = prob.cfg;
    if (cfg.k != 2)
        throw DomainError("exterior_index_4d: implemented for k = 2 only; use the frame method");
    if (prob.side != ClinicSide::lplus_minus && prob.side != ClinicSide::lplus_full)
        throw DomainError("exterior_index_4d: supported sides are l+- (reversed transport) and "
                          "the full l+ line with Dirichlet reference");
    const double T = horizon > 0 ? horizon : auto_horizon(cfg, prob.trunc);
    const Mat J = standard_J(2);

    // Reversed system for the backward half-line; direct system on the full
    // line seeded with the unstable plane at -T.
    std::function<Mat(double)> Asys;
    Mat start_plane;
    double a = 0, b = T;
    CentralConfig cc = cfg;
    if (prob.side == ClinicSide::lplus_minus) {
        Asys = [cc, J](double tau) -> Mat {
            return -(J * hat_B(heteroclinic(Heteroclinic::lplus, -tau), cc));
        };
        start_plane = prob.V1;
    } else {
        require_hyperbolic(cfg, "exterior_index_4d");
        Asys = [cc, J](double tau) -> Mat {
            return J * hat_B(heteroclinic(Heteroclinic::lplus, tau), cc);
        };
        start_plane = equilibrium_data(cfg, -1).V_u;
        a = -T;
        b = T;
    }

    // sigma = positive spectral mass of the limiting matrix.
    const Mat Ainf = Asys(b);
    Eigen::EigenSolver<Mat> es(Ainf);
    double sigma = 0;
    for (int i = 0; i < 4; ++i)
        if (es.eigenvalues()(i).real() > 0) sigma += es.eigenvalues()(i).real();

    MatrixRhs rhs = [&Asys, sigma](double tau, const Mat& y, Mat& dy) {
        dy = (wedge2_matrix(Asys(tau)) - sigma * Mat::Identity(6, 6)) * y;
    };
    const Mat y0 = wedge2_of_plane(orthonormalize(start_plane));
    OdeSolution sol = integrate_ode(rhs, y0, a, b, opts);

    // Zeros of the e3^e4 coordinate (index 5): the transported plane meets
    // the Dirichlet plane exactly there. The start point is excluded: a
    // crossing at tau = a carries no interior weight.
    auto y6 = [&sol](double t) { return sol.eval(t)(5, 0); };
    std::vector<double> ts;
    for (size_t i = 0; i + 1 < sol.times.size(); ++i) {
        const double lo = sol.times[i], hi = sol.times[i + 1];
        for (int j = 0; j < 4; ++j) ts.push_back(lo + (hi - lo) * j / 4.0);
    }
    ts.push_back(sol.b);

    ExteriorResult out;
    std::vector<double> vals(ts.size());
    double vmax = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
        vals[i] = y6(ts[i]);
        vmax = std::max(vmax, std::abs(vals[i]));
    }
    const double span = b - a;
    const double tol_t = tol.time_loc * span;
    const double guard = a + 1e-6 * span;  // skip the structural zero at the start
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        if (ts[i] < guard) continue;
        if (vals[i] == 0.0 || (vals[i] < 0) == (vals[i + 1] < 0)) continue;
        double lo = ts[i], hi = ts[i + 1], flo = vals[i];
        for (int it = 0; it < 200 && hi - lo > tol_t; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = y6(mid);
            if ((fm < 0) == (flo < 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        out.trace.times.push_back(0.5 * (lo + hi));
    }

    const size_t decim = std::max<size_t>(1, ts.size() / 2000);
    for (size_t i = 0; i < ts.size(); i += decim) out.trace.curve.emplace_back(ts[i], vals[i]);

    // Tail behavior: settled if the trailing stretch is zero-free and the
    // coordinate stays away from zero.
    const double tail_start = a + 0.7 * (sol.b - a);
    bool tail_zero_free = true;
    for (double z : out.trace.times)
        if (z > tail_start) tail_zero_free = false;
    double tail_min = vmax;
    for (size_t i = 0; i < ts.size(); ++i)
        if (ts[i] > a + 0.9 * (sol.b - a)) tail_min = std::min(tail_min, std::abs(vals[i]));
    out.trace.converged = tail_zero_free && tail_min > 1e-6 * vmax;
    out.trace.tail = out.trace.converged ? ZeroTrace::Tail::settled : ZeroTrace::Tail::growing;

    out.report.index = static_cast<int>(out.trace.times.size());
    out.report.diagnostics.converged = out.trace.converged;
    for (double z : out.trace.times) {
        CrossingRecord rec;
        rec.time = z;
        rec.kernel_dim = 1;
        rec.m_plus = 1;
        rec.signature = 1;
        out.report.crossings.push_back(rec);
    }
    return out;
}

BrakeSplit brake_split(const CentralConfig& cfg, const TruncationPolicy& trunc,
                       const Tolerances& tol, const OdeOptions& opts) {
    if (!cfg.N) throw DomainError("brake_split: configuration lacks a brake symmetry N");
    require_hyperbolic(cfg, "brake_split");

    BrakeSplit bs;
    const Mat Vp = brake_frame(cfg, +1);
    const Mat Vm = brake_frame(cfg, -1);

    HalfClinicProblem prob;
    prob.side = ClinicSide::lplus_minus;
    prob.cfg = cfg;
    prob.trunc = trunc;
    prob.V1 = Vp;
    IndexReport rp = half_clinic_index(prob, tol, opts);
    prob.V1 = Vm;
    IndexReport rm = half_clinic_index(prob, tol, opts);
    bs.i_minus_plus_lpm = rp.index;
    bs.i_minus_minus_lpm = rm.index;
    bs.diagnostics = rp.diagnostics;
    bs.diagnostics.sensitivity_ok = rp.diagnostics.sensitivity_ok && rm.diagnostics.sensitivity_ok;

    // l0^- table through the splitting into the +-1 eigenspaces of N: the
    // brake frames restrict to the Dirichlet frame on their own block and to
    // the Neumann frame on the other.
    Eigen::SelfAdjointEigenSolver<Mat> es_p(brake_restricted_R(cfg, +1));
    Eigen::SelfAdjointEigenSolver<Mat> es_m(brake_restricted_R(cfg, -1));
    auto table = [&](int ref_plus, int ini_plus) {
        // reference X, initial W in {V+ (=1), V- (=0)}; restriction rule:
        // X|_{hat V^+} = V_d iff X = V+, X|_{hat V^-} = V_d iff X = V-.
        int total = 0;
        for (int j = 0; j < es_p.eigenvalues().size(); ++j)
            total += scalar_l0_index(ref_plus == 1, ini_plus == 1, es_p.eigenvalues()(j));
        for (int j = 0; j < es_m.eigenvalues().size(); ++j)
            total += scalar_l0_index(ref_plus == 0, ini_plus == 0, es_m.eigenvalues()(j));
        return total;
    };
    auto table_coord = [&](int ref_plus, bool initial_dirichlet) {
        int total = 0;
        for (int j = 0; j < es_p.eigenvalues().size(); ++j)
            total += scalar_l0_index(ref_plus == 1, initial_dirichlet, es_p.eigenvalues()(j));
        for (int j = 0; j < es_m.eigenvalues().size(); ++j)
            total += scalar_l0_index(ref_plus == 0, initial_dirichlet, es_m.eigenvalues()(j));
        return total;
    };
    bs.i_plus_vplus_vd_l0m = table_coord(1, true);
    bs.i_plus_vminus_vd_l0m = table_coord(0, true);
    bs.i_plus_vplus_vn_l0m = table_coord(1, false);
    bs.i_plus_vminus_vn_l0m = table_coord(0, false);
    bs.i_plus_vplus_vplus_l0m = table(1, 1);
    bs.i_plus_vminus_vminus_l0m = table(0, 0);
    bs.i_plus_vminus_vplus_l0m = table(0, 1);
    bs.i_plus_vplus_vminus_l0m = table(1, 0);
    return bs;
}

std::string probe_status_name(ProbeStatus s) {
    switch (s) {
        case ProbeStatus::stable: return "stable";
        case ProbeStatus::jump_detected: return "jump_detected";
        case ProbeStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

ProbeResult nondegeneracy_probe(Family family, double param, const TruncationPolicy& trunc,
                                const Tolerances& tol, const OdeOptions& opts) {
    ProbeResult res;
    std::vector<double> params = {param};
    for (double h : {1e-3, 1e-4}) {
        params.push_back(param - h);
        params.push_back(param + h);
    }
    std::sort(params.begin(), params.end());

    int failures = 0;
    double failed_at = param;
    for (double p : params) {
        try {
            CentralConfig cfg = build_config(family, p);
            TruncationPolicy tr = trunc;
            tr.sensitivity_check = true;
            IndexReport r = heteroclinic_index_lplus(cfg, dirichlet_frame(cfg.k), tr, tol, opts);
            if (!r.diagnostics.converged || !r.diagnostics.sensitivity_ok) {
                ++failures;
                failed_at = p;
                continue;
            }
            // Track the brake-split half-line pair as well: a crossing sliding
            // into the boundary changes these before the full-line count
            // reacts (that is exactly how the degenerate limit shows up).
            int fingerprint = r.index;
            if (cfg.N) {
                HalfClinicProblem hp;
                hp.side = ClinicSide::lplus_minus;
                hp.cfg = cfg;
                hp.trunc = tr;
                hp.V1 = brake_frame(cfg, +1);
                IndexReport rp = half_clinic_index(hp, tol, opts);
                hp.V1 = brake_frame(cfg, -1);
                IndexReport rm = half_clinic_index(hp, tol, opts);
                fingerprint = 100 * r.index + 10 * rp.index + rm.index;
            }
            res.values.emplace_back(p, r.index);
            res.fingerprints.push_back(fingerprint);
        } catch (const DomainError&) {
            // Out-of-family offsets are skipped, not failures.
        }
    }
    if (res.values.size() < 2) {
        res.status = ProbeStatus::inconclusive;
        res.note = "fewer than two valid evaluations";
        return res;
    }
    bool all_equal = true;
    for (int f : res.fingerprints)
        if (f != res.fingerprints.front()) all_equal = false;
    if (failures > 0) {
        res.status = ProbeStatus::jump_detected;
        res.candidate_param = failed_at;
        res.note = "non-convergent transport at a probed parameter";
    } else if (all_equal) {
        res.status = ProbeStatus::stable;
    } else {
        res.status = ProbeStatus::jump_detected;
        // Localize the first disagreeing bracket.
        for (size_t i = 0; i + 1 < res.fingerprints.size(); ++i)
            if (res.fingerprints[i] != res.fingerprints[i + 1]) {
                res.candidate_param = 0.5 * (res.values[i].first + res.values[i + 1].first);
                break;
            }
        res.note = "index jump across probed parameters";
    }
    return res;
}

} // namespace ere
