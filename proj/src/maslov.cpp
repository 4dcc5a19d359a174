#include "ere/maslov.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>

namespace ere {

namespace {

// Signed gauge-invariant pairing: det([W_orth | orth(F)]). Continuous in t
// for a gauge-continuous frame path, magnitude in [0, 1] (product of the
// sines of the principal angles), zero exactly on intersections.
double signed_pairing(const Mat& Worth, const Mat& F) {
    Mat S(F.rows(), Worth.cols() + F.cols());
    S << Worth, orthonormalize(F);
    return S.determinant();
}

double bisect_zero(const std::function<double(double)>& f, double lo, double hi, double flo,
                   double tol_t) {
    for (int i = 0; i < 200 && hi - lo > tol_t; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double ternary_min(const std::function<double(double)>& f, double lo, double hi, double tol_t) {
    while (hi - lo > tol_t) {
        const double m1 = lo + (hi - lo) / 3;
        const double m2 = hi - (hi - lo) / 3;
        if (f(m1) < f(m2))
            hi = m2;
        else
            lo = m1;
    }
    return 0.5 * (lo + hi);
}

struct FormData {
    Mat G;  // form on an orthonormal intersection basis
    Inertia inertia;
    int kernel_dim = 0;
};

// Crossing form via the coefficient: Q(u) = u^T B(t) u on Lambda(t) /\ W.
// Fallback: Q(u) = d/dt omega(u, w(t)) with u + w(t) in Lambda(t), w in a
// fixed complement, omega(u, w) = w^T J u.
FormData crossing_form_at(const LagrangianPath& path, const Mat& Worth, double t,
                          const Tolerances& tol) {
    const Mat F = path.frame(t);
    const Mat U = intersection_basis(Worth, F, tol.crossing);
    FormData fd;
    fd.kernel_dim = static_cast<int>(U.cols());
    if (U.cols() == 0) throw DomainError("crossing_form: empty intersection");
    if (path.coeff) {
        const Mat B = path.coeff(t);
        fd.G = U.transpose() * B * U;
    } else {
        // Finite differences of the graph coordinate over the complement
        // V' = J * Lambda(t).
        const Mat Fo = orthonormalize(F);
        const Mat Vc = path.J_amb * Fo;
        const double h = std::max(1e-8, 1e-5 * (path.t1 - path.t0));
        auto wcoord = [&](double s) -> Mat {
            Mat A(F.rows(), 2 * Fo.cols());
            A << orthonormalize(path.frame(s)), -Vc;
            Mat rhs = U;
            Mat sol = A.partialPivLu().solve(rhs);
            return Vc * sol.bottomRows(Fo.cols());  // w columns per basis vector
        };
        const double tp = std::min(t + h, path.t1), tm = std::max(t - h, path.t0);
        const Mat Wp = wcoord(tp), Wm = wcoord(tm);
        Mat G(U.cols(), U.cols());
        for (int a = 0; a < U.cols(); ++a)
            for (int b = 0; b < U.cols(); ++b)
                G(a, b) = ((Wp.col(b) - Wm.col(b)).transpose() * path.J_amb * U.col(a)).value() /
                          (tp - tm);
        fd.G = 0.5 * (G + G.transpose());
    }
    fd.G = Mat(0.5 * (fd.G + fd.G.transpose().eval()));
    fd.inertia = form_inertia(fd.G, tol.form);
    return fd;
}

struct Assembly {
    std::vector<CrossingRecord> records;
    bool persistent = false;
    bool any_irregular = false;
};

Assembly detect_crossings(const LagrangianPath& path, const Mat& Worth, const Tolerances& tol) {
    Assembly out;
    const double span = path.t1 - path.t0;
    const double tol_t = tol.time_loc * span;

    // Sample grid: construction grid plus interior subdivision.
    std::vector<double> ts;
    ts.reserve(path.samples.size() * 4);
    for (size_t i = 0; i + 1 < path.samples.size(); ++i) {
        const double a = path.samples[i], b = path.samples[i + 1];
        for (int j = 0; j < 4; ++j) ts.push_back(a + (b - a) * j / 4.0);
    }
    ts.push_back(path.t1);

    auto d = [&](double t) { return signed_pairing(Worth, path.frame(t)); };
    std::vector<double> dv(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) dv[i] = d(ts[i]);

    double dmax = 0;
    size_t tiny = 0;
    for (double v : dv) {
        dmax = std::max(dmax, std::abs(v));
        if (std::abs(v) < 1e-8) ++tiny;
    }
    if (dmax < 1e-10 || tiny * 5 > dv.size() * 3) {
        out.persistent = true;
        return out;
    }

    std::vector<double> candidates;
    // Sign changes.
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        if (dv[i] == 0.0) continue;
        if ((dv[i] < 0) != (dv[i + 1] < 0) && dv[i + 1] != 0.0)
            candidates.push_back(bisect_zero(d, ts[i], ts[i + 1], dv[i], tol_t));
    }
    // Exact-zero samples.
    for (size_t i = 1; i + 1 < ts.size(); ++i)
        if (dv[i] == 0.0) candidates.push_back(ts[i]);
    // Dips of |d|: refine every local minimum well below scale by dense
    // subsampling. A dip can hide a pair of transversal crossings (a narrow
    // lobe through zero), a genuine even-order touch, or nothing; collect
    // all sign changes inside, and certify a touch by an actual
    // intersection only when no sign change exists. This is how even-order
    // and closely spaced crossings avoid being undercounted.
    for (size_t i = 1; i + 1 < ts.size(); ++i) {
        const double m = std::abs(dv[i]);
        if (m >= 0.25 * dmax) continue;
        if (m > std::abs(dv[i - 1]) || m > std::abs(dv[i + 1])) continue;
        if ((dv[i - 1] < 0) != (dv[i + 1] < 0)) continue;  // handled as sign change
        const double lo = ts[i - 1], hi = ts[i + 1];
        const int nfine = 96;
        std::vector<double> ft(nfine + 1), fv(nfine + 1);
        for (int j = 0; j <= nfine; ++j) {
            ft[static_cast<size_t>(j)] = lo + (hi - lo) * j / nfine;
            fv[static_cast<size_t>(j)] = d(ft[static_cast<size_t>(j)]);
        }
        bool sign_change = false;
        for (int j = 0; j < nfine; ++j) {
            if (fv[static_cast<size_t>(j)] == 0.0) continue;
            if ((fv[static_cast<size_t>(j)] < 0) != (fv[static_cast<size_t>(j + 1)] < 0) &&
                fv[static_cast<size_t>(j + 1)] != 0.0) {
                candidates.push_back(bisect_zero(d, ft[static_cast<size_t>(j)],
                                                 ft[static_cast<size_t>(j + 1)],
                                                 fv[static_cast<size_t>(j)], tol_t));
                sign_change = true;
            }
        }
        if (!sign_change) {
            const double t_min = ternary_min([&](double t) { return std::abs(d(t)); }, lo, hi, tol_t);
            if (intersection_dim(Worth, path.frame(t_min), tol.crossing) >= 1)
                candidates.push_back(t_min);
        }
    }

    std::sort(candidates.begin(), candidates.end());
    std::vector<double> merged;
    for (double c : candidates) {
        if (c <= path.t0 + 1e3 * tol_t || c >= path.t1 - 1e3 * tol_t) continue;  // endpoint duty
        if (!merged.empty() && c - merged.back() < 1e4 * tol_t) continue;
        merged.push_back(c);
    }

    auto push_record = [&](double t, bool at_start, bool at_end) {
        if (intersection_dim(Worth, path.frame(t), tol.crossing) < 1) return;
        FormData fd = crossing_form_at(path, Worth, t, tol);
        CrossingRecord rec;
        rec.time = t;
        rec.kernel_dim = fd.kernel_dim;
        rec.m_plus = fd.inertia.m_plus;
        rec.m_minus = fd.inertia.m_minus;
        rec.signature = fd.inertia.m_plus - fd.inertia.m_minus;
        rec.regular = fd.inertia.kernel == 0;
        rec.at_start = at_start;
        rec.at_end = at_end;
        if (!rec.regular) out.any_irregular = true;
        out.records.push_back(rec);
    };

    push_record(path.t0, true, false);
    for (double c : merged) push_record(c, false, false);
    push_record(path.t1, false, true);
    return out;
}

IndexReport assemble(const Assembly& a) {
    IndexReport rep;
    rep.crossings = a.records;
    for (const auto& r : a.records) {
        if (r.at_start) {
            rep.index += r.m_plus;
            rep.rs += 0.5 * r.signature;
            rep.endpoint_contributions.first = r.m_plus;
        } else if (r.at_end) {
            rep.index -= r.m_minus;
            rep.rs += 0.5 * r.signature;
            rep.endpoint_contributions.second = -r.m_minus;
        } else {
            rep.index += r.signature;
            rep.rs += r.signature;
        }
    }
    rep.diagnostics.degenerate = a.any_irregular || a.persistent;
    rep.diagnostics.persistent_intersection = a.persistent;
    return rep;
}

IndexReport maslov_index_impl(const LagrangianPath& path, const Mat& W, const Tolerances& tol,
                              int depth) {
    const Mat Worth = orthonormalize(W);
    Assembly a = detect_crossings(path, Worth, tol);
    IndexReport direct = assemble(a);
    direct.diagnostics.converged = path.carried.converged;
    direct.diagnostics.final_gap = path.carried.final_gap;
    direct.diagnostics.stop_time = path.carried.stop_time;

    const bool needs_perturbation = a.persistent || a.any_irregular;
    if (!needs_perturbation || depth > 0 || !path.perturbed) {
        if (needs_perturbation)
            direct.diagnostics.note = "degenerate crossing structure left unresolved";
        return direct;
    }

    // Resolve with the shifted coefficient B - sigma I and certify by
    // agreement across two perturbation sizes.
    const double span = path.t1 - path.t0;
    double sigma = std::clamp(0.02 / span, 1e-8, 1e-3);
    for (int attempt = 0; attempt < 2; ++attempt) {
        IndexReport r1 = maslov_index_impl(path.perturbed(sigma), W, tol, depth + 1);
        IndexReport r2 = maslov_index_impl(path.perturbed(sigma / 2), W, tol, depth + 1);
        if (!r1.diagnostics.degenerate && !r2.diagnostics.degenerate &&
            r1.index == r2.index) {
            r1.diagnostics.perturbed = true;
            r1.diagnostics.sigma = sigma;
            r1.diagnostics.persistent_intersection = a.persistent;
            r1.diagnostics.converged = path.carried.converged;
            r1.diagnostics.note = "resolved by coefficient shift";
            return r1;
        }
        sigma /= 4;
    }
    direct.diagnostics.degenerate = true;
    direct.diagnostics.note = "degeneracy persisted under perturbation";
    return direct;
}

} // namespace

LagrangianPath path_from_frame(FramePath fp, Mat J_amb,
                               std::function<LagrangianPath(double)> rebuild) {
    auto shared = std::make_shared<FramePath>(std::move(fp));
    LagrangianPath p;
    p.dim = static_cast<int>(J_amb.rows()) / 2;
    p.t0 = shared->t0;
    p.t1 = shared->t1;
    p.samples = shared->sol.times;
    p.frame = [shared](double t) { return shared->eval(t); };
    p.coeff = shared->coeff;
    p.J_amb = std::move(J_amb);
    p.perturbed = std::move(rebuild);
    p.carried.converged = !shared->convergence.requested || shared->convergence.converged;
    p.carried.final_gap = shared->convergence.final_gap;
    p.carried.stop_time = shared->convergence.stop_time;
    return p;
}

LagrangianPath coefficient_path(const std::function<Mat(double)>& B, const Mat& F0, double a,
                                double b, const OdeOptions& opts) {
    const int k = static_cast<int>(F0.rows()) / 2;
    const Mat J = standard_J(k);
    FramePath fp = integrate_frame(J, B, F0, a, b, opts);
    Mat F0c = F0;
    auto rebuild = [B, F0c, a, b, opts](double sigma) {
        const int kk = static_cast<int>(F0c.rows()) / 2;
        auto Bs = [B, sigma, kk](double t) -> Mat {
            return B(t) - sigma * Mat::Identity(2 * kk, 2 * kk);
        };
        LagrangianPath q = coefficient_path(Bs, F0c, a, b, opts);
        q.perturbed = nullptr;
        return q;
    };
    return path_from_frame(std::move(fp), J, rebuild);
}

LagrangianPath restrict_path(const LagrangianPath& p, double a, double b) {
    if (a < p.t0 - 1e-12 || b > p.t1 + 1e-12 || !(a < b))
        throw DomainError("restrict_path: subinterval out of range");
    LagrangianPath q = p;
    q.t0 = a;
    q.t1 = b;
    q.samples.clear();
    q.samples.push_back(a);
    for (double t : p.samples)
        if (t > a && t < b) q.samples.push_back(t);
    q.samples.push_back(b);
    if (p.perturbed) {
        auto base = p.perturbed;
        q.perturbed = [base, a, b](double sigma) { return restrict_path(base(sigma), a, b); };
    }
    return q;
}

LagrangianPath graph_path(const FundamentalPath& gamma, const OdeOptions& opts) {
    const int k = gamma.k;
    const Mat Jd = doubled_J(k);
    auto Bsrc = gamma.coeff;
    auto Bd = [Bsrc, k](double t) -> Mat {
        Mat B = Mat::Zero(4 * k, 4 * k);
        B.bottomRightCorner(2 * k, 2 * k) = Bsrc(t);
        return B;
    };
    const Mat F0 = graph_embed(Mat::Identity(2 * k, 2 * k), +1);
    const double a = gamma.t0, b = gamma.t1;
    FramePath fp = integrate_frame(Jd, Bd, F0, a, b, opts);

    std::function<LagrangianPath(double)> rebuild = [Bd, F0, Jd, a, b, opts, k](double sigma) {
        auto Bs = [Bd, sigma, k](double t) -> Mat {
            return Bd(t) - sigma * Mat::Identity(4 * k, 4 * k);
        };
        FramePath pf = integrate_frame(Jd, Bs, F0, a, b, opts);
        LagrangianPath q = path_from_frame(std::move(pf), Jd, nullptr);
        return q;
    };
    return path_from_frame(std::move(fp), Jd, rebuild);
}

IndexReport maslov_index(const LagrangianPath& path, const Mat& W, const Tolerances& tol) {
    return maslov_index_impl(path, W, tol, 0);
}

double maslov_rs(const LagrangianPath& path, const Mat& W, const Tolerances& tol) {
    return maslov_index(path, W, tol).rs;
}

Mat crossing_form(const LagrangianPath& path, const Mat& W, double t, const Tolerances& tol) {
    if (!path.coeff && !path.frame) throw DomainError("crossing_form: no derivative source");
    return crossing_form_at(path, orthonormalize(W), t, tol).G;
}

LagrangianPath connect_lagrangians(const Mat& L0, const Mat& L1) {
    using CMat = Eigen::MatrixXcd;
    const int k = static_cast<int>(L0.cols());
    const Mat Q0 = orthonormalize(L0);
    const Mat Q1 = orthonormalize(L1);
    CMat W0 = Q0.topRows(k).cast<std::complex<double>>() +
              std::complex<double>(0, 1) * Q0.bottomRows(k).cast<std::complex<double>>();
    CMat W1 = Q1.topRows(k).cast<std::complex<double>>() +
              std::complex<double>(0, 1) * Q1.bottomRows(k).cast<std::complex<double>>();
    CMat M = W0.adjoint() * W1;
    // M is unitary; its Schur form is diagonal, giving an orthonormal
    // eigenbasis for the principal logarithm.
    Eigen::ComplexSchur<CMat> schur(M);
    CMat U = schur.matrixU();
    Eigen::VectorXcd diag = schur.matrixT().diagonal();
    Eigen::VectorXd theta(k);
    for (int i = 0; i < k; ++i) theta(i) = std::arg(diag(i));

    CMat H = CMat::Zero(k, k);
    for (int i = 0; i < k; ++i)
        H += std::complex<double>(0, theta(i)) * (U.col(i) * U.col(i).adjoint());
    CMat Hhat = W0 * H * W0.adjoint();  // skew-Hermitian generator
    const Mat S = Hhat.real();
    const Mat K = Hhat.imag();
    Mat B(2 * k, 2 * k);
    B << K, S, -S, K;
    B = Mat(0.5 * (B + B.transpose().eval()));

    LagrangianPath p;
    p.dim = k;
    p.t0 = 0;
    p.t1 = 1;
    p.J_amb = standard_J(k);
    const int n_samples = std::max<int>(48, static_cast<int>(16 * theta.cwiseAbs().sum()));
    for (int i = 0; i <= n_samples; ++i) p.samples.push_back(double(i) / n_samples);
    p.frame = [W0, U, theta, k](double s) -> Mat {
        CMat D = CMat::Zero(k, k);
        for (int i = 0; i < k; ++i)
            D += std::exp(std::complex<double>(0, s * theta(i))) * (U.col(i) * U.col(i).adjoint());
        CMat Ws = W0 * D;
        Mat F(2 * k, k);
        F.topRows(k) = Ws.real();
        F.bottomRows(k) = Ws.imag();
        return F;
    };
    Mat Bc = B;
    p.coeff = [Bc](double) { return Bc; };
    Mat F0 = Q0;
    p.perturbed = [Bc, F0](double sigma) {
        const int kk = static_cast<int>(F0.rows()) / 2;
        auto Bs = [Bc, sigma, kk](double) -> Mat {
            return Bc - sigma * Mat::Identity(2 * kk, 2 * kk);
        };
        LagrangianPath q = coefficient_path(Bs, F0, 0, 1);
        q.perturbed = nullptr;
        return q;
    };
    return p;
}

namespace {

// Graph coordinate of a Lagrangian over the Dirichlet/Neumann splitting:
// span[X; Y] = Gr(A) with A = Y X^{-1} when X is well conditioned.
bool graph_coordinate(const Mat& L, Mat& A, double cond_limit) {
    const int k = static_cast<int>(L.cols());
    const Mat Q = orthonormalize(L);
    const Mat X = Q.topRows(k);
    Eigen::JacobiSVD<Mat> svd(X);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(k - 1);
    if (smin <= 0 || smax / smin > cond_limit) return false;
    A = Q.bottomRows(k) * X.inverse();
    if ((A - A.transpose()).norm() > 1e-6 * std::max(1.0, A.norm())) return false;
    A = Mat(0.5 * (A + A.transpose().eval()));
    return true;
}

} // namespace

int hormander_index(const Mat& V0, const Mat& V1, const Mat& L0, const Mat& L1,
                    const Tolerances& tol) {
    Mat A0, A1, B0, B1;
    const double cond_limit = 1e8;
    if (graph_coordinate(V0, A0, cond_limit) && graph_coordinate(V1, A1, cond_limit) &&
        graph_coordinate(L0, B0, cond_limit) && graph_coordinate(L1, B1, cond_limit)) {
        const Mat D1 = B0 - A1, D2 = B1 - A0, D3 = B1 - A1, D4 = B0 - A0;
        const Inertia i1 = form_inertia(D1, 1e-9), i2 = form_inertia(D2, 1e-9),
                      i3 = form_inertia(D3, 1e-9), i4 = form_inertia(D4, 1e-9);
        if (i1.kernel == 0 && i2.kernel == 0 && i3.kernel == 0 && i4.kernel == 0) {
            const int twice = (i1.m_plus - i1.m_minus) + (i2.m_plus - i2.m_minus) -
                              (i3.m_plus - i3.m_minus) - (i4.m_plus - i4.m_minus);
            return twice / 2;
        }
    }
    LagrangianPath p = connect_lagrangians(L0, L1);
    const IndexReport r0 = maslov_index(p, V0, tol);
    const IndexReport r1 = maslov_index(p, V1, tol);
    return r0.index - r1.index;
}

PM1Result index_pm1(const FundamentalPath& gamma, const Tolerances& tol, const OdeOptions& opts) {
    const int k = gamma.k;
    LagrangianPath p = graph_path(gamma, opts);
    const Mat Delta = graph_embed(Mat::Identity(2 * k, 2 * k), +1);
    const Mat GrMinus = graph_embed(Mat::Identity(2 * k, 2 * k), -1);

    PM1Result res;
    res.i1 = maslov_index(p, Delta, tol);
    res.i1.index -= k;
    res.im1 = maslov_index(p, GrMinus, tol);

    const Mat M = gamma.monodromy();
    const Mat I = Mat::Identity(2 * k, 2 * k);
    auto kdim = [&](const Mat& A) {
        Eigen::JacobiSVD<Mat> svd(A);
        const auto& s = svd.singularValues();
        const double thresh = 1e-7 * std::max(1.0, M.norm());
        int d = 0;
        for (int i = 0; i < s.size(); ++i)
            if (s(i) < thresh) ++d;
        return d;
    };
    res.nu1 = kdim(M - I);
    res.num1 = kdim(M + I);
    res.end_degenerate_1 = res.nu1 > 0;
    res.end_degenerate_m1 = res.num1 > 0;
    return res;
}

} // namespace ere
