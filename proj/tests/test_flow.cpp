#include <doctest.h>

#include "ere/flow.hpp"

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

using namespace ere;

TEST_CASE("rotation flow: B = I in R^2") {
    auto B = [](double) { return Mat::Identity(2, 2); };
    OdeOptions tight;
    tight.abs_tol = tight.rel_tol = 1e-12;
    FundamentalPath fp = integrate_fundamental(B, 1, 0.0, 2 * M_PI, tight);
    // gamma(t) = exp(J t): period 2 pi.
    CHECK((fp.monodromy() - Mat::Identity(2, 2)).norm() < 1e-10);
    Mat half = fp.eval(M_PI / 2);
    Mat expect(2, 2);
    expect << 0, -1, 1, 0;
    CHECK((half - expect).norm() < 1e-8);
}

TEST_CASE("constant-coefficient monodromy matches the matrix exponential") {
    std::mt19937 rng(2024);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int c = 0; c < 20; ++c) {
        const int k = 1 + (c % 2);
        Mat S(2 * k, 2 * k);
        for (int i = 0; i < 2 * k; ++i)
            for (int j = 0; j < 2 * k; ++j) S(i, j) = g(rng);
        S = Mat(0.5 * (S + S.transpose().eval()));
        S *= 0.5 / std::max(1.0, S.norm());  // keep the growth over one period mild
        auto B = [S](double) { return S; };
        FundamentalPath fp = integrate_fundamental(B, k, 0.0, 2 * M_PI);
        Mat oracle = Mat(2 * M_PI * standard_J(k) * S).exp();
        CHECK((fp.monodromy() - oracle).norm() < 1e-8 * std::max(1.0, oracle.norm()));
        CHECK(fp.drift < 1e-9);
    }
}

TEST_CASE("semigroup property on subintervals") {
    CentralConfig cfg = build_config(Family::euler, 0.1);
    auto B = [cfg](double t) { return essential_B(t, cfg, 0.5); };
    FundamentalPath full = integrate_fundamental(B, 2, 0.0, 2 * M_PI);
    for (double nu : {1.1, 2.7, 4.9}) {
        FundamentalPath left = integrate_fundamental(B, 2, 0.0, nu);
        auto Bs = [B, nu](double t) { return B(t + nu); };
        FundamentalPath right = integrate_fundamental(Bs, 2, 0.0, 2 * M_PI - nu);
        Mat composed = right.monodromy() * left.monodromy();
        CHECK((composed - full.monodromy()).norm() <
              1e-7 * std::max(1.0, full.monodromy().norm()));
    }
}

TEST_CASE("classification taxonomy on constructed monodromies") {
    Mat hyp = Mat::Zero(4, 4);
    hyp.diagonal() << 2.0, 3.0, 0.5, 1.0 / 3.0;
    CHECK(classify(hyp).classification == SpectralClass::hyperbolic);

    auto rot2 = [](double th) {
        Mat r(2, 2);
        r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        return r;
    };
    Mat ell = symplectic_sum(rot2(0.7), rot2(1.9));
    CHECK(classify(ell).classification == SpectralClass::elliptic);

    Mat mix_hyp(2, 2);
    mix_hyp << 2.0, 0.0, 0.0, 0.5;
    Mat eh = symplectic_sum(rot2(0.7), mix_hyp);
    CHECK(classify(eh).classification == SpectralClass::elliptic_hyperbolic);

    // tr1/tr2 recover lambda + 1/lambda per pair.
    MonodromyReport rep = classify(eh);
    const double t_rot = 2 * std::cos(0.7), t_hyp = 2.5;
    CHECK(std::min(rep.tr1, rep.tr2) == doctest::Approx(std::min(t_rot, t_hyp)).epsilon(1e-10));
    CHECK(std::max(rep.tr1, rep.tr2) == doctest::Approx(std::max(t_rot, t_hyp)).epsilon(1e-10));
}

TEST_CASE("eigenvalue reciprocity on a battery run") {
    CentralConfig cfg = build_config(Family::euler, 0.1);
    TrueAnomalyRun run = monodromy_true_anomaly(cfg, 0.5);
    CHECK(run.path.drift < 1e-9);
    const Mat& M = run.path.monodromy();
    CHECK(symplectic_residual(M) < 1e-9 * std::max(1.0, M.squaredNorm()));
    for (int i = 0; i < 4; ++i) {
        const auto lam = run.report.eigenvalues(i);
        bool found = false;
        for (int j = 0; j < 4; ++j)
            if (std::abs(run.report.eigenvalues(j) - 1.0 / lam) < 1e-7 * std::abs(1.0 / lam))
                found = true;
        CHECK(found);
    }
}

TEST_CASE("Kepler degenerates to a spectrally stable degenerate monodromy") {
    CentralConfig cfg = build_config(Family::euler, 0.0);
    for (double e : {0.0, 0.4}) {
        TrueAnomalyRun run = monodromy_true_anomaly(cfg, e);
        CHECK(run.report.classification == SpectralClass::spectrally_stable_degenerate);
        for (int i = 0; i < 4; ++i)
            CHECK(std::abs(run.report.eigenvalues(i) - 1.0) < 1e-4);
    }
}

TEST_CASE("quoted classifications: Euler near-collision and strong-minimizer Lagrange") {
    CentralConfig eul = build_config(Family::euler, 0.1);
    TrueAnomalyRun r1 = monodromy_true_anomaly(eul, 0.999);
    CHECK(r1.report.classification == SpectralClass::hyperbolic);

    CentralConfig lag = build_config(Family::lagrange, 8.5);
    TrueAnomalyRun r2 = monodromy_true_anomaly(lag, 0.5);
    CHECK(r2.report.classification == SpectralClass::hyperbolic);
}

TEST_CASE("Floquet exponents at e = 0 match the quartic dispersion relation") {
    // -y'' - 2J y' + R y = 0 with constant R = diag(r1, r2):
    // lambda^4 - (r1 + r2 - 4) lambda^2 + r1 r2 = 0, multipliers e^{2 pi lambda}.
    const double r1 = -0.1, r2 = 3.2;
    CentralConfig cfg = build_config(Family::euler, 0.1);
    SturmCoeffs sc = sturm_coeffs(cfg, 0.0);
    auto B = [&sc](double t) { return assemble_sturm_B(sc, t); };
    FundamentalPath fp = integrate_fundamental(B, 2, 0.0, 2 * M_PI);
    MonodromyReport rep = classify(fp.monodromy());

    const double a = r1 + r2 - 4.0, b = r1 * r2;
    const std::complex<double> disc = std::sqrt(std::complex<double>(a * a - 4 * b, 0.0));
    std::vector<std::complex<double>> expected;
    for (double s1 : {1.0, -1.0})
        for (double s2 : {1.0, -1.0}) {
            const auto lam2 = 0.5 * (a + s1 * disc);
            expected.push_back(std::exp(2 * M_PI * s2 * std::sqrt(lam2)));
        }
    for (const auto& mult : expected) {
        bool found = false;
        for (int i = 0; i < 4; ++i)
            if (std::abs(rep.eigenvalues(i) - mult) < 1e-6 * std::max(1.0, std::abs(mult)))
                found = true;
        CHECK(found);
    }
}

TEST_CASE("blow-up run basics at e = 0") {
    CentralConfig cfg = build_config(Family::euler, 0.1);
    BlowupRun run = blowup_flow(cfg, 0.0);
    // Circular orbit: q == 1, Q == 0, so tau time equals t and T = 2 pi.
    CHECK(run.T == doctest::Approx(2 * M_PI).epsilon(1e-10));
    CHECK(run.at(1.0).q == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(run.energy_drift < 1e-9);
}

TEST_CASE("blow-up monodromy is similar to the true-anomaly monodromy") {
    CentralConfig cfg = build_config(Family::euler, 0.1);
    const double e = 0.9;
    BlowupRun brun = blowup_flow(cfg, e);
    TrueAnomalyRun trun = monodromy_true_anomaly(cfg, e);
    CHECK(brun.energy_drift < 1e-9);

    auto sorted = [](const Eigen::VectorXcd& v) {
        std::vector<std::complex<double>> s(v.data(), v.data() + v.size());
        std::sort(s.begin(), s.end(), [](auto a, auto b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        });
        return s;
    };
    auto eb = sorted(brun.report.eigenvalues);
    auto et = sorted(trun.report.eigenvalues);
    for (size_t i = 0; i < eb.size(); ++i)
        CHECK(std::abs(eb[i] - et[i]) < 1e-6 * std::max(1.0, std::abs(et[i])));
}

TEST_CASE("energy conservation from the standard initialization") {
    CentralConfig cfg = build_config(Family::euler, 0.1);
    for (double e : {0.3, 0.8}) {
        BlowupRun run = blowup_flow(cfg, e, {}, {}, /*collision_origin=*/false);
        CHECK(run.energy_drift < 1e-9);
        // starts at the apex point of the energy level
        CHECK(run.at(0.0).q == doctest::Approx(std::sqrt(1.0 + e)).epsilon(1e-12));
    }
}

TEST_CASE("conjugation endpoint diagnostic") {
    CentralConfig cfg = build_config(Family::euler, 0.1);
    ConjugationCheck ck = conjugation_endpoint_check(cfg, 0.6);
    CHECK(ck.consistent);
    CHECK(ck.nu1_true == 0);
}

TEST_CASE("domain selection threshold") {
    CHECK(choose_domain(0.9) == TimeDomain::true_anomaly);
    CHECK(choose_domain(0.9995) == TimeDomain::blowup_tau);
}

TEST_CASE("frame transport with convergence stop") {
    // Transport V_d along the l0 flow: it settles onto the unstable frame of
    // the forward equilibrium.
    CentralConfig cfg = build_config(Family::euler, 0.1);
    auto B = [cfg](double tau) { return hat_B(heteroclinic(Heteroclinic::l0, tau), cfg); };
    EquilibriumData eq = equilibrium_data(cfg, -1);
    FrameStopPolicy stop;
    stop.target = eq.V_u;
    stop.min_time = 2.0;
    FramePath fp = integrate_frame(standard_J(2), B, dirichlet_frame(2), 0.0, 400.0, {}, stop);
    CHECK(fp.convergence.converged);
    CHECK(fp.convergence.final_gap < 1e-6);
    CHECK(fp.t1 < 400.0);

    // The gap decreases monotonically along the settled tail.
    double prev = subspace_gap(fp.eval(fp.t1 * 0.6), eq.V_u);
    for (double f : {0.7, 0.8, 0.9, 1.0}) {
        const double gap = subspace_gap(fp.eval(fp.t1 * f), eq.V_u);
        CHECK(gap <= prev * (1 + 1e-9));
        prev = gap;
    }
}
