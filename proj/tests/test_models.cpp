#include <doctest.h>

#include "ere/models.hpp"
#include "ere/ode.hpp"

#include <cmath>

using namespace ere;

TEST_CASE("euler config") {
    CentralConfig cfg = build_config(Family::euler, 0.1);
    CHECK(cfg.k == 2);
    CHECK(cfg.R(0, 0) == doctest::Approx(-0.1));
    CHECK(cfg.R(1, 1) == doctest::Approx(3.2));
    CHECK(cfg.lambda1 == doctest::Approx(-0.1));
    CHECK(cfg.morse_phi == 1);
    CHECK(cfg.hyperbolic);  // -0.1 > -1/8
    CHECK(cfg.N.has_value());

    CHECK_FALSE(build_config(Family::euler, 0.2).hyperbolic);
    CHECK_THROWS_AS(build_config(Family::euler, -0.5), DomainError);
}

TEST_CASE("lagrange config") {
    CentralConfig cfg = build_config(Family::lagrange, 9.0);
    CHECK(cfg.R(0, 0) == doctest::Approx(1.5));
    CHECK(cfg.R(1, 1) == doctest::Approx(1.5));
    CHECK(cfg.morse_phi == 0);
    CHECK_THROWS_AS(build_config(Family::lagrange, 9.5), DomainError);
    CHECK_THROWS_AS(build_config(Family::lagrange, 0.0), DomainError);
}

TEST_CASE("ring3 config and eigenvalue thresholds") {
    const double mc0 = std::sqrt(3.0) / 24.0;
    CentralConfig cfg = build_config(Family::ring3, mc0);
    CHECK(cfg.k == 4);
    // lambda_-(m_c(0)) = 0, so R has the degenerate eigenvalue 1 + 0... the
    // smallest eigenvalue of R equals 1 at the minimizer boundary.
    CHECK(cfg.lambda1 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ring3_lambda_minus(mc0) == doctest::Approx(0.0).epsilon(1e-12));

    const double mc1 = (81.0 + 64.0 * std::sqrt(3.0)) / 249.0;
    CHECK(ring3_lambda_minus(mc1) == doctest::Approx(-1.0).epsilon(1e-12));

    // The closed-form eigenvalues match the assembled matrix.
    CentralConfig c2 = build_config(Family::ring3, 0.3);
    const double lm = ring3_lambda_minus(0.3), lp = ring3_lambda_plus(0.3);
    CHECK(c2.eigenvalues(0) == doctest::Approx(1 + lm).epsilon(1e-12));
    CHECK(c2.eigenvalues(3) == doctest::Approx(1 + lp).epsilon(1e-12));

    // Bisection brackets the sign change of lambda_- at mc0 and the -1
    // crossing at mc1.
    auto bisect = [](auto f, double lo, double hi) {
        double flo = f(lo);
        for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
            const double mid = 0.5 * (lo + hi);
            ((f(mid) < 0) == (flo < 0) ? lo : hi) = mid;
            if ((f(lo) < 0) != (flo < 0)) flo = f(lo);
        }
        return 0.5 * (lo + hi);
    };
    const double root0 = bisect([](double m) { return ring3_lambda_minus(m); }, 0.01, 0.2);
    CHECK(root0 == doctest::Approx(mc0).epsilon(1e-8));
    const double root1 = bisect([](double m) { return ring3_lambda_minus(m) + 1.0; }, 0.5, 1.5);
    CHECK(root1 == doctest::Approx(mc1).epsilon(1e-8));
}

TEST_CASE("custom config validates N") {
    Mat R(2, 2);
    R << 1.0, 0.2, 0.2, 2.0;
    CHECK_NOTHROW(custom_config(R));
    Mat N(2, 2);
    N << 1, 0, 0, 1;  // commutes with block J instead of anticommuting
    CHECK_THROWS_AS(custom_config(R, N), DomainError);
}

TEST_CASE("essential_B structure") {
    CentralConfig cfg = build_config(Family::euler, 0.1);

    SUBCASE("e = 0 is autonomous") {
        Mat B0 = essential_B(0.0, cfg, 0.0);
        Mat B1 = essential_B(1.7, cfg, 0.0);
        CHECK((B0 - B1).norm() == 0.0);
    }
    SUBCASE("direct substitution at t = 0, e = 0.5") {
        Mat B = essential_B(0.0, cfg, 0.5);
        Mat lower = B.bottomRightCorner(2, 2);
        Mat expect = Mat::Identity(2, 2);
        expect(0, 0) -= -0.1 / 1.5;
        expect(1, 1) -= 3.2 / 1.5;
        CHECK((lower - expect).norm() < 1e-14);
    }
    SUBCASE("symmetry") {
        for (double t : {0.3, 1.1, 2.9, 5.5}) {
            Mat B = essential_B(t, cfg, 0.7);
            CHECK((B - B.transpose()).norm() < 1e-14);
        }
    }
    CHECK_THROWS_AS(essential_B(0.0, cfg, 1.0), DomainError);
}

TEST_CASE("sturm coefficients assemble to the essential system") {
    CentralConfig cfg = build_config(Family::euler, 0.35);
    SturmCoeffs sc = sturm_coeffs(cfg, 0.6);
    for (double t : {0.0, 0.9, 3.1, 4.0}) {
        CHECK((assemble_sturm_B(sc, t) - essential_B(t, cfg, 0.6)).norm() < 1e-13);
    }
}

TEST_CASE("blowup vector field") {
    auto v = blowup_rhs({0.0, std::sqrt(2.0)});
    CHECK(v.norm() == doctest::Approx(0.0));
    v = blowup_rhs({0.0, -std::sqrt(2.0)});
    CHECK(v.norm() == doctest::Approx(0.0));
    v = blowup_rhs({1.0, 0.0});
    CHECK(v.norm() == doctest::Approx(0.0));
    CHECK(BlowUpPoint{1.0, 0.0}.energy() == doctest::Approx(-0.5));
    v = blowup_rhs({0.0, 0.0});
    CHECK(v(0) == 0.0);
    CHECK(v(1) == doctest::Approx(-1.0));
}

TEST_CASE("heteroclinic parametrizations") {
    const double s2 = std::sqrt(2.0);
    BlowUpPoint p = heteroclinic(Heteroclinic::lplus, 0.0);
    CHECK(p.q == doctest::Approx(s2));
    CHECK(p.Q == doctest::Approx(0.0));

    p = heteroclinic(Heteroclinic::lplus, 40.0);
    CHECK(p.q == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(p.Q == doctest::Approx(s2).epsilon(1e-10));

    p = heteroclinic(Heteroclinic::l0, 0.0);
    CHECK(p.q == 0.0);
    CHECK(p.Q == 0.0);

    // Both orbits live on the zero energy level and solve the field.
    for (double tau : {-3.0, -0.7, 0.2, 1.9}) {
        for (auto orbit : {Heteroclinic::l0, Heteroclinic::lplus}) {
            BlowUpPoint z = heteroclinic(orbit, tau);
            CHECK(std::abs(z.energy()) < 1e-14);
            const double h = 1e-6;
            BlowUpPoint zp = heteroclinic(orbit, tau + h), zm = heteroclinic(orbit, tau - h);
            auto v = blowup_rhs(z);
            CHECK((zp.q - zm.q) / (2 * h) == doctest::Approx(v(0)).epsilon(1e-7));
            CHECK((zp.Q - zm.Q) / (2 * h) == doctest::Approx(v(1)).epsilon(1e-7));
        }
    }
}

TEST_CASE("hat_B values") {
    CentralConfig cfg = build_config(Family::euler, 0.1);
    const double s2 = std::sqrt(2.0);

    Mat B = hat_B({0.0, -s2}, cfg);
    Mat expect(4, 4);
    expect << 1, 0, -s2 / 4, 0, 0, 1, 0, -s2 / 4, -s2 / 4, 0, 0.1, 0, 0, -s2 / 4, 0, -3.2;
    CHECK((B - expect).norm() < 1e-14);

    B = hat_B({0.0, 0.0}, cfg);
    CHECK(B.topRightCorner(2, 2).norm() == 0.0);
    CHECK((B.bottomRightCorner(2, 2) + cfg.R).norm() == 0.0);

    for (double q : {0.3, 1.2})
        for (double Q : {-0.8, 0.5}) {
            Mat Bq = hat_B({q, Q}, cfg);
            CHECK((Bq - Bq.transpose()).norm() < 1e-14);
        }
}

TEST_CASE("hat_B along l0 interleaves the scalar blocks exactly") {
    CentralConfig cfg = build_config(Family::euler, 0.1);
    for (double tau : {-1.5, 0.0, 0.7, 2.2}) {
        const BlowUpPoint p = heteroclinic(Heteroclinic::l0, tau);
        auto scalar_block = [&](double r) {
            Mat b(2, 2);
            b << 1.0, p.Q / 4.0, p.Q / 4.0, -r;
            return b;
        };
        Mat split = symplectic_sum(scalar_block(cfg.R(0, 0)), scalar_block(cfg.R(1, 1)));
        CHECK((hat_B(p, cfg) - split).norm() == 0.0);
    }
}

TEST_CASE("scalar second-order reduction of the l0 system") {
    // Q^2/16 - Q'/4 + r == 1/4 - tanh^2(sqrt2 tau/2)/8 + r along l0.
    for (double tau : {-2.0, -0.5, 0.0, 0.8, 2.5}) {
        const double h = 1e-6;
        const double Q = heteroclinic(Heteroclinic::l0, tau).Q;
        const double dQ =
            (heteroclinic(Heteroclinic::l0, tau + h).Q - heteroclinic(Heteroclinic::l0, tau - h).Q) /
            (2 * h);
        const double th = std::tanh(std::sqrt(2.0) * tau / 2.0);
        CHECK(Q * Q / 16 - dQ / 4 == doctest::Approx(0.25 - th * th / 8).epsilon(1e-8));
    }
}

TEST_CASE("equilibrium data") {
    SUBCASE("scalar r = 0.5 at P-") {
        CentralConfig cfg = custom_config(Mat::Constant(1, 1, 0.5));
        EquilibriumData eq = equilibrium_data(cfg, -1);
        CHECK(eq.eta(0) == doctest::Approx(std::sqrt(0.625)));
        Mat expect(2, 1);
        expect << std::sqrt(2.0) / 4 + std::sqrt(0.625), 1.0;
        CHECK(subspace_gap(eq.V_u, expect) < 1e-12);

        // P_diag conjugates D to diag(eta, -eta).
        Mat Dd = eq.P_diag.inverse() * eq.D * eq.P_diag;
        CHECK(Dd(0, 0) == doctest::Approx(eq.eta(0)).epsilon(1e-10));
        CHECK(Dd(1, 1) == doctest::Approx(-eq.eta(0)).epsilon(1e-10));
        CHECK(std::abs(Dd(0, 1)) + std::abs(Dd(1, 0)) < 1e-10);
    }
    SUBCASE("eta at lambda = 0") {
        CHECK(std::sqrt(0.125) == doctest::Approx(0.3535533906).epsilon(1e-9));
        CentralConfig cfg = custom_config(Mat::Zero(1, 1));
        EquilibriumData eq = equilibrium_data(cfg, -1);
        CHECK(eq.eta(0) == doctest::Approx(std::sqrt(0.125)));
    }
    SUBCASE("frames are Lagrangian and invariant") {
        CentralConfig cfg = build_config(Family::euler, 0.1);
        for (int sign : {-1, +1}) {
            EquilibriumData eq = equilibrium_data(cfg, sign);
            CHECK_NOTHROW(LagrangianFrame::checked(eq.V_u));
            CHECK_NOTHROW(LagrangianFrame::checked(eq.V_s));
            // D-invariance of the unstable/stable spans.
            Mat Pu = eq.V_u * eq.V_u.transpose();
            CHECK(((Mat::Identity(4, 4) - Pu) * (eq.D * eq.V_u)).norm() < 1e-9);
            Mat Ps = eq.V_s * eq.V_s.transpose();
            CHECK(((Mat::Identity(4, 4) - Ps) * (eq.D * eq.V_s)).norm() < 1e-9);
        }
    }
    SUBCASE("non-hyperbolic rejection") {
        CentralConfig cfg = build_config(Family::euler, 1.0);
        CHECK_THROWS_AS(equilibrium_data(cfg, -1), DomainError);
    }
}

TEST_CASE("orbit initialization") {
    double ehat = 0;
    BlowUpPoint p = orbit_initialization(0.0, &ehat);
    CHECK(p.q == doctest::Approx(1.0));
    CHECK(ehat == doctest::Approx(0.5));
    CHECK(p.energy() == doctest::Approx(-0.5));

    p = orbit_initialization(0.8, &ehat);
    CHECK(p.q == doctest::Approx(std::sqrt(1.8)));
    CHECK(p.energy() == doctest::Approx(-0.18));
    CHECK(std::abs(p.energy() + ehat) < 1e-15);

    CHECK_THROWS_AS(orbit_initialization(1.0, nullptr), DomainError);
}

TEST_CASE("brake symmetry of the blowup coefficient along lplus") {
    CentralConfig cfg = build_config(Family::euler, 0.07);
    Mat Nh = Mat::Zero(4, 4);
    Nh.topLeftCorner(2, 2) = *cfg.N;
    Nh.bottomRightCorner(2, 2) = -*cfg.N;
    for (double tau : {-2.3, -0.4, 0.6, 1.8}) {
        Mat lhs = Nh * hat_B(heteroclinic(Heteroclinic::lplus, -tau), cfg);
        Mat rhs = hat_B(heteroclinic(Heteroclinic::lplus, tau), cfg) * Nh;
        CHECK((lhs - rhs).norm() < 1e-12);
    }
}

TEST_CASE("brake frames") {
    CentralConfig cfg = build_config(Family::euler, 0.05);
    Mat Vp = brake_frame(cfg, +1);
    Mat Vm = brake_frame(cfg, -1);
    CHECK_NOTHROW(LagrangianFrame::checked(Vp));
    CHECK_NOTHROW(LagrangianFrame::checked(Vm));
    // For N = diag(1,-1): V+ = span{E1, E4}, V- = span{E2, E3}.
    Mat e14(4, 2), e23(4, 2);
    e14.setZero();
    e23.setZero();
    e14(0, 0) = 1;
    e14(3, 1) = 1;
    e23(1, 0) = 1;
    e23(2, 1) = 1;
    CHECK(subspace_gap(Vp, e14) < 1e-12);
    CHECK(subspace_gap(Vm, e23) < 1e-12);

    CHECK(brake_restricted_R(cfg, +1)(0, 0) == doctest::Approx(-0.05));
    CHECK(brake_restricted_R(cfg, -1)(0, 0) == doctest::Approx(3.1));
}
