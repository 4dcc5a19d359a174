#include <doctest.h>

#include "ere/collision.hpp"
#include "ere/ode.hpp"

#include <cmath>

using namespace ere;

TEST_CASE("closed-form l0 tables") {
    SUBCASE("euler(0.1): k = 2, phi = 1") {
        L0Table t = l0_analytic_indices(build_config(Family::euler, 0.1));
        CHECK(t.i_minus_vd_l0p == 0);
        CHECK(t.i_minus_vn_l0p == 0);
        CHECK(t.i_plus_vd_vd_l0m == 2);
        CHECK(t.i_plus_vd_vn_l0m == 1);
        CHECK(t.i_plus_vn_vd_l0m == 0);
        CHECK(t.i_plus_vn_vn_l0m == 1);
    }
    SUBCASE("lagrange(6): phi = 0") {
        L0Table t = l0_analytic_indices(build_config(Family::lagrange, 6.0));
        CHECK(t.i_plus_vd_vd_l0m == 2);
        CHECK(t.i_plus_vd_vn_l0m == 0);
        CHECK(t.i_plus_vn_vd_l0m == 0);
        CHECK(t.i_plus_vn_vn_l0m == 0);
    }
    SUBCASE("degenerate R is rejected") {
        CHECK_THROWS_AS(l0_analytic_indices(build_config(Family::euler, 0.0)), DomainError);
    }
    SUBCASE("non-hyperbolic R is rejected") {
        CHECK_THROWS_AS(l0_analytic_indices(build_config(Family::euler, 1.0)), DomainError);
    }
}

TEST_CASE("scalar half-clinic values on l0-") {
    // r in (-1/8, 0): Neumann-Neumann picks up the positive start crossing.
    {
        HalfClinicProblem prob;
        prob.side = ClinicSide::l0_minus;
        prob.cfg = custom_config(Mat::Constant(1, 1, -0.1));
        prob.V0 = neumann_frame(1);
        prob.V1 = neumann_frame(1);
        IndexReport rep = half_clinic_index(prob);
        CHECK(rep.index == 1);
        CHECK(rep.diagnostics.converged);
    }
    // r = 0.5: Dirichlet-Dirichlet equals one from the start term alone.
    {
        HalfClinicProblem prob;
        prob.side = ClinicSide::l0_minus;
        prob.cfg = custom_config(Mat::Constant(1, 1, 0.5));
        prob.V0 = dirichlet_frame(1);
        prob.V1 = dirichlet_frame(1);
        IndexReport rep = half_clinic_index(prob);
        CHECK(rep.index == 1);
        CHECK(rep.endpoint_contributions.first == 1);
    }
}

TEST_CASE("numerical l0 indices match the closed forms entry by entry") {
    for (auto [fam, par] :
         std::vector<std::pair<Family, double>>{{Family::euler, 0.1}, {Family::lagrange, 6.0}}) {
        CentralConfig cfg = build_config(fam, par);
        L0Table t = l0_analytic_indices(cfg);
        const Mat Vd = dirichlet_frame(2), Vn = neumann_frame(2);

        auto iplus = [&](const Mat& V1, const Mat& V0) {
            HalfClinicProblem prob;
            prob.side = ClinicSide::l0_minus;
            prob.cfg = cfg;
            prob.V0 = V0;
            prob.V1 = V1;
            IndexReport rep = half_clinic_index(prob);
            CHECK(rep.diagnostics.converged);
            return rep.index;
        };
        auto iminus = [&](const Mat& V1) {
            HalfClinicProblem prob;
            prob.side = ClinicSide::l0_plus;
            prob.cfg = cfg;
            prob.V1 = V1;
            return half_clinic_index(prob).index;
        };
        CHECK(iplus(Vd, Vd) == t.i_plus_vd_vd_l0m);
        CHECK(iplus(Vd, Vn) == t.i_plus_vd_vn_l0m);
        CHECK(iplus(Vn, Vd) == t.i_plus_vn_vd_l0m);
        CHECK(iplus(Vn, Vn) == t.i_plus_vn_vn_l0m);
        CHECK(iminus(Vd) == t.i_minus_vd_l0p);
        CHECK(iminus(Vn) == t.i_minus_vn_l0p);
    }
}

TEST_CASE("brake split on l+- and the heteroclinic index") {
    SUBCASE("euler battery") {
        for (double d : {0.05, 0.1}) {
            CentralConfig cfg = build_config(Family::euler, d);
            BrakeSplit bs = brake_split(cfg);
            CHECK(bs.i_minus_plus_lpm == 1);
            CHECK(bs.i_minus_minus_lpm == 1);
            CHECK(bs.diagnostics.sensitivity_ok);

            // The split halves sum to the full-line Dirichlet index.
            IndexReport full = heteroclinic_index_lplus(cfg, dirichlet_frame(2));
            CHECK(full.diagnostics.converged);
            CHECK(bs.i_minus_plus_lpm + bs.i_minus_minus_lpm == full.index);

            // Neumann-vs-Dirichlet offset equals the Morse index of R.
            IndexReport fn = heteroclinic_index_lplus(cfg, neumann_frame(2));
            CHECK(fn.index - full.index == cfg.morse_phi);
        }
    }
    SUBCASE("lagrange battery") {
        for (double b : {4.0, 6.0, 8.0}) {
            CentralConfig cfg = build_config(Family::lagrange, b);
            BrakeSplit bs = brake_split(cfg);
            CHECK(bs.i_minus_plus_lpm == 0);
            CHECK(bs.i_minus_minus_lpm == 0);
            CHECK(heteroclinic_index_lplus(cfg, dirichlet_frame(2)).index == 0);
        }
    }
    SUBCASE("l0- sum rules from the invariant splitting") {
        CentralConfig cfg = build_config(Family::euler, 0.1);
        BrakeSplit bs = brake_split(cfg);
        CHECK(bs.i_plus_vplus_vd_l0m + bs.i_plus_vminus_vd_l0m == cfg.k);
        CHECK(bs.i_plus_vplus_vn_l0m + bs.i_plus_vminus_vn_l0m == 2 * cfg.morse_phi);
        CHECK(bs.i_plus_vplus_vplus_l0m + bs.i_plus_vminus_vminus_l0m == cfg.k + cfg.morse_phi);
        CHECK(bs.i_plus_vminus_vplus_l0m + bs.i_plus_vplus_vminus_l0m == cfg.morse_phi);
    }
}

TEST_CASE("full-line additivity under nondegeneracy") {
    CentralConfig cfg = build_config(Family::euler, 0.1);
    for (bool dirichlet : {true, false}) {
        const Mat V = dirichlet ? dirichlet_frame(2) : neumann_frame(2);
        IndexReport full = heteroclinic_index_lplus(cfg, V);

        HalfClinicProblem pm;
        pm.side = ClinicSide::lplus_minus;
        pm.cfg = cfg;
        pm.V1 = V;
        IndexReport iminus = half_clinic_index(pm);

        // V_u(0): the unstable frame transported to the waist of l+.
        auto B = [cfg](double tau) { return hat_B(heteroclinic(Heteroclinic::lplus, tau), cfg); };
        const double T = auto_horizon(cfg, {});
        FramePath fp = integrate_frame(standard_J(2), B, equilibrium_data(cfg, -1).V_u, -T, 0.0);
        HalfClinicProblem pp;
        pp.side = ClinicSide::lplus_plus;
        pp.cfg = cfg;
        pp.V1 = V;
        pp.V0 = fp.eval(0.0);
        IndexReport iplus = half_clinic_index(pp);

        CHECK(full.index == iminus.index + iplus.index);
    }
}

TEST_CASE("wedge-square induced matrix") {
    Mat A = Mat::Zero(4, 4);
    A.diagonal() << 1.0, 2.0, 3.0, 4.0;
    Mat W = wedge2_matrix(A);
    Vec expect(6);
    expect << 3, 4, 5, 5, 6, 7;  // pairwise sums, lexicographic pairs
    CHECK((W.diagonal() - expect).norm() == 0.0);
    CHECK((W - Mat(W.diagonal().asDiagonal())).norm() == 0.0);

    // Derivation property: d/dt (f1 ^ f2) = (G f1) ^ f2 + f1 ^ (G f2).
    Mat F = Mat::Random(4, 2);
    Mat G = Mat::Random(4, 4);
    Mat Fdot1(4, 2), Fdot2(4, 2);
    Fdot1 << G * F.col(0), F.col(1);
    Fdot2 << F.col(0), G * F.col(1);
    Vec rhs = wedge2_of_plane(Fdot1) + wedge2_of_plane(Fdot2);
    CHECK((wedge2_matrix(G) * wedge2_of_plane(F) - rhs).norm() < 1e-12);
}

TEST_CASE("exterior-algebra zero counting on l+-") {
    CentralConfig cfg = build_config(Family::euler, 0.1);
    SUBCASE("one zero on the long horizon, settled tail") {
        for (int sgn : {+1, -1}) {
            HalfClinicProblem prob;
            prob.side = ClinicSide::lplus_minus;
            prob.cfg = cfg;
            prob.V1 = brake_frame(cfg, sgn);
            ExteriorResult r = exterior_index_4d(prob, 1000.0);
            CHECK(r.report.index == 1);
            CHECK(r.trace.tail == ZeroTrace::Tail::settled);
            CHECK(r.trace.converged);
        }
    }
    SUBCASE("agrees with the frame method") {
        for (int sgn : {+1, -1}) {
            HalfClinicProblem prob;
            prob.side = ClinicSide::lplus_minus;
            prob.cfg = cfg;
            prob.V1 = brake_frame(cfg, sgn);
            ExteriorResult ext = exterior_index_4d(prob);
            IndexReport frame = half_clinic_index(prob);
            CHECK(ext.report.index == frame.index);
        }
    }
    SUBCASE("non-hyperbolic regime grows linearly") {
        CentralConfig c1 = build_config(Family::euler, 1.0);
        HalfClinicProblem prob;
        prob.side = ClinicSide::lplus_minus;
        prob.cfg = c1;
        prob.V1 = brake_frame(c1, +1);
        std::vector<int> counts;
        for (double T : {50.0, 100.0, 200.0}) {
            ExteriorResult r = exterior_index_4d(prob, T);
            counts.push_back(r.report.index);
            CHECK(r.trace.tail == ZeroTrace::Tail::growing);
        }
        CHECK(counts[1] >= 2 * counts[0] - 2);
        CHECK(counts[2] >= 2 * counts[1] - 2);
    }
    SUBCASE("unsupported dimensions are refused") {
        HalfClinicProblem prob;
        prob.side = ClinicSide::lplus_minus;
        prob.cfg = build_config(Family::ring3, 0.05);
        prob.V1 = dirichlet_frame(4);
        CHECK_THROWS_AS(exterior_index_4d(prob), DomainError);
    }
}

TEST_CASE("exterior full-line Dirichlet count matches the frame method") {
    for (auto [fam, par] :
         std::vector<std::pair<Family, double>>{{Family::euler, 0.1}, {Family::lagrange, 6.0}}) {
        CentralConfig cfg = build_config(fam, par);
        HalfClinicProblem prob;
        prob.side = ClinicSide::lplus_full;
        prob.cfg = cfg;
        prob.V1 = dirichlet_frame(2);
        ExteriorResult ext = exterior_index_4d(prob);
        IndexReport frame = heteroclinic_index_lplus(cfg, dirichlet_frame(2));
        CHECK(ext.report.index == frame.index);
    }
}

TEST_CASE("scalar oscillation bound below the hyperbolicity threshold") {
    // c'' = (3/8 tanh^2(sqrt2 tau / 2) - 1/4 + lambda_1) c with
    // lambda_1 = -1/8 - r1 oscillates at least floor(sqrt(r1) tau0 / pi) times.
    const double r1 = 0.5, tau0 = 20.0;
    const double lam = -0.125 - r1;
    MatrixRhs rhs = [lam](double tau, const Mat& y, Mat& dy) {
        const double th = std::tanh(std::sqrt(2.0) * tau / 2.0);
        dy.resize(2, 1);
        dy(0, 0) = y(1, 0);
        dy(1, 0) = (0.375 * th * th - 0.25 + lam) * y(0, 0);
    };
    Mat y0(2, 1);
    y0 << 0.0, 1.0;
    OdeSolution sol = integrate_ode(rhs, y0, 0.0, tau0);
    int zeros = 0;
    double prev = 0.0;
    for (double t = 1e-3; t <= tau0; t += 1e-3) {
        const double v = sol.eval(t)(0, 0);
        if (prev != 0.0 && (v < 0) != (prev < 0)) ++zeros;
        prev = v;
    }
    CHECK(zeros >= static_cast<int>(std::floor(std::sqrt(r1) * tau0 / M_PI)));
}

TEST_CASE("Hoermander bridge between l0- table entries") {
    // i_+(V_d,V_d;l0-) - i_+(V_n,V_d;l0-) = s(V_d,V_n,V_d,V_u-) per scalar factor.
    for (double r : {-0.1, 0.5}) {
        CentralConfig cfg = custom_config(Mat::Constant(1, 1, r));
        auto iplus = [&](const Mat& V1) {
            HalfClinicProblem prob;
            prob.side = ClinicSide::l0_minus;
            prob.cfg = cfg;
            prob.V0 = dirichlet_frame(1);
            prob.V1 = V1;
            return half_clinic_index(prob).index;
        };
        const int lhs = iplus(dirichlet_frame(1)) - iplus(neumann_frame(1));
        const int rhs = hormander_index(dirichlet_frame(1), neumann_frame(1), dirichlet_frame(1),
                                        equilibrium_data(cfg, -1).V_u);
        CHECK(lhs == rhs);
        CHECK(rhs == 1);
    }
}

TEST_CASE("non-hyperbolic configurations are refused") {
    CentralConfig cfg = build_config(Family::euler, 1.0);  // lambda_1 < -1/8
    HalfClinicProblem prob;
    prob.side = ClinicSide::lplus_full;
    prob.cfg = cfg;
    prob.V1 = dirichlet_frame(2);
    CHECK_THROWS_AS(half_clinic_index(prob), DomainError);
}

TEST_CASE("nondegeneracy probe") {
    SUBCASE("stable families") {
        CHECK(nondegeneracy_probe(Family::euler, 0.1).status == ProbeStatus::stable);
        CHECK(nondegeneracy_probe(Family::lagrange, 6.0).status == ProbeStatus::stable);
    }
    SUBCASE("jump across the degenerate family limit") {
        ProbeResult r = nondegeneracy_probe(Family::euler, 0.0);
        CHECK(r.status == ProbeStatus::jump_detected);
        CHECK(std::abs(r.candidate_param) < 1e-3);
    }
}

TEST_CASE("truncation horizon default") {
    CentralConfig cfg = build_config(Family::euler, 0.12);
    // eta_min = sqrt(1/8 - 0.12) ~ 0.0707 -> 40 / eta exceeds 200.
    CHECK(auto_horizon(cfg, {}) == doctest::Approx(40.0 / std::sqrt(0.005)).epsilon(1e-12));
    CentralConfig lag = build_config(Family::lagrange, 6.0);
    CHECK(auto_horizon(lag, {}) == 200.0);
    TruncationPolicy tp;
    tp.t_max = 123.0;
    CHECK(auto_horizon(lag, tp) == 123.0);
}
