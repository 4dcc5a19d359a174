#include "ere/models.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace ere {

namespace {

void finalize_derived(CentralConfig& cfg) {
    const int k = static_cast<int>(cfg.R.rows());
    cfg.k = k;
    if ((cfg.R - cfg.R.transpose()).norm() > 1e-12 * std::max(1.0, cfg.R.norm()))
        throw DomainError("CentralConfig: R must be symmetric");
    if (cfg.N) {
        const Mat& N = *cfg.N;
        if (N.rows() != k || N.cols() != k)
            throw DomainError("CentralConfig: N dimension mismatch");
        const Mat I = Mat::Identity(k, k);
        if ((N * N - I).norm() > 1e-10)
            throw DomainError("CentralConfig: N^2 != I");
        if (k % 2 == 0) {
            const Mat Jb = block_J(k);
            if ((N * Jb + Jb * N).norm() > 1e-10)
                throw DomainError("CentralConfig: N does not anticommute with block J");
        }
        if ((cfg.R * N - N * cfg.R).norm() > 1e-10)
            throw DomainError("CentralConfig: N does not commute with R");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(cfg.R);
    cfg.eigenvalues = es.eigenvalues();
    cfg.eigenvectors = es.eigenvectors();
    cfg.lambda1 = cfg.eigenvalues(0);
    cfg.morse_phi = 0;
    cfg.nondegenerate = true;
    const double scale = std::max(1.0, cfg.eigenvalues.cwiseAbs().maxCoeff());
    for (int i = 0; i < k; ++i) {
        if (cfg.eigenvalues(i) < -1e-12 * scale) ++cfg.morse_phi;
        if (std::abs(cfg.eigenvalues(i)) < 1e-12 * scale) cfg.nondegenerate = false;
    }
    cfg.hyperbolic = cfg.lambda1 > -0.125;
}

} // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::euler: return "euler";
        case Family::lagrange: return "lagrange";
        case Family::ring3: return "ring3";
        case Family::custom: return "custom";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "euler") return Family::euler;
    if (name == "lagrange") return Family::lagrange;
    if (name == "ring3") return Family::ring3;
    if (name == "custom") return Family::custom;
    throw DomainError("unknown family: " + name);
}

double ring3_lambda_minus(double m_c) {
    const double s3 = std::sqrt(3.0);
    const double disc = 27.0 * (m_c * m_c + 3.0 * m_c) + std::pow((3.0 * s3 - 1.0) / 2.0, 2);
    return 0.5 / (1.0 + s3 * m_c) * (s3 * m_c + (3.0 * s3 + 1.0) / 2.0 - std::sqrt(disc));
}

double ring3_lambda_plus(double m_c) {
    const double s3 = std::sqrt(3.0);
    const double disc = 27.0 * (m_c * m_c + 3.0 * m_c) + std::pow((3.0 * s3 - 1.0) / 2.0, 2);
    return 0.5 / (1.0 + s3 * m_c) * (s3 * m_c + (3.0 * s3 + 1.0) / 2.0 + std::sqrt(disc));
}

CentralConfig build_config(Family family, double param) {
    CentralConfig cfg;
    cfg.family = family;
    cfg.param = param;
    switch (family) {
        case Family::euler: {
            if (param < 0) throw DomainError("euler: delta must be >= 0");
            cfg.R = Mat::Zero(2, 2);
            cfg.R(0, 0) = -param;
            cfg.R(1, 1) = 2 * param + 3;
            Mat N = Mat::Zero(2, 2);
            N(0, 0) = 1;
            N(1, 1) = -1;
            cfg.N = N;
            break;
        }
        case Family::lagrange: {
            if (!(param > 0) || param > 9)
                throw DomainError("lagrange: beta must lie in (0, 9]");
            const double s = std::sqrt(9.0 - param);
            cfg.R = Mat::Zero(2, 2);
            cfg.R(0, 0) = (3 + s) / 2;
            cfg.R(1, 1) = (3 - s) / 2;
            Mat N = Mat::Zero(2, 2);
            N(0, 0) = 1;
            N(1, 1) = -1;
            cfg.N = N;
            break;
        }
        case Family::ring3: {
            if (param < 0) throw DomainError("ring3: central mass must be >= 0");
            const double s3 = std::sqrt(3.0);
            const double a = 3.0 * std::sqrt(3.0 * param * (3.0 + param)) / (2.0 * (1.0 + s3 * param));
            const double b = s3 * (3.0 + param) / (2.0 * (1.0 + s3 * param));
            Mat Dm(2, 2), Dp(2, 2);
            Dm << 0.5, -a, -a, b;
            Dp << 0.5, a, a, b;
            cfg.R = Mat::Identity(4, 4) + symplectic_sum(Dm, Dp);
            break;
        }
        case Family::custom:
            throw DomainError("custom configs are built from an explicit R; use custom_config");
    }
    finalize_derived(cfg);
    return cfg;
}

CentralConfig custom_config(Mat R, std::optional<Mat> N) {
    CentralConfig cfg;
    cfg.family = Family::custom;
    cfg.R = std::move(R);
    cfg.N = std::move(N);
    finalize_derived(cfg);
    return cfg;
}

Mat essential_B(double t, const CentralConfig& cfg, double e) {
    if (!(e >= 0) || e >= 1)
        throw DomainError("essential_B: eccentricity must lie in [0, 1); use the blow-up system otherwise");
    const int k = cfg.k;
    if (k % 2 != 0) throw DomainError("essential_B: k must be even");
    const Mat Jb = block_J(k);
    const Mat I = Mat::Identity(k, k);
    Mat B = Mat::Zero(2 * k, 2 * k);
    B.topLeftCorner(k, k) = I;
    B.topRightCorner(k, k) = -Jb;
    B.bottomLeftCorner(k, k) = Jb;
    B.bottomRightCorner(k, k) = I - cfg.R / (1.0 + e * std::cos(t));
    return B;
}

SturmCoeffs sturm_coeffs(const CentralConfig& cfg, double e) {
    if (!(e >= 0) || e >= 1) throw DomainError("sturm_coeffs: eccentricity must lie in [0, 1)");
    if (cfg.k % 2 != 0) throw DomainError("sturm_coeffs: k must be even");
    SturmCoeffs sc;
    sc.P = Mat::Identity(cfg.k, cfg.k);
    sc.Q = block_J(cfg.k);
    Mat R = cfg.R;
    sc.potential = [R, e](double t) -> Mat { return R / (1.0 + e * std::cos(t)); };
    return sc;
}

Mat assemble_sturm_B(const SturmCoeffs& sc, double t) {
    const int k = static_cast<int>(sc.P.rows());
    const Mat Pinv = sc.P.inverse();
    Mat B = Mat::Zero(2 * k, 2 * k);
    B.topLeftCorner(k, k) = Pinv;
    B.topRightCorner(k, k) = -Pinv * sc.Q;
    B.bottomLeftCorner(k, k) = -sc.Q.transpose() * Pinv;
    B.bottomRightCorner(k, k) = sc.Q.transpose() * Pinv * sc.Q - sc.potential(t);
    return B;
}

Eigen::Vector2d blowup_rhs(const BlowUpPoint& p) {
    return {-0.5 * p.q * p.Q, 0.5 * p.Q * p.Q + p.q * p.q - 1.0};
}

BlowUpPoint heteroclinic(Heteroclinic orbit, double tau) {
    const double s2 = std::sqrt(2.0);
    const double th = std::tanh(s2 * tau / 2.0);
    if (orbit == Heteroclinic::l0) return {0.0, -s2 * th};
    return {s2 / std::cosh(s2 * tau / 2.0), s2 * th};
}

Mat hat_B(const BlowUpPoint& p, const CentralConfig& cfg) {
    const int k = cfg.k;
    const Mat I = Mat::Identity(k, k);
    Mat off_term = Mat::Zero(k, k);
    if (p.q != 0.0) {
        if (k % 2 != 0)
            throw DomainError("hat_B: q != 0 requires even k (block J coupling)");
        off_term = p.q * block_J(k);
    }
    Mat B = Mat::Zero(2 * k, 2 * k);
    B.topLeftCorner(k, k) = I;
    B.topRightCorner(k, k) = (p.Q / 4.0) * I - off_term;
    B.bottomLeftCorner(k, k) = (p.Q / 4.0) * I + off_term;
    B.bottomRightCorner(k, k) = (p.q * p.q) * I - cfg.R;
    return B;
}

EquilibriumData equilibrium_data(const CentralConfig& cfg, int sign) {
    if (sign != 1 && sign != -1) throw DomainError("equilibrium_data: sign must be +-1");
    if (!cfg.hyperbolic)
        throw DomainError("equilibrium_data: equilibria are hyperbolic iff lambda_1(R) > -1/8; "
                          "got lambda_1 = " + std::to_string(cfg.lambda1));
    const int k = cfg.k;
    const double s2_4 = std::sqrt(2.0) / 4.0 * sign;

    EquilibriumData eq;
    eq.sign = sign;
    const BlowUpPoint P{0.0, sign * std::sqrt(2.0)};
    eq.D = standard_J(k) * hat_B(P, cfg);
    eq.eta = Vec(k);
    Mat Vu(2 * k, k), Vs(2 * k, k);
    // The linearization splits along the eigenbasis of R: for each eigenpair
    // (lambda_j, v_j) the plane span{(v_j, 0), (0, v_j)} is invariant, with
    // exponents +-eta_j and eigenvectors (+-eta_j - Q/4) v_j (+) v_j.
    for (int j = 0; j < k; ++j) {
        const double eta = std::sqrt(0.125 + cfg.eigenvalues(j));
        eq.eta(j) = eta;
        const Vec v = cfg.eigenvectors.col(j);
        Vu.col(j).head(k) = (eta - s2_4) * v;
        Vu.col(j).tail(k) = v;
        Vs.col(j).head(k) = (-eta - s2_4) * v;
        Vs.col(j).tail(k) = v;
    }
    eq.V_u = orthonormalize(Vu);
    eq.V_s = orthonormalize(Vs);

    // P = [[V,0],[0,V]] P1 P2 diagonalizes D to diag(eta, -eta).
    Mat P1 = Mat::Identity(2 * k, 2 * k);
    P1.topRightCorner(k, k) = -s2_4 * Mat::Identity(k, k);
    Mat P2 = Mat::Zero(2 * k, 2 * k);
    const Mat sq = (Vec::Constant(k, 0.125) + cfg.eigenvalues).cwiseSqrt().asDiagonal();
    P2.topLeftCorner(k, k) = sq;
    P2.topRightCorner(k, k) = sq;
    P2.bottomLeftCorner(k, k) = Mat::Identity(k, k);
    P2.bottomRightCorner(k, k) = -Mat::Identity(k, k);
    Mat Vblk = Mat::Zero(2 * k, 2 * k);
    Vblk.topLeftCorner(k, k) = cfg.eigenvectors;
    Vblk.bottomRightCorner(k, k) = cfg.eigenvectors;
    eq.P_diag = Vblk * P1 * P2;
    eq.hyperbolic = true;
    return eq;
}

BlowUpPoint orbit_initialization(double e, double* e_hat_out) {
    if (!(e >= 0) || e >= 1) throw DomainError("orbit_initialization: eccentricity must lie in [0, 1)");
    if (e_hat_out) *e_hat_out = (1.0 - e * e) / 2.0;
    return {std::sqrt(1.0 + e), 0.0};
}

Mat brake_frame(const CentralConfig& cfg, int sign) {
    if (!cfg.N) throw DomainError("brake_frame: configuration lacks a brake symmetry N");
    const int k = cfg.k;
    Eigen::SelfAdjointEigenSolver<Mat> es(*cfg.N);
    // N has eigenvalues +-1 in equal number (it anticommutes with block J).
    std::vector<int> plus, minus;
    for (int i = 0; i < k; ++i) (es.eigenvalues()(i) > 0 ? plus : minus).push_back(i);
    if (static_cast<int>(plus.size()) != k / 2)
        throw DomainError("brake_frame: N eigenvalue split is not balanced");
    // ker(N_hat - I) = {(w+, 0)} (+) {(0, w-)};  ker(N_hat + I) swaps the roles.
    const auto& up = (sign > 0) ? plus : minus;
    const auto& lo = (sign > 0) ? minus : plus;
    Mat F = Mat::Zero(2 * k, k);
    int c = 0;
    for (int i : up) F.col(c++).head(k) = es.eigenvectors().col(i);
    for (int i : lo) F.col(c++).tail(k) = es.eigenvectors().col(i);
    return F;
}

Mat brake_restricted_R(const CentralConfig& cfg, int sign) {
    if (!cfg.N) throw DomainError("brake_restricted_R: configuration lacks N");
    Eigen::SelfAdjointEigenSolver<Mat> es(*cfg.N);
    std::vector<int> sel;
    for (int i = 0; i < cfg.k; ++i)
        if ((sign > 0) == (es.eigenvalues()(i) > 0)) sel.push_back(i);
    Mat W(cfg.k, static_cast<int>(sel.size()));
    for (size_t i = 0; i < sel.size(); ++i) W.col(static_cast<int>(i)) = es.eigenvectors().col(sel[i]);
    return W.transpose() * cfg.R * W;
}

} // namespace ere
