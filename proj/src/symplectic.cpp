#include "ere/symplectic.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace ere {

Mat standard_J(int k) {
    if (k < 1) throw DomainError("standard_J: half-dimension must be positive");
    Mat J = Mat::Zero(2 * k, 2 * k);
    J.topRightCorner(k, k) = -Mat::Identity(k, k);
    J.bottomLeftCorner(k, k) = Mat::Identity(k, k);
    return J;
}

Mat doubled_J(int k) {
    Mat Jd = Mat::Zero(4 * k, 4 * k);
    Jd.topLeftCorner(2 * k, 2 * k) = -standard_J(k);
    Jd.bottomRightCorner(2 * k, 2 * k) = standard_J(k);
    return Jd;
}

Mat block_J(int k) {
    if (k % 2 != 0) throw DomainError("block_J: dimension must be even");
    Mat J2(2, 2);
    J2 << 0, -1, 1, 0;
    Mat J = Mat::Zero(k, k);
    for (int i = 0; i < k / 2; ++i) J.block(2 * i, 2 * i, 2, 2) = J2;
    return J;
}

Mat orthonormalize(const Mat& F) {
    Eigen::HouseholderQR<Mat> qr(F);
    Mat Q = qr.householderQ() * Mat::Identity(F.rows(), F.cols());
    Mat R = qr.matrixQR().topRows(F.cols()).triangularView<Eigen::Upper>();
    for (int j = 0; j < F.cols(); ++j)
        if (R(j, j) < 0) Q.col(j) = -Q.col(j);
    return Q;
}

SymplecticMatrix SymplecticMatrix::checked(Mat m, double tol_symp) {
    if (m.rows() != m.cols() || m.rows() % 2 != 0)
        throw DomainError("SymplecticMatrix: need an even square matrix");
    SymplecticMatrix s;
    s.k = static_cast<int>(m.rows()) / 2;
    const double res = symplectic_residual(m);
    if (res > tol_symp * std::max(1.0, m.norm()))
        throw DomainError("SymplecticMatrix: ||M^T J M - J|| = " + std::to_string(res));
    s.m = std::move(m);
    return s;
}

LagrangianFrame LagrangianFrame::checked(Mat z, const Tolerances& tol) {
    const int k = static_cast<int>(z.cols());
    return checked_wrt(std::move(z), standard_J(k), tol);
}

LagrangianFrame LagrangianFrame::checked_wrt(Mat z, const Mat& J, const Tolerances& tol) {
    if (z.rows() != 2 * z.cols())
        throw InvalidFrameError("LagrangianFrame: expected a 2k x k matrix");
    Eigen::JacobiSVD<Mat> svd(z);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(z.cols() - 1);
    if (smax <= 0 || smin < tol.rank * smax)
        throw InvalidFrameError("LagrangianFrame: rank-deficient columns");
    Mat q = orthonormalize(z);
    const double iso = (q.transpose() * J * q).norm();
    if (iso > tol.symplectic)
        throw InvalidFrameError("LagrangianFrame: isotropy residual " + std::to_string(iso));
    LagrangianFrame f;
    f.k = static_cast<int>(q.cols());
    f.z = std::move(q);
    return f;
}

Mat dirichlet_frame(int k) {
    Mat z = Mat::Zero(2 * k, k);
    z.topRows(k) = Mat::Identity(k, k);
    return z;
}

Mat neumann_frame(int k) {
    Mat z = Mat::Zero(2 * k, k);
    z.bottomRows(k) = Mat::Identity(k, k);
    return z;
}

Mat symplectic_sum(const Mat& M1, const Mat& M2) {
    if (M1.rows() % 2 != 0 || M2.rows() % 2 != 0 || M1.rows() != M1.cols() ||
        M2.rows() != M2.cols())
        throw DomainError("symplectic_sum: both inputs must be even square matrices");
    const int m1 = static_cast<int>(M1.rows()) / 2;
    const int m2 = static_cast<int>(M2.rows()) / 2;
    const int m = m1 + m2;
    Mat S = Mat::Zero(2 * m, 2 * m);
    S.block(0, 0, m1, m1) = M1.topLeftCorner(m1, m1);
    S.block(0, m, m1, m1) = M1.topRightCorner(m1, m1);
    S.block(m, 0, m1, m1) = M1.bottomLeftCorner(m1, m1);
    S.block(m, m, m1, m1) = M1.bottomRightCorner(m1, m1);
    S.block(m1, m1, m2, m2) = M2.topLeftCorner(m2, m2);
    S.block(m1, m + m1, m2, m2) = M2.topRightCorner(m2, m2);
    S.block(m + m1, m1, m2, m2) = M2.bottomLeftCorner(m2, m2);
    S.block(m + m1, m + m1, m2, m2) = M2.bottomRightCorner(m2, m2);
    return S;
}

Mat diamond_frame(const Mat& F1, const Mat& F2) {
    const int k1 = static_cast<int>(F1.rows()) / 2;
    const int k2 = static_cast<int>(F2.rows()) / 2;
    const int k = k1 + k2;
    Mat F = Mat::Zero(2 * k, F1.cols() + F2.cols());
    F.block(0, 0, k1, F1.cols()) = F1.topRows(k1);
    F.block(k, 0, k1, F1.cols()) = F1.bottomRows(k1);
    F.block(k1, F1.cols(), k2, F2.cols()) = F2.topRows(k2);
    F.block(k + k1, F1.cols(), k2, F2.cols()) = F2.bottomRows(k2);
    return F;
}

double subspace_gap(const Mat& F1, const Mat& F2, const Tolerances& tol) {
    if (F1.rows() != F2.rows() || F1.cols() != F2.cols())
        throw DomainError("subspace_gap: dimension mismatch");
    auto check_rank = [&](const Mat& F) {
        Eigen::JacobiSVD<Mat> svd(F);
        if (svd.singularValues()(F.cols() - 1) < tol.rank * svd.singularValues()(0))
            throw InvalidFrameError("subspace_gap: rank-deficient frame");
    };
    check_rank(F1);
    check_rank(F2);
    const Mat Q1 = orthonormalize(F1);
    const Mat Q2 = orthonormalize(F2);
    const Mat D = Q1 * Q1.transpose() - Q2 * Q2.transpose();
    Eigen::JacobiSVD<Mat> svd(D);
    return svd.singularValues()(0);
}

int intersection_dim(const Mat& F1, const Mat& F2, double tol) {
    const Mat Q1 = orthonormalize(F1);
    const Mat Q2 = orthonormalize(F2);
    Mat stacked(F1.rows(), Q1.cols() + Q2.cols());
    stacked << Q1, Q2;
    Eigen::JacobiSVD<Mat> svd(stacked);
    const auto& s = svd.singularValues();
    int dim = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) < tol * s(0)) ++dim;
    return dim;
}

Mat intersection_basis(const Mat& F1, const Mat& F2, double tol) {
    const Mat Q1 = orthonormalize(F1);
    const Mat Q2 = orthonormalize(F2);
    Mat stacked(F1.rows(), Q1.cols() + Q2.cols());
    stacked << Q1, -Q2;
    Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int dim = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) < tol * s(0)) ++dim;
    if (dim == 0) return Mat::Zero(F1.rows(), 0);
    // Null vectors (alpha; beta) satisfy Q1 alpha = Q2 beta; either side spans
    // the intersection.
    Mat basis(F1.rows(), dim);
    const int n = static_cast<int>(s.size());
    for (int i = 0; i < dim; ++i) {
        Vec v = svd.matrixV().col(n - 1 - i);
        basis.col(i) = Q1 * v.head(Q1.cols());
    }
    return orthonormalize(basis);
}

Mat graph_embed(const Mat& M, int sign, const Tolerances& tol) {
    const double res = symplectic_residual(M);
    if (res > tol.symplectic * std::max(1.0, M.squaredNorm()))
        throw DomainError("graph_embed: input is not symplectic, residual " + std::to_string(res));
    const int n = static_cast<int>(M.rows());
    Mat F(2 * n, n);
    F.topRows(n) = Mat::Identity(n, n);
    F.bottomRows(n) = static_cast<double>(sign) * M;
    return orthonormalize(F);
}

Mat symplectize(const Mat& M) {
    const int k = static_cast<int>(M.rows()) / 2;
    const Mat J = standard_J(k);
    const Mat G = -J * M.transpose() * J * M;
    const Mat E = G - Mat::Identity(2 * k, 2 * k);
    // G^{-1/2} by binomial series; residuals here are tiny by construction.
    Mat root_inv = Mat::Identity(2 * k, 2 * k) - 0.5 * E + 0.375 * E * E;
    return M * root_inv;
}

Inertia form_inertia(const Mat& G, double tol, double abs_floor) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (G + G.transpose()));
    const Vec ev = es.eigenvalues();
    const double scale = std::max(ev.cwiseAbs().maxCoeff(), abs_floor);
    Inertia in;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) > tol * scale)
            ++in.m_plus;
        else if (ev(i) < -tol * scale)
            ++in.m_minus;
        else
            ++in.kernel;
    }
    return in;
}

} // namespace ere
