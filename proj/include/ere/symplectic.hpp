#pragma once

#include "ere/types.hpp"

namespace ere {

// Standard symplectic form on R^{2k}: J = [[0, -I_k], [I_k, 0]].
Mat standard_J(int k);

// Block form on the doubled space (R^{2k} (+) R^{2k}, -w (+) w): diag(-J, J).
Mat doubled_J(int k);

// J_2 (+) ... (+) J_2 with k/2 blocks; k must be even.
Mat block_J(int k);

// omega(u, v) = u^T J v.
template <class D1, class D2>
double omega(const Eigen::MatrixBase<D1>& u, const Eigen::MatrixBase<D2>& v) {
    const int k = static_cast<int>(u.size()) / 2;
    return u.dot(standard_J(k) * v.derived());
}

// ||M^T J M - J|| in the Frobenius norm, J deduced from the dimension.
template <class D>
double symplectic_residual(const Eigen::MatrixBase<D>& M) {
    const int k = static_cast<int>(M.cols()) / 2;
    const Mat J = standard_J(k);
    return (M.derived().transpose() * J * M.derived() - J).norm();
}

template <class D>
double symplectic_residual_wrt(const Eigen::MatrixBase<D>& M, const Mat& J) {
    return (M.derived().transpose() * J * M.derived() - J).norm();
}

// Thin orthonormalization with a positive-determinant right gauge factor:
// returns Q with F = Q * R, diag(R) > 0. Column sign sequences of stacked
// determinants are preserved under this gauge.
Mat orthonormalize(const Mat& F);

// Symplectic matrix with its invariant checked at construction.
struct SymplecticMatrix {
    Mat m;
    int k = 0;

    static SymplecticMatrix checked(Mat m, double tol_symp = Tolerances{}.symplectic);
};

// Lagrangian frame: full-rank isotropic 2k x k column span, stored
// orthonormalized. The isotropy form defaults to standard_J(k) and can be
// overridden for doubled spaces.
struct LagrangianFrame {
    Mat z;
    int k = 0;

    static LagrangianFrame checked(Mat z, const Tolerances& tol = {});
    static LagrangianFrame checked_wrt(Mat z, const Mat& J, const Tolerances& tol = {});
};

// Dirichlet frame R^k (+) 0 and Neumann frame 0 (+) R^k.
Mat dirichlet_frame(int k);
Mat neumann_frame(int k);

// Symplectic sum M1 <> M2 of equally block-partitioned square matrices
// (2m1 and 2m2), interleaving the A/B/C/D blocks.
Mat symplectic_sum(const Mat& M1, const Mat& M2);

// Frame-level interleave matching symplectic_sum: maps 2k1 x c1 and
// 2k2 x c2 frames into a 2(k1+k2) x (c1+c2) frame.
Mat diamond_frame(const Mat& F1, const Mat& F2);

// Gap metric rho(V, W) = ||P_V - P_W|| (spectral norm of the projector
// difference). Frames must have equal dimensions and full rank.
double subspace_gap(const Mat& F1, const Mat& F2, const Tolerances& tol = {});

// dim(span F1 intersect span F2): number of singular values of the stacked
// orthonormal pair [F1 | F2] below tol * sigma_max.
int intersection_dim(const Mat& F1, const Mat& F2, double tol = Tolerances{}.crossing);

// Orthonormal basis of the intersection (may have zero columns).
Mat intersection_basis(const Mat& F1, const Mat& F2, double tol = Tolerances{}.crossing);

// Orthonormal frame of {(x, sign * M x)} in the doubled space; graph_embed(I, +1)
// yields the diagonal, graph_embed(I, -1) the graph of -I. Throws on
// non-symplectic input.
Mat graph_embed(const Mat& M, int sign = +1, const Tolerances& tol = {});

// Nearest-symplectic projection M * (-J M^T J M)^{-1/2}, valid for small
// residuals (binomial inverse square root).
Mat symplectize(const Mat& M);

// Inertia (m_plus, m_minus) of a symmetric matrix with relative eigenvalue
// cutoff `tol * max|eig|` (absolute floor `abs_floor`).
struct Inertia {
    int m_plus = 0;
    int m_minus = 0;
    int kernel = 0;
};
Inertia form_inertia(const Mat& G, double tol = Tolerances{}.form, double abs_floor = 1e-12);

} // namespace ere
