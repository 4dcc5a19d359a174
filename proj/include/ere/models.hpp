#pragma once

#include "ere/symplectic.hpp"
#include "ere/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace ere {

enum class Family { euler, lagrange, ring3, custom };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// Central configuration data reduced to its regularized Hessian R, plus an
// optional reflection N implementing the brake symmetry (N^2 = I,
// N J = -J N, RN = NR).
struct CentralConfig {
    Family family = Family::custom;
    double param = 0;
    int k = 0;
    Mat R;
    std::optional<Mat> N;

    Vec eigenvalues;   // of R, ascending
    Mat eigenvectors;  // orthonormal columns matching `eigenvalues`
    double lambda1 = 0;
    int morse_phi = 0;        // negative eigenvalues of R
    bool nondegenerate = false;   // no zero eigenvalue of R
    bool hyperbolic = false;      // lambda1 > -1/8
};

// euler:    R = diag(-delta, 2 delta + 3), delta >= 0, N = diag(1, -1)
// lagrange: R = diag((3 + s)/2, (3 - s)/2), s = sqrt(9 - beta), 0 < beta <= 9,
//           N = diag(1, -1)
// ring3:    regular triangle plus central mass m_c >= 0; R = I_4 + D with the
//           4x4 coupling matrix D = D_minus <> D_plus
CentralConfig build_config(Family family, double param);
CentralConfig custom_config(Mat R, std::optional<Mat> N = std::nullopt);

// Closed-form eigenvalues of the ring3 coupling blocks.
double ring3_lambda_minus(double m_c);
double ring3_lambda_plus(double m_c);

// Coefficient matrix of the reduced system in true anomaly t:
//   [[ I, -J_b ], [ J_b, I - R / (1 + e cos t) ]],  J_b = block_J(k).
Mat essential_B(double t, const CentralConfig& cfg, double e);

// The same system in second-order normal form: P y'' ... with P = I, first
// order coupling Q = block_J(k), potential R / (1 + e cos t).
struct SturmCoeffs {
    Mat P;
    Mat Q;
    std::function<Mat(double)> potential;
};
SturmCoeffs sturm_coeffs(const CentralConfig& cfg, double e);

// First-order coefficient assembled from second-order data:
//   [[P^{-1}, -P^{-1} Q], [-Q^T P^{-1}, Q^T P^{-1} Q - R(t)]].
Mat assemble_sturm_B(const SturmCoeffs& sc, double t);

// Point of the planar blow-up system q' = -qQ/2, Q' = Q^2/2 + q^2 - 1 with
// first integral E = q^2 (Q^2/2 + q^2/2 - 1).
struct BlowUpPoint {
    double q = 0;
    double Q = 0;
    double energy() const { return q * q * (Q * Q / 2 + q * q / 2 - 1); }
};

Eigen::Vector2d blowup_rhs(const BlowUpPoint& p);

enum class Heteroclinic { l0, lplus };

// Explicit parametrizations of the two zero-energy orbits:
//   l0:    q = 0,                        Q = -sqrt(2) tanh(sqrt(2) tau / 2)
//   lplus: q = sqrt(2)/cosh(sqrt2 tau/2), Q = sqrt(2) tanh(sqrt(2) tau / 2)
BlowUpPoint heteroclinic(Heteroclinic orbit, double tau);

// Coefficient matrix of the blown-up linear system at a phase-plane point:
//   [[ I, (Q/4) I - q J_b ], [ (Q/4) I + q J_b, q^2 I - R ]].
// The q J_b term requires even k; it vanishes identically for q = 0, so
// scalar models remain usable on l0 and at the equilibria.
Mat hat_B(const BlowUpPoint& p, const CentralConfig& cfg);

// Hyperbolic structure of J hat_B at P_sign = (0, sign * sqrt(2)).
struct EquilibriumData {
    int sign = -1;  // -1 for P_-, +1 for P_+
    Mat D;          // J * hat_B(P_sign)
    Vec eta;        // sqrt(1/8 + lambda_j), ascending in lambda_j
    Mat V_u, V_s;   // orthonormal unstable / stable Lagrangian frames
    Mat P_diag;     // P with P^{-1} D P = diag(eta, -eta)
    bool hyperbolic = true;
};
EquilibriumData equilibrium_data(const CentralConfig& cfg, int sign);

// Initial phase-plane point of the eccentricity-e orbit at t = 0 and its
// energy parameter e_hat = (1 - e^2)/2; the orbit lives on E = -e_hat.
BlowUpPoint orbit_initialization(double e, double* e_hat_out = nullptr);

// ker(N_hat -+ I) for N_hat = diag(N, -N); an orthonormal Lagrangian frame of
// dimension k. Requires the config to carry N.
Mat brake_frame(const CentralConfig& cfg, int sign);

// R restricted to the +1 / -1 eigenspace of N (they are R-invariant).
Mat brake_restricted_R(const CentralConfig& cfg, int sign);

} // namespace ere
