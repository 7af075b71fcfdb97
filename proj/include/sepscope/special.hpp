#pragma once

namespace sepscope {

/// Regularized incomplete beta I_x(a, b) by Lentz continued fraction, using
/// I_x(a,b) = 1 - I_{1-x}(b,a) on the slowly converging side. Absolute accuracy ~1e-13.
double reg_inc_beta(double x, double a, double b);

/// Two-rebit Hilbert-Schmidt volume element transformed to the Bloore ratio
/// nu = rho11 rho44 / (rho22 rho33), for 0 < nu <= 1.
///
/// The closed form carries a removable ninth-order pole at nu = 1 and suffers catastrophic
/// cancellation well away from it, so it is evaluated in 50-digit arithmetic; within
/// |nu - 1| < 1e-3 a ten-term Taylor expansion is used instead.
double jac_real_nu(double nu);

namespace detail {
double jac_real_nu_direct(double nu);
double jac_real_nu_series(double nu);
inline constexpr double kJacRealSeriesRadius = 1e-3;
}  // namespace detail

/// The surmised two-rebit Bloore separability function (3 - nu) sqrt(nu) / 2 = I_nu(1/2, 2).
double bloore_separability_function(double nu);

struct BlooreReport {
    double integral = 0.0;           // 2 * int_0^1 J(nu) I_nu(1/2,2) dnu
    double integral_expected = 0.0;  // 1/151200
    double integral_rel_error = 0.0;
    double quadrature_error = 0.0;   // Gauss-Kronrod error estimate of the integral
    double probability = 0.0;        // (2419200/17) int_0^1 J(nu) I_nu(1/2,2) dnu
    double probability_expected = 0.0;  // 8/17
    double probability_rel_error = 0.0;
    bool pass = false;  // both relative errors <= tolerance
    double tolerance = 1e-9;
};

/// Adaptive Gauss-Kronrod evaluation of the two-rebit Bloore identities. Throws
/// EstimationError if the quadrature error estimate does not reach the tolerance.
BlooreReport bloore_integral_checks(double tolerance = 1e-9);

}  // namespace sepscope
