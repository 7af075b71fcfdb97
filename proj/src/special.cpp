#include "sepscope/special.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "sepscope/types.hpp"

namespace sepscope {

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw EstimationError("incomplete beta continued fraction did not converge");
}

struct Fraction {
    double num, den;
};
// Exact Taylor coefficients about nu = 1 (tools/scripts/jac_real_series.py).
constexpr std::array<Fraction, 10> kJacRealSeries{{
    {1, 396900},
    {-1, 396900},
    {1, 554400},
    {-19, 17463600},
    {3929, 7264857600},
    {-131, 807206400},
    {-4973, 58118860800},
    {269, 1117670400},
    {-1168243, 3512962252800},
    {1726481, 4516665753600},
}};

}  // namespace

double reg_inc_beta(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_inc_beta: x outside [0,1]");
    if (!(a > 0.0 && b > 0.0)) throw DomainError("reg_inc_beta: parameters must be positive");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

namespace detail {

double jac_real_nu_direct(double nu_in) {
    using Real = boost::multiprecision::cpp_bin_float_50;
    const Real nu = nu_in;
    const Real poly = 12 * (nu * (nu + 2) * (nu * nu + 14 * nu + 8) + 1);
    const Real rest = 5 * (5 * pow(nu, 4) + 32 * pow(nu, 3) - 32 * nu - 5);
    const Real num = pow(nu, Real(1.5)) * (poly * log(sqrt(nu)) - rest);
    const Real den = 3780 * pow(nu - 1, 9);
    return static_cast<double>(num / den);
}

double jac_real_nu_series(double nu) {
    const double x = nu - 1.0;
    double s = 0.0;
    for (auto it = kJacRealSeries.rbegin(); it != kJacRealSeries.rend(); ++it) s = s * x + it->num / it->den;
    return s;
}

}  // namespace detail

double jac_real_nu(double nu) {
    if (!(nu > 0.0)) throw DomainError("jac_real_nu: nu must be positive");
    if (nu > 1.0) throw DomainError("jac_real_nu: nu must not exceed 1");
    if (std::abs(nu - 1.0) < detail::kJacRealSeriesRadius) return detail::jac_real_nu_series(nu);
    return detail::jac_real_nu_direct(nu);
}

double bloore_separability_function(double nu) { return 0.5 * (3.0 - nu) * std::sqrt(nu); }

BlooreReport bloore_integral_checks(double tolerance) {
    using boost::math::quadrature::gauss_kronrod;
    auto integrand = [](double nu) { return jac_real_nu(nu) * reg_inc_beta(nu, 0.5, 2.0); };

    // Split so that both endpoint behaviours (nu^2 log nu at 0, the series branch at 1) sit
    // at the ends of their own subintervals.
    double err_lo = 0.0, err_hi = 0.0;
    const double lo = gauss_kronrod<double, 61>::integrate(integrand, 0.0, 0.5, 12, 1e-12, &err_lo);
    const double hi = gauss_kronrod<double, 61>::integrate(integrand, 0.5, 1.0, 12, 1e-12, &err_hi);
    const double half_integral = lo + hi;
    const double err = err_lo + err_hi;

    BlooreReport r;
    r.tolerance = tolerance;
    r.integral = 2.0 * half_integral;
    r.quadrature_error = 2.0 * err;
    r.integral_expected = 1.0 / 151200.0;
    r.integral_rel_error = std::abs(r.integral / r.integral_expected - 1.0);
    r.probability = 2419200.0 / 17.0 * half_integral;
    r.probability_expected = 8.0 / 17.0;
    r.probability_rel_error = std::abs(r.probability / r.probability_expected - 1.0);
    if (r.quadrature_error > tolerance * std::abs(r.integral))
        throw EstimationError("Bloore quadrature did not converge; achieved relative error " +
                              std::to_string(r.quadrature_error / std::abs(r.integral)));
    r.pass = r.integral_rel_error <= tolerance && r.probability_rel_error <= tolerance;
    return r;
}

}  // namespace sepscope
