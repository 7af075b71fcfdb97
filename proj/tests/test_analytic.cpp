#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/beta.hpp>

#include "sepscope/fits.hpp"
#include "sepscope/special.hpp"

using namespace sepscope;

namespace {

ProfileEstimate make_profile(Axis axis, Field field, std::size_t points, double (*f)(double)) {
    ProfileEstimate p;
    p.axis = axis;
    p.field = field;
    p.grid = uniform_grid(points);
    for (double x : p.grid) p.value.push_back(f(x));
    p.stderr_.assign(points, 0.0);
    return p;
}

}  // namespace

TEST_CASE("reg_inc_beta agrees with boost::math::ibeta") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ux(0.0, 1.0), ua(0.05, 30.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = ux(rng), a = ua(rng), b = ua(rng);
        worst = std::max(worst, std::abs(reg_inc_beta(x, a, b) - boost::math::ibeta(a, b, x)));
    }
    CHECK(worst < 1e-12);
    for (double x : {0.0, 0.1, 0.5, 0.9, 1.0})
        CHECK(reg_inc_beta(x, 3, 0.25) == doctest::Approx(boost::math::ibeta(3.0, 0.25, x)).epsilon(1e-12));
}

TEST_CASE("reg_inc_beta reflection identity on 10^3 random arguments") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ux(0.0, 1.0), ua(0.1, 20.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = ux(rng), a = ua(rng), b = ua(rng);
        CHECK(std::abs(reg_inc_beta(x, a, b) + reg_inc_beta(1 - x, b, a) - 1.0) < 1e-12);
    }
}

TEST_CASE("reg_inc_beta: closed form of I_x(1/2, 2) and endpoints") {
    CHECK(reg_inc_beta(1.0, 0.5, 2) == 1.0);
    CHECK(reg_inc_beta(0.0, 0.5, 2) == 0.0);
    CHECK(reg_inc_beta(0.25, 0.5, 2) == doctest::Approx(0.6875).epsilon(1e-14));
    for (int i = 0; i <= 1000; ++i) {
        const double x = i / 1000.0;
        CHECK(std::abs(reg_inc_beta(x, 0.5, 2) - 0.5 * (3 - x) * std::sqrt(x)) < 1e-12);
        CHECK(std::abs(bloore_separability_function(x) - reg_inc_beta(x, 0.5, 2)) < 1e-12);
    }
    CHECK_THROWS(reg_inc_beta(1.5, 1, 1));
    CHECK_THROWS(reg_inc_beta(0.5, 0, 1));
}

TEST_CASE("beta-tail model: endpoints, midpoint and the reflected form") {
    CHECK(beta_tail_model(0.0) == 1.0);
    CHECK(beta_tail_model(1.0) == 0.0);
    CHECK(beta_tail_model(0.5) == doctest::Approx(1 - boost::math::ibeta(3.0, 0.25, 0.5)).epsilon(1e-13));
    for (int i = 0; i <= 200; ++i) {
        const double r = i / 200.0;
        CHECK(std::abs(beta_tail_model(r) - reg_inc_beta(1 - r, 0.25, 3)) < 1e-12);
    }
}

TEST_CASE("jac_real_nu: series and direct branches agree where they meet") {
    const double edge = detail::kJacRealSeriesRadius;
    for (double nu : {1 - edge, 1 - 0.5 * edge, 1 - 2 * edge}) {
        const double direct = detail::jac_real_nu_direct(nu);
        const double series = detail::jac_real_nu_series(nu);
        CHECK(series == doctest::Approx(direct).epsilon(1e-12));
    }
    const double at_one = jac_real_nu(1.0);
    CHECK(std::isfinite(at_one));
    CHECK(at_one > 0.0);
    CHECK(jac_real_nu(1 - 1e-9) == doctest::Approx(at_one).epsilon(1e-6));
    // No jump where the branch switches.
    const double below = jac_real_nu(1 - edge - 1e-12), above = jac_real_nu(1 - edge + 1e-12);
    CHECK(above == doctest::Approx(below).epsilon(1e-10));
}

TEST_CASE("jac_real_nu is positive and finite on (0, 1]") {
    for (int i = 1; i <= 1000; ++i) {
        const double v = jac_real_nu(i / 1000.0);
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
    }
    CHECK_THROWS(jac_real_nu(1.5));
    CHECK_THROWS(jac_real_nu(-0.1));
}

TEST_CASE("Bloore identities: 1/151200 and 8/17 to 1e-9 within 5 s") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = bloore_integral_checks();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(r.pass);
    CHECK(r.integral_expected == 1.0 / 151200);
    CHECK(r.probability_expected == 8.0 / 17);
    CHECK(std::abs(r.integral / (1.0 / 151200) - 1) < 1e-9);
    CHECK(std::abs(r.probability / (8.0 / 17) - 1) < 1e-9);
    CHECK(r.integral == doctest::Approx(6.61376e-6).epsilon(1e-6));
    CHECK(r.probability == doctest::Approx(0.470588).epsilon(1e-6));
    CHECK(seconds < 5.0);
}

TEST_CASE("fit_beta_tail: exact model, scaling and errors") {
    auto p = make_profile(Axis::Radial, Field::Rebit, 101, [](double r) { return 7.0 * beta_tail_model(r); });
    const auto fit = fit_beta_tail(p);
    CHECK(fit.model == FitModel::BetaTail);
    CHECK(fit.params.at(0) == doctest::Approx(7.0));
    CHECK(fit.rms_residual < 1e-14);

    auto zero = make_profile(Axis::Radial, Field::Rebit, 11, [](double) { return 0.0; });
    CHECK_THROWS_AS(fit_beta_tail(zero), EstimationError);
    auto qubit = make_profile(Axis::Radial, Field::Qubit, 11, [](double) { return 1.0; });
    CHECK_THROWS_AS(fit_beta_tail(qubit), DomainError);
    auto az = make_profile(Axis::Azimuthal, Field::Rebit, 11, [](double) { return 1.0; });
    CHECK_THROWS_AS(fit_beta_tail(az), DomainError);
}

TEST_CASE("fit_cosine: exact recovery, constant profile, degenerate grid") {
    auto p = make_profile(Axis::Azimuthal, Field::Rebit, 101,
                          [](double x) { return 0.4 + 0.02 * std::cos(4 * std::numbers::pi * x); });
    const auto fit = fit_cosine(p);
    CHECK(std::abs(fit.params.at(0) - 0.4) < 1e-10);
    CHECK(std::abs(fit.params.at(1) - 0.02) < 1e-10);
    CHECK(fit.rms_residual < 1e-12);

    auto flat = make_profile(Axis::Azimuthal, Field::Rebit, 101, [](double) { return 0.43; });
    const auto c = fit_cosine(flat);
    CHECK(std::abs(c.params.at(1)) < 1e-12);
    CHECK(c.params.at(0) == doctest::Approx(0.43));

    // Two points 1/2 apart give identical cos(4 pi x): the normal equations are singular.
    ProfileEstimate two = flat;
    two.grid = {0.0, 0.5};
    two.value = {1.0, 1.0};
    two.stderr_ = {0.0, 0.0};
    CHECK_THROWS_AS(fit_cosine(two), DomainError);
}

TEST_CASE("power_compare: identical, synthetic power, mismatched grids") {
    auto g = [](double r) { return 1.0 - r * r * r; };
    auto rebit = make_profile(Axis::Radial, Field::Rebit, 101, g);
    CHECK(power_compare(rebit, rebit, 1.0) == doctest::Approx(0.0));
    auto qubit = make_profile(Axis::Radial, Field::Qubit, 101, [](double r) { return 3.0 * std::pow(1.0 - r * r * r, 1.5); });
    CHECK(power_compare(rebit, qubit, 1.5) < 1e-12);
    CHECK(power_compare(rebit, qubit, 2.0) > 0.01);
    auto other = make_profile(Axis::Radial, Field::Qubit, 51, g);
    CHECK_THROWS_AS(power_compare(rebit, other, 1.5), DomainError);
}

TEST_CASE("fit model names") {
    CHECK(to_string(FitModel::BetaTail) == "beta_tail");
    CHECK(to_string(FitModel::Cosine) == "cosine");
    CHECK(to_string(FitModel::PowerCompare) == "power_compare");
}
