#include "sepscope/fits.hpp"

#include <cmath>
#include <numbers>

#include "sepscope/special.hpp"

namespace sepscope {

namespace {

double rms(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return r.empty() ? 0.0 : std::sqrt(s / static_cast<double>(r.size()));
}

void require_radial(const ProfileEstimate& p, const char* what) {
    if (p.axis != Axis::Radial) throw DomainError(std::string(what) + ": radial profile required");
    if (p.grid.empty() || p.grid.front() != 0.0) throw DomainError(std::string(what) + ": grid must start at r = 0");
    if (p.value.size() != p.grid.size()) throw DomainError(std::string(what) + ": value/grid size mismatch");
}

}  // namespace

std::string_view to_string(FitModel m) {
    switch (m) {
        case FitModel::BetaTail: return "beta_tail";
        case FitModel::Cosine: return "cosine";
        case FitModel::PowerCompare: return "power_compare";
    }
    return "unknown";
}

double beta_tail_model(double r) { return 1.0 - reg_inc_beta(r, 3.0, 0.25); }

FitResult fit_beta_tail(const ProfileEstimate& profile) {
    require_radial(profile, "fit_beta_tail");
    if (profile.field != Field::Rebit) throw DomainError("fit_beta_tail: rebit profile required");
    const double f0 = profile.value.front();
    if (!(f0 > 0.0)) throw EstimationError("fit_beta_tail: profile vanishes at r = 0");
    std::vector<double> res(profile.grid.size());
    for (size_t j = 0; j < res.size(); ++j) res[j] = profile.value[j] / f0 - beta_tail_model(profile.grid[j]);
    return {FitModel::BetaTail, {f0}, rms(res)};
}

FitResult fit_cosine(const ProfileEstimate& profile) {
    const auto& x = profile.grid;
    const auto& y = profile.value;
    if (x.size() < 2 || y.size() != x.size()) throw DomainError("fit_cosine: degenerate grid");
    // Normal equations for the two-column design [1, cos(4 pi x)].
    const double n = static_cast<double>(x.size());
    double sc = 0.0, scc = 0.0, sy = 0.0, scy = 0.0;
    for (size_t j = 0; j < x.size(); ++j) {
        const double c = std::cos(4.0 * std::numbers::pi * x[j]);
        sc += c;
        scc += c * c;
        sy += y[j];
        scy += c * y[j];
    }
    const double det = n * scc - sc * sc;
    if (std::abs(det) < 1e-12 * n * n) throw DomainError("fit_cosine: degenerate grid");
    const double c0 = (scc * sy - sc * scy) / det;
    const double c1 = (n * scy - sc * sy) / det;
    std::vector<double> res(x.size());
    for (size_t j = 0; j < x.size(); ++j) res[j] = y[j] - c0 - c1 * std::cos(4.0 * std::numbers::pi * x[j]);
    return {FitModel::Cosine, {c0, c1}, rms(res)};
}

double power_compare(const ProfileEstimate& rebit, const ProfileEstimate& qubit, double alpha) {
    require_radial(rebit, "power_compare");
    require_radial(qubit, "power_compare");
    if (rebit.grid != qubit.grid) throw DomainError("power_compare: profiles are on different grids");
    const double r0 = rebit.value.front(), q0 = qubit.value.front();
    if (!(r0 > 0.0) || !(q0 > 0.0)) throw EstimationError("power_compare: profile vanishes at r = 0");
    std::vector<double> diff(rebit.grid.size());
    for (size_t j = 0; j < diff.size(); ++j)
        diff[j] = qubit.value[j] / q0 - std::pow(std::max(0.0, rebit.value[j] / r0), alpha);
    return rms(diff);
}

}  // namespace sepscope
