#include "sepscope/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "sepscope/parallel.hpp"

namespace sepscope {

namespace {
constexpr double kPi = std::numbers::pi;

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

constexpr std::size_t kTableCells = 4096;

std::vector<double> inverse_cdf_table(double a, double b, bool half) {
    std::vector<double> t(kTableCells + 1);
    for (std::size_t i = 0; i <= kTableCells; ++i) {
        const double p = static_cast<double>(i) / kTableCells;
        double x = p;
        if (i > 0 && i < kTableCells) {
            std::uintmax_t iters = 200;
            const auto [lo, hi] = boost::math::tools::toms748_solve(
                [&](double y) { return boost::math::ibeta(a, b, y) - p; }, 0.0, 1.0, -p, 1.0 - p,
                boost::math::tools::eps_tolerance<double>(52), iters);
            x = 0.5 * (lo + hi);
        }
        t[i] = half ? std::asin(std::sqrt(x)) : std::acos(1.0 - 2.0 * x);
    }
    return t;
}

std::vector<std::vector<double>> build_jacobian_tables(Field field) {
    // Factor cos^p sin^q on [0, pi/2] is Beta((q+1)/2, (p+1)/2) in sin^2; sin^q on [0, pi] is
    // Beta((q+1)/2, (q+1)/2) in (1 - cos)/2.
    const int n = dimension(field);
    const auto [a, b, c] = diagonal_exponents(field);
    const std::array<std::pair<int, int>, 3> head{{{a, b + c + n - 2}, {b, c + n - 3}, {c, n - 4}}};
    std::vector<std::vector<double>> tables;
    for (const auto& [p, q] : head) tables.push_back(inverse_cdf_table((q + 1) / 2.0, (p + 1) / 2.0, true));
    for (int k = 4; k <= n - 2; ++k) tables.push_back(inverse_cdf_table((n - k) / 2.0, (n - k) / 2.0, false));
    return tables;
}

const std::vector<std::vector<double>>& jacobian_tables(Field field) {
    static const std::vector<std::vector<double>> rebit = build_jacobian_tables(Field::Rebit);
    static const std::vector<std::vector<double>> qubit = build_jacobian_tables(Field::Qubit);
    return field == Field::Rebit ? rebit : qubit;
}
}  // namespace

std::string_view to_string(SamplerKind k) { return k == SamplerKind::MonteCarlo ? "mc" : "qmc"; }

SamplerKind parse_sampler_kind(std::string_view name) {
    if (name == "mc") return SamplerKind::MonteCarlo;
    if (name == "qmc") return SamplerKind::QuasiMonteCarlo;
    throw std::invalid_argument("unknown sampler '" + std::string(name) + "'");
}

std::string_view to_string(AngularDensity d) { return d == AngularDensity::Uniform ? "uniform" : "jacobian"; }

AngularDensity parse_angular_density(std::string_view name) {
    if (name == "uniform") return AngularDensity::Uniform;
    if (name == "jacobian") return AngularDensity::Jacobian;
    throw std::invalid_argument("unknown angular density '" + std::string(name) + "'");
}

void SamplerConfig::validate() const {
    if (n_samples == 0) throw std::invalid_argument("n_samples must be at least 1");
    if (workers == 0) throw std::invalid_argument("workers must be at least 1");
}

double angular_weight(std::span<const double> theta, Field field) {
    const int n = dimension(field);
    const auto [a, b, c] = diagonal_exponents(field);
    const double s1 = std::sin(theta[0]);
    const double s2 = std::sin(theta[1]);
    const double g11 = std::cos(theta[0]);
    const double g22 = s1 * std::cos(theta[1]);
    const double g33 = s1 * s2 * std::cos(theta[2]);
    double w = 8.0 * ipow(g11, a) * ipow(g22, b) * ipow(g33, c);
    for (int k = 1; k <= n - 2; ++k) w *= ipow(std::sin(theta[k - 1]), n - 1 - k);
    return w;
}

double angular_box_volume(Field field) {
    const int n = dimension(field);
    return std::pow(kPi / 2, 3) * std::pow(kPi, n - 5) * 2 * kPi;
}

double hs_volume(Field field) {
    return field == Field::Rebit ? std::pow(kPi, 4) / 967680.0 : std::pow(kPi, 6) / 108972864000.0;
}

double radial_inverse_cdf(double u, int m) {
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("radial_inverse_cdf: u outside [0,1]");
    return std::pow(u, 1.0 / (m + 1));
}

AngularSampler::AngularSampler(const SamplerConfig& cfg)
    : cfg_(cfg), unit_dim_(static_cast<unsigned>(dimension(cfg.field))) {
    cfg_.validate();
    if (cfg_.kind == SamplerKind::QuasiMonteCarlo) {
        if (cfg_.n_samples > (std::uint64_t{1} << ScrambledSobol::kBits))
            throw std::invalid_argument("QMC stream limited to 2^32 points");
        sobol_ = std::make_unique<ScrambledSobol>(unit_dim_, cfg_.seed);
    }
    if (cfg_.angles == AngularDensity::Jacobian) tables_ = &jacobian_tables(cfg_.field);
}

AngularSample AngularSampler::sample(std::uint64_t index) const {
    AngularSample s;
    sample_into(index, s);
    return s;
}

void AngularSampler::sample_into(std::uint64_t index, AngularSample& out) const {
    if (index >= cfg_.n_samples) throw std::out_of_range("sample index beyond n_samples");
    const int n = dimension(cfg_.field);
    double u[ScrambledSobol::kMaxDimension];
    if (sobol_) {
        sobol_->point(index, {u, unit_dim_});
    } else {
        for (unsigned d = 0; d < unit_dim_; ++d) u[d] = CounterRng::uniform(cfg_.seed, index, d);
    }
    out.theta.resize(n - 2);
    out.phi = 2 * kPi * u[n - 2];
    out.radial_u = u[n - 1];
    if (!tables_) {
        for (int k = 0; k < n - 2; ++k) out.theta[k] = (k < 3 ? kPi / 2 : kPi) * u[k];
        out.weight = angular_weight(out.theta, cfg_.field);
        return;
    }
    double ratio = 1.0;
    for (int k = 0; k < n - 2; ++k) {
        const std::vector<double>& t = (*tables_)[k];
        const double x = u[k] * kTableCells;
        const auto i = std::min(static_cast<std::size_t>(x), kTableCells - 1);
        const double slope = t[i + 1] - t[i];
        out.theta[k] = t[i] + slope * (x - static_cast<double>(i));
        ratio *= slope * kTableCells / (k < 3 ? kPi / 2 : kPi);
    }
    out.weight = angular_weight(out.theta, cfg_.field) * ratio;
}

std::string AngularSampler::generator_name() const {
    std::string g = sobol_ ? "sobol-joe-kuo-6.21201+linear-matrix-scramble+digital-shift" : "splitmix64-counter";
    return g + (!tables_ ? "; angles uniform on the box" : "; angles from the jacobian factors");
}

VolumeCheck volume_check(const SamplerConfig& cfg) {
    const AngularSampler sampler(cfg);
    struct Sums {
        double w = 0.0, w2 = 0.0;
        void merge(const Sums& o) {
            w += o.w;
            w2 += o.w2;
        }
    };
    const Sums total = chunked_reduce<Sums>(0, cfg.n_samples, cfg.workers, [&](std::uint64_t begin, std::uint64_t end) {
        Sums s;
        AngularSample a;
        for (std::uint64_t i = begin; i < end; ++i) {
            sampler.sample_into(i, a);
            s.w += a.weight;
            s.w2 += a.weight * a.weight;
        }
        return s;
    });
    const double n = static_cast<double>(cfg.n_samples);
    const double mean = total.w / n;
    const double var = n > 1 ? std::max(0.0, (total.w2 - n * mean * mean) / (n - 1)) : 0.0;
    const double scale = angular_box_volume(cfg.field) / (radial_exponent(cfg.field) + 1);
    return {cfg.field, cfg.n_samples, scale * mean, scale * std::sqrt(var / n), hs_volume(cfg.field)};
}

}  // namespace sepscope
