#include "sepscope/profile.hpp"

#include <cmath>
#include <numbers>

#include "sepscope/parallel.hpp"
#include "sepscope/state.hpp"

namespace sepscope {

namespace {

constexpr double kPi = std::numbers::pi;

struct GaussRule {
    std::vector<double> x, w;  // on [-1, 1]
};

GaussRule gauss_legendre(int n) {
    GaussRule g{std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        g.x[i] = -z;
        g.x[n - 1 - i] = z;
        g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return g;
}

// Adds integral_a^b L_k(x) x^m dx for the Lagrange basis on `nodes` into weights[first + k].
void add_panel(std::span<const double> nodes, double a, double b, int m, const GaussRule& rule,
               std::vector<double>& weights, size_t first) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (size_t q = 0; q < rule.x.size(); ++q) {
        const double x = mid + half * rule.x[q];
        const double xm = std::pow(x, m) * half * rule.w[q];
        for (size_t k = 0; k < nodes.size(); ++k) {
            double l = 1.0;
            for (size_t j = 0; j < nodes.size(); ++j)
                if (j != k) l *= (x - nodes[j]) / (nodes[k] - nodes[j]);
            weights[first + k] += l * xm;
        }
    }
}

}  // namespace

std::string_view to_string(Axis a) { return a == Axis::Radial ? "radial" : "azimuthal"; }

void ProfileSums::merge(const ProfileSums& o) {
    if (sum_ws.empty()) {
        sum_ws.assign(o.sum_ws.size(), 0.0);
        sum_w2s.assign(o.sum_w2s.size(), 0.0);
    }
    count += o.count;
    sum_w += o.sum_w;
    sum_w2 += o.sum_w2;
    for (size_t j = 0; j < o.sum_ws.size(); ++j) {
        sum_ws[j] += o.sum_ws[j];
        sum_w2s[j] += o.sum_w2s[j];
    }
}

std::vector<double> uniform_grid(std::size_t points) {
    if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
    std::vector<double> g(points);
    for (size_t j = 0; j < points; ++j) g[j] = static_cast<double>(j) / static_cast<double>(points - 1);
    return g;
}

// ---------------------------------------------------------------------------

ProfileRun::ProfileRun(Axis axis, const SamplerConfig& cfg, std::size_t grid_points, IndicatorOverride indicator)
    : axis_(axis), cfg_(cfg), sampler_(cfg), grid_(uniform_grid(grid_points)), indicator_(std::move(indicator)) {
    sums_.sum_ws.assign(grid_.size(), 0.0);
    sums_.sum_w2s.assign(grid_.size(), 0.0);
}

ProfileRun ProfileRun::resume(const Checkpoint& cp, Axis axis, const SamplerConfig& cfg, std::size_t grid_points,
                              IndicatorOverride indicator) {
    if (cp.config.field != cfg.field) throw CheckpointError("checkpoint field does not match run");
    if (cp.axis != axis || config_hash(cp.axis, cp.config, cp.grid_points) != config_hash(axis, cfg, grid_points))
        throw CheckpointError("checkpoint configuration does not match run");
    if (cp.sums.sum_ws.size() != grid_points || cp.sums.sum_w2s.size() != grid_points)
        throw CheckpointError("checkpoint grid size mismatch");
    if (cp.next_index > cfg.n_samples || (cp.next_index % kChunkSize != 0 && cp.next_index != cfg.n_samples))
        throw CheckpointError("checkpoint index is not on a chunk boundary");
    ProfileRun run(axis, cfg, grid_points, std::move(indicator));
    run.next_ = cp.next_index;
    run.sums_ = cp.sums;
    return run;
}

void ProfileRun::advance_to(std::uint64_t stop) {
    stop = std::min(chunk_align_up(stop), cfg_.n_samples);
    if (stop <= next_) return;
    sums_ = chunked_reduce<ProfileSums>(
        next_, stop, cfg_.workers, [this](std::uint64_t b, std::uint64_t e) { return evaluate(b, e); }, std::move(sums_));
    next_ = stop;
}

ProfileSums ProfileRun::evaluate(std::uint64_t begin, std::uint64_t end) const {
    const size_t k = grid_.size();
    const Field field = cfg_.field;
    const int n = dimension(field);
    const int m = radial_exponent(field);

    ProfileSums s;
    s.sum_ws.assign(k, 0.0);
    s.sum_w2s.assign(k, 0.0);
    AngularSample a;
    std::vector<double> dir(n);
    std::vector<char> sep(k);
    for (std::uint64_t i = begin; i < end; ++i) {
        sampler_.sample_into(i, a);
        const double w = a.weight;
        s.count += 1;
        s.sum_w += w;
        s.sum_w2 += w * w;

        if (indicator_) {
            for (size_t j = 0; j < k; ++j) sep[j] = indicator_(a, grid_[j]);
        } else if (axis_ == Axis::Radial) {
            const RayEvaluator ray(to_cartesian(HyperspherePoint{1.0, a.theta, a.phi}), field);
            for (size_t j = 0; j < k; ++j)
                sep[j] = grid_[j] == 0.0 ? ray.separable_near_origin() : ray.separable_at(grid_[j]);
        } else {
            const double r = radial_inverse_cdf(a.radial_u, m);
            // Only the last two Cartesian coordinates depend on phi.
            double sines = 1.0;
            for (int c = 0; c < n - 2; ++c) {
                dir[c] = sines * std::cos(a.theta[c]);
                sines *= std::sin(a.theta[c]);
            }
            for (size_t j = 0; j < k; ++j) {
                const double phi = 2 * kPi * grid_[j];
                dir[n - 2] = sines * std::cos(phi);
                dir[n - 1] = sines * std::sin(phi);
                sep[j] = RayEvaluator(dir, field).separable_at(r);
            }
        }
        for (size_t j = 0; j < k; ++j) {
            if (sep[j]) {
                s.sum_ws[j] += w;
                s.sum_w2s[j] += w * w;
            }
        }
    }
    return s;
}

Checkpoint ProfileRun::checkpoint() const {
    Checkpoint cp;
    cp.axis = axis_;
    cp.config = cfg_;
    cp.grid_points = grid_.size();
    cp.next_index = next_;
    cp.sums = sums_;
    return cp;
}

ProfileEstimate ProfileRun::estimate() const {
    if (!(sums_.sum_w > 0.0)) throw EstimationError("zero total weight");
    ProfileEstimate p;
    p.axis = axis_;
    p.field = cfg_.field;
    p.grid = grid_;
    p.n_samples = sums_.count;
    p.total_weight = sums_.sum_w;
    const double scale = axis_ == Axis::Radial ? radial_exponent(cfg_.field) + 1.0 : 1.0;
    const double n = static_cast<double>(sums_.count);
    const double bessel = n > 1 ? n / (n - 1) : 0.0;
    const double sw2 = sums_.sum_w * sums_.sum_w;
    p.value.resize(grid_.size());
    p.stderr_.resize(grid_.size());
    for (size_t j = 0; j < grid_.size(); ++j) {
        const double ratio = sums_.sum_ws[j] / sums_.sum_w;
        // Delta method for a weighted ratio: sum w_i^2 (s_i - R)^2 / (sum w_i)^2.
        const double ss = sums_.sum_w2s[j] * (1.0 - 2.0 * ratio) + ratio * ratio * sums_.sum_w2;
        p.value[j] = scale * ratio;
        p.stderr_[j] = scale * std::sqrt(std::max(0.0, bessel * ss / sw2));
    }
    return p;
}

ProfileEstimate radial_profile(const SamplerConfig& cfg, std::size_t grid_points, IndicatorOverride indicator) {
    ProfileRun run(Axis::Radial, cfg, grid_points, std::move(indicator));
    run.run();
    return run.estimate();
}

ProfileEstimate azimuthal_profile(const SamplerConfig& cfg, std::size_t grid_points, IndicatorOverride indicator) {
    ProfileRun run(Axis::Azimuthal, cfg, grid_points, std::move(indicator));
    run.run();
    return run.estimate();
}

// ---------------------------------------------------------------------------

std::vector<double> quadrature_weights(std::span<const double> grid, int m) {
    const size_t k = grid.size();
    if (k < 2) throw std::invalid_argument("quadrature needs at least 2 grid points");
    if (m < 0) throw std::invalid_argument("negative jacobian exponent");
    // Exact for polynomial degree m + 2.
    const GaussRule rule = gauss_legendre(m / 2 + 3);
    std::vector<double> w(k, 0.0);
    const size_t panels = k - 1;
    size_t i = 0;
    for (; i + 2 <= panels; i += 2) add_panel(grid.subspan(i, 3), grid[i], grid[i + 2], m, rule, w, i);
    if (i < panels) add_panel(grid.subspan(i, 2), grid[i], grid[i + 1], m, rule, w, i);
    return w;
}

ProbabilityEstimate integrate_profile(const ProfileEstimate& profile) {
    const auto w = quadrature_weights(profile.grid, profile.jacobian_exponent());
    double p = 0.0, var = 0.0;
    for (size_t j = 0; j < w.size(); ++j) {
        p += w[j] * profile.value[j];
        var += w[j] * w[j] * profile.stderr_[j] * profile.stderr_[j];
    }
    if (p < -1e-6 || p > 1.0 + 1e-6) throw EstimationError("integrated probability outside [0,1]");
    return {std::clamp(p, 0.0, 1.0), std::sqrt(var), profile.field, profile.axis, profile.n_samples};
}

}  // namespace sepscope
