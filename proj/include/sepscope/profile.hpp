#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sepscope/sampling.hpp"

namespace sepscope {

enum class Axis { Radial, Azimuthal };

std::string_view to_string(Axis a);

/// Separability profile F on an equally spaced grid over [0,1].
///
/// Radial: F(r) = (m+1) * (weighted separable fraction at r), so that the integral of
/// F(r) r^m over [0,1] is the separability probability and F == m+1 when everything is
/// separable. Azimuthal: F(phi_hat) is the weighted separable fraction itself.
struct ProfileEstimate {
    Axis axis = Axis::Radial;
    Field field = Field::Rebit;
    std::vector<double> grid;
    std::vector<double> value;
    std::vector<double> stderr_;
    std::uint64_t n_samples = 0;
    double total_weight = 0.0;

    /// m for radial profiles, 0 for azimuthal ones.
    int jacobian_exponent() const { return axis == Axis::Radial ? radial_exponent(field) : 0; }
};

struct ProbabilityEstimate {
    double p = 0.0;
    double stderr_ = 0.0;
    Field field = Field::Rebit;
    Axis axis = Axis::Radial;
    std::uint64_t n_samples = 0;
};

/// Test hook replacing the PPT indicator: (sample, abscissa) -> separable?
/// For the radial axis the sample's radial_u is unused; for the azimuthal axis the sample's
/// phi is unused (the abscissa supplies phi_hat).
using IndicatorOverride = std::function<bool(const AngularSample&, double abscissa)>;

/// Running sums of one estimation run; merging is associative.
struct ProfileSums {
    std::uint64_t count = 0;
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    std::vector<double> sum_ws;   // per grid point: sum of w * indicator
    std::vector<double> sum_w2s;  // per grid point: sum of w^2 * indicator

    void merge(const ProfileSums& o);
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Checkpoint {
    Axis axis = Axis::Radial;
    SamplerConfig config;  // workers is not persisted
    std::uint64_t grid_points = 0;
    std::uint64_t next_index = 0;
    ProfileSums sums;
};

/// Stable hash of everything that determines the accumulated sums (not the worker count).
std::uint64_t config_hash(Axis axis, const SamplerConfig& cfg, std::uint64_t grid_points);

void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path);
/// Throws CheckpointError on bad magic, version mismatch, truncation or CRC failure.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Equally spaced grid over [0,1] with both endpoints.
std::vector<double> uniform_grid(std::size_t points);

/// Resumable estimation of one profile.
class ProfileRun {
public:
    ProfileRun(Axis axis, const SamplerConfig& cfg, std::size_t grid_points, IndicatorOverride indicator = {});

    /// Continues from a checkpoint. The checkpoint must have been produced with the same axis,
    /// field, sampler, seed, sample count and grid; otherwise CheckpointError.
    static ProfileRun resume(const Checkpoint& cp, Axis axis, const SamplerConfig& cfg, std::size_t grid_points,
                             IndicatorOverride indicator = {});

    /// Processes samples up to `stop` (rounded up to a chunk boundary, capped at n_samples).
    void advance_to(std::uint64_t stop);
    void run() { advance_to(cfg_.n_samples); }

    bool finished() const { return next_ >= cfg_.n_samples; }
    std::uint64_t next_index() const { return next_; }
    const ProfileSums& sums() const { return sums_; }

    Checkpoint checkpoint() const;
    /// Throws EstimationError if no weight has been accumulated.
    ProfileEstimate estimate() const;

private:
    ProfileSums evaluate(std::uint64_t begin, std::uint64_t end) const;

    Axis axis_;
    SamplerConfig cfg_;
    AngularSampler sampler_;
    std::vector<double> grid_;
    IndicatorOverride indicator_;
    std::uint64_t next_ = 0;
    ProfileSums sums_;
};

ProfileEstimate radial_profile(const SamplerConfig& cfg, std::size_t grid_points, IndicatorOverride indicator = {});
ProfileEstimate azimuthal_profile(const SamplerConfig& cfg, std::size_t grid_points,
                                  IndicatorOverride indicator = {});

/// Product-integration weights W with sum_j W_j f(x_j) ~ integral_0^1 f(x) x^m dx.
/// f is interpolated piecewise-quadratically over panel pairs (piecewise-linearly on a trailing
/// odd panel) and the products with x^m are integrated exactly, so m = 0 is composite Simpson.
std::vector<double> quadrature_weights(std::span<const double> grid, int m);

ProbabilityEstimate integrate_profile(const ProfileEstimate& profile);

}  // namespace sepscope
