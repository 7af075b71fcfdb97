#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sepscope/sobol.hpp"
#include "sepscope/types.hpp"

namespace sepscope {

enum class SamplerKind { MonteCarlo, QuasiMonteCarlo };

std::string_view to_string(SamplerKind k);
SamplerKind parse_sampler_kind(std::string_view name);

/// Density of the polar angles. Uniform: the box, each sample weighted by angular_weight.
/// Jacobian: each angle drawn through a tabulated inverse CDF of its own factor of
/// angular_weight, with the importance ratio folded into the weight. Weights then stay close to
/// constant while keeping the same expectation as under Uniform.
enum class AngularDensity { Uniform, Jacobian };

std::string_view to_string(AngularDensity d);
AngularDensity parse_angular_density(std::string_view name);

struct SamplerConfig {
    Field field = Field::Rebit;
    SamplerKind kind = SamplerKind::MonteCarlo;
    std::uint64_t seed = 0;
    std::uint64_t n_samples = 1;
    unsigned workers = 1;
    AngularDensity angles = AngularDensity::Uniform;

    /// Throws std::invalid_argument on n_samples == 0 or workers == 0.
    void validate() const;
};

/// One angular direction on the restricted sphere plus an independent uniform for the radius.
struct AngularSample {
    std::vector<double> theta;  // n-2 polar angles
    double phi = 0.0;
    double weight = 0.0;    // angular_weight(theta) times the box-relative importance ratio
    double radial_u = 0.0;  // uniform in (0,1), consumed by the azimuthal estimator
};

/// w(theta) = 8 Gh11^a Gh22^b Gh33^c prod_k sin^(n-1-k)(theta_k), Gh the unit direction.
double angular_weight(std::span<const double> theta, Field field);

/// Volume of the angular box [0,pi/2]^3 x [0,pi]^(n-5) x [0,2pi).
double angular_box_volume(Field field);

/// Hilbert-Schmidt volume of the state space: pi^4/967680 (rebit), pi^6/108972864000 (qubit).
double hs_volume(Field field);

/// Inverse CDF of the density (m+1) r^m on [0,1].
double radial_inverse_cdf(double u, int m);

/// Index-addressed sample stream. Sample i depends only on (config, i).
class AngularSampler {
public:
    explicit AngularSampler(const SamplerConfig& cfg);

    const SamplerConfig& config() const { return cfg_; }
    /// Unit-cube dimension consumed per sample: n-1 angles plus the radial uniform.
    unsigned unit_dimension() const { return unit_dim_; }

    AngularSample sample(std::uint64_t index) const;
    /// Same as sample() but reuses the storage of `out`.
    void sample_into(std::uint64_t index, AngularSample& out) const;

    /// Short description of the generator, recorded in result metadata.
    std::string generator_name() const;

private:
    SamplerConfig cfg_;
    unsigned unit_dim_;
    std::unique_ptr<ScrambledSobol> sobol_;
    const std::vector<std::vector<double>>* tables_ = nullptr;  // per-angle theta at u = i / cells
};

struct VolumeCheck {
    Field field;
    std::uint64_t n_samples;
    double estimate;
    double stderr_;
    double expected;
};

/// (box volume) * mean(w) / (m+1), which should reproduce the Hilbert-Schmidt volume.
VolumeCheck volume_check(const SamplerConfig& cfg);

}  // namespace sepscope
