#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace sepscope {

/// Joe-Kuo Sobol' points with a seed-derived linear matrix scramble and digital shift.
///
/// Points are addressed directly by index (Gray-code construction), so any subset of the
/// stream can be produced in any order by any thread.
class ScrambledSobol {
public:
    static constexpr unsigned kMaxDimension = 20;
    static constexpr unsigned kBits = 32;

    /// `scramble = false` gives the plain Joe-Kuo sequence (used to check the tables).
    ScrambledSobol(unsigned dimension, std::uint64_t seed, bool scramble = true);

    unsigned dimension() const { return dim_; }

    /// Raw 32-bit digits of point `index` in coordinate `d`.
    std::uint32_t digits(std::uint64_t index, unsigned d) const;

    /// Writes point `index` into `out` (size >= dimension), each coordinate in (0, 1).
    void point(std::uint64_t index, std::span<double> out) const;

private:
    unsigned dim_;
    std::vector<std::array<std::uint32_t, kBits>> directions_;
    std::vector<std::uint32_t> shift_;
};

/// Stateless counter-based uniform generator: the value at (seed, index, stream) is a pure
/// function of its arguments (SplitMix64 finalizer applied to a mixed key).
struct CounterRng {
    static std::uint64_t mix(std::uint64_t x);
    static std::uint64_t bits(std::uint64_t seed, std::uint64_t index, std::uint64_t stream);
    /// Uniform double in (0, 1).
    static double uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream);
};

}  // namespace sepscope
