#include "sepscope/sobol.hpp"

#include <bit>
#include <stdexcept>

namespace sepscope {

namespace {

// Primitive polynomials and initial direction numbers m_k for coordinates 2.. of the
// new-joe-kuo-6.21201 table. Polynomials are in full form (leading and trailing 1 included).
struct JoeKuoRow {
    std::uint32_t polynomial;
    std::array<std::uint32_t, 7> m;
};
constexpr std::array<JoeKuoRow, ScrambledSobol::kMaxDimension - 1> kJoeKuo{{
    {3, {1}},
    {7, {1, 3}},
    {11, {1, 3, 1}},
    {13, {1, 1, 1}},
    {19, {1, 1, 3, 3}},
    {25, {1, 3, 5, 13}},
    {37, {1, 1, 5, 5, 17}},
    {41, {1, 1, 5, 5, 5}},
    {47, {1, 1, 7, 11, 19}},
    {55, {1, 1, 5, 1, 1}},
    {59, {1, 1, 1, 3, 11}},
    {61, {1, 3, 5, 5, 31}},
    {67, {1, 3, 3, 9, 7, 49}},
    {91, {1, 1, 1, 15, 21, 21}},
    {97, {1, 3, 1, 13, 27, 49}},
    {103, {1, 1, 1, 15, 7, 5}},
    {109, {1, 3, 1, 15, 13, 25}},
    {115, {1, 1, 5, 5, 19, 61}},
    {131, {1, 3, 7, 11, 23, 15, 103}},
}};

using Directions = std::array<std::uint32_t, ScrambledSobol::kBits>;

Directions unscrambled_directions(unsigned d) {
    constexpr unsigned L = ScrambledSobol::kBits;
    Directions v{};
    if (d == 0) {
        for (unsigned j = 0; j < L; ++j) v[j] = 1u << (L - 1 - j);
        return v;
    }
    const auto& row = kJoeKuo[d - 1];
    const unsigned s = static_cast<unsigned>(std::bit_width(row.polynomial)) - 1;
    const std::uint32_t a = (row.polynomial >> 1) & ((1u << (s - 1)) - 1);
    for (unsigned j = 0; j < s && j < L; ++j) v[j] = row.m[j] << (L - 1 - j);
    for (unsigned j = s; j < L; ++j) {
        std::uint32_t x = v[j - s] ^ (v[j - s] >> s);
        for (unsigned k = 1; k < s; ++k)
            if ((a >> (s - 1 - k)) & 1u) x ^= v[j - k];
        v[j] = x;
    }
    return v;
}

// Applies a lower-triangular binary matrix (row k acts on digit k, most significant first).
std::uint32_t apply_rows(const Directions& rows, std::uint32_t y) {
    std::uint32_t x = 0;
    for (unsigned k = 0; k < ScrambledSobol::kBits; ++k) {
        const std::uint32_t bit = static_cast<std::uint32_t>(std::popcount(rows[k] & y) & 1);
        x |= bit << (ScrambledSobol::kBits - 1 - k);
    }
    return x;
}

}  // namespace

ScrambledSobol::ScrambledSobol(unsigned dimension, std::uint64_t seed, bool scramble)
    : dim_(dimension), directions_(dimension), shift_(dimension, 0u) {
    if (dimension == 0 || dimension > kMaxDimension)
        throw std::invalid_argument("Sobol dimension out of range");
    for (unsigned d = 0; d < dim_; ++d) {
        auto v = unscrambled_directions(d);
        if (scramble) {
            Directions rows{};
            for (unsigned k = 0; k < kBits; ++k) {
                const std::uint64_t r = CounterRng::bits(seed, d, 1000 + k);
                const std::uint32_t diag = 1u << (kBits - 1 - k);
                const std::uint32_t below = k == 0 ? 0u : static_cast<std::uint32_t>(r) & ~((1u << (kBits - k)) - 1);
                rows[k] = below | diag;
            }
            for (auto& x : v) x = apply_rows(rows, x);
            shift_[d] = static_cast<std::uint32_t>(CounterRng::bits(seed, d, 999) >> 32);
        }
        directions_[d] = v;
    }
}

std::uint32_t ScrambledSobol::digits(std::uint64_t index, unsigned d) const {
    if (index >> kBits) throw std::out_of_range("Sobol index exceeds 2^32");
    std::uint32_t gray = static_cast<std::uint32_t>(index ^ (index >> 1));
    std::uint32_t x = shift_[d];
    const auto& v = directions_[d];
    while (gray) {
        const int j = std::countr_zero(gray);
        x ^= v[j];
        gray &= gray - 1;
    }
    return x;
}

void ScrambledSobol::point(std::uint64_t index, std::span<double> out) const {
    constexpr double scale = 1.0 / 4294967296.0;
    for (unsigned d = 0; d < dim_; ++d) out[d] = (static_cast<double>(digits(index, d)) + 0.5) * scale;
}

std::uint64_t CounterRng::mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
    const std::uint64_t key = mix(seed) ^ mix(index * 0xD1B54A32D192ED03ull + 0x632BE59BD9B4E019ull);
    return mix(key + mix(stream ^ 0xA0761D6478BD642Full));
}

double CounterRng::uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
    return (static_cast<double>(bits(seed, index, stream) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace sepscope
