#include "fdilab/rng.hpp"

#include <cmath>
#include <numbers>

namespace fdilab {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t SplitMix64::mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::at(std::uint64_t counter) const {
    return mix(seed_ + (counter + 1) * kGolden);
}

double SplitMix64::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::normal() {
    // u1 in (0, 1] keeps the logarithm finite.
    const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t SplitMix64::derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed) ^ (stream * kGolden + 0x632BE59BD9B4E019ULL));
}

} // namespace fdilab
