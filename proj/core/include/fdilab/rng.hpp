#pragma once

#include <cstdint>

namespace fdilab {

/// SplitMix64 in counter form: output i of a stream with seed s is
/// mix(s + (i + 1) * 0x9E3779B97F4A7C15), where mix is the SplitMix64
/// finaliser. Sequential draws walk the counter, so streams reproduce
/// bit-for-bit on every platform.
///
/// Reference outputs for seed 0: 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4,
/// 0x06C45D188009454F.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : seed_(seed) {}

    static std::uint64_t mix(std::uint64_t z);

    /// Output at an explicit counter position; does not advance the stream.
    std::uint64_t at(std::uint64_t counter) const;

    std::uint64_t next() { return at(counter_++); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal via Box-Muller; consumes two outputs per call.
    double normal();

    std::uint64_t counter() const { return counter_; }

    /// Independent sub-stream seed for a named purpose.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

} // namespace fdilab
