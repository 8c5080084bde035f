#pragma once

#include <cstdint>
#include <string_view>

#include "covlab/stats.hpp"

namespace covlab {

// splitmix64 finalizer: bijective 64-bit mixer, the workhorse behind both the
// generator step and seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    return h;
}

// Independent stream seed for (base_seed, purpose tag, replicate index), so
// e.g. the design and noise draws of replicate 17 never overlap regardless of
// how much either stream consumes.
inline std::uint64_t derive_stream(std::uint64_t base_seed, std::string_view tag,
                                   std::uint64_t index) {
    std::uint64_t s = mix64(base_seed + 0x9E3779B97F4A7C15ull);
    s = mix64(s ^ fnv1a64(tag));
    s = mix64(s ^ (0x9E3779B97F4A7C15ull * (index + 1)));
    return s;
}

// Deterministic 64-bit generator (splitmix64). Gaussians come from the
// inverse-CDF transform so every platform reproduces the same bit stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    // Uniform on the open interval (0,1): 53-bit mantissa offset by half an ulp,
    // so inv_normal_cdf never sees an endpoint.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    double normal() { return inv_normal_cdf(uniform01()); }

  private:
    std::uint64_t state_;
};

}  // namespace covlab
