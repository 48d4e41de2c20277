#pragma once

#include "difact/integer.hpp"

#include <cstdint>
#include <random>

namespace difact {

/// splitmix64 mix of a base seed and a stream index; derives independent
/// child streams (per attempt, per worker) deterministically.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random source.  mt19937_64 output is fully specified by
/// the standard, and all range reduction here is done by masked rejection,
/// so a given seed produces the same draws on every platform/toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, bound), bound >= 1.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t mask = mask_for(bound - 1);
        for (;;) {
            const std::uint64_t v = engine_() & mask;
            if (v < bound) return v;
        }
    }

    /// Uniform on [lo, hi], inclusive.
    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
        return lo + below(hi - lo + 1);
    }

    /// Uniform on [0, bound) for big bounds.
    Int int_below(const Int& bound) {
        if (bound <= 1) return 0;
        if (fits_u64(bound)) return Int(below(to_u64(bound)));
        const int bits = bit_length(bound - 1);
        const int words = (bits + 63) / 64;
        const int top_bits = bits - 64 * (words - 1);
        const std::uint64_t top_mask =
            top_bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << top_bits) - 1);
        for (;;) {
            Int v = 0;
            for (int w = words - 1; w >= 0; --w) {
                std::uint64_t chunk = engine_();
                if (w == words - 1) chunk &= top_mask;
                v <<= 64;
                v += chunk;
            }
            if (v < bound) return v;
        }
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t mask_for(std::uint64_t v) {
        std::uint64_t m = v;
        m |= m >> 1;
        m |= m >> 2;
        m |= m >> 4;
        m |= m >> 8;
        m |= m >> 16;
        m |= m >> 32;
        return m;
    }

    std::mt19937_64 engine_;
};

}  // namespace difact
