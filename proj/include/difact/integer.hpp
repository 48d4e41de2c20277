#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <limits>

namespace difact {

/// Arbitrary-precision integer used for all modular arithmetic.
using Int = boost::multiprecision::cpp_int;

using boost::multiprecision::gcd;
using boost::multiprecision::abs;

/// Number of bits in the binary representation of n (0 for n = 0).
inline int bit_length(const Int& n) {
    if (n == 0) return 0;
    return static_cast<int>(boost::multiprecision::msb(n)) + 1;
}

inline bool fits_u64(const Int& n) {
    return n >= 0 && n <= Int(std::numeric_limits<std::uint64_t>::max());
}

inline std::uint64_t to_u64(const Int& n) {
    return n.convert_to<std::uint64_t>();
}

inline std::int64_t to_i64(const Int& n) {
    return n.convert_to<std::int64_t>();
}

/// 2^k as a big integer.
inline Int pow2(unsigned k) {
    return Int(1) << k;
}

}  // namespace difact
