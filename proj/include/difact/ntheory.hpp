#pragma once

#include "difact/errors.hpp"
#include "difact/integer.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace difact::ntheory {

/// A composite modulus N together with its dyadic bound M = floor(log2 N) + 1.
/// M equals the bit length of N, so 2^(M-1) <= N < 2^M.
struct Modulus {
    Int N;
    int M = 0;
    int bit_len = 0;
};

/// Validates N >= 3 and derives M.
Modulus make_modulus(Int N);

/// base^exp mod N for signed exp.  Negative exponents invert the base once
/// and then exponentiate by |exp|; throws NonInvertible (carrying the gcd)
/// when exp < 0 and gcd(base, N) > 1.
Int mod_pow(const Int& base, const Int& exp, const Int& N);
inline Int mod_pow(const Int& base, const Int& exp, const Modulus& m) {
    return mod_pow(base, exp, m.N);
}

/// Modular inverse via extended Euclid; throws NonInvertible with the gcd.
Int mod_inv(const Int& a, const Int& N);
inline Int mod_inv(const Int& a, const Modulus& m) { return mod_inv(a, m.N); }

/// Miller-Rabin.  Deterministic witness set below 2^64 (in fact valid to
/// ~3.3e24); 64 extra witnesses above, derived reproducibly from n, for an
/// error probability <= 2^-128.
bool is_probable_prime(const Int& n);

/// Smallest base with the largest k >= 2 such that base^k == n, if any.
std::optional<std::pair<Int, unsigned>> perfect_power(const Int& n);

/// Prime factorization with multiplicities, primes strictly increasing.
struct OracleFactorization {
    std::vector<std::pair<Int, unsigned>> factors;
    Int source_n;
};

/// Trial division to 10^6 followed by Brent's variant of Pollard rho.
/// effort is the total rho iteration budget; FactorizationStall beyond it.
OracleFactorization factorize(const Int& n, std::uint64_t effort = 1u << 26);

Int euler_phi(const OracleFactorization& f);

/// Least r >= 1 with a^r == 1 (mod N), computed by factoring phi(N) and
/// stripping primes.  Test oracle, independent of the diffusion path;
/// refuses N above 2^48 rather than hanging (OutOfOracleRange).
Int order_oracle(const Int& a, const Modulus& m);

/// The 2(M+1) dyadic residues of a: [t] = a^(2^t) and [M+1+t] = a^(-2^t)
/// for t = 0..M, computed with one inversion plus 2M modular squarings.
/// Duplicates are retained.  Throws NonInvertible when gcd(a, N) > 1.
std::vector<Int> dyadic_ladder(const Int& a, const Modulus& m);

namespace detail {

// 64-bit fast paths shared by the hot loops.
inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % n);
}

inline std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t n) {
    std::uint64_t r = n == 1 ? 0 : 1;
    a %= n;
    while (e) {
        if (e & 1) r = mulmod_u64(r, a, n);
        a = mulmod_u64(a, a, n);
        e >>= 1;
    }
    return r;
}

}  // namespace detail

}  // namespace difact::ntheory
