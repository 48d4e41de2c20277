#include "difact/ntheory.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <random>

namespace difact::ntheory {

Modulus make_modulus(Int N) {
    if (N < 3) throw ContractViolation("modulus must satisfy N >= 3");
    Modulus m;
    m.bit_len = bit_length(N);
    m.M = m.bit_len;  // floor(log2 N) + 1
    m.N = std::move(N);
    return m;
}

Int mod_pow(const Int& base, const Int& exp, const Int& N) {
    if (N <= 0) throw ContractViolation("mod_pow: modulus must be positive");
    if (N == 1) return 0;
    Int b = base % N;
    if (b < 0) b += N;
    Int e = exp;
    if (e < 0) {
        b = mod_inv(b, N);  // throws NonInvertible when gcd(base, N) > 1
        e = -e;
    }
    Int r = 1;
    while (e != 0) {
        if (boost::multiprecision::bit_test(e, 0)) r = r * b % N;
        b = b * b % N;
        e >>= 1;
    }
    return r;
}

Int mod_inv(const Int& a, const Int& N) {
    // Extended Euclid on (a mod N, N).
    Int r0 = N, r1 = a % N;
    if (r1 < 0) r1 += N;
    Int t0 = 0, t1 = 1;
    while (r1 != 0) {
        const Int q = r0 / r1;
        Int r2 = r0 - q * r1;
        r0 = std::move(r1);
        r1 = std::move(r2);
        Int t2 = t0 - q * t1;
        t0 = std::move(t1);
        t1 = std::move(t2);
    }
    if (r0 != 1) throw NonInvertible(r0);
    if (t0 < 0) t0 += N;
    return t0;
}

namespace {

constexpr std::array<std::uint64_t, 12> kDeterministicWitnesses = {
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

constexpr std::array<std::uint32_t, 25> kSmallPrimes = {
    2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
    43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

// One Miller-Rabin round on a 64-bit candidate.
bool witness_u64(std::uint64_t n, std::uint64_t a) {
    a %= n;
    if (a == 0) return true;
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    std::uint64_t x = detail::powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int i = 1; i < s; ++i) {
        x = detail::mulmod_u64(x, x, n);
        if (x == n - 1) return true;
    }
    return false;
}

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint32_t p : kSmallPrimes) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    for (std::uint64_t a : kDeterministicWitnesses)
        if (!witness_u64(n, a)) return false;
    return true;
}

bool witness_big(const Int& n, const Int& a) {
    Int d = n - 1;
    int s = 0;
    while (!boost::multiprecision::bit_test(d, 0)) {
        d >>= 1;
        ++s;
    }
    Int x = mod_pow(a, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int i = 1; i < s; ++i) {
        x = x * x % n;
        if (x == n - 1) return true;
    }
    return false;
}

}  // namespace

bool is_probable_prime(const Int& n) {
    if (n < 0) throw ContractViolation("is_probable_prime: n must be >= 0");
    if (fits_u64(n)) return is_prime_u64(to_u64(n));
    for (std::uint32_t p : kSmallPrimes)
        if (n % p == 0) return false;
    for (std::uint64_t a : kDeterministicWitnesses)
        if (!witness_big(n, Int(a))) return false;
    // Extra witnesses drawn reproducibly from n; 64 rounds push the error
    // probability below 4^-64 = 2^-128.
    std::mt19937_64 gen(0x9e3779b97f4a7c15ULL ^ to_u64(n % Int(~std::uint64_t{0})));
    for (int i = 0; i < 64; ++i) {
        const Int a = 2 + Int(gen()) % (n - 3);
        if (!witness_big(n, a)) return false;
    }
    return true;
}

namespace {

// Integer k-th root by binary search on the bit range.
Int kth_root(const Int& n, unsigned k) {
    if (n == 0 || n == 1 || k == 1) return n;
    const int bits = bit_length(n);
    Int lo = 1, hi = (Int(1) << (bits / k + 1));
    while (lo < hi) {
        const Int mid = (lo + hi + 1) >> 1;
        if (boost::multiprecision::pow(mid, k) <= n)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

}  // namespace

std::optional<std::pair<Int, unsigned>> perfect_power(const Int& n) {
    if (n < 2) throw ContractViolation("perfect_power: n must be >= 2");
    const int bits = bit_length(n);
    for (unsigned k = static_cast<unsigned>(bits); k >= 2; --k) {
        const Int root = kth_root(n, k);
        if (boost::multiprecision::pow(root, k) == n) return std::make_pair(root, k);
    }
    return std::nullopt;
}

namespace {

// Brent cycle finding; returns a nontrivial factor of composite odd n,
// or 0 when the iteration budget runs out.
Int brent_rho(const Int& n, std::uint64_t& budget) {
    if (n % 2 == 0) return 2;
    for (Int c = 1; budget > 0; ++c) {
        Int x = 2, y = 2, d = 1;
        Int q = 1;
        std::uint64_t r = 1;
        const std::uint64_t batch = 128;
        while (d == 1 && budget > 0) {
            x = y;
            for (std::uint64_t i = 0; i < r && budget > 0; ++i) {
                y = (y * y + c) % n;
                --budget;
            }
            std::uint64_t k = 0;
            while (k < r && d == 1 && budget > 0) {
                const Int ys = y;
                const std::uint64_t steps = std::min(batch, r - k);
                for (std::uint64_t i = 0; i < steps && budget > 0; ++i) {
                    y = (y * y + c) % n;
                    Int diff = x >= y ? x - y : y - x;
                    if (diff == 0) diff = 1;
                    q = q * diff % n;
                    --budget;
                }
                d = gcd(q, n);
                if (d == n) {
                    // Backtrack one by one from the saved point.
                    Int z = ys;
                    d = 1;
                    while (d == 1) {
                        z = (z * z + c) % n;
                        Int diff = x >= z ? x - z : z - x;
                        d = gcd(diff, n);
                        if (z == x) break;
                    }
                }
                k += steps;
            }
        }
        if (d > 1 && d < n) return d;
        // d == n or budget drained with this c: retry with the next c.
    }
    return 0;
}

void factor_into(const Int& n, std::map<Int, unsigned>& out, std::uint64_t& budget) {
    if (n == 1) return;
    if (is_probable_prime(n)) {
        ++out[n];
        return;
    }
    const Int d = brent_rho(n, budget);
    if (d == 0) throw FactorizationStall("factorize: effort budget exceeded for " + n.str());
    factor_into(d, out, budget);
    factor_into(n / d, out, budget);
}

}  // namespace

OracleFactorization factorize(const Int& n, std::uint64_t effort) {
    if (n < 1) throw ContractViolation("factorize: n must be >= 1");
    OracleFactorization f;
    f.source_n = n;
    Int m = n;
    std::map<Int, unsigned> found;
    for (std::uint64_t p = 2; p <= 1000000 && Int(p) * p <= m; p = (p == 2 ? 3 : p + 2)) {
        while (m % p == 0) {
            ++found[Int(p)];
            m /= p;
        }
    }
    if (m > 1) {
        std::uint64_t budget = effort;
        factor_into(m, found, budget);
    }
    f.factors.assign(found.begin(), found.end());
    return f;
}

Int euler_phi(const OracleFactorization& f) {
    Int phi = 1;
    for (const auto& [p, e] : f.factors)
        phi *= boost::multiprecision::pow(p, e - 1) * (p - 1);
    return phi;
}

std::vector<Int> dyadic_ladder(const Int& a, const Modulus& m) {
    Int a0 = a % m.N;
    if (a0 < 0) a0 += m.N;
    const Int ainv = mod_inv(a0, m.N);
    std::vector<Int> ladder(2 * (m.M + 1));
    ladder[0] = a0;
    ladder[m.M + 1] = ainv;
    for (int t = 1; t <= m.M; ++t) {
        ladder[t] = ladder[t - 1] * ladder[t - 1] % m.N;
        ladder[m.M + 1 + t] = ladder[m.M + t] * ladder[m.M + t] % m.N;
    }
    return ladder;
}

Int order_oracle(const Int& a, const Modulus& m) {
    if (m.bit_len > 48)
        throw OutOfOracleRange("order_oracle: N has " + std::to_string(m.bit_len) +
                               " bits, limit is 48");
    const Int g = gcd(a, m.N);
    if (g != 1) throw NonInvertible(g);
    const Int phi = euler_phi(factorize(m.N));
    Int r = phi;
    for (const auto& [p, e] : factorize(phi).factors) {
        for (unsigned i = 0; i < e; ++i) {
            if (r % p != 0) break;
            if (mod_pow(a, r / p, m.N) != 1) break;
            r /= p;
        }
    }
    return r;
}

}  // namespace difact::ntheory
