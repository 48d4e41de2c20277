#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "difact/ntheory.hpp"
#include "difact/rng.hpp"

#include <algorithm>
#include <vector>

using namespace difact;
using namespace difact::ntheory;

namespace {

// Independent oracle: plain square-and-multiply, no inversion path.
Int naive_pow(const Int& base, unsigned long long e, const Int& N) {
    Int r = 1;
    for (unsigned long long i = 0; i < e; ++i) r = r * base % N;
    return r;
}

// Independent oracle: sieve-based primality for small n.
std::vector<bool> sieve(std::size_t limit) {
    std::vector<bool> prime(limit + 1, true);
    prime[0] = false;
    if (limit >= 1) prime[1] = false;
    for (std::size_t p = 2; p * p <= limit; ++p)
        if (prime[p])
            for (std::size_t q = p * p; q <= limit; q += p) prime[q] = false;
    return prime;
}

}  // namespace

TEST_CASE("modulus invariants") {
    const auto m = make_modulus(Int(299));
    CHECK(m.M == 9);
    CHECK(m.bit_len == 9);
    CHECK(pow2(m.M - 1) <= m.N);
    CHECK(m.N < pow2(m.M));

    for (long n : {3L, 21L, 299L, 1022117L, 4294967297L}) {
        const auto mm = make_modulus(Int(n));
        CHECK(pow2(mm.M - 1) <= mm.N);
        CHECK(mm.N < pow2(mm.M));
    }
    CHECK_THROWS_AS(make_modulus(Int(2)), ContractViolation);
}

TEST_CASE("mod_pow examples") {
    const auto m299 = make_modulus(Int(299));
    CHECK(mod_pow(Int(3), Int(33), m299) == 1);
    CHECK(mod_pow(Int(7), Int(0), m299) == 1);
    // 2^32 mod F5 = F5 - 1; cross-checked with the naive oracle.
    const Int f5("4294967297");
    CHECK(mod_pow(Int(2), Int(32), f5) == Int("4294967296"));
    CHECK(naive_pow(Int(2), 32, f5) == Int("4294967296"));
}

TEST_CASE("mod_pow negative exponents") {
    CHECK(mod_pow(Int(3), Int(-1), Int(299)) == 100);
    CHECK(mod_pow(Int(3), Int(-2), Int(299)) == Int(100) * 100 % 299);
    CHECK_THROWS_AS(mod_pow(Int(5), Int(-1), Int(15)), NonInvertible);
    try {
        mod_pow(Int(5), Int(-3), Int(15));
        FAIL("expected NonInvertible");
    } catch (const NonInvertible& e) {
        CHECK(e.gcd() == 5);
    }
}

TEST_CASE("mod_inv examples") {
    CHECK(mod_inv(Int(1), Int(299)) == 1);
    CHECK(mod_inv(Int(3), Int(299)) == 100);
    CHECK(Int(3) * 100 % 299 == 1);
    CHECK_THROWS_AS(mod_inv(Int(5), Int(15)), NonInvertible);
}

TEST_CASE("mod_pow homomorphism and inverse involution properties") {
    Rng rng(20240517);
    for (int i = 0; i < 200; ++i) {
        const Int N = 3 + 2 * Int(rng.below(1u << 20));
        Int a = 1 + rng.int_below(N - 1);
        while (gcd(a, N) != 1) a = 1 + rng.int_below(N - 1);
        const Int e1 = rng.int_below(Int(1) << 40);
        const Int e2 = rng.int_below(Int(1) << 40);
        CHECK(mod_pow(a, e1 + e2, N) == mod_pow(a, e1, N) * mod_pow(a, e2, N) % N);
        CHECK(mod_inv(mod_inv(a, N), N) == a % N);
    }
}

TEST_CASE("is_probable_prime examples") {
    CHECK(is_probable_prime(Int(2)));
    CHECK(is_probable_prime(Int(1009)));
    CHECK(is_probable_prime(Int(1013)));
    CHECK_FALSE(is_probable_prime(Int(299)));
    CHECK_FALSE(is_probable_prime(Int(0)));
    CHECK_FALSE(is_probable_prime(Int(1)));
    // A couple of values beyond 64 bits.
    CHECK(is_probable_prime(Int("170141183460469231731687303715884105727")));  // 2^127-1
    CHECK_FALSE(is_probable_prime(Int("170141183460469231731687303715884105725")));
}

TEST_CASE("is_probable_prime agrees with trial division below 10^6") {
    const auto prime = sieve(1000000);
    for (std::size_t n = 0; n <= 1000000; ++n) {
        if (is_probable_prime(Int(n)) != prime[n]) {
            CAPTURE(n);
            FAIL("primality mismatch");
        }
    }
}

TEST_CASE("perfect_power examples") {
    const auto p8 = perfect_power(Int(8));
    REQUIRE(p8.has_value());
    CHECK(p8->first == 2);
    CHECK(p8->second == 3);

    const auto p121 = perfect_power(Int(121));
    REQUIRE(p121.has_value());
    CHECK(p121->first == 11);
    CHECK(p121->second == 2);

    CHECK_FALSE(perfect_power(Int(1022117)).has_value());
    CHECK_FALSE(perfect_power(Int(2)).has_value());

    const auto p64 = perfect_power(Int(64));
    REQUIRE(p64.has_value());
    CHECK(p64->first == 2);
    CHECK(p64->second == 6);
}

TEST_CASE("perfect_power round trip property") {
    Rng rng(77);
    for (int i = 0; i < 100; ++i) {
        const Int b = 2 + Int(rng.below(500));
        const unsigned k = 2 + static_cast<unsigned>(rng.below(5));
        const Int n = boost::multiprecision::pow(b, k);
        const auto pp = perfect_power(n);
        REQUIRE(pp.has_value());
        CHECK(boost::multiprecision::pow(pp->first, pp->second) == n);
        CHECK(pp->second >= k);
    }
}

TEST_CASE("factorize reconstructs its input with prime parts") {
    Rng rng(99);
    for (int i = 0; i < 60; ++i) {
        const Int n = 2 + rng.int_below(Int(1) << 40);
        const auto f = factorize(n);
        Int prod = 1;
        Int last = 1;
        for (const auto& [p, e] : f.factors) {
            CHECK(p > last);  // strictly increasing
            last = p;
            CHECK(is_probable_prime(p));
            prod *= boost::multiprecision::pow(p, e);
        }
        CHECK(prod == n);
    }
}

TEST_CASE("order_oracle examples") {
    CHECK(order_oracle(Int(3), make_modulus(Int(299))) == 33);
    CHECK(order_oracle(Int(4), make_modulus(Int(21))) == 3);
    CHECK(order_oracle(Int(2), make_modulus(Int(21))) == 6);
    CHECK(order_oracle(Int(576), make_modulus(Int(1022117))) == 5313);
}

TEST_CASE("order_oracle minimality property") {
    Rng rng(1234);
    for (int i = 0; i < 80; ++i) {
        const Int N = 3 + 2 * Int(rng.below(1u << 16));
        Int a = 1 + rng.int_below(N - 1);
        while (gcd(a, N) != 1) a = 1 + rng.int_below(N - 1);
        const auto m = make_modulus(N);
        const Int r = order_oracle(a, m);
        CHECK(mod_pow(a, r, N) == 1);
        for (const auto& [p, e] : factorize(r).factors)
            CHECK(mod_pow(a, r / p, N) != 1);
    }
}

TEST_CASE("order_oracle refuses out-of-range moduli") {
    const Int big = (Int(1) << 60) + 1;
    CHECK_THROWS_AS(order_oracle(Int(2), make_modulus(big)), OutOfOracleRange);
}

TEST_CASE("dyadic ladder layout and doubling chain") {
    const auto m = make_modulus(Int(299));
    const auto ladder = dyadic_ladder(Int(3), m);
    REQUIRE(static_cast<int>(ladder.size()) == 2 * (m.M + 1));
    CHECK(ladder[0] == 3);
    CHECK(ladder[1] == 9);
    CHECK(ladder[2] == 81);
    for (int t = 0; t < m.M; ++t) {
        CHECK(ladder[t + 1] == ladder[t] * ladder[t] % m.N);
        CHECK(ladder[m.M + 2 + t] == ladder[m.M + 1 + t] * ladder[m.M + 1 + t] % m.N);
    }
    for (int t = 0; t <= m.M; ++t)
        CHECK(ladder[t] * ladder[m.M + 1 + t] % m.N == 1);
}
