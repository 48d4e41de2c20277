#pragma once

#include "difact/collisions.hpp"
#include "difact/errors.hpp"
#include "difact/integer.hpp"
#include "difact/ntheory.hpp"
#include "difact/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace difact::factoring {

enum class Classification { Composite, Prime, PrimePower, Even, TooSmall };

struct PreCheck {
    Classification kind = Classification::TooSmall;
    Int base;           // prime-power base when kind == PrimePower
    unsigned power = 0;
};

/// Classifies N; the factoring loop runs only on odd Composite >= 3 that is
/// not a prime power.
PreCheck pre_check(const Int& N);

/// A repetition a^(2^t) == a^(sign * 2^t') with 0 <= t' < t <= M.
struct Repetition {
    int t = 0;
    int t_prime = 0;
    int sign = +1;
};

struct DoublingScan {
    std::vector<Int> multiset;  // dyadic ladder layout, 2(M+1) entries
    std::optional<Repetition> repetition;
};

/// Computes S(a) and reports the first repetition, scanning in increasing t
/// with positive targets before negative ones.
DoublingScan doubling_multiset(const Int& a, const ntheory::Modulus& m);

/// From a repetition, the relation exponent factors as 2^t' * q with odd
/// q = 2^(t-t') -+ 1.  Returns (s, q) where s is the least value with
/// a^(2^s q) == 1, found by a downward scan from t'.
std::pair<int, Int> extract_sq(const Int& a, const ntheory::Modulus& m,
                               const Repetition& rep);

/// b = a^(2^M) mod N; ord_N(b) is always odd.
Int oddify(const Int& a, const ntheory::Modulus& m);

/// Given the odd order r_b of b = a^(2^M), recovers ord_N(a) = 2^k r_b by
/// testing k = 0..M.  ContractViolation if no k works.
Int lift_order(const Int& a, const Int& r_b, const ntheory::Modulus& m);

/// x = a^exponent_half; when x != +-1 both gcd(x-1, N) and gcd(x+1, N) are
/// nontrivial divisors and the pair is returned; nullopt signals restart.
/// Requires a^(2*exponent_half) == 1 (mod N).
std::optional<std::pair<Int, Int>> sqrt_attack(const Int& a, const Int& exponent_half,
                                               const Int& N);

enum class OrderSourceKind { Diffusion, Collision, Oracle };

struct FactorConfig {
    OrderSourceKind order_source = OrderSourceKind::Collision;
    int max_attempts = 80;
    std::uint64_t seed = 1;
    collisions::EngineConfig collision;
    std::optional<Int> forced_base;  // used for attempt 1 (log reproductions)
    std::size_t diffusion_support_guard = 200000;
};

struct TrialOutcome {
    enum class Kind { Factor, Restart };
    Kind kind = Kind::Restart;
    Int a;
    std::string reason;  // restart cause or success path
    std::optional<std::pair<Int, Int>> factors;  // (gcd(x-1,N), gcd(x+1,N)) order
    std::optional<Int> order;                    // r_a when determined
    std::optional<int> s;                        // early-relation details
    std::optional<Int> q;
    std::vector<collisions::CollisionEvent> events;  // collision source only
    bool aggressive_shortcut = false;
};

struct FactorReport {
    bool success = false;
    Int n;
    Int d1, d2;  // ascending; valid when success
    int attempts = 0;
    double elapsed_s = 0.0;
    std::vector<TrialOutcome> trials;
};

/// The end-to-end factoring loop: per trial draw a uniform in [1, N-1], take
/// the gcd shortcut, scan the doubling multiset for an early relation, then
/// determine an order through the configured source and extract a factor
/// from a nontrivial square root.  The diffusion and oracle sources receive
/// the oddified base b = a^(2^M) and the order is lifted back to a; the
/// collision engine determines ord(a) directly.
FactorReport algorithm1(const Int& N, const FactorConfig& cfg,
                        std::ostream* log = nullptr);

/// p(m) = 1 - (m+1)/2^m for m >= 2 distinct prime factors.
double success_probability(int m);

/// Fraction of uniform units a whose order is even with a^(r/2) != +-1,
/// estimated with oracle orders.
double monte_carlo_success(const Int& N, long trials, Rng& rng);

}  // namespace difact::factoring
