#pragma once

#include "difact/diffusion.hpp"
#include "difact/errors.hpp"
#include "difact/integer.hpp"
#include "difact/ntheory.hpp"
#include "difact/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace difact::collisions {

/// A non-lazy word over the dyadic alphabet: letters (sign, t) with
/// sign in {+1,-1} and t in [0, M].  |E(w)| <= L * 2^M.
struct DyadicWord {
    struct Letter {
        int sign;
        int t;
    };
    std::vector<Letter> letters;

    int length() const { return static_cast<int>(letters.size()); }
};

/// Each letter costs exactly one rng draw: an index below 2(M+1) maps to
/// (+1, idx) for idx <= M and (-1, idx-M-1) above, so sign and t are
/// uniform and independent and fused samplers reproduce the same words.
DyadicWord sample_word(Rng& rng, int length, int M);

/// E(w) = sum of sign_i * 2^{t_i}.
Int word_exponent(const DyadicWord& w);

/// (a^{E(w)} mod N, E(w)), the endpoint evaluated by length() sequential
/// multiplications by the precomputed generator residues a^{+-2^t} rather
/// than one big exponentiation.
std::pair<Int, Int> word_endpoint(const Int& a, const ntheory::Modulus& m,
                                  const DyadicWord& w);

/// A nontrivial word collision: two exponents with the same endpoint.
/// D = E_new - E_prev != 0 satisfies a^|D| == 1; D_min is |D| after the
/// halve-when-possible reduction.  Both congruences are checked at
/// construction.
struct CycleCertificate {
    Int base;
    Int E_prev;
    Int E_new;
    Int D;
    Int D_min;
};

CycleCertificate make_certificate(const Int& a, const Int& N, const Int& E_prev,
                                  const Int& E_new);

/// First-seen exponent per endpoint.  observe() inserts unknown endpoints
/// and returns a certificate for nontrivial collisions; repeats of the same
/// exponent are discarded.
class EndpointTable {
public:
    std::optional<CycleCertificate> observe(const Int& endpoint, const Int& E,
                                            const Int& a, const Int& N);
    std::size_t size() const { return map_.size(); }

private:
    std::map<Int, Int> map_;
};

/// While D is even and a^{D/2} == 1 (mod N), halve.  Requires a^D == 1.
Int halve_reduce(Int D, const Int& a, const Int& N);

/// Running gcd of reduced loop differences.  g == 0 means empty; the
/// divisibility chain makes g non-increasing, and (with an oracle) always
/// a multiple of the true order.
struct RelationAccumulator {
    Int g = 0;
    long collisions = 0;
    int unchanged_streak = 0;
    int stable_hits = 8;
};

RelationAccumulator accumulate(RelationAccumulator acc, const Int& d_min);
bool stabilized(const RelationAccumulator& acc);

/// Reduces an order multiple g to the true order by factoring g (trial
/// division then Pollard rho -- g is data, not the hard target) and dividing
/// out primes while the power still annihilates a.
Int multiple_to_order(const Int& g, const Int& a, const Int& N,
                      std::uint64_t effort = 1u << 26);

/// If r is even and x = a^{r/2} is not +-1, returns the nontrivial pair
/// (gcd(x-1, N), gcd(x+1, N)); otherwise nullopt (restart signal).
std::optional<std::pair<Int, Int>> order_to_factor(const Int& a, const Int& r,
                                                   const Int& N);

/// E[Z] = C(T,2) * s2.
double expected_collision_count(long T, double s2);

/// s2(t) = sum of squared endpoint probabilities.
double collision_param(const diffusion::HeatState& state);
double collision_param(const Eigen::VectorXd& distribution);

/// Fraction of `trials` independent s-tuples uniform on [1, Q] with gcd 1.
double zeta_gcd_experiment(int s, std::uint64_t Q, long trials, Rng& rng);

/// Mean colliding-pair count over `reps` batches of T independent t-step
/// half-lazy trajectories started at the identity.
double birthday_experiment(const ntheory::Modulus& m, const Int& b, int T,
                           long reps, long t_steps, Rng& rng);

struct EngineConfig {
    int word_length = 2000;
    long max_samples = 120000;
    int stable_hits = 8;
    bool aggressive = false;
    int workers = 1;
    std::uint64_t factor_effort = 1u << 26;
    bool force_wide = false;  // testing knob: bypass the 64-bit fast path
};

struct CollisionEvent {
    Int D;
    Int D_min;
    Int g;  // running gcd after this collision
};

struct AttemptResult {
    enum class Status { FactorFound, OrderOnly, NoStabilization, ReductionStalled };
    Status status = Status::NoStabilization;
    Int order;  // reduced order, 0 when unknown
    std::optional<std::pair<Int, Int>> factors;  // (gcd(x-1,N), gcd(x+1,N))
    bool aggressive_shortcut = false;
    std::vector<CollisionEvent> events;
    long samples = 0;
};

/// One relation-finding attempt with base a: sample words of fixed length,
/// detect endpoint collisions, gcd-accumulate reduced loop differences until
/// stabilization, reduce the stabilized multiple to the order and run the
/// order-to-factor step.  Event-log lines go to `log` when non-null.
/// workers > 1 parallelizes word sampling (per-worker rng streams seeded
/// seed+i); the single-worker run is byte-deterministic for a given seed.
AttemptResult run_attempt(const Int& a, const ntheory::Modulus& m,
                          const EngineConfig& cfg, std::uint64_t seed,
                          std::ostream* log = nullptr);

}  // namespace difact::collisions
