#include "difact/collisions.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>
#include <type_traits>
#include <unordered_map>

namespace difact::collisions {

DyadicWord sample_word(Rng& rng, int length, int M) {
    if (length < 1) throw ContractViolation("sample_word: length must be >= 1");
    if (M < 0) throw ContractViolation("sample_word: M must be >= 0");
    DyadicWord w;
    w.letters.reserve(static_cast<std::size_t>(length));
    const std::uint64_t two_d = 2 * (static_cast<std::uint64_t>(M) + 1);
    for (int i = 0; i < length; ++i) {
        const int idx = static_cast<int>(rng.below(two_d));
        if (idx <= M)
            w.letters.push_back({+1, idx});
        else
            w.letters.push_back({-1, idx - M - 1});
    }
    return w;
}

Int word_exponent(const DyadicWord& w) {
    Int e = 0;
    for (const auto& [sign, t] : w.letters) {
        if (sign > 0)
            e += Int(1) << t;
        else
            e -= Int(1) << t;
    }
    return e;
}

std::pair<Int, Int> word_endpoint(const Int& a, const ntheory::Modulus& m,
                                  const DyadicWord& w) {
    const std::vector<Int> gens = ntheory::dyadic_ladder(a, m);
    Int x = 1, e = 0;
    for (const auto& [sign, t] : w.letters) {
        if (t < 0 || t > m.M)
            throw ContractViolation("word_endpoint: letter exponent out of range");
        x = x * gens[sign > 0 ? t : m.M + 1 + t] % m.N;
        if (sign > 0)
            e += Int(1) << t;
        else
            e -= Int(1) << t;
    }
    return {x, e};
}

Int halve_reduce(Int D, const Int& a, const Int& N) {
    if (D < 1) throw ContractViolation("halve_reduce: D must be >= 1");
    if (ntheory::mod_pow(a, D, N) != 1)
        throw ContractViolation("halve_reduce: a^D != 1 (mod N)");
    while (!boost::multiprecision::bit_test(D, 0)) {
        const Int half = D >> 1;
        if (ntheory::mod_pow(a, half, N) != 1) break;
        D = half;
    }
    return D;
}

CycleCertificate make_certificate(const Int& a, const Int& N, const Int& E_prev,
                                  const Int& E_new) {
    if (E_new == E_prev)
        throw ContractViolation("certificate requires a nontrivial collision");
    CycleCertificate cert;
    cert.base = a;
    cert.E_prev = E_prev;
    cert.E_new = E_new;
    cert.D = E_new - E_prev;
    cert.D_min = halve_reduce(abs(cert.D), a, N);  // verifies a^|D| == 1
    return cert;
}

std::optional<CycleCertificate> EndpointTable::observe(const Int& endpoint,
                                                       const Int& E, const Int& a,
                                                       const Int& N) {
    const auto [it, inserted] = map_.try_emplace(endpoint, E);
    if (inserted) return std::nullopt;
    if (it->second == E) return std::nullopt;  // trivial collision, discarded
    return make_certificate(a, N, it->second, E);
}

RelationAccumulator accumulate(RelationAccumulator acc, const Int& d_min) {
    if (d_min < 1) throw ContractViolation("accumulate: D_min must be >= 1");
    const Int next = acc.g == 0 ? d_min : gcd(acc.g, d_min);
    if (next == acc.g)
        ++acc.unchanged_streak;
    else
        acc.unchanged_streak = 0;
    acc.g = next;
    ++acc.collisions;
    return acc;
}

bool stabilized(const RelationAccumulator& acc) {
    return acc.unchanged_streak >= acc.stable_hits;
}

Int multiple_to_order(const Int& g, const Int& a, const Int& N, std::uint64_t effort) {
    if (g < 1) throw ContractViolation("multiple_to_order: g must be >= 1");
    if (ntheory::mod_pow(a, g, N) != 1)
        throw ContractViolation("multiple_to_order: a^g != 1 (mod N)");
    const auto fact = ntheory::factorize(g, effort);  // FactorizationStall passes up
    Int r = g;
    for (const auto& [p, e] : fact.factors) {
        for (unsigned i = 0; i < e; ++i) {
            if (r % p != 0) break;
            if (ntheory::mod_pow(a, r / p, N) != 1) break;
            r /= p;
        }
    }
    return r;
}

std::optional<std::pair<Int, Int>> order_to_factor(const Int& a, const Int& r,
                                                   const Int& N) {
    if (r < 1) throw ContractViolation("order_to_factor: r must be >= 1");
    if (boost::multiprecision::bit_test(r, 0)) return std::nullopt;  // odd order
    const Int x = ntheory::mod_pow(a, r >> 1, N);
    if (x == 1 || x == N - 1) return std::nullopt;  // trivial square root
    const Int d1 = gcd(x - 1, N);
    const Int d2 = gcd(x + 1, N);
    if (!(d1 > 1 && d1 < N && N % d1 == 0 && d2 > 1 && d2 < N && N % d2 == 0))
        throw ContractViolation(
            "order_to_factor: square root failed to split N (precondition a^r == 1 "
            "violated?)");
    return std::make_pair(d1, d2);
}

double expected_collision_count(long T, double s2) {
    if (T < 0) throw ContractViolation("expected_collision_count: T must be >= 0");
    return 0.5 * static_cast<double>(T) * static_cast<double>(T - 1) * s2;
}

double collision_param(const diffusion::HeatState& state) {
    return state.mass.squaredNorm();
}

double collision_param(const Eigen::VectorXd& distribution) {
    return distribution.squaredNorm();
}

double zeta_gcd_experiment(int s, std::uint64_t Q, long trials, Rng& rng) {
    if (s < 2) throw ContractViolation("zeta_gcd_experiment: s must be >= 2");
    if (Q < 2) throw ContractViolation("zeta_gcd_experiment: Q must be >= 2");
    if (trials < 1) throw ContractViolation("zeta_gcd_experiment: trials must be >= 1");
    long coprime = 0;
    for (long i = 0; i < trials; ++i) {
        std::uint64_t g = 0;
        for (int j = 0; j < s; ++j) g = std::gcd(g, rng.below(Q) + 1);
        if (g == 1) ++coprime;
    }
    return static_cast<double>(coprime) / static_cast<double>(trials);
}

namespace {

inline std::uint64_t mul_res(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
    return ntheory::detail::mulmod_u64(a, b, n);
}
inline Int mul_res(const Int& a, const Int& b, const Int& n) { return a * b % n; }

template <class R>
double birthday_impl(const std::vector<R>& gens, const R& modulus, int T, long reps,
                     long t_steps, Rng& rng) {
    const std::uint64_t d = gens.size();
    std::vector<R> endpoints(static_cast<std::size_t>(T));
    long long total_pairs = 0;
    for (long rep = 0; rep < reps; ++rep) {
        for (int i = 0; i < T; ++i) {
            R x(1);
            for (long step = 0; step < t_steps; ++step) {
                const std::uint64_t k = rng.below(2 * d);
                if (k >= d) x = mul_res(x, gens[k - d], modulus);  // else lazy
            }
            endpoints[static_cast<std::size_t>(i)] = x;
        }
        std::sort(endpoints.begin(), endpoints.end());
        for (std::size_t i = 0; i < endpoints.size();) {
            std::size_t j = i;
            while (j < endpoints.size() && endpoints[j] == endpoints[i]) ++j;
            const long long c = static_cast<long long>(j - i);
            total_pairs += c * (c - 1) / 2;
            i = j;
        }
    }
    return static_cast<double>(total_pairs) / static_cast<double>(reps);
}

}  // namespace

double birthday_experiment(const ntheory::Modulus& m, const Int& b, int T, long reps,
                           long t_steps, Rng& rng) {
    if (T < 1 || reps < 1 || t_steps < 0)
        throw ContractViolation("birthday_experiment: bad parameters");
    const std::vector<Int> gens_big = ntheory::dyadic_ladder(b, m);
    if (m.bit_len <= 62) {
        std::vector<std::uint64_t> gens(gens_big.size());
        for (std::size_t i = 0; i < gens.size(); ++i) gens[i] = to_u64(gens_big[i]);
        return birthday_impl(gens, to_u64(m.N), T, reps, t_steps, rng);
    }
    return birthday_impl(gens_big, m.N, T, reps, t_steps, rng);
}

// ---------------------------------------------------------------------------
// Relation-finding engine

namespace {

// Certificate processing shared by the fast and wide sampling loops; all
// arithmetic here is back in the big-integer domain.
class AttemptDriver {
public:
    AttemptDriver(const Int& a, const Int& N, const EngineConfig& cfg,
                  std::ostream* log, AttemptResult& res)
        : a_(a), N_(N), cfg_(cfg), log_(log), res_(res) {
        acc_.stable_hits = cfg.stable_hits;
    }

    // True when the attempt is finished (factor found, order reduced, or the
    // reduction stalled).
    bool on_collision(const Int& E_prev, const Int& E_new) {
        const CycleCertificate cert = make_certificate(a_, N_, E_prev, E_new);
        acc_ = accumulate(acc_, cert.D_min);
        res_.events.push_back({cert.D, cert.D_min, acc_.g});

        if (cfg_.aggressive) {
            // Any even multiple of the order can already split N.
            if (auto f = order_to_factor(a_, cert.D_min, N_)) {
                if (log_)
                    *log_ << "[collision # " << std::setw(2) << acc_.collisions
                          << "]  D_min = " << cert.D_min
                          << "   AGGRESSIVE ONE-COLLISION FACTOR: " << f->first
                          << " * " << f->second << "\n";
                res_.status = AttemptResult::Status::FactorFound;
                res_.factors = f;
                res_.aggressive_shortcut = true;
                return true;
            }
        }
        if (log_)
            *log_ << "[collision # " << std::setw(2) << acc_.collisions
                  << "]  D_min = " << cert.D_min << "   running_gcd = " << acc_.g
                  << "\n";

        if (!stabilized(acc_)) return false;
        if (log_) *log_ << "  stabilized gcd = " << acc_.g << "\n";

        Int r;
        try {
            r = multiple_to_order(acc_.g, a_, N_, cfg_.factor_effort);
        } catch (const FactorizationStall&) {
            if (log_) *log_ << "  order reduction stalled (try another a).\n";
            res_.status = AttemptResult::Status::ReductionStalled;
            return true;
        }
        if (log_) *log_ << "  reduced order r = " << r << "\n";
        res_.order = r;

        if (auto f = order_to_factor(a_, r, N_)) {
            res_.status = AttemptResult::Status::FactorFound;
            res_.factors = f;
        } else {
            res_.status = AttemptResult::Status::OrderOnly;
            if (log_) *log_ << "  order gave no nontrivial factor (try another a).\n";
        }
        return true;
    }

private:
    const Int& a_;
    const Int& N_;
    const EngineConfig& cfg_;
    std::ostream* log_;
    AttemptResult& res_;
    RelationAccumulator acc_;
};

template <class R, class E>
struct SampleContext {
    std::vector<R> gens;  // dyadic ladder layout
    R modulus;
    int word_length;
    int M;

    std::pair<R, E> sample(Rng& rng) const {
        R x(1);
        E e(0);
        const std::uint64_t two_d = gens.size();
        for (int i = 0; i < word_length; ++i) {
            const std::size_t idx = static_cast<std::size_t>(rng.below(two_d));
            x = mul_res(x, gens[idx], modulus);
            if (idx <= static_cast<std::size_t>(M))
                e += E(1) << idx;
            else
                e -= E(1) << (idx - static_cast<std::size_t>(M) - 1);
        }
        return {x, e};
    }
};

template <class R, class E>
struct TableOf {
    using type = std::map<R, E>;
};
template <>
struct TableOf<std::uint64_t, long long> {
    using type = std::unordered_map<std::uint64_t, long long>;
};

template <class R, class E>
void run_sampling(const SampleContext<R, E>& ctx, const EngineConfig& cfg,
                  std::uint64_t seed, AttemptDriver& driver, AttemptResult& res) {
    typename TableOf<R, E>::type table;
    if constexpr (std::is_same_v<R, std::uint64_t>)
        table.reserve(static_cast<std::size_t>(cfg.max_samples) + 16);

    if (cfg.workers <= 1) {
        Rng rng(seed);
        for (long s = 1; s <= cfg.max_samples; ++s) {
            auto [x, e] = ctx.sample(rng);
            ++res.samples;
            const auto [it, inserted] = table.try_emplace(x, e);
            if (inserted) continue;
            if (it->second == e) continue;
            if (driver.on_collision(Int(it->second), Int(e))) return;
        }
        return;
    }

    // Word evaluation is the expensive part; workers compute endpoint batches
    // with independent rng streams and funnel them through one table lock.
    constexpr long kBatch = 32;
    std::mutex table_mutex;
    std::atomic<bool> done{false};
    std::atomic<long> remaining{cfg.max_samples};
    auto body = [&](int worker_id) {
        Rng rng(seed + static_cast<std::uint64_t>(worker_id));
        std::vector<std::pair<R, E>> batch;
        for (;;) {
            if (done.load(std::memory_order_acquire)) return;
            const long prev = remaining.fetch_sub(kBatch, std::memory_order_relaxed);
            const long take = std::min(kBatch, prev);
            if (take <= 0) return;
            batch.clear();
            for (long i = 0; i < take; ++i) batch.push_back(ctx.sample(rng));
            std::lock_guard<std::mutex> lock(table_mutex);
            if (done.load(std::memory_order_relaxed)) return;
            for (const auto& [x, e] : batch) {
                ++res.samples;
                const auto [it, inserted] = table.try_emplace(x, e);
                if (inserted) continue;
                if (it->second == e) continue;
                if (driver.on_collision(Int(it->second), Int(e))) {
                    done.store(true, std::memory_order_release);
                    return;
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(cfg.workers));
    for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(body, w);
    for (auto& th : pool) th.join();
}

}  // namespace

AttemptResult run_attempt(const Int& a, const ntheory::Modulus& m,
                          const EngineConfig& cfg, std::uint64_t seed,
                          std::ostream* log) {
    if (cfg.word_length < 1)
        throw ContractViolation("run_attempt: word_length must be >= 1");
    if (cfg.max_samples < 1)
        throw ContractViolation("run_attempt: max_samples must be >= 1");

    AttemptResult res;
    const std::vector<Int> gens_big = ntheory::dyadic_ladder(a, m);
    if (log)
        *log << "  sampling words of length L = " << cfg.word_length
             << ", max_samples = " << cfg.max_samples
             << ", stable_hits = " << cfg.stable_hits << "\n";

    AttemptDriver driver(a, m.N, cfg, log, res);

    // Exponents stay below max_samples-independent L * 2^M, so the 64-bit
    // path is exact whenever that bound and the modulus fit.
    const bool fast = !cfg.force_wide && m.bit_len <= 62 &&
                      bit_length(Int(cfg.word_length)) + m.M <= 62;
    if (fast) {
        SampleContext<std::uint64_t, long long> ctx;
        ctx.gens.resize(gens_big.size());
        for (std::size_t i = 0; i < gens_big.size(); ++i) ctx.gens[i] = to_u64(gens_big[i]);
        ctx.modulus = to_u64(m.N);
        ctx.word_length = cfg.word_length;
        ctx.M = m.M;
        run_sampling(ctx, cfg, seed, driver, res);
    } else {
        SampleContext<Int, Int> ctx;
        ctx.gens = gens_big;
        ctx.modulus = m.N;
        ctx.word_length = cfg.word_length;
        ctx.M = m.M;
        run_sampling(ctx, cfg, seed, driver, res);
    }

    if (res.status == AttemptResult::Status::NoStabilization && log)
        *log << "  no stabilized gcd from loops in this attempt (try another a).\n";
    return res;
}

}  // namespace difact::collisions
