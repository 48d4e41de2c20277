#include "difact/factor.hpp"

#include "difact/diffusion.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <ostream>

namespace difact::factoring {

PreCheck pre_check(const Int& N) {
    if (N < 0) throw ContractViolation("pre_check: N must be >= 0");
    PreCheck out;
    if (N < 2) {
        out.kind = Classification::TooSmall;
        return out;
    }
    if (N == 2) {
        out.kind = Classification::Prime;
        return out;
    }
    if (N % 2 == 0) {
        out.kind = Classification::Even;
        return out;
    }
    if (ntheory::is_probable_prime(N)) {
        out.kind = Classification::Prime;
        return out;
    }
    if (const auto pp = ntheory::perfect_power(N)) {
        if (ntheory::is_probable_prime(pp->first)) {
            out.kind = Classification::PrimePower;
            out.base = pp->first;
            out.power = pp->second;
            return out;
        }
    }
    out.kind = Classification::Composite;
    return out;
}

DoublingScan doubling_multiset(const Int& a, const ntheory::Modulus& m) {
    DoublingScan scan;
    scan.multiset = ntheory::dyadic_ladder(a, m);
    const int M = m.M;
    // Fixed scan order: increasing t, and for each t the positive entries
    // a^(2^t') before the negative ones.
    for (int t = 1; t <= M && !scan.repetition; ++t) {
        for (int tp = 0; tp < t && !scan.repetition; ++tp) {
            if (scan.multiset[t] == scan.multiset[tp])
                scan.repetition = Repetition{t, tp, +1};
            else if (scan.multiset[t] == scan.multiset[M + 1 + tp])
                scan.repetition = Repetition{t, tp, -1};
        }
    }
    return scan;
}

std::pair<int, Int> extract_sq(const Int& a, const ntheory::Modulus& m,
                               const Repetition& rep) {
    if (rep.t <= rep.t_prime)
        throw ContractViolation("extract_sq: repetition requires t > t'");
    // a^(2^t) == a^(sign 2^t')  =>  a^(2^t' q) == 1 with q = 2^(t-t') -+ 1.
    const int dt = rep.t - rep.t_prime;
    const Int q = (Int(1) << dt) + (rep.sign > 0 ? -1 : +1);
    if (ntheory::mod_pow(a, (Int(1) << rep.t_prime) * q, m.N) != 1)
        throw ContractViolation("extract_sq: repetition does not certify a relation");
    int s = rep.t_prime;
    while (s > 0 && ntheory::mod_pow(a, (Int(1) << (s - 1)) * q, m.N) == 1) --s;
    return {s, q};
}

Int oddify(const Int& a, const ntheory::Modulus& m) {
    return ntheory::mod_pow(a, Int(1) << m.M, m.N);
}

Int lift_order(const Int& a, const Int& r_b, const ntheory::Modulus& m) {
    if (r_b < 1 || !boost::multiprecision::bit_test(r_b, 0))
        throw ContractViolation("lift_order: r_b must be odd and positive");
    Int y = ntheory::mod_pow(a, r_b, m.N);
    for (int k = 0; k <= m.M; ++k) {
        if (y == 1) return (Int(1) << k) * r_b;
        y = y * y % m.N;
    }
    throw ContractViolation("lift_order: a^(2^k r_b) != 1 for every k <= M");
}

std::optional<std::pair<Int, Int>> sqrt_attack(const Int& a, const Int& exponent_half,
                                               const Int& N) {
    const Int x = ntheory::mod_pow(a, exponent_half, N);
    if (x * x % N != 1)
        throw ContractViolation("sqrt_attack: a^(2*exponent_half) != 1 (mod N)");
    if (x == 1 || x == N - 1) return std::nullopt;
    const Int d1 = gcd(x - 1, N);
    const Int d2 = gcd(x + 1, N);
    if (!(d1 > 1 && d1 < N && N % d1 == 0 && d2 > 1 && d2 < N && N % d2 == 0))
        throw ContractViolation("sqrt_attack: square root failed to split N");
    return std::make_pair(d1, d2);
}

namespace {

void finish_success(FactorReport& report, TrialOutcome& trial,
                    std::pair<Int, Int> factors, const Int& N, std::ostream* log) {
    if (!(factors.first > 1 && factors.first < N && N % factors.first == 0))
        throw ContractViolation("algorithm1: invalid factor " + factors.first.str());
    trial.kind = TrialOutcome::Kind::Factor;
    trial.factors = factors;
    if (log && !trial.aggressive_shortcut)
        *log << "\nSUCCESS: N = " << factors.first << " * " << factors.second << "\n";
    Int lo = factors.first, hi = N / factors.first;
    if (lo > hi) std::swap(lo, hi);
    report.success = true;
    report.d1 = lo;
    report.d2 = hi;
}

}  // namespace

FactorReport algorithm1(const Int& N, const FactorConfig& cfg, std::ostream* log) {
    const PreCheck check = pre_check(N);
    if (check.kind != Classification::Composite)
        throw ContractViolation("algorithm1: N must be an odd composite non-prime-power");
    if (cfg.max_attempts < 1)
        throw ContractViolation("algorithm1: max_attempts must be >= 1");

    const ntheory::Modulus m = ntheory::make_modulus(N);
    Rng rng(cfg.seed);
    FactorReport report;
    report.n = N;
    const auto t_start = std::chrono::steady_clock::now();

    for (int attempt = 1; attempt <= cfg.max_attempts && !report.success; ++attempt) {
        report.attempts = attempt;
        TrialOutcome trial;
        trial.a = (attempt == 1 && cfg.forced_base) ? *cfg.forced_base
                                                    : 1 + rng.int_below(N - 1);
        const Int& a = trial.a;
        if (log) *log << "[attempt " << attempt << "] trying a = " << a << "\n";

        // (1) gcd shortcut
        const Int g = gcd(a, N);
        if (g > 1 && g < N) {
            if (log) *log << "  gcd shortcut: d = " << g << "\n";
            trial.reason = "gcd shortcut";
            finish_success(report, trial, {g, N / g}, N, log);
            report.trials.push_back(std::move(trial));
            break;
        }

        // (2)-(3) doubling multiset and early collision branch
        const DoublingScan scan = doubling_multiset(a, m);
        if (scan.repetition) {
            const auto [s, q] = extract_sq(a, m, *scan.repetition);
            trial.s = s;
            trial.q = q;
            if (s > 0) {
                if (auto f = sqrt_attack(a, (Int(1) << (s - 1)) * q, N)) {
                    if (log)
                        *log << "  early relation (s = " << s << ", q = " << q
                             << ") gives a factor\n";
                    trial.reason = "early relation";
                    finish_success(report, trial, *f, N, log);
                    report.trials.push_back(std::move(trial));
                    break;
                }
            }
            // s == 0 or a trivial gcd: fall through to the oddify path.
        }

        if (cfg.order_source == OrderSourceKind::Collision) {
            // The engine determines ord(a) directly, 2-part included, so the
            // oddify/lift detour is unnecessary on this path.
            const auto result = collisions::run_attempt(
                a, m, cfg.collision, derive_seed(cfg.seed, static_cast<std::uint64_t>(attempt)),
                log);
            trial.events = result.events;
            trial.aggressive_shortcut = result.aggressive_shortcut;
            if (result.order != 0) trial.order = result.order;
            if (result.status == collisions::AttemptResult::Status::FactorFound) {
                trial.reason = result.aggressive_shortcut ? "aggressive one-collision factor"
                                                          : "stabilized order";
                finish_success(report, trial, *result.factors, N, log);
                report.trials.push_back(std::move(trial));
                break;
            }
            switch (result.status) {
                case collisions::AttemptResult::Status::OrderOnly:
                    trial.reason = "trivial square root";
                    break;
                case collisions::AttemptResult::Status::ReductionStalled:
                    trial.reason = "order reduction stalled";
                    break;
                default:
                    trial.reason = "no stabilization";
                    break;
            }
        } else {
            // (4) oddify, (5) order of b, (6) lift and extract
            const Int b = oddify(a, m);
            Int r_b;
            try {
                if (cfg.order_source == OrderSourceKind::Oracle) {
                    r_b = ntheory::order_oracle(b, m);
                } else {
                    r_b = diffusion::recover_order(m, b, std::nullopt,
                                                   cfg.diffusion_support_guard);
                }
            } catch (const RoundingUnresolved&) {
                trial.reason = "order source unresolved";
                if (log) *log << "  diffusion rounding unresolved (restart)\n";
                report.trials.push_back(std::move(trial));
                if (log) *log << "\n";
                continue;
            } catch (const ResourceGuardExceeded&) {
                trial.reason = "order source guard exceeded";
                if (log) *log << "  diffusion state guard exceeded (restart)\n";
                report.trials.push_back(std::move(trial));
                if (log) *log << "\n";
                continue;
            }
            const Int r_a = lift_order(a, r_b, m);
            trial.order = r_a;
            if (log) *log << "  r_b = " << r_b << ", r_a = " << r_a << "\n";
            if (!boost::multiprecision::bit_test(r_a, 0)) {
                if (auto f = sqrt_attack(a, r_a >> 1, N)) {
                    trial.reason = "lifted order";
                    finish_success(report, trial, *f, N, log);
                    report.trials.push_back(std::move(trial));
                    break;
                }
                trial.reason = "trivial square root";
                if (log) *log << "  trivial square root (restart)\n";
            } else {
                trial.reason = "odd order";
                if (log) *log << "  odd order (restart)\n";
            }
        }
        report.trials.push_back(std::move(trial));
        if (log) *log << "\n";
    }

    report.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

double success_probability(int m) {
    if (m < 2) throw ContractViolation("success_probability: m must be >= 2");
    return 1.0 - std::ldexp(static_cast<double>(m + 1), -m);
}

double monte_carlo_success(const Int& N, long trials, Rng& rng) {
    if (trials < 1) throw ContractViolation("monte_carlo_success: trials must be >= 1");
    const ntheory::Modulus m = ntheory::make_modulus(N);
    std::map<Int, bool> cache;
    long hits = 0;
    for (long i = 0; i < trials; ++i) {
        Int a;
        do {
            a = 1 + rng.int_below(N - 1);
        } while (gcd(a, N) != 1);
        auto it = cache.find(a);
        if (it == cache.end()) {
            const Int r = ntheory::order_oracle(a, m);
            bool ok = false;
            if (!boost::multiprecision::bit_test(r, 0)) {
                const Int x = ntheory::mod_pow(a, r >> 1, N);
                ok = (x != 1 && x != N - 1);
            }
            it = cache.emplace(a, ok).first;
        }
        if (it->second) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace difact::factoring
