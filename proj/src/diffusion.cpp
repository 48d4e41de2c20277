#include "difact/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <variant>

namespace difact::diffusion {

namespace {

constexpr double kRoundGuard = 1e-6;

template <class R>
std::size_t index_of(const std::vector<R>& sorted, const R& x) {
    return static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
}

}  // namespace

CayleyWalk build_walk(const ntheory::Modulus& m, const Int& b) {
    CayleyWalk walk;
    walk.modulus = m;
    walk.gens = ntheory::dyadic_ladder(b, m);  // throws NonInvertible
    walk.base = walk.gens[0];
    return walk;
}

double HeatState::mass_at(const Int& x) const {
    const auto it = std::lower_bound(support.begin(), support.end(), x);
    if (it == support.end() || *it != x) return 0.0;
    return mass[it - support.begin()];
}

HeatState delta_state() {
    HeatState s;
    s.support = {Int(1)};
    s.mass = Eigen::VectorXd::Ones(1);
    s.n = 0;
    return s;
}

HeatState half_lazy_step(const HeatState& state, const CayleyWalk& walk) {
    const Int& N = walk.modulus.N;
    const int d = walk.degree();
    const std::size_t sz = state.support.size();

    std::vector<Int> prods(sz * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < sz; ++i)
        for (int j = 0; j < d; ++j)
            prods[i * d + j] = state.support[i] * walk.gens[j] % N;

    std::vector<Int> next = state.support;
    next.insert(next.end(), prods.begin(), prods.end());
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());

    HeatState out;
    out.mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(next.size()));
    const double lazy = 0.5;
    const double move = 0.5 / d;
    for (std::size_t i = 0; i < sz; ++i) {
        out.mass[static_cast<Eigen::Index>(index_of(next, state.support[i]))] +=
            lazy * state.mass[static_cast<Eigen::Index>(i)];
        for (int j = 0; j < d; ++j)
            out.mass[static_cast<Eigen::Index>(index_of(next, prods[i * d + j]))] +=
                move * state.mass[static_cast<Eigen::Index>(i)];
    }
    out.support = std::move(next);
    out.n = state.n + 1;
    return out;
}

long required_steps(const ntheory::Modulus& m) {
    long double lg = std::log2(m.N.convert_to<long double>());
    // The theorem is an inequality; never undercount.
    lg = std::nextafter(lg, std::numeric_limits<long double>::infinity());
    const long double prod = 4.0L * (m.M + 1) * (lg + 2.0L);
    return static_cast<long>(
        std::ceil(std::nextafter(prod, std::numeric_limits<long double>::infinity())));
}

// ---------------------------------------------------------------------------
// WalkSimulator

namespace {

inline std::uint64_t mul_res(std::uint64_t a, std::uint64_t b, std::uint64_t N) {
    return ntheory::detail::mulmod_u64(a, b, N);
}
inline Int mul_res(const Int& a, const Int& b, const Int& N) { return a * b % N; }

template <class R>
struct Core {
    R N;
    std::vector<R> gens;
    std::vector<R> support;  // sorted
    Eigen::VectorXd mass;
    long n = 0;
    std::size_t guard = 0;
    bool saturated = false;
    std::vector<std::int32_t> targets;  // i*d + j -> index, valid once saturated

    void init(const CayleyWalk& walk) {
        if constexpr (std::is_same_v<R, std::uint64_t>) {
            N = to_u64(walk.modulus.N);
            gens.reserve(walk.gens.size());
            for (const Int& g : walk.gens) gens.push_back(to_u64(g));
            support = {1};
        } else {
            N = walk.modulus.N;
            gens = walk.gens;
            support = {Int(1)};
        }
        mass = Eigen::VectorXd::Ones(1);
    }

    void step() {
        const int d = static_cast<int>(gens.size());
        if (saturated) {
            const std::size_t sz = support.size();
            Eigen::VectorXd next = 0.5 * mass;
            const double move = 0.5 / d;
            for (std::size_t i = 0; i < sz; ++i) {
                const double contrib = move * mass[static_cast<Eigen::Index>(i)];
                const std::int32_t* row = targets.data() + i * d;
                for (int j = 0; j < d; ++j) next[row[j]] += contrib;
            }
            mass.swap(next);
            ++n;
            return;
        }

        const std::size_t sz = support.size();
        std::vector<R> prods(sz * static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < sz; ++i)
            for (int j = 0; j < d; ++j)
                prods[i * d + j] = mul_res(support[i], gens[j], N);

        std::vector<R> next_support = support;
        next_support.insert(next_support.end(), prods.begin(), prods.end());
        std::sort(next_support.begin(), next_support.end());
        next_support.erase(std::unique(next_support.begin(), next_support.end()),
                           next_support.end());
        if (guard != 0 && next_support.size() > guard)
            throw ResourceGuardExceeded("walk support exceeded guard of " +
                                        std::to_string(guard) + " elements");

        const bool now_saturated = next_support == support;

        Eigen::VectorXd next =
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(next_support.size()));
        const double move = 0.5 / d;
        if (now_saturated) targets.resize(sz * static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < sz; ++i) {
            next[static_cast<Eigen::Index>(index_of(next_support, support[i]))] +=
                0.5 * mass[static_cast<Eigen::Index>(i)];
            for (int j = 0; j < d; ++j) {
                const std::size_t idx = index_of(next_support, prods[i * d + j]);
                next[static_cast<Eigen::Index>(idx)] +=
                    move * mass[static_cast<Eigen::Index>(i)];
                if (now_saturated) targets[i * d + j] = static_cast<std::int32_t>(idx);
            }
        }
        support = std::move(next_support);
        mass.swap(next);
        saturated = now_saturated;
        ++n;
    }

    double identity_mass() const {
        // The identity never leaves the support (half of its mass stays put).
        return mass[static_cast<Eigen::Index>(index_of(support, R(1)))];
    }
};

}  // namespace

struct WalkSimulator::Impl {
    CayleyWalk walk;
    std::variant<Core<std::uint64_t>, Core<Int>> core;
};

WalkSimulator::WalkSimulator(CayleyWalk walk, std::size_t support_guard)
    : impl_(std::make_unique<Impl>()) {
    impl_->walk = std::move(walk);
    if (impl_->walk.modulus.bit_len <= 62) {
        impl_->core.emplace<Core<std::uint64_t>>();
    } else {
        impl_->core.emplace<Core<Int>>();
    }
    std::visit(
        [&](auto& core) {
            core.init(impl_->walk);
            core.guard = support_guard;
        },
        impl_->core);
}

WalkSimulator::~WalkSimulator() = default;
WalkSimulator::WalkSimulator(WalkSimulator&&) noexcept = default;
WalkSimulator& WalkSimulator::operator=(WalkSimulator&&) noexcept = default;

void WalkSimulator::step() {
    std::visit([](auto& core) { core.step(); }, impl_->core);
}

long WalkSimulator::steps() const {
    return std::visit([](const auto& core) { return core.n; }, impl_->core);
}

double WalkSimulator::identity_mass() const {
    return std::visit([](const auto& core) { return core.identity_mass(); },
                      impl_->core);
}

double WalkSimulator::total_mass() const {
    return std::visit([](const auto& core) { return core.mass.sum(); }, impl_->core);
}

std::size_t WalkSimulator::support_size() const {
    return std::visit([](const auto& core) { return core.support.size(); },
                      impl_->core);
}

const CayleyWalk& WalkSimulator::walk() const { return impl_->walk; }

HeatState WalkSimulator::snapshot() const {
    HeatState s;
    std::visit(
        [&](const auto& core) {
            s.support.reserve(core.support.size());
            for (const auto& x : core.support) s.support.emplace_back(x);
            s.mass = core.mass;
            s.n = core.n;
        },
        impl_->core);
    return s;
}

Int recover_order(const ntheory::Modulus& m, const Int& b, std::optional<long> steps,
                  std::size_t support_guard) {
    const long n = steps.value_or(required_steps(m));
    WalkSimulator sim(build_walk(m, b), support_guard);
    while (sim.steps() < n) sim.step();
    const double p = sim.identity_mass();
    const double inv = 1.0 / p;
    const double nearest = std::round(inv);
    if (std::abs(inv - nearest) >= 0.5 - kRoundGuard)
        throw RoundingUnresolved("1/p_n(e) = " + std::to_string(inv) +
                                 " sits on a rounding boundary; n too small?");
    const Int r = static_cast<long long>(nearest);
    if (r < 1 || ntheory::mod_pow(b, r, m.N) != 1)
        throw VerificationFailed("rounded order r = " + r.str() +
                                 " fails b^r == 1 (mod N)");
    return r;
}

// ---------------------------------------------------------------------------
// Spectral backend

SpectralModel make_spectral(long r, int M) {
    if (r < 1) throw ContractViolation("make_spectral: r must be >= 1");
    if (M < 0) throw ContractViolation("make_spectral: M must be >= 0");
    SpectralModel model;
    model.r = r;
    model.M = M;
    model.mu.resize(r);
    model.lambda.resize(r);

    std::vector<std::uint64_t> shifts(static_cast<std::size_t>(M) + 1);
    std::uint64_t s = 1 % static_cast<std::uint64_t>(r);
    for (int t = 0; t <= M; ++t) {
        shifts[t] = s;
        s = s * 2 % static_cast<std::uint64_t>(r);
    }
    Eigen::ArrayXd cos_table(r);
    for (long j = 0; j < r; ++j)
        cos_table[j] = std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                static_cast<double>(r));

    const std::uint64_t ur = static_cast<std::uint64_t>(r);
    for (long k = 0; k < r; ++k) {
        double sum = 0.0;
        for (int t = 0; t <= M; ++t)
            sum += cos_table[static_cast<long>(
                ntheory::detail::mulmod_u64(static_cast<std::uint64_t>(k), shifts[t], ur))];
        model.mu[k] = sum / (M + 1);
    }
    model.lambda = (1.0 + model.mu) / 2.0;
    model.lambda[0] = 1.0;
    return model;
}

double spectral_heat_identity(const SpectralModel& model, long n) {
    if (n < 0) throw ContractViolation("spectral_heat_identity: n must be >= 0");
    // Neumaier-compensated sum of lambda_k^n.
    double sum = 0.0, comp = 0.0;
    for (long k = 0; k < model.r; ++k) {
        const double term = std::pow(model.lambda[k], static_cast<double>(n));
        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
    }
    return (sum + comp) / static_cast<double>(model.r);
}

double spectral_heat_identity(long r, int M, long n) {
    return spectral_heat_identity(make_spectral(r, M), n);
}

int doubling_witness(long k, long r, int M) {
    if (r < 2 || k < 1 || k > r - 1)
        throw ContractViolation("doubling_witness: need 1 <= k <= r-1");
    if (M < 63 && (1L << M) <= r)
        throw ContractViolation("doubling_witness: need 2^M > r");
    long a = k % r;
    for (int t = 0; t <= M; ++t) {
        if (4 * a >= r && 4 * a <= 3 * r) return t;
        a = (2 * a) % r;
    }
    throw WitnessNotFound("no doubling witness for k=" + std::to_string(k) +
                          ", r=" + std::to_string(r) + ", M=" + std::to_string(M));
}

double mixing_gap(long r, int M) {
    if (r < 2) throw ContractViolation("mixing_gap: r must be >= 2");
    if (M < 63 && (1L << M) <= r)
        throw ContractViolation("mixing_gap: need 2^M > r");
    const SpectralModel model = make_spectral(r, M);
    return model.lambda.segment(1, r - 1).maxCoeff();
}

// ---------------------------------------------------------------------------
// Dense exponent-coordinate walk

ExponentWalk::ExponentWalk(long r, int M) : r_(r), M_(M) {
    if (r < 1) throw ContractViolation("ExponentWalk: r must be >= 1");
    if (M < 0) throw ContractViolation("ExponentWalk: M must be >= 0");
    shifts_.resize(static_cast<std::size_t>(M) + 1);
    long s = 1 % r;
    for (int t = 0; t <= M; ++t) {
        shifts_[t] = s;
        s = s * 2 % r;
    }
    p_ = Eigen::VectorXd::Zero(r);
    p_[0] = 1.0;
    acc_ = Eigen::VectorXd::Zero(r);
}

void ExponentWalk::step() {
    acc_.setZero();
    for (const long s : shifts_) {
        if (s == 0) {
            acc_ += 2.0 * p_;
            continue;
        }
        // +s and -s rotations of p.
        for (const long sh : {s, r_ - s}) {
            acc_.segment(0, r_ - sh) += p_.segment(sh, r_ - sh);
            acc_.segment(r_ - sh, sh) += p_.segment(0, sh);
        }
    }
    p_ = 0.5 * p_ + (0.5 / (2.0 * (M_ + 1))) * acc_;
    ++n_;
}

void ExponentWalk::run_to(long n) {
    while (n_ < n) step();
}

void write_heat_series_csv(std::ostream& out, const std::vector<HeatSeriesRow>& rows) {
    out << "n,p_e,inv_p_e,rounded\n";
    char buf[96];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%lld\n", row.n, row.p_e,
                      row.inv_p_e, row.rounded);
        out << buf;
    }
}

}  // namespace difact::diffusion
