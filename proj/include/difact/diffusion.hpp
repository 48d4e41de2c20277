#pragma once

#include "difact/errors.hpp"
#include "difact/integer.hpp"
#include "difact/ntheory.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace difact::diffusion {

/// The dyadic Cayley walk on <b> inside (Z/NZ)*.  The generating multiset
/// is S = { b^(+2^t), b^(-2^t) : 0 <= t <= M }; duplicates are retained, so
/// the walk degree is always d = 2(M+1).
struct CayleyWalk {
    ntheory::Modulus modulus;
    Int base;
    std::vector<Int> gens;  // [t] = b^(2^t), [M+1+t] = b^(-2^t)

    int degree() const { return static_cast<int>(gens.size()); }
};

/// Builds the generator ladder with one inversion plus 2M modular squarings.
/// Throws NonInvertible(gcd) when gcd(b, N) > 1.
CayleyWalk build_walk(const ntheory::Modulus& m, const Int& b);

/// An l1-normalized mass distribution over group elements.  Support is kept
/// sorted so that accumulation order (and hence the floating-point result)
/// is deterministic.  Renormalization is deliberately never applied: total
/// mass drifting from 1 is a bug detector, not a nuisance.
struct HeatState {
    std::vector<Int> support;  // sorted ascending, unique
    Eigen::VectorXd mass;      // aligned with support
    long n = 0;

    double mass_at(const Int& x) const;
    double identity_mass() const { return mass_at(Int(1)); }
    double total_mass() const { return mass.sum(); }
};

/// Delta distribution at the identity.
HeatState delta_state();

/// One application of W = (I + P)/2 where P averages over the generator
/// multiset.  The support grows by one generator-neighborhood per step;
/// the full Cayley graph is never materialized.
HeatState half_lazy_step(const HeatState& state, const CayleyWalk& walk);

/// Step budget n0 = ceil(4(M+1)(log2 N + 2)); every intermediate quantity
/// is rounded up, never down.
long required_steps(const ntheory::Modulus& m);

/// Incremental walk driver.  Semantically identical to iterating
/// half_lazy_step; internally it switches to an indexed transition table
/// once the support stops growing, and to 64-bit residues when N allows.
class WalkSimulator {
public:
    /// support_guard = 0 means unguarded; otherwise a support exceeding the
    /// guard throws ResourceGuardExceeded.
    explicit WalkSimulator(CayleyWalk walk, std::size_t support_guard = 0);
    ~WalkSimulator();
    WalkSimulator(WalkSimulator&&) noexcept;
    WalkSimulator& operator=(WalkSimulator&&) noexcept;

    void step();
    long steps() const;
    double identity_mass() const;
    double total_mass() const;
    std::size_t support_size() const;
    const CayleyWalk& walk() const;

    /// Materializes the current state with big-integer keys.
    HeatState snapshot() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Runs n steps (default required_steps) from the delta state and rounds
/// 1/p_n(e).  Throws RoundingUnresolved when the value sits within the
/// guard band of a half-integer, and VerificationFailed when b^r != 1.
Int recover_order(const ntheory::Modulus& m, const Int& b,
                  std::optional<long> steps = std::nullopt,
                  std::size_t support_guard = 0);

/// Closed-form eigenvalues of W on Z/rZ: mu_k is the cosine character sum
/// over the dyadic shifts, lambda_k = (1 + mu_k)/2.
struct SpectralModel {
    long r = 0;
    int M = 0;
    Eigen::ArrayXd mu;
    Eigen::ArrayXd lambda;
};

SpectralModel make_spectral(long r, int M);

/// (W^n delta_0)(0) = (1/r) sum_k lambda_k^n, with compensated summation.
double spectral_heat_identity(const SpectralModel& model, long n);
double spectral_heat_identity(long r, int M, long n);

/// Least t in [0, M] with k*2^t mod r in [r/4, 3r/4] (compared exactly as
/// 4*(k*2^t mod r) in [r, 3r]).  Requires 2^M > r; WitnessNotFound is a
/// proof-of-bug under that precondition.
int doubling_witness(long k, long r, int M);

/// max_{1<=k<r} lambda_k.  Requires 2^M > r >= 2; the result is guaranteed
/// <= 1 - 1/(2(M+1)).
double mixing_gap(long r, int M);

/// Dense walk in exponent coordinates on Z/rZ (usable only when r is known,
/// e.g. supplied by the oracle).  Conjugate to the group-coordinate walk via
/// j -> b^j.
class ExponentWalk {
public:
    ExponentWalk(long r, int M);

    void step();
    void run_to(long n);
    long steps() const { return n_; }
    long order() const { return r_; }
    double identity_mass() const { return p_[0]; }
    const Eigen::VectorXd& distribution() const { return p_; }

private:
    long r_;
    int M_;
    long n_ = 0;
    std::vector<long> shifts_;  // 2^t mod r, t = 0..M
    Eigen::VectorXd p_, acc_;
};

/// One row of the heat-kernel series the CLI emits.
struct HeatSeriesRow {
    long n;
    double p_e;
    double inv_p_e;
    long long rounded;
};

/// Exact column layout: "n,p_e,inv_p_e,rounded".
void write_heat_series_csv(std::ostream& out, const std::vector<HeatSeriesRow>& rows);

}  // namespace difact::diffusion
