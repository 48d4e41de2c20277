#pragma once

#include "difact/integer.hpp"

#include <stdexcept>
#include <string>

namespace difact {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inversion failed because gcd(a, N) > 1.  The gcd is carried along:
/// a nontrivial gcd with N is itself a factoring success.
class NonInvertible : public Error {
public:
    explicit NonInvertible(Int g)
        : Error("not invertible: gcd = " + g.str()), gcd_(std::move(g)) {}
    const Int& gcd() const { return gcd_; }

private:
    Int gcd_;
};

/// A stated precondition was violated by the caller (or a proof-of-bug
/// condition fired that should be impossible).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// order_oracle refuses inputs beyond its enumeration range rather than
/// silently brute-forcing; tests must fail loudly, not hang.
class OutOfOracleRange : public Error {
public:
    using Error::Error;
};

/// Factorization effort budget exceeded.
class FactorizationStall : public Error {
public:
    using Error::Error;
};

/// 1/p_n(e) landed too close to a half-integer to round safely.
class RoundingUnresolved : public Error {
public:
    using Error::Error;
};

/// The recovered order failed the b^r == 1 post-check.
class VerificationFailed : public Error {
public:
    using Error::Error;
};

/// No doubling witness t <= M exists; impossible when 2^M > r, so raising
/// this is a proof-of-bug.
class WitnessNotFound : public Error {
public:
    using Error::Error;
};

/// A configured resource guard (state size, table size) was exceeded.
class ResourceGuardExceeded : public Error {
public:
    using Error::Error;
};

}  // namespace difact
