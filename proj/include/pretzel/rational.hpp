#pragma once

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

namespace pretzel {

// Exact arithmetic lives on GMP. mpq_class is kept canonical by gmpxx
// (reduced, positive denominator), which is exactly the invariant we need.
using Rational = mpq_class;
using BigInt = mpz_class;

inline Rational rat(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

// Exact conversion: doubles are dyadic rationals.
inline Rational rat_from_double(double x) {
    Rational q(x);
    q.canonicalize();
    return q;
}

// mantissa*2^exp decomposition that cannot overflow for huge integers.
struct ScaledDouble {
    double mantissa = 0.0; // in [0.5, 1) up to sign, 0 for zero
    long exp2 = 0;
};

inline ScaledDouble to_scaled_double(const BigInt& z) {
    if (z == 0) return {0.0, 0};
    long e = 0;
    double m = mpz_get_d_2exp(&e, z.get_mpz_t());
    return {m, e};
}

inline ScaledDouble to_scaled_double(const Rational& q) {
    if (q == 0) return {0.0, 0};
    long en = 0, ed = 0;
    double mn = mpz_get_d_2exp(&en, q.get_num().get_mpz_t());
    double md = mpz_get_d_2exp(&ed, q.get_den().get_mpz_t());
    return {mn / md, en - ed};
}

// Plain double conversion; safe for the moderate values used in numerics.
inline double to_double(const Rational& q) { return q.get_d(); }

inline std::string to_string(const BigInt& z) { return z.get_str(); }
inline std::string to_string(const Rational& q) { return q.get_str(); }

} // namespace pretzel
