#pragma once

#include <array>
#include <complex>
#include <string>

#include "pretzel/errors.hpp"
#include "pretzel/rng.hpp"

namespace pretzel {

using cdouble = std::complex<double>;

struct Mat2 {
    cdouble a{0.0}, b{0.0}, c{0.0}, d{0.0}; // row-major [[a, b], [c, d]]

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    cdouble trace() const { return a + d; }
    cdouble det() const { return a * d - b * c; }
    Mat2 inverse() const; // throws domain_error when the determinant vanishes
    double norm_max() const;

    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    friend Mat2 operator+(const Mat2& x, const Mat2& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
    }
    friend Mat2 operator-(const Mat2& x, const Mat2& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
    }
    friend Mat2 operator*(cdouble s, const Mat2& x) {
        return {s * x.a, s * x.b, s * x.c, s * x.d};
    }
};

double distance_max(const Mat2& x, const Mat2& y);
bool approx_sl2(const Mat2& x, double tol = 1e-8);

// X^k = omega_k(t) X - omega_{k-1}(t) I for X in SL(2,C) with t = tr X;
// k may be negative (k = -1 recovers X^{-1} = tI - X).
Mat2 sl2_power(const Mat2& x, long k);

// Residuals of the two product identities valid in SL(2,C):
//   X Y X = tr(XY) X - Y^{-1}
//   XY + YX = (tr(XY) - tr(X) tr(Y)) I + tr(Y) X + tr(X) Y
struct PairIdentityResiduals {
    double xyx;
    double anticommutator;
};
PairIdentityResiduals trace_identity_residuals(const Mat2& x, const Mat2& y);

// True iff {I, X, Y, XY} is linearly independent (no common eigenvector),
// decided by the numerical rank of the 4x4 flattening via SVD. Throws
// domain_error when X or Y lies within tol of ±I.
bool is_regular_pair(const Mat2& x, const Mat2& y, double tol = 1e-8);

// True iff no single direction is an eigenvector of all three matrices.
bool is_regular_triple(const Mat2& x1, const Mat2& x2, const Mat2& x3, double tol = 1e-8);

// The seven trace coordinates of a triple with a common trace.
struct TraceData {
    cdouble t;             // tr X1 = tr X2 = tr X3
    cdouble t12, t23, t13; // tr(X1X2), tr(X2X3), tr(X1X3)
    cdouble t123;          // tr(X1X2X3)
};

TraceData measure_traces(const Mat2& x1, const Mat2& x2, const Mat2& x3);

// The monic quadratic x^2 - nu1*x + nu0 whose roots are the two values of
// tr(X1X2X3) compatible with the given single and pair traces.
struct TripleTraceQuadratic {
    cdouble nu0, nu1;
    std::array<cdouble, 2> roots;
    // Records which printed form of nu0 is in use: the symmetric expansion
    // t12^2 + t23^2 + t13^2 (a common transcription shows t13 twice where
    // this term list requires t12).
    std::string normalization;
};
TripleTraceQuadratic triple_trace_quadratic(cdouble t, cdouble t12, cdouble t23, cdouble t13);

// |t123^2 - nu1*t123 + nu0| for the data's own t123.
double admissibility_residual(const TraceData& d);

struct Mat2Triple {
    Mat2 x1, x2, x3;
};

// Reconstructs a triple in SL(2,C) realizing the seven trace coordinates,
// with X1 upper triangular. Tries the eigenvalue branches in a canonical
// order and throws domain_error when the data is inadmissible or every
// branch degenerates.
Mat2Triple realize_triple(const TraceData& data, double tol = 1e-8);

// Test helpers: random elements with entries from a centered box.
Mat2 random_sl2(SplitMix64& rng, double box = 1.5);
Mat2 random_sl2_with_trace(SplitMix64& rng, cdouble t, double box = 1.5);

} // namespace pretzel
