#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pretzel/chebyshev.hpp"
#include "pretzel/multipoly.hpp"
#include "pretzel/sl2.hpp"

namespace pretzel {

// The knot P(2k1+1, 2k2+1, 2k3). The acceptance window keeps the odd twist
// counts positive (k1, k2 >= 0) and the even one nonzero (k3 >= 1).
struct PretzelParams {
    long k1 = 0, k2 = 0, k3 = 1;

    PretzelParams() = default;
    PretzelParams(long k1_, long k2_, long k3_); // throws domain_error outside the window

    std::string name() const; // e.g. "P(1,1,2)"
};

// A point of the ambient space C^5 in the trace coordinates
//   t   = common trace of the three meridian generators,
//   s_j = trace of the twist-region word Y_j,
//   tau = t^3 + t - tr(X1 X2 X3).
struct CharPoint {
    cdouble t{}, s1{}, s2{}, s3{}, tau{};
};

// Scalars attached to a point: the elementary symmetric functions of the s_j,
// delta, kappa, lambda = tau / t, and r = t^3 + t - tau.
struct Invariants {
    cdouble sigma1{}, sigma2{}, sigma3{};
    cdouble delta{}, kappa{};
    cdouble lambda{}; // meaningful only when has_lambda
    cdouble r{};
    bool has_lambda = false;
};

// Computes all scalars. lambda = tau / t requires t != 0: requesting it at
// t == 0 throws domain_error; pass want_lambda = false there.
Invariants point_invariants(const CharPoint& p, bool want_lambda = true);

// |kappa - delta| at the point: the defining equation of the ambient variety.
double kappa_delta_residual(const CharPoint& p);

// kappa - delta as an exact polynomial in (t, s1, s2, s3, tau).
MultiPoly kappa_minus_delta();

// A candidate triple of SL(2,C) matrices for the three generator images
// (x3 enters through its inverse, so the relations below are polynomial).
struct RepTriple {
    Mat2 x1, x2, x3;
    PretzelParams params;
};

// Max entry-norm difference of the two sides of each of the three defining
// relations of the knot group, evaluated by direct matrix products with
// powers taken through sl2_power.
double relation_residual(const RepTriple& rep);

// The three comparison words A_j = Y_j^{k_j} X_{j+} Y_j^{-k_j} X_{j-}; the
// relations hold exactly when A1 = A2 = A3. a3_alt is the second defining
// form of A3 (conjugating X2^{-1} instead of X1^{-1}); the two agree on any
// genuine representation.
struct AMatrices {
    Mat2 a1, a2, a3, a3_alt;
};
AMatrices a_matrices(const RepTriple& rep);

// Max pairwise entry distance among {a1, a2, a3}.
double a_equality_residual(const AMatrices& am);

// Closed-form trace of A_j. side = 1 or 2:
//   tr(A_j) = 2 - (s + 2 - t^2) (gamma - beta)^2,
// side = 3:
//   tr(A_3) = 2 + (s - 2) (s + 2 - t^2) beta^2,
// with (alpha, beta, gamma) the omega triple of k at s.
cdouble aj_trace_closed(cdouble t, cdouble s, long k, int side);

// One irreducible piece of the character variety as a constructible set:
// common zeros of `equations` minus zeros of each of `inequations`.
// All polynomials live in (t, s1, s2, s3, tau), except that the principal
// component also uses the auxiliary variable lambda, tied to the ambient
// coordinates by its first equation t*lambda - tau.
struct ComponentSystem {
    std::string label; // "X0_1", "X0_2", "X1_1", "X1_2", "X1_3", "X2(h1,h2,h3)", "X3"
    std::vector<MultiPoly> equations;
    std::vector<MultiPoly> inequations;
    // Alternative exclusion set where the two source descriptions of the
    // component disagree (X0_2 only); empty elsewhere.
    std::vector<MultiPoly> alt_inequations;
    std::string notes;
    // X2 components share one equation set; the numeric anchor singles out
    // which cosine point the component sits over.
    bool has_anchor = false;
    std::array<double, 3> s_anchor{0.0, 0.0, 0.0};
};

std::vector<ComponentSystem> component_systems(const PretzelParams& params);

// The three defining equations of the principal component, in the variables
// (s1, s2, s3, lambda):
//   j = 1, 2:  (lambda - 2 - s_j) gamma_j - (sigma1 - s_j - lambda) beta_j
//   j = 3:     (sigma1 + 2 - 2 lambda) alpha_3 - (s3^2 - s3 lambda + sigma1 - 2) beta_3
MultiPoly x3_equation(const PretzelParams& params, int j); // j in {1, 2, 3}

// One enumerated component of the compact family: indices, the cosine point
// it sits over, the conic it traces in (t, tau), and the exact conditions
// that define the family's interior members.
struct X2Entry {
    long h1 = 0, h2 = 0, h3 = 0;
    double s1 = 0, s2 = 0, s3 = 0;
    MultiPoly conic;                         // ambient equation with s pinned, in (t, tau)
    std::vector<MultiPoly> exact_conditions; // {gamma1 - beta1, gamma2 - beta2, beta3}
    // True when the index triple sits at an end of its range (h1 = k1,
    // h2 = k2, or h3 = 0); there the exact conditions do not vanish and the
    // component's status is settled numerically, not symbolically.
    bool endpoint = false;
};

// All (k1+1)(k2+1)k3 entries, ordered lexicographically by (h1, h2, h3).
std::vector<X2Entry> enumerate_x2(const PretzelParams& params);

// Points on one X2 conic: t drawn like the principal-component sampler, tau
// solved from the conic's quadratic. Deterministic in (entry, count, seed).
std::vector<CharPoint> sample_x2_conic(const X2Entry& entry, int count, std::uint64_t seed);

// Classifies a t = 0 point against the three exclusive cases of the t = 0
// dichotomy; returns the sorted subset of {1, 2, 3} whose exact conditions
// hold within tol. Throws domain_error when |t| > tol. Case 3 additionally
// demands each s_j be real in [-2, 2] (a real cosine angle).
std::vector<int> classify_t0(const CharPoint& p, const PretzelParams& params, double tol = 1e-8);

// Labels of every component whose inequations all have magnitude > ineq_margin
// and whose equations all have magnitude < tol at p. X2 components must also
// match their numeric anchor to within anchor_radius.
std::vector<std::string> membership(const CharPoint& p, const PretzelParams& params,
                                    double tol = 1e-8, double ineq_margin = 1e-6,
                                    double anchor_radius = 1e-3);

// Bookkeeping from a sampling run: how many t draws were spent, how many raw
// candidates the elimination produced, and what was rejected and why.
struct SampleDiagnostics {
    int draws = 0;
    int raw_candidates = 0;
    int polished = 0;
    int rejected = 0;
    std::vector<std::string> notes;
};

// Samples `count` points of the principal component: draws random rational t
// away from 0 and ±2, eliminates the defining system down to one variable by
// exact resultants, extracts roots, back-substitutes, Newton-polishes on the
// full system, and keeps points whose equation residuals are < tol with
// inequation margins > 1e-6. Draws are independent and seeded per index, so
// output depends only on (params, count, seed). Throws domain_error when the
// draw budget is exhausted before `count` points are found.
std::vector<CharPoint> sample_x3(const PretzelParams& params, int count, std::uint64_t seed,
                                 double tol = 1e-8, SampleDiagnostics* diag = nullptr);

// Rebuilds an explicit matrix triple from a point: requires nonempty
// membership, assembles the seven trace coordinates through the dictionary
//   tr(X1X2) = t^2 - s3, tr(X2X3) = t^2 - s1, tr(X1X3) = t^2 - s2,
//   tr(X1X2X3) = t^3 + t - tau,
// realizes a triple with those traces, and demands relation_residual < tol.
// Throws domain_error when membership is empty, the trace data is
// inadmissible, or the residual check fails (the last case flags a
// discrepancy between a component's description and the relations).
RepTriple build_representation(const CharPoint& p, const PretzelParams& params, double tol = 1e-8);

// Non-throwing variant for adjudication sweeps: nullopt on any failure. When
// a triple was constructed, *residual_out (if given) receives its relation
// residual even if the triple was rejected.
std::optional<RepTriple> try_build_representation(const CharPoint& p, const PretzelParams& params,
                                                  double tol = 1e-8,
                                                  double* residual_out = nullptr);

} // namespace pretzel
