#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pretzel/charvariety.hpp"
#include "pretzel/multipoly.hpp"
#include "pretzel/sl2.hpp"

namespace pretzel {

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

// A word in the three generators, stored as (generator index, exponent)
// letters. Index 3 follows the same dictionary as RepTriple: it names the
// element whose image is the stored x3 (the inverse of the third arc), so
// every letter evaluates directly to a power of the matching matrix.
struct GroupWord {
    std::vector<std::pair<int, long>> letters;

    long exponent_sum() const;
};

// The longitude paired with the meridian x1, expanded into single letters of
// exponent ±1. The letter count is 4(k1+k2+k3+1); the exponent sum is 0,
// since every block pairs one generator with one inverse.
GroupWord longitude_word(const PretzelParams& params);

// Left-to-right product of the letter images: (index j, exponent e) maps to
// the e-th power of rep's j-th matrix. Throws domain_error on a generator
// index outside {1, 2, 3}.
Mat2 evaluate_word(const GroupWord& word, const RepTriple& rep);

// The longitude image assembled instead from the twist words
//   Y1 = x2 x3^{-1}, Y2 = x3 x1^{-1}, Y3 = x1 x2^{-1}
// as Y3^{-k3} Y2^{k2} Y1^{-k1-1} Y3^{k3} Y1^{-k1} Y2^{k2+1} — an independent
// evaluation path against which evaluate_word is cross-checked.
Mat2 longitude_matrix(const RepTriple& rep);

// Scaled commutator residual |LM - ML| / max(1, |L| |M|) of the longitude
// and meridian images; the longitude commutes with its meridian on genuine
// representations.
double commutation_residual(const RepTriple& rep);

// ---------------------------------------------------------------------------
// Peripheral eigenvalues
// ---------------------------------------------------------------------------

// Upper-left entries u of the meridian image and w of the longitude image,
// read in a frame where the meridian image is diagonal.
struct PeripheralPair {
    cdouble u{}, w{};
};

// Changes basis so X1 = diag(u, 1/u), reads w from the (then diagonal)
// longitude image, and verifies the linear reconstruction
//   rho(l) = ((w - 1/w)/(u - 1/u)) X1 + ((u/w - w/u)/(u - 1/u)) I
// to tol. The two eigenbasis choices produce (u, w) and (1/u, 1/w); the
// returned pair is the one with |u| > 1, or Im(u) > 0 when u lies on the
// unit circle. Throws domain_error when X1 is within 1e-10 of ±I, when u is
// within 1e-8 of ±1 (parabolic meridian — the reconstruction denominator
// vanishes), or when the longitude image fails to commute with X1.
PeripheralPair peripheral_pair(const RepTriple& rep, double tol = 1e-8);

// Scaled residual of (w+1) tr(B3 X2^{-1}) = (u + w/u) tr(B3), both traces
// measured from direct matrix products.
double peripheral_equation_residual(const RepTriple& rep, const PeripheralPair& pair);

// Scaled residual of (w+1) t (sigma1+2-lambda-t^2) = (u + w/u)(sigma1+2-2t^2)
// at a principal-component point — the trace-coordinate form of the same
// peripheral equation. Throws domain_error at t = 0.
double ap4_residual(const CharPoint& p, const PeripheralPair& pair);

// Samples `count` principal-component points, rebuilds a representation at
// each, and extracts its peripheral pair. Points whose representation fails
// to build are skipped (counted in *n_failed when given), so the result may
// hold fewer than `count` pairs. Deterministic in (params, count, seed).
std::vector<PeripheralPair> sample_peripheral_pairs(const PretzelParams& params, int count,
                                                    std::uint64_t seed, double tol = 1e-8,
                                                    int* n_failed = nullptr);

// ---------------------------------------------------------------------------
// Closed-form traces of B3 = Y1^{-k1} Y2^{k2+1}
// ---------------------------------------------------------------------------

struct B3Traces {
    cdouble trB3X2inv{}, trB3X1{}, trB3{};
};

// The closed forms, with beta_j = omega_{k_j}(s_j), kappa from the point's
// invariants, and D = (lambda-2-s1)(lambda-2-s2):
//   tr(B3 X2^{-1}) = t beta1 beta2 (sigma1+2-lambda-t^2) kappa / D,
//   tr(B3 X1)      = t beta1 beta2 (lambda-t^2)          kappa / D,
//   tr(B3)         =   beta1 beta2 (sigma1+2-2t^2)       kappa / D.
// They satisfy t tr(B3) = tr(B3 X2^{-1}) + tr(B3 X1) identically and are
// valid on the principal component. Throws domain_error at t = 0 or when a
// denominator factor |lambda-2-s_j| falls below 1e-12.
B3Traces b3_traces_closed(const CharPoint& p, const PretzelParams& params);

// The same three traces from direct matrix products; the oracle the closed
// forms are tested against.
B3Traces b3_traces_direct(const RepTriple& rep);

// ---------------------------------------------------------------------------
// The defining system in (u, w, s1, s2, s3, lambda)
// ---------------------------------------------------------------------------

// Replaces t by (u^2+1)/u and clears denominators by the minimal power of u
// (u = 0 is excluded anyway: u is an eigenvalue). A polynomial without t
// passes through unchanged.
MultiPoly clear_meridian_trace(const MultiPoly& p);

// The five defining polynomials whose common zeros, projected to (u, w), cut
// out the peripheral image of the principal component:
//   [0] (lambda-2-s1) gamma1 - (sigma1-s1-lambda) beta1
//   [1] (lambda-2-s2) gamma2 - (sigma1-s2-lambda) beta2
//   [2] (sigma1+2-2 lambda) alpha3 - (s3^2-s3 lambda+sigma1-2) beta3
//   [3] (u^2+1)^2 (lambda^2-(sigma1+2) lambda+sigma2+4)
//         - u^2 (4+sigma3+2 sigma2-sigma1^2)
//   [4] (w+1)(sigma1+2-lambda)(u^2+1) u^2 - (w+1)(u^2+1)^3
//         - (u^2+w)(sigma1+2) u^2 + 2 (u^2+w)(u^2+1)^2
// [3] and [4] are the t-cleared forms (via clear_meridian_trace) of
//   t^2 (lambda^2-(sigma1+2) lambda+sigma2+4) = 4+sigma3+2 sigma2-sigma1^2,
//   (w+1) t (sigma1+2-lambda-t^2) = (u + w/u)(sigma1+2-2t^2).
std::vector<MultiPoly> ap_system(const PretzelParams& params);

// ---------------------------------------------------------------------------
// Resultant elimination
// ---------------------------------------------------------------------------

// Bookkeeping for one elimination stage: what was eliminated, which member
// served as pivot, the shapes of the inputs and outputs, and what cleanup
// was applied.
struct StepInfo {
    std::string variable;                      // eliminated at this stage
    int pivot_degree = -1;                     // pivot's degree in it
    std::size_t pivot_terms = 0;
    std::vector<int> partner_degrees;          // degrees of the other members paired
    std::vector<std::string> contents_removed; // rational content divided from each resultant
    int square_free_applied = 0;               // outputs whose repeated factors were collapsed
    std::size_t passthrough = 0;               // members without the variable, carried over
    std::vector<int> output_degrees;           // total degrees of the stage outputs
    std::vector<std::size_t> output_terms;
    std::vector<std::string> notes;

    nlohmann::json to_json() const;
    static StepInfo from_json(const nlohmann::json& j); // throws std::invalid_argument
};

// Eliminates the named variables in order by iterated pairwise resultants.
// At each stage the member of lowest degree in the stage variable becomes
// the pivot (ties: fewer terms, then earlier position); resultants are taken
// against every other member containing the variable, each result is content-
// cleared, stripped of pure powers of u and w (eigenvalue coordinates, never
// zero on the varieties these systems describe), and, when a probe finds
// repeated factors, made square-free; members without the variable pass
// through. The final polynomial is content-cleared, square-free, with
// positive leading coefficient.
// Throws elimination_error naming the stage when a resultant vanishes or
// collapses to a constant, when a stage finds only one member containing its
// variable, or when the end result is zero or constant; throws domain_error
// when `order` has repeats. Stage resultants run in parallel; stages are
// sequential.
//
// A resultant vanishes identically exactly when the pivot and that partner
// share a factor of positive degree in the stage variable — a degenerate
// component planted in the system as a whole. With divide_common_factors set,
// the stage divides that gcd out of every member that carries it, notes the
// removed factor in the step record, and restarts on the reduced system
// instead of throwing; each round lowers the pivot's degree, so this
// terminates, and the error remains for systems that are degenerate through
// and through.
MultiPoly eliminate_chain(const std::vector<MultiPoly>& system,
                          const std::vector<std::string>& order,
                          std::vector<StepInfo>* steps = nullptr,
                          bool divide_common_factors = false);

// ---------------------------------------------------------------------------
// The hard part of the A-polynomial
// ---------------------------------------------------------------------------

// The bivariate polynomial in (u, w) carved out by the principal component's
// peripheral image, plus everything recorded along the way.
struct APolyResult {
    MultiPoly poly; // integer coefficients, primitive, square-free
    std::vector<std::string> elimination_order;
    std::vector<StepInfo> steps;
    PretzelParams knot;
    // Factors of poly among {u, w, u±1, w±1} — candidates for adjudication
    // against samples (reported, never removed automatically).
    std::vector<std::string> small_factors;
    bool from_cache = false;

    nlohmann::json to_json() const;
    static APolyResult from_json(const nlohmann::json& j); // throws std::invalid_argument
};

// The elimination orders tried in sequence when none is requested.
const std::vector<std::vector<std::string>>& default_elimination_orders();

// Cache directory: the argument if nonempty, else $APOLY_CACHE_DIR, else a
// fixed directory under the system temp path.
std::string resolve_cache_dir(const std::string& cache_dir = "");

// ap_system -> eliminate_chain -> normalization (integer-cleared, primitive,
// square-free, positive leading coefficient). When no order is given, the
// default orders are tried until one succeeds; a requested order must be a
// permutation of {s1, s2, s3, lambda} and is tried alone. Every attempt runs
// with common-factor recovery enabled (the system carries a degenerate
// component that different orders expose as identically-zero resultants) and
// under a fixed arithmetic work budget, so an order whose intermediates blow
// up is abandoned deterministically and the search advances to the next one;
// an explicitly requested order gets a larger budget. Results are cached on
// disk keyed by (knot, order), written atomically; cache hits set from_cache.
// Knots outside k1, k2 <= 2, k3 <= 2 are refused up front with a
// size-estimate error (resultant degrees grow exponentially in the twist
// counts). Throws domain_error when every order fails.
APolyResult hard_apoly(const PretzelParams& params,
                       std::optional<std::vector<std::string>> order = std::nullopt,
                       const std::string& cache_dir = "");

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

// |p(point)| divided by the largest term magnitude at the point, accumulated
// in mantissa/exponent form so huge coefficients cannot overflow. The point
// must cover every variable of p. Zero polynomial -> 0.
double scaled_point_residual(const MultiPoly& p, const std::map<std::string, cdouble>& point);
double scaled_residual(const MultiPoly& p, cdouble u, cdouble w);

struct SampleResidual {
    PeripheralPair pair;
    double scaled_residual = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<SampleResidual> samples;
    int n_pass = 0, n_fail = 0;
    double max_scaled_residual = 0.0;
    std::vector<std::string> unsupported_factors;
};

// Evaluates the polynomial at each pair (pass when the scaled residual is
// below tol) and adjudicates the recorded small factors: a factor vanishing
// at no sample is listed as unsupported. An empty sample list yields zero
// counts, no error, and no adjudication.
VerificationReport verify_apoly(const APolyResult& result,
                                const std::vector<PeripheralPair>& samples, double tol = 1e-6);

} // namespace pretzel
