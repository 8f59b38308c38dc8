#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pretzel/errors.hpp"
#include "pretzel/rational.hpp"

namespace pretzel {

// The global variable order: the eight canonical names first, in this fixed
// sequence, then any other name alphabetically after them. Term order is
// graded lexicographic (total degree first, then lex on the exponent tuple).
int canonical_var_rank(const std::string& name); // 0..7 for canonical names, -1 otherwise
bool var_precedes(const std::string& a, const std::string& b);

using Exponents = std::vector<std::uint32_t>;

// "Less" for std::map such that iteration starts at the leading term:
// higher total degree first, ties broken lexicographically (higher exponent
// on an earlier variable first).
struct GradedLexDesc {
    bool operator()(const Exponents& a, const Exponents& b) const;
};

// Sparse multivariate polynomial with exact rational coefficients. Immutable
// value semantics; every operation returns a canonical form (no zero terms,
// no unused variables, variables sorted by the global order).
class MultiPoly {
public:
    using TermMap = std::map<Exponents, Rational, GradedLexDesc>;

    MultiPoly() = default; // the zero polynomial

    static MultiPoly constant(const Rational& c);
    static MultiPoly from_long(long v);
    static MultiPoly var(const std::string& name, std::uint32_t power = 1);
    // Builds a canonical polynomial from raw parts (used by deserialization).
    static MultiPoly from_terms(std::vector<std::string> vars,
                                std::vector<std::pair<Exponents, Rational>> terms);

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const { return vars_.empty(); }
    Rational constant_value() const; // throws domain_error unless is_constant()

    const std::vector<std::string>& vars() const { return vars_; }
    const TermMap& terms() const { return terms_; }
    std::size_t term_count() const { return terms_.size(); }
    bool has_var(const std::string& v) const;
    int var_index(const std::string& v) const; // -1 if absent

    int degree(const std::string& v) const; // -1 for the zero polynomial
    int total_degree() const;               // -1 for the zero polynomial
    const Rational& leading_coeff() const;  // graded-lex leading term; throws on zero

    MultiPoly operator-() const;
    MultiPoly& operator+=(const MultiPoly& o);
    MultiPoly& operator-=(const MultiPoly& o);
    MultiPoly& operator*=(const MultiPoly& o) { *this = *this * o; return *this; }
    MultiPoly& operator*=(const Rational& c);
    friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { a += b; return a; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { a -= b; return a; }
    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b);
    friend MultiPoly operator*(MultiPoly a, const Rational& c) { a *= c; return a; }
    friend MultiPoly operator*(const Rational& c, MultiPoly a) { a *= c; return a; }
    friend bool operator==(const MultiPoly& a, const MultiPoly& b);
    friend bool operator!=(const MultiPoly& a, const MultiPoly& b) { return !(a == b); }

    MultiPoly pow(long k) const; // throws domain_error for k < 0

    // Replaces every occurrence of v by value (which may be any polynomial).
    MultiPoly substitute(const std::string& v, const MultiPoly& value) const;
    MultiPoly derivative(const std::string& v) const;

    // Coefficients as polynomials in the remaining variables; index = power
    // of v. A polynomial not involving v yields {*this}.
    std::vector<MultiPoly> coeffs_in(const std::string& v) const;
    MultiPoly coeff_of(const std::string& v, std::uint32_t power) const;
    static MultiPoly from_coeffs(const std::vector<MultiPoly>& cs, const std::string& v);

    // Numeric evaluation; the assignment must cover every variable.
    std::complex<double> evaluate(const std::map<std::string, std::complex<double>>& point) const;
    // Exact integer evaluation (requires integer coefficients).
    BigInt evaluate_int(const std::map<std::string, BigInt>& point) const;

    // Canonical display: terms in graded-lex order, denominators cleared by
    // the lcm (so the text represents the polynomial up to a positive
    // constant), e.g. "3*u^2*w - 2*u + 1".
    std::string to_text() const;
    nlohmann::json to_json() const;
    // Throws std::invalid_argument on malformed input.
    static MultiPoly from_json(const nlohmann::json& j);

private:
    std::vector<std::string> vars_; // sorted by var_precedes, deduplicated
    TermMap terms_;                 // keys all have size vars_.size()

    // Removes zero terms, drops variables with exponent zero everywhere.
    void prune();
};

// p = content * primitive with integer primitive part of coefficient gcd 1
// and positive leading coefficient; the content carries sign and scale.
struct ContentPrimitive {
    Rational content;
    MultiPoly primitive;
};
ContentPrimitive content_primitive(const MultiPoly& p);
MultiPoly primitive_part(const MultiPoly& p);

// Exact division in Q[vars]; nullopt when d does not divide n.
std::optional<MultiPoly> try_divide_exact(const MultiPoly& n, const MultiPoly& d);
MultiPoly divide_exact(const MultiPoly& n, const MultiPoly& d); // throws domain_error

// Greatest common divisor over Q[vars], returned integer-primitive with
// positive leading coefficient (content/subresultant-PRS recursion).
MultiPoly poly_gcd(const MultiPoly& a, const MultiPoly& b);

// Resultant with respect to v: determinant of the Sylvester matrix, computed
// by fraction-free Bareiss elimination with exact polynomial divisions.
MultiPoly resultant_uni(const MultiPoly& p, const MultiPoly& q, const std::string& v);

// p with repeated factors in v collapsed: primitive part of p / gcd(p, dp/dv).
MultiPoly square_free(const MultiPoly& p, const std::string& v);
// Product of the distinct irreducible factors of p over all variables.
MultiPoly square_free_part(const MultiPoly& p);

// Cheap deterministic repeated-factor test: specializes all variables but one
// to fixed small integers and inspects gcd(q, q') of the resulting univariate,
// for each variable in turn. A true result means no probe found a repeated
// factor, so running square_free_part would (almost surely) change nothing; a
// false result is a hint that the exact reduction is worth its cost. Either
// answer is safe: the roots of p are what they are, this only guides whether
// to spend time collapsing multiplicities.
bool probably_square_free(const MultiPoly& p);

// Splits off the largest monomial dividing p: p = monomial * rest.
struct MonomialSplit {
    Exponents exponents; // aligned with p.vars()
    MultiPoly rest;
};
MonomialSplit strip_monomial(const MultiPoly& p);

// Arms a deterministic work budget for polynomial arithmetic while alive.
// Every multiplication charges (#terms of a) * (#terms of b) against the
// budget before doing the work; when the running total passes the limit, the
// arithmetic throws budget_exceeded. The counter is shared process-wide, so
// worker threads spawned under one scope draw on the same budget and an
// over-budget computation is abandoned everywhere. The measure counts
// operations, not wall-clock time, so whether a computation fits the budget
// is machine-independent and reproducible. Scopes do not nest.
class BudgetScope {
public:
    explicit BudgetScope(std::uint64_t limit); // throws domain_error if one is active
    ~BudgetScope();
    BudgetScope(const BudgetScope&) = delete;
    BudgetScope& operator=(const BudgetScope&) = delete;

    static std::uint64_t used(); // work charged so far (0 when disarmed)
};

} // namespace pretzel
