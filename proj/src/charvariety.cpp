#include "pretzel/charvariety.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "pretzel/errors.hpp"
#include "pretzel/rational.hpp"
#include "pretzel/rng.hpp"
#include "pretzel/roots.hpp"

namespace pretzel {

namespace {

MultiPoly c(long v) { return MultiPoly::from_long(v); }

const double kPi = 3.14159265358979323846264338327950288;

std::string join_notes(const std::vector<std::string>& notes, std::size_t limit = 6) {
    std::ostringstream os;
    for (std::size_t i = 0; i < notes.size() && i < limit; ++i) {
        if (i) os << "; ";
        os << notes[i];
    }
    if (notes.size() > limit) os << "; ...";
    return os.str();
}

} // namespace

PretzelParams::PretzelParams(long k1_, long k2_, long k3_) : k1(k1_), k2(k2_), k3(k3_) {
    if (k1 < 0 || k2 < 0)
        throw domain_error("PretzelParams: k1 and k2 must be >= 0 (odd twist counts positive)");
    if (k3 < 1) throw domain_error("PretzelParams: k3 must be >= 1 (even twist count nonzero)");
}

std::string PretzelParams::name() const {
    std::ostringstream os;
    os << "P(" << 2 * k1 + 1 << "," << 2 * k2 + 1 << "," << 2 * k3 << ")";
    return os.str();
}

Invariants point_invariants(const CharPoint& p, bool want_lambda) {
    Invariants v;
    v.sigma1 = p.s1 + p.s2 + p.s3;
    v.sigma2 = p.s1 * p.s2 + p.s2 * p.s3 + p.s3 * p.s1;
    v.sigma3 = p.s1 * p.s2 * p.s3;
    v.delta = 4.0 + v.sigma3 + 2.0 * v.sigma2 - v.sigma1 * v.sigma1;
    v.kappa = p.tau * p.tau - p.t * (v.sigma1 + 2.0) * p.tau + p.t * p.t * (v.sigma2 + 4.0);
    v.r = p.t * p.t * p.t + p.t - p.tau;
    if (want_lambda) {
        if (p.t == cdouble(0.0)) throw domain_error("lambda = tau/t is undefined at t = 0");
        v.lambda = p.tau / p.t;
        v.has_lambda = true;
    }
    return v;
}

double kappa_delta_residual(const CharPoint& p) {
    Invariants v = point_invariants(p, false);
    return std::abs(v.kappa - v.delta);
}

MultiPoly kappa_minus_delta() {
    MultiPoly t = MultiPoly::var("t"), tau = MultiPoly::var("tau");
    MultiPoly s1 = MultiPoly::var("s1"), s2 = MultiPoly::var("s2"), s3 = MultiPoly::var("s3");
    MultiPoly sig1 = s1 + s2 + s3;
    MultiPoly sig2 = s1 * s2 + s2 * s3 + s3 * s1;
    MultiPoly sig3 = s1 * s2 * s3;
    MultiPoly kappa = tau * tau - t * (sig1 + c(2)) * tau + t * t * (sig2 + c(4));
    MultiPoly delta = c(4) + sig3 + c(2) * sig2 - sig1 * sig1;
    return kappa - delta;
}

// ---------------------------------------------------------------------------
// Matrix-side checks
// ---------------------------------------------------------------------------

namespace {

Mat2 conj_by_power(const Mat2& y, long k, const Mat2& m) {
    return sl2_power(y, k) * m * sl2_power(y, -k);
}

} // namespace

double relation_residual(const RepTriple& rep) {
    const Mat2 &x1 = rep.x1, &x2 = rep.x2, &x3 = rep.x3;
    const Mat2 y1 = x2 * x3.inverse();
    const Mat2 y2 = x3 * x1.inverse();
    const Mat2 y3 = x1 * x2.inverse();
    const long k1 = rep.params.k1, k2 = rep.params.k2, k3 = rep.params.k3;
    const double r1 = distance_max(conj_by_power(y1, k1, x2), conj_by_power(y2, k2 + 1, x1));
    const double r2 = distance_max(conj_by_power(y2, k2, x3), conj_by_power(y3, k3, x1.inverse()));
    const double r3 = distance_max(conj_by_power(y3, k3, x2), conj_by_power(y1, k1 + 1, x3.inverse()));
    return std::max(r1, std::max(r2, r3));
}

AMatrices a_matrices(const RepTriple& rep) {
    const Mat2 &x1 = rep.x1, &x2 = rep.x2, &x3 = rep.x3;
    const Mat2 y1 = x2 * x3.inverse();
    const Mat2 y2 = x3 * x1.inverse();
    const Mat2 y3 = x1 * x2.inverse();
    const long k1 = rep.params.k1, k2 = rep.params.k2, k3 = rep.params.k3;
    AMatrices am;
    am.a1 = sl2_power(y1, k1) * x2 * sl2_power(y1, -k1) * x3;
    am.a2 = sl2_power(y2, k2) * x3 * sl2_power(y2, -k2) * x1;
    am.a3 = sl2_power(y3, k3) * x1.inverse() * sl2_power(y3, -k3) * x1;
    am.a3_alt = sl2_power(y3, k3) * x2.inverse() * sl2_power(y3, -k3) * x2;
    return am;
}

double a_equality_residual(const AMatrices& am) {
    return std::max(distance_max(am.a1, am.a2),
                    std::max(distance_max(am.a1, am.a3), distance_max(am.a2, am.a3)));
}

cdouble aj_trace_closed(cdouble t, cdouble s, long k, int side) {
    OmegaTripleValue w = omega_triple_eval(k, s);
    if (side == 1 || side == 2) {
        cdouble d = w.gamma - w.beta;
        return 2.0 - (s + 2.0 - t * t) * d * d;
    }
    if (side == 3) return 2.0 + (s - 2.0) * (s + 2.0 - t * t) * w.beta * w.beta;
    throw domain_error("aj_trace_closed: side must be 1, 2, or 3");
}

// ---------------------------------------------------------------------------
// Symbolic component systems
// ---------------------------------------------------------------------------

MultiPoly x3_equation(const PretzelParams& params, int j) {
    MultiPoly s1 = MultiPoly::var("s1"), s2 = MultiPoly::var("s2"), s3 = MultiPoly::var("s3");
    MultiPoly lam = MultiPoly::var("lambda");
    MultiPoly sig1 = s1 + s2 + s3;
    if (j == 1 || j == 2) {
        const long k = (j == 1) ? params.k1 : params.k2;
        const std::string v = (j == 1) ? "s1" : "s2";
        const MultiPoly s = MultiPoly::var(v);
        OmegaTriple w = omega_triple(k, v);
        return (lam - c(2) - s) * w.gamma - (sig1 - s - lam) * w.beta;
    }
    if (j == 3) {
        OmegaTriple w = omega_triple(params.k3, "s3");
        return (sig1 + c(2) - c(2) * lam) * w.alpha - (s3 * s3 - s3 * lam + sig1 - c(2)) * w.beta;
    }
    throw domain_error("x3_equation: j must be 1, 2, or 3");
}

namespace {

MultiPoly delta_poly() {
    MultiPoly s1 = MultiPoly::var("s1"), s2 = MultiPoly::var("s2"), s3 = MultiPoly::var("s3");
    MultiPoly sig1 = s1 + s2 + s3;
    MultiPoly sig2 = s1 * s2 + s2 * s3 + s3 * s1;
    MultiPoly sig3 = s1 * s2 * s3;
    return c(4) + sig3 + c(2) * sig2 - sig1 * sig1;
}

std::string x2_label(long h1, long h2, long h3) {
    std::ostringstream os;
    os << "X2(" << h1 << "," << h2 << "," << h3 << ")";
    return os.str();
}

} // namespace

std::vector<X2Entry> enumerate_x2(const PretzelParams& params) {
    std::vector<X2Entry> out;
    const MultiPoly t = MultiPoly::var("t"), tau = MultiPoly::var("tau");
    OmegaTriple w1 = omega_triple(params.k1, "s1");
    OmegaTriple w2 = omega_triple(params.k2, "s2");
    OmegaTriple w3 = omega_triple(params.k3, "s3");
    const std::vector<MultiPoly> exact = {w1.gamma - w1.beta, w2.gamma - w2.beta, w3.beta};
    for (long h1 = 0; h1 <= params.k1; ++h1)
        for (long h2 = 0; h2 <= params.k2; ++h2)
            for (long h3 = 0; h3 < params.k3; ++h3) {
                X2Entry e;
                e.h1 = h1;
                e.h2 = h2;
                e.h3 = h3;
                e.s1 = 2.0 * std::cos((2.0 * h1 + 1.0) * kPi / (2.0 * params.k1 + 1.0));
                e.s2 = 2.0 * std::cos((2.0 * h2 + 1.0) * kPi / (2.0 * params.k2 + 1.0));
                e.s3 = 2.0 * std::cos(h3 * kPi / params.k3);
                const double sig1 = e.s1 + e.s2 + e.s3;
                const double sig2 = e.s1 * e.s2 + e.s2 * e.s3 + e.s3 * e.s1;
                const double sig3 = e.s1 * e.s2 * e.s3;
                const double delta = 4.0 + sig3 + 2.0 * sig2 - sig1 * sig1;
                e.conic = tau * tau - rat_from_double(sig1 + 2.0) * t * tau +
                          rat_from_double(sig2 + 4.0) * t * t -
                          MultiPoly::constant(rat_from_double(delta));
                e.exact_conditions = exact;
                e.endpoint = (h1 == params.k1) || (h2 == params.k2) || (h3 == 0);
                out.push_back(std::move(e));
            }
    return out;
}

std::vector<ComponentSystem> component_systems(const PretzelParams& params) {
    std::vector<ComponentSystem> out;
    const MultiPoly kd = kappa_minus_delta();
    const MultiPoly t = MultiPoly::var("t"), tau = MultiPoly::var("tau");
    const MultiPoly s1 = MultiPoly::var("s1"), s2 = MultiPoly::var("s2"),
                    s3 = MultiPoly::var("s3");
    const MultiPoly lam = MultiPoly::var("lambda");
    const MultiPoly sig1 = s1 + s2 + s3;
    OmegaTriple w1 = omega_triple(params.k1, "s1");
    OmegaTriple w2 = omega_triple(params.k2, "s2");
    OmegaTriple w3 = omega_triple(params.k3, "s3");

    {
        ComponentSystem cs;
        cs.label = "X0_1";
        cs.equations = {t, w1.gamma + w1.beta, w2.gamma + w2.beta, w3.beta, kd};
        cs.inequations = {tau};
        cs.notes = "isolated characters at t = 0 with tau nonzero; empty whenever one of the "
                   "exact conditions is a nonzero constant";
        out.push_back(std::move(cs));
    }
    {
        ComponentSystem cs;
        cs.label = "X0_2";
        cs.equations = {t,
                        tau,
                        delta_poly(),
                        first_kind_poly(2 * params.k1 + 1, "s1") -
                            first_kind_poly(2 * params.k2 + 1, "s2"),
                        first_kind_poly(2 * params.k2 + 1, "s2") -
                            first_kind_poly(2 * params.k3, "s3"),
                        kd};
        cs.inequations = {first_kind_poly(2 * params.k1 + 1, "s1") + c(2)};
        cs.alt_inequations = {first_kind_poly(2 * params.k1 + 1, "s1") + c(2),
                              first_kind_poly(2 * params.k1 + 1, "s1") - c(2)};
        cs.notes = "t = tau = 0 with equal first-kind values across the three twist regions; "
                   "the primary exclusion keeps that common value away from -2, the alternative "
                   "set also excludes +2 (the two descriptions in use differ); real cosine "
                   "angles are understood";
        out.push_back(std::move(cs));
    }
    {
        ComponentSystem cs;
        cs.label = "X1_1";
        cs.equations = {w2.gamma - w2.beta, w3.gamma - w3.beta, t * t - s1 - c(2),
                        t * t - s2 - s3, kd};
        cs.notes = "t^2 pinned by s1 + 2 = s2 + s3; exact conditions on the second and third "
                   "twist regions";
        out.push_back(std::move(cs));
    }
    {
        ComponentSystem cs;
        cs.label = "X1_2";
        cs.equations = {w3.gamma - w3.beta, w1.gamma - w1.beta, t * t - s2 - c(2),
                        t * t - s3 - s1, kd};
        cs.notes = "t^2 pinned by s2 + 2 = s3 + s1; exact conditions on the third and first "
                   "twist regions";
        out.push_back(std::move(cs));
    }
    {
        ComponentSystem cs;
        cs.label = "X1_3";
        cs.equations = {t * t - c(4), s3 - c(2), w1.gamma - w1.beta, w2.gamma - w2.beta, kd};
        cs.notes = "t = +/-2 and s3 = 2";
        out.push_back(std::move(cs));
    }
    for (const X2Entry& e : enumerate_x2(params)) {
        ComponentSystem cs;
        cs.label = x2_label(e.h1, e.h2, e.h3);
        cs.equations = {e.exact_conditions[0], e.exact_conditions[1], e.exact_conditions[2], kd};
        cs.has_anchor = true;
        cs.s_anchor = {e.s1, e.s2, e.s3};
        std::ostringstream os;
        os << "conic over the cosine anchor (" << e.s1 << ", " << e.s2 << ", " << e.s3 << ")";
        if (e.endpoint)
            os << "; endpoint index: the exact conditions do not vanish at this anchor, so the "
                  "component is adjudicated numerically rather than symbolically";
        cs.notes = os.str();
        out.push_back(std::move(cs));
    }
    {
        ComponentSystem cs;
        cs.label = "X3";
        cs.equations = {t * lam - tau, x3_equation(params, 1), x3_equation(params, 2),
                        x3_equation(params, 3), kd};
        cs.inequations = {t, sig1 + c(2) - c(2) * lam};
        cs.notes = "principal one-dimensional family; lambda is tied to the ambient coordinates "
                   "by its first equation";
        out.push_back(std::move(cs));
    }
    return out;
}

// ---------------------------------------------------------------------------
// t = 0 classification and membership
// ---------------------------------------------------------------------------

std::vector<int> classify_t0(const CharPoint& p, const PretzelParams& params, double tol) {
    if (std::abs(p.t) > tol) throw domain_error("classify_t0: point does not have t = 0");
    std::vector<int> labels;
    OmegaTripleValue w1 = omega_triple_eval(params.k1, p.s1);
    OmegaTripleValue w2 = omega_triple_eval(params.k2, p.s2);
    OmegaTripleValue w3 = omega_triple_eval(params.k3, p.s3);

    const bool b1 = std::abs(w1.gamma - w1.beta) < tol && std::abs(w2.gamma - w2.beta) < tol &&
                    std::abs(first_kind_eval(2 * params.k3, p.s3) + 2.0) < tol;
    if (b1) labels.push_back(1);

    const bool b2 = std::abs(w1.gamma + w1.beta) < tol && std::abs(w2.gamma + w2.beta) < tol &&
                    std::abs(w3.beta) < tol;
    if (b2) labels.push_back(2);

    Invariants inv = point_invariants(p, false);
    if (std::abs(inv.delta) < tol) {
        const cdouble p1 = first_kind_eval(2 * params.k1 + 1, p.s1);
        const cdouble p2 = first_kind_eval(2 * params.k2 + 1, p.s2);
        const cdouble p3 = first_kind_eval(2 * params.k3, p.s3);
        bool real_angles = true;
        for (cdouble s : {p.s1, p.s2, p.s3})
            real_angles = real_angles && std::abs(s.imag()) <= tol && std::abs(s.real()) <= 2.0 + tol;
        if (real_angles && std::abs(p1 - p2) < tol && std::abs(p2 - p3) < tol &&
            std::abs(p1 - 2.0) > tol && std::abs(p1 + 2.0) > tol)
            labels.push_back(3);
    }
    return labels;
}

namespace {

std::map<std::string, cdouble> point_map(const CharPoint& p) {
    return {{"t", p.t}, {"s1", p.s1}, {"s2", p.s2}, {"s3", p.s3}, {"tau", p.tau}};
}

bool system_needs_lambda(const ComponentSystem& cs) {
    for (const MultiPoly& e : cs.equations)
        if (e.has_var("lambda")) return true;
    for (const MultiPoly& e : cs.inequations)
        if (e.has_var("lambda")) return true;
    return false;
}

} // namespace

std::vector<std::string> membership(const CharPoint& p, const PretzelParams& params, double tol,
                                    double ineq_margin, double anchor_radius) {
    std::vector<std::string> out;
    std::map<std::string, cdouble> base = point_map(p);
    const bool have_lambda = std::abs(p.t) > ineq_margin;
    std::map<std::string, cdouble> with_lambda = base;
    if (have_lambda) with_lambda["lambda"] = p.tau / p.t;

    for (const ComponentSystem& cs : component_systems(params)) {
        const bool needs_lambda = system_needs_lambda(cs);
        if (needs_lambda && !have_lambda) continue; // its t-inequation already failed
        const std::map<std::string, cdouble>& m = needs_lambda ? with_lambda : base;

        bool ok = true;
        for (const MultiPoly& q : cs.inequations)
            ok = ok && std::abs(q.evaluate(m)) > ineq_margin;
        if (ok && cs.has_anchor) {
            ok = std::abs(p.s1 - cs.s_anchor[0]) <= anchor_radius &&
                 std::abs(p.s2 - cs.s_anchor[1]) <= anchor_radius &&
                 std::abs(p.s3 - cs.s_anchor[2]) <= anchor_radius;
        }
        if (!ok) continue;
        for (const MultiPoly& q : cs.equations)
            ok = ok && std::abs(q.evaluate(m)) < tol;
        if (ok) out.push_back(cs.label);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sampling the principal component
// ---------------------------------------------------------------------------

namespace {

// |p(point)| normalized by the largest single-term magnitude, so the measure
// is meaningful whatever the coefficient scale.
double loose_scaled_residual(const MultiPoly& p, const std::map<std::string, cdouble>& point) {
    if (p.is_zero()) return 0.0;
    cdouble sum = 0.0;
    double biggest = 0.0;
    const auto& vars = p.vars();
    for (const auto& [expo, coeff] : p.terms()) {
        cdouble term = to_double(coeff);
        for (std::size_t i = 0; i < vars.size(); ++i) {
            const cdouble x = point.at(vars[i]);
            for (std::uint32_t e = 0; e < expo[i]; ++e) term *= x;
        }
        sum += term;
        biggest = std::max(biggest, std::abs(term));
    }
    return std::abs(sum) / (1.0 + biggest);
}

struct TowerStage {
    std::string var;               // variable eliminated at this stage
    std::vector<MultiPoly> system; // the system as it stood before elimination
};

struct EliminationTower {
    std::vector<TowerStage> stages;
    MultiPoly final_poly; // square-free univariate in the last variable
    // When the last elimination stage would need an oversized exact resultant,
    // final_poly stays empty and the candidates for the last variable are read
    // off numerically instead: the stage's Sylvester determinant, evaluated on
    // an interpolation circle once the free parameters are bound.
    bool det_final = false;
};

void push_unique(std::vector<MultiPoly>& list, MultiPoly p) {
    for (const MultiPoly& q : list)
        if (q == p) return;
    list.push_back(std::move(p));
}

struct TowerBuilder {
    std::vector<std::string> order;
    std::string last_var;
    std::vector<std::string> free_vars;
    // Polynomials known to be nonzero on every sought solution (enforced
    // inequations): any exact factor of them is divided out of the system and
    // of every intermediate resultant. This removes no solution of interest
    // and breaks the positive-dimensional degenerate families that would
    // otherwise make later resultants vanish identically.
    std::vector<MultiPoly> saturators;
    std::vector<EliminationTower> towers;
    std::vector<std::string> dead_notes;

    bool is_free(const std::string& v) const {
        return std::find(free_vars.begin(), free_vars.end(), v) != free_vars.end();
    }

    MultiPoly saturate(MultiPoly p) const {
        for (const MultiPoly& s : saturators) {
            for (;;) {
                if (p.is_constant()) return p;
                std::optional<MultiPoly> q = try_divide_exact(p, s);
                if (!q) break;
                p = std::move(*q);
            }
        }
        return p;
    }

    // Runs stages [stage..) of the iterated pairwise-resultant elimination: at
    // each stage the lowest-degree polynomial in the stage variable is the
    // pivot, and every other polynomial mentioning the variable gets replaced
    // by its resultant with the pivot. Intermediate polynomials are kept
    // integer-primitive, and repeated factors are collapsed exactly whenever
    // the cheap probe reports them (skipping the reduction when the probe
    // finds nothing loses no roots, it only carries a larger polynomial
    // forward). Variables in `free_vars` are never eliminated: they stay as
    // symbolic parameters, so one tower serves every value bound in later.
    //
    // A vanishing resultant means the pivot P and the other polynomial Q share
    // a factor G in the stage variable. The solution set splits exactly as
    // {P = Q = 0} = {G = 0} union {P/G = Q/G = 0}, so the elimination forks
    // into those two branches and each continues independently. A branch whose
    // system becomes inconsistent or stops constraining the remaining
    // variables is discarded with a note: such a branch carries no isolated
    // solutions a univariate root extraction could enumerate (in practice it
    // is the positive-dimensional locus the component's inequations exclude).
    void run(std::vector<TowerStage> stages, std::vector<MultiPoly> system, std::size_t stage) {
        for (; stage < order.size(); ++stage) {
            const std::string& v = order[stage];
            std::vector<MultiPoly> cleaned;
            for (MultiPoly& p : system) {
                if (p.is_zero()) continue;
                if (p.is_constant()) {
                    dead_notes.push_back("branch inconsistent before eliminating " + v);
                    return;
                }
                push_unique(cleaned, std::move(p));
            }
            std::vector<MultiPoly> with_v, without_v;
            for (MultiPoly& p : cleaned)
                (p.has_var(v) ? with_v : without_v).push_back(std::move(p));
            if (with_v.empty()) {
                dead_notes.push_back("branch leaves " + v + " unconstrained");
                return;
            }

            std::size_t pivot = 0;
            for (std::size_t i = 1; i < with_v.size(); ++i)
                if (with_v[i].degree(v) < with_v[pivot].degree(v)) pivot = i;

            // An exact resultant over polynomial entries grows superlinearly
            // with the Sylvester size; at the last stage a numeric determinant
            // extraction gives the same candidates for a fraction of the cost.
            if (stage + 1 == order.size()) {
                int worst = 0;
                for (std::size_t i = 0; i < with_v.size(); ++i)
                    if (i != pivot)
                        worst = std::max(worst, with_v[pivot].degree(v) + with_v[i].degree(v));
                if (worst > 13) {
                    for (MultiPoly& p : without_v) with_v.push_back(std::move(p));
                    stages.push_back({v, std::move(with_v)});
                    towers.push_back({std::move(stages), MultiPoly(), true});
                    return;
                }
            }

            std::vector<MultiPoly> next = without_v;
            for (std::size_t i = 0; i < with_v.size(); ++i) {
                if (i == pivot) continue;
                MultiPoly r = resultant_uni(with_v[pivot], with_v[i], v);
                if (r.is_zero()) {
                    const MultiPoly g = poly_gcd(with_v[pivot], with_v[i]);
                    std::vector<MultiPoly> shared = without_v, coprime = without_v;
                    shared.push_back(g);
                    coprime.push_back(divide_exact(with_v[pivot], g));
                    coprime.push_back(divide_exact(with_v[i], g));
                    for (std::size_t k = 0; k < with_v.size(); ++k) {
                        if (k == pivot || k == i) continue;
                        shared.push_back(with_v[k]);
                        coprime.push_back(with_v[k]);
                    }
                    run(stages, std::move(shared), stage);
                    run(std::move(stages), std::move(coprime), stage);
                    return;
                }
                r = saturate(primitive_part(r));
                if (!probably_square_free(r)) r = square_free_part(r);
                if (r.is_constant()) {
                    dead_notes.push_back("branch has no common zeros over " + v);
                    return;
                }
                push_unique(next, std::move(r));
            }
            // Only the polynomials that mention v matter when solving for it
            // on the way back up; pass-throughs reappear in later stages.
            stages.push_back({v, std::move(with_v)});
            system = std::move(next);
        }

        MultiPoly final_poly;
        for (MultiPoly& p : system) {
            if (p.is_zero()) continue;
            if (p.is_constant() || !p.has_var(last_var)) {
                dead_notes.push_back("branch inconsistent in " + last_var);
                return;
            }
            for (const auto& v : p.vars())
                if (p.has_var(v) && v != last_var && !is_free(v)) {
                    dead_notes.push_back("branch left a non-univariate remainder in " + v);
                    return;
                }
            final_poly = final_poly.is_zero() ? std::move(p) : poly_gcd(final_poly, p);
            if (final_poly.is_constant()) {
                dead_notes.push_back("branch has no common roots in " + last_var);
                return;
            }
        }
        if (final_poly.is_zero()) {
            dead_notes.push_back("branch leaves " + last_var + " unconstrained");
            return;
        }
        towers.push_back({std::move(stages), square_free_part(final_poly)});
    }
};

std::vector<EliminationTower> build_towers(std::vector<MultiPoly> system,
                                           const std::vector<std::string>& order,
                                           const std::string& last_var,
                                           const std::vector<std::string>& free_vars,
                                           std::vector<MultiPoly> saturators = {}) {
    TowerBuilder builder{order, last_var, free_vars, std::move(saturators), {}, {}};
    for (MultiPoly& p : system) p = builder.saturate(std::move(p));
    builder.run({}, std::move(system), 0);
    if (builder.towers.empty())
        throw elimination_error("every elimination branch died: " + join_notes(builder.dead_notes),
                                last_var, order.size());
    return builder.towers;
}

// Complex coefficients of p seen as a univariate in v, all other variables
// bound; trailing near-zero leading coefficients are trimmed.
std::vector<cdouble> bound_coeffs(const MultiPoly& p, const std::string& v,
                                  const std::map<std::string, cdouble>& bindings) {
    std::vector<MultiPoly> cs = p.coeffs_in(v);
    std::vector<cdouble> out(cs.size());
    double biggest = 0.0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        out[i] = cs[i].is_zero() ? cdouble(0.0) : cs[i].evaluate(bindings);
        biggest = std::max(biggest, std::abs(out[i]));
    }
    while (out.size() > 1 && std::abs(out.back()) <= 1e-12 * (1.0 + biggest)) out.pop_back();
    return out;
}

using Binding = std::map<std::string, cdouble>;

// Common zeros (v, w) of p and q with all other variables bound. Viewed in w,
// the Sylvester matrix of the two bound polynomials (taken in v) is a matrix
// polynomial S(w) of low degree; S(w*) is singular exactly at the resultant's
// zeros w*, which are the finite eigenvalues of the companion linearization
// C0 - w C1. A deterministic shift-invert turns that generalized problem into
// a standard dense eigenproblem, which is backward stable; infinite
// eigenvalues (from a singular leading coefficient) land at the shift and are
// discarded by the magnitude filter. Each candidate w* then binds both
// polynomials to univariates in v whose root sets are cross-matched: spurious
// eigenvalues share no root and drop out, while a genuine one hands back
// every common v (eigenvector-based extraction would be cheaper but turns
// unreliable when the crowded spectrum leaves the vectors ill-conditioned).
std::vector<std::pair<cdouble, cdouble>> det_pairs(const MultiPoly& p, const MultiPoly& q,
                                                   const std::string& v, const std::string& w,
                                                   const Binding& base) {
    // Coefficients in v as polynomials of w alone (everything else bound).
    auto layers = [&](const MultiPoly& poly) {
        std::vector<std::vector<cdouble>> out;
        for (const MultiPoly& c : poly.coeffs_in(v)) out.push_back(bound_coeffs(c, w, base));
        return out;
    };
    auto trim = [](std::vector<std::vector<cdouble>> cs) {
        auto tiny = [](const std::vector<cdouble>& layer) {
            double mag = 0.0;
            for (const cdouble& c : layer) mag = std::max(mag, std::abs(c));
            return mag <= 1e-12;
        };
        while (cs.size() > 1 && tiny(cs.back())) cs.pop_back();
        return cs;
    };
    const std::vector<std::vector<cdouble>> pc = trim(layers(p)), qc = trim(layers(q));
    const int m = static_cast<int>(pc.size()) - 1, n = static_cast<int>(qc.size()) - 1;
    if (m < 1 || n < 1) return {}; // degenerated under this binding
    const int N = m + n;

    // One scale per polynomial keeps the pencil entries O(1).
    auto row_scale = [](const std::vector<std::vector<cdouble>>& cs) {
        double biggest = 0.0;
        for (const auto& layer : cs)
            for (const cdouble& c : layer) biggest = std::max(biggest, std::abs(c));
        return biggest > 0.0 ? 1.0 / biggest : 1.0;
    };
    const double scale_p = row_scale(pc), scale_q = row_scale(qc);

    int deg = 0;
    for (const auto& layer : pc) deg = std::max(deg, static_cast<int>(layer.size()) - 1);
    for (const auto& layer : qc) deg = std::max(deg, static_cast<int>(layer.size()) - 1);

    // S_k: the w^k coefficient of the Sylvester matrix.
    std::vector<Eigen::MatrixXcd> S(static_cast<std::size_t>(deg) + 1,
                                    Eigen::MatrixXcd::Zero(N, N));
    auto put = [&](int row, int col, const std::vector<cdouble>& layer, double scale) {
        for (std::size_t k = 0; k < layer.size(); ++k) S[k](row, col) = scale * layer[k];
    };
    for (int i = 0; i < n; ++i)
        for (int k = 0; k <= m; ++k) put(i, i + k, pc[static_cast<std::size_t>(m - k)], scale_p);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k <= n; ++k)
            put(n + i, i + k, qc[static_cast<std::size_t>(n - k)], scale_q);

    if (deg == 0) return {}; // resultant does not involve w under this binding

    // Companion pencil C0 - w C1 of the matrix polynomial sum S_k w^k.
    const int D = N * deg;
    Eigen::MatrixXcd C0 = Eigen::MatrixXcd::Zero(D, D), C1 = Eigen::MatrixXcd::Zero(D, D);
    for (int b = 0; b + 1 < deg; ++b) C0.block(b * N, (b + 1) * N, N, N).setIdentity();
    for (int b = 0; b < deg; ++b)
        C0.block((deg - 1) * N, b * N, N, N) = -S[static_cast<std::size_t>(b)];
    for (int b = 0; b + 1 < deg; ++b) C1.block(b * N, b * N, N, N).setIdentity();
    C1.block((deg - 1) * N, (deg - 1) * N, N, N) = S[static_cast<std::size_t>(deg)];

    // Shift-invert: eigenvalues mu of (C0 - shift C1)^(-1) C1 give
    // w = shift + 1/mu; a second shift covers the rare singular first one.
    std::vector<cdouble> w_candidates;
    for (const cdouble shift : {cdouble(0.8125, 0.59375), cdouble(-1.21875, 0.84375)}) {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(C0 - shift * C1);
        const Eigen::MatrixXcd T = lu.solve(C1);
        if (!T.allFinite()) continue;
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(T, /*computeEigenvectors=*/false);
        if (eig.info() != Eigen::Success) continue;
        for (int i = 0; i < eig.eigenvalues().size(); ++i) {
            const cdouble mu = eig.eigenvalues()(i);
            if (std::abs(mu) < 1e-8) continue; // eigenvalue at infinity
            const cdouble w_val = shift + 1.0 / mu;
            if (!(std::abs(w_val) < 1e6)) continue;
            bool dup = false;
            for (const cdouble& seen : w_candidates)
                dup = dup || std::abs(seen - w_val) < 1e-9 * (1.0 + std::abs(seen));
            if (!dup) w_candidates.push_back(w_val);
        }
        if (!w_candidates.empty()) break;
    }

    // Bind each candidate w and intersect the root sets of the two
    // univariates in v. Leading coefficients that die under the binding are
    // trimmed (their roots escaped to infinity), and a failed iteration just
    // drops that candidate.
    auto bind_at = [](const std::vector<std::vector<cdouble>>& cs, cdouble w_val) {
        std::vector<cdouble> out(cs.size());
        double top = 0.0;
        for (std::size_t k = 0; k < cs.size(); ++k) {
            cdouble acc = 0.0;
            for (std::size_t j = cs[k].size(); j-- > 0;) acc = acc * w_val + cs[k][j];
            out[k] = acc;
            top = std::max(top, std::abs(acc));
        }
        while (out.size() > 1 && std::abs(out.back()) <= 1e-10 * top) out.pop_back();
        return out;
    };
    std::vector<std::pair<cdouble, cdouble>> pairs;
    for (const cdouble w_val : w_candidates) {
        const std::vector<cdouble> cp = bind_at(pc, w_val), cq = bind_at(qc, w_val);
        if (cp.size() < 2 || cq.size() < 2) continue;
        std::vector<cdouble> rp, rq;
        try {
            rp = uni_roots(cp);
            rq = uni_roots(cq);
        } catch (const root_failure&) {
            continue;
        }
        for (const cdouble vp : rp) {
            double best = 1e300;
            cdouble match = 0.0;
            for (const cdouble vq : rq) {
                const double d = std::abs(vp - vq);
                if (d < best) {
                    best = d;
                    match = vq;
                }
            }
            if (best >= 1e-3 * (1.0 + std::abs(vp))) continue;
            const cdouble v_val = 0.5 * (vp + match);
            bool dup = false;
            for (const auto& [sw, sv] : pairs)
                dup = dup || (std::abs(sw - w_val) < 1e-6 * (1.0 + std::abs(sw)) &&
                              std::abs(sv - v_val) < 1e-6 * (1.0 + std::abs(sv)));
            if (!dup) pairs.emplace_back(w_val, v_val);
        }
    }
    return pairs;
}

std::vector<Binding> back_substitute(const EliminationTower& tower, const std::string& last_var,
                                     const Binding& base, std::vector<std::string>* notes) {
    std::vector<Binding> bindings;
    auto stage_begin = tower.stages.rbegin();
    if (tower.det_final) {
        // The determinant stage resolves its own variable together with
        // last_var: each companion eigenpair already carries both coordinates,
        // so this stage is consumed here and skipped by the loop below.
        const TowerStage& last = tower.stages.back();
        ++stage_begin;
        std::vector<const MultiPoly*> havers;
        for (const MultiPoly& p : last.system)
            if (p.has_var(last.var)) havers.push_back(&p);
        std::sort(havers.begin(), havers.end(), [&](const MultiPoly* a, const MultiPoly* b) {
            return a->degree(last.var) < b->degree(last.var);
        });
        if (havers.size() < 2) {
            if (notes) notes->push_back("determinant stage lacks a polynomial pair");
            return {};
        }
        const auto pairs = det_pairs(*havers[0], *havers[1], last.var, last_var, base);
        for (const auto& [w_val, v_val] : pairs) {
            Binding b = base;
            b[last_var] = w_val;
            b[last.var] = v_val;
            bool consistent = true;
            for (const MultiPoly& p : last.system)
                consistent = consistent && loose_scaled_residual(p, b) < 1e-2;
            if (consistent) bindings.push_back(std::move(b));
        }
        if (bindings.empty()) {
            if (notes) notes->push_back("no candidates for " + last_var + " from the determinant");
            return {};
        }
    } else {
        std::vector<cdouble> fc = bound_coeffs(tower.final_poly, last_var, base);
        if (fc.size() < 2) {
            if (notes) notes->push_back("final polynomial degenerates under the parameter binding");
            return {};
        }
        for (cdouble root : uni_roots(fc)) {
            Binding b = base;
            b[last_var] = root;
            bindings.push_back(std::move(b));
        }
    }

    for (auto it = stage_begin; it != tower.stages.rend(); ++it) {
        const TowerStage& stage = *it;
        std::vector<const MultiPoly*> havers;
        for (const MultiPoly& p : stage.system)
            if (p.has_var(stage.var)) havers.push_back(&p);
        std::sort(havers.begin(), havers.end(), [&](const MultiPoly* a, const MultiPoly* b) {
            return a->degree(stage.var) < b->degree(stage.var);
        });

        std::vector<Binding> next;
        for (const Binding& b : bindings) {
            std::vector<cdouble> roots;
            bool found = false;
            for (const MultiPoly* p : havers) {
                std::vector<cdouble> cs = bound_coeffs(*p, stage.var, b);
                if (cs.size() < 2) continue; // degenerated to a constant under this binding
                try {
                    roots = uni_roots(cs);
                    found = true;
                    break;
                } catch (const root_failure&) {
                    continue;
                }
            }
            if (!found) {
                if (notes) notes->push_back("no usable univariate for " + stage.var);
                continue;
            }
            for (cdouble root : roots) {
                Binding ext = b;
                ext[stage.var] = root;
                bool consistent = true;
                for (const MultiPoly& p : stage.system)
                    consistent = consistent && loose_scaled_residual(p, ext) < 1e-2;
                if (consistent) next.push_back(std::move(ext));
            }
        }
        if (next.size() > 256) {
            next.resize(256);
            if (notes) notes->push_back("candidate set truncated at " + stage.var);
        }
        bindings = std::move(next);
    }
    return bindings;
}

bool newton_polish(const std::vector<MultiPoly>& eqs,
                   const std::vector<std::vector<MultiPoly>>& jac,
                   const std::vector<std::string>& unknowns, Binding& point, double target,
                   int max_steps) {
    const std::size_t n = unknowns.size();
    Eigen::MatrixXcd j(n, n);
    Eigen::VectorXcd f(n);
    for (int step = 0; step < max_steps; ++step) {
        double max_f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            f(i) = eqs[i].evaluate(point);
            max_f = std::max(max_f, std::abs(f(i)));
        }
        if (max_f < target) return true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                j(i, k) = jac[i][k].is_zero() ? cdouble(0.0) : jac[i][k].evaluate(point);
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(j);
        if (!lu.isInvertible()) return false;
        Eigen::VectorXcd delta = lu.solve(-f);
        double scale = 1.0, step_size = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            scale = std::max(scale, std::abs(point[unknowns[k]]));
            step_size = std::max(step_size, std::abs(delta(k)));
        }
        for (std::size_t k = 0; k < n; ++k) point[unknowns[k]] += delta(k);
        if (step_size < 1e-16 * scale) break; // stalled
    }
    double max_f = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_f = std::max(max_f, std::abs(eqs[i].evaluate(point)));
    return max_f < target;
}

Rational draw_t(SplitMix64& rng) {
    for (;;) {
        const double mag = rng.uniform(0.3, 2.7);
        if (std::abs(mag - 2.0) < 0.3) continue;
        const double sign = (rng.next() & 1) ? 1.0 : -1.0;
        const long q = std::lround(sign * mag * 1024.0);
        const double back = std::abs(static_cast<double>(q) / 1024.0);
        if (back < 0.3 || std::abs(back - 2.0) < 0.3 || back > 2.7) continue;
        return rat(q, 1024);
    }
}

struct DrawOutcome {
    std::vector<CharPoint> points;
    std::vector<std::string> notes;
    int raw = 0, polished = 0, rejected = 0;
};

// The defining system of the fifth component in (t, s1, s2, s3, lambda), its
// Jacobian in the unknowns, and the elimination tower with t kept symbolic.
// Building the tower costs exact arithmetic once per knot; afterwards every
// draw only binds a numeric t into it, so the per-draw work is all floating
// point. Cached because the unit tests and the sampler revisit the same knots.
struct X3Solver {
    std::vector<MultiPoly> eqs;
    std::vector<std::vector<MultiPoly>> jac;
    std::vector<std::string> unknowns{"s1", "s2", "s3", "lambda"};
    std::vector<EliminationTower> towers;
};

const X3Solver& x3_solver_for(const PretzelParams& params) {
    static std::mutex mutex;
    static std::map<std::array<long, 3>, std::unique_ptr<X3Solver>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    const std::array<long, 3> key{params.k1, params.k2, params.k3};
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;

    auto solver = std::make_unique<X3Solver>();
    MultiPoly kd = kappa_minus_delta().substitute(
        "tau", MultiPoly::var("t") * MultiPoly::var("lambda"));
    solver->eqs = {x3_equation(params, 1), x3_equation(params, 2), x3_equation(params, 3),
                   std::move(kd)};
    solver->jac.resize(solver->eqs.size());
    for (std::size_t i = 0; i < solver->eqs.size(); ++i)
        for (const std::string& u : solver->unknowns)
            solver->jac[i].push_back(solver->eqs[i].derivative(u));
    // No admissible point of the component has s3 = 2: there eq13 collapses to
    // sigma1 + 2 - 2 lambda = 0, the excluded locus. Saturating by s3 - 2
    // removes the degenerate plane {s1 = s2 = lambda - 2, s3 = 2} that
    // otherwise rides through every elimination as a common factor.
    solver->towers = build_towers(solver->eqs, {"s1", "s2", "s3"}, "lambda", {"t"},
                                  {MultiPoly::var("s3") - c(2)});
    return *(cache[key] = std::move(solver));
}

DrawOutcome solve_at_t(const X3Solver& solver, const Rational& t_rat, double tol) {
    DrawOutcome out;
    const double t_val = to_double(t_rat);
    const std::vector<MultiPoly>& eqs = solver.eqs;
    const std::vector<std::string>& unknowns = solver.unknowns;

    std::vector<Binding> candidates;
    for (const EliminationTower& tower : solver.towers) {
        try {
            std::vector<Binding> part =
                back_substitute(tower, "lambda", {{"t", cdouble(t_val)}}, &out.notes);
            candidates.insert(candidates.end(), std::make_move_iterator(part.begin()),
                              std::make_move_iterator(part.end()));
        } catch (const root_failure& e) {
            out.notes.push_back(std::string("t=") + std::to_string(t_val) +
                                ": root extraction failed: " + e.what());
        }
    }
    out.raw = static_cast<int>(candidates.size());

    for (Binding& b : candidates) {
        if (!newton_polish(eqs, solver.jac, unknowns, b, 1e-12, 50)) {
            ++out.rejected;
            continue;
        }
        ++out.polished;
        double max_eq = 0.0;
        for (const MultiPoly& e : eqs) max_eq = std::max(max_eq, std::abs(e.evaluate(b)));
        const cdouble s1 = b["s1"], s2 = b["s2"], s3 = b["s3"], lam = b["lambda"];
        const cdouble margin = s1 + s2 + s3 + 2.0 - 2.0 * lam;
        if (!(max_eq < tol) || std::abs(margin) <= 1e-6) {
            ++out.rejected;
            out.notes.push_back("rejected candidate at t=" + std::to_string(t_val) +
                                (max_eq < tol ? " (inequation margin)" : " (residual)"));
            continue;
        }
        bool duplicate = false;
        for (const CharPoint& q : out.points) {
            const double d = std::max({std::abs(q.s1 - s1), std::abs(q.s2 - s2),
                                       std::abs(q.s3 - s3), std::abs(q.tau / q.t - lam)});
            duplicate = duplicate || d < 1e-7 * (1.0 + std::abs(lam));
        }
        if (duplicate) continue;
        out.points.push_back(CharPoint{t_val, s1, s2, s3, t_val * lam});
    }
    return out;
}

} // namespace

std::vector<CharPoint> sample_x3(const PretzelParams& params, int count, std::uint64_t seed,
                                 double tol, SampleDiagnostics* diag) {
    if (count < 1) throw domain_error("sample_x3: count must be >= 1");
    std::vector<CharPoint> out;
    SampleDiagnostics local;
    SampleDiagnostics& d = diag ? *diag : local;
    d = SampleDiagnostics{};

    const X3Solver* solver = nullptr;
    try {
        solver = &x3_solver_for(params);
    } catch (const elimination_error& e) {
        throw domain_error(std::string("sample_x3: elimination failed for ") + params.name() +
                           ": " + e.what());
    }

    const int max_draws = 40 + 6 * count;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int batch = static_cast<int>(std::min(hw, 4u));

    auto run_draw = [&](int index) {
        Rational t_rat = [&] {
            SplitMix64 rng = derive_rng(seed, "x3-draw", static_cast<std::uint64_t>(index));
            return draw_t(rng);
        }();
        return solve_at_t(*solver, t_rat, tol);
    };

    for (int base = 0; base < max_draws && static_cast<int>(out.size()) < count; base += batch) {
        const int hi = std::min(base + batch, max_draws);
        std::vector<std::future<DrawOutcome>> futures;
        for (int i = base; i < hi; ++i)
            futures.push_back(std::async(std::launch::async, run_draw, i));
        // Collect strictly in draw order so the output is independent of the
        // batch width and of scheduling.
        for (auto& fut : futures) {
            DrawOutcome r = fut.get();
            if (static_cast<int>(out.size()) >= count) break;
            ++d.draws;
            d.raw_candidates += r.raw;
            d.polished += r.polished;
            d.rejected += r.rejected;
            for (std::string& n : r.notes) d.notes.push_back(std::move(n));
            for (CharPoint& p : r.points)
                if (static_cast<int>(out.size()) < count) out.push_back(p);
        }
    }

    if (static_cast<int>(out.size()) < count)
        throw domain_error("sample_x3: draw budget exhausted after " + std::to_string(d.draws) +
                           " draws (" + std::to_string(out.size()) + "/" + std::to_string(count) +
                           " points); " + join_notes(d.notes));
    return out;
}

std::vector<CharPoint> sample_x2_conic(const X2Entry& entry, int count, std::uint64_t seed) {
    if (count < 1) throw domain_error("sample_x2_conic: count must be >= 1");
    std::vector<CharPoint> out;
    const double sig1 = entry.s1 + entry.s2 + entry.s3;
    const double sig2 = entry.s1 * entry.s2 + entry.s2 * entry.s3 + entry.s3 * entry.s1;
    const double sig3 = entry.s1 * entry.s2 * entry.s3;
    const double delta = 4.0 + sig3 + 2.0 * sig2 - sig1 * sig1;
    for (std::uint64_t index = 0; static_cast<int>(out.size()) < count; ++index) {
        SplitMix64 rng = derive_rng(seed, "x2-conic", index);
        const double t = to_double(draw_t(rng));
        // tau^2 - t (sig1 + 2) tau + (t^2 (sig2 + 4) - delta) = 0
        const cdouble bq = -t * (sig1 + 2.0);
        const cdouble cq = t * t * (sig2 + 4.0) - delta;
        const cdouble disc = std::sqrt(bq * bq - 4.0 * cq);
        for (cdouble tau : {(-bq + disc) / 2.0, (-bq - disc) / 2.0}) {
            if (static_cast<int>(out.size()) >= count) break;
            out.push_back(CharPoint{t, entry.s1, entry.s2, entry.s3, tau});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Representation reconstruction
// ---------------------------------------------------------------------------

namespace {

RepTriple realize_from_point(const CharPoint& p, const PretzelParams& params, double tol) {
    Invariants inv = point_invariants(p, false);
    TraceData td;
    td.t = p.t;
    td.t12 = p.t * p.t - p.s3;
    td.t23 = p.t * p.t - p.s1;
    td.t13 = p.t * p.t - p.s2;
    td.t123 = inv.r;
    Mat2Triple m = realize_triple(td, tol);
    return RepTriple{m.x1, m.x2, m.x3, params};
}

} // namespace

RepTriple build_representation(const CharPoint& p, const PretzelParams& params, double tol) {
    if (membership(p, params, tol).empty())
        throw domain_error("build_representation: point lies on no component (membership empty)");
    RepTriple rep = realize_from_point(p, params, tol);
    const double res = relation_residual(rep);
    if (!(res < tol))
        throw domain_error("build_representation: relation residual " + std::to_string(res) +
                           " exceeds tolerance — the point passes a component's description but "
                           "the rebuilt triple violates the relations");
    return rep;
}

std::optional<RepTriple> try_build_representation(const CharPoint& p, const PretzelParams& params,
                                                  double tol, double* residual_out) {
    if (residual_out) *residual_out = std::numeric_limits<double>::infinity();
    try {
        RepTriple rep = realize_from_point(p, params, tol);
        const double res = relation_residual(rep);
        if (residual_out) *residual_out = res;
        if (!(res < tol)) return std::nullopt;
        return rep;
    } catch (const domain_error&) {
        return std::nullopt;
    }
}

} // namespace pretzel
