#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "pretzel/charvariety.hpp"
#include "pretzel/chebyshev.hpp"
#include "pretzel/errors.hpp"

using namespace pretzel;
using cd = std::complex<double>;

namespace {

bool contains_label(const std::vector<std::string>& labels, const std::string& want) {
    return std::find(labels.begin(), labels.end(), want) != labels.end();
}

bool contains_case(const std::vector<int>& cases, int want) {
    return std::find(cases.begin(), cases.end(), want) != cases.end();
}

// An SL2 pair (X, Z) with tr X = tr Z = t and tr(XZ) = s, built explicitly
// from an eigenvalue of t; requires t != ±2.
std::pair<Mat2, Mat2> pair_with_product_trace(cd t, cd s) {
    const cd u = (t + std::sqrt(t * t - 4.0)) / 2.0;
    Mat2 x{u, 1.0, 0.0, 1.0 / u};
    const cd c = s - u * u - 1.0 / (u * u);
    Mat2 z{u, 0.0, c, 1.0 / u};
    return {x, z};
}

} // namespace

TEST_CASE("point invariants at pinned points") {
    {
        Invariants v = point_invariants({2.0, 2.0, 2.0, 2.0, 8.0});
        CHECK(std::abs(v.sigma1 - 6.0) < 1e-14);
        CHECK(std::abs(v.sigma2 - 12.0) < 1e-14);
        CHECK(std::abs(v.sigma3 - 8.0) < 1e-14);
        CHECK(std::abs(v.delta) < 1e-12);
        CHECK(std::abs(v.kappa) < 1e-12);
        CHECK(std::abs(v.lambda - 4.0) < 1e-14);
        CHECK(std::abs(v.r - 2.0) < 1e-12);
    }
    {
        Invariants v = point_invariants({0.0, 0.0, 0.0, 0.0, 0.0}, false);
        CHECK(std::abs(v.delta - 4.0) < 1e-14);
        CHECK(std::abs(v.kappa) < 1e-14);
        CHECK_FALSE(v.has_lambda);
        CHECK_THROWS_AS(point_invariants({0.0, 0.0, 0.0, 0.0, 0.0}, true), domain_error);
    }
    {
        Invariants v = point_invariants({1.0, 1.0, 1.0, 1.0, 0.0});
        CHECK(std::abs(v.sigma1 - 3.0) < 1e-14);
        CHECK(std::abs(v.sigma2 - 3.0) < 1e-14);
        CHECK(std::abs(v.sigma3 - 1.0) < 1e-14);
        CHECK(std::abs(v.delta - 2.0) < 1e-14);
        CHECK(std::abs(v.kappa - 7.0) < 1e-14);
        CHECK(std::abs(v.lambda) < 1e-14);
        CHECK(std::abs(v.r - 2.0) < 1e-14);
    }
}

TEST_CASE("ambient polynomial matches the scalar invariants") {
    MultiPoly kd = kappa_minus_delta();
    SplitMix64 rng = derive_rng(11, "ambient");
    for (int i = 0; i < 25; ++i) {
        CharPoint p{rng.complex_in_box(2.0), rng.complex_in_box(2.0), rng.complex_in_box(2.0),
                    rng.complex_in_box(2.0), rng.complex_in_box(2.0)};
        Invariants v = point_invariants(p, false);
        cd direct = kd.evaluate(
            {{"t", p.t}, {"s1", p.s1}, {"s2", p.s2}, {"s3", p.s3}, {"tau", p.tau}});
        CHECK(std::abs(direct - (v.kappa - v.delta)) < 1e-10);
    }
    CHECK(kappa_delta_residual({2.0, 2.0, 2.0, 2.0, 8.0}) < 1e-12);
}

TEST_CASE("relation residual: identity triple and random triples") {
    PretzelParams params(1, 1, 1);
    RepTriple id{Mat2::identity(), Mat2::identity(), Mat2::identity(), params};
    CHECK(relation_residual(id) < 1e-12);

    AMatrices am = a_matrices(id);
    CHECK(distance_max(am.a1, Mat2::identity()) < 1e-14);
    CHECK(distance_max(am.a2, Mat2::identity()) < 1e-14);
    CHECK(distance_max(am.a3, Mat2::identity()) < 1e-14);

    SplitMix64 rng = derive_rng(11, "random-triples");
    int big = 0;
    for (int i = 0; i < 20; ++i) {
        RepTriple rep{random_sl2(rng), random_sl2(rng), random_sl2(rng), params};
        double res = relation_residual(rep);
        double aeq = a_equality_residual(a_matrices(rep));
        if (res > 1e-3) ++big;
        // the two independent formulations must agree on what fails
        CHECK(((res < 1e-8) == (aeq < 1e-8)));
    }
    CHECK(big >= 19); // a random triple is essentially never a representation
}

TEST_CASE("closed trace forms against direct matrix products") {
    // k = 0 collapses to 2 - (s + 2 - t^2); s3 = 2 with side 3 gives 2
    SplitMix64 rng = derive_rng(11, "closed-trace");
    for (int i = 0; i < 10; ++i) {
        cd t = rng.complex_in_box(2.0), s = rng.complex_in_box(2.0);
        CHECK(std::abs(aj_trace_closed(t, s, 0, 1) - (2.0 - (s + 2.0 - t * t))) < 1e-12);
        CHECK(std::abs(aj_trace_closed(t, 2.0, 1, 3) - 2.0) < 1e-12);
    }
    CHECK_THROWS_AS(aj_trace_closed(1.0, 1.0, 1, 4), domain_error);

    for (long k : {1L, 2L, 3L}) {
        for (int i = 0; i < 40; ++i) {
            cd t = rng.complex_in_box(1.5) + cd(0.5, 0.0);
            cd s = rng.complex_in_box(1.5);
            auto [x, z] = pair_with_product_trace(t, s);
            // side 1/2: A = Y^k X+ Y^-k X- with Y = X+ X-^{-1}; take X+ = x,
            // X- = z^{-1} so that tr(Y) = tr(x z) = s.
            Mat2 xm = z.inverse();
            Mat2 y = x * xm.inverse();
            Mat2 a = sl2_power(y, k) * x * sl2_power(y, -k) * xm;
            CHECK(std::abs(a.trace() - aj_trace_closed(t, s, k, 1)) < 1e-8);
            CHECK(std::abs((a * x.inverse()).trace() - t) < 1e-8);
            CHECK(std::abs((a * xm.inverse()).trace() - t) < 1e-8);
            // side 3: A3 = Y^k X1^{-1} Y^-k X1 with Y = X1 X2^{-1}.
            Mat2 x1 = x, x2 = z.inverse();
            Mat2 y3 = x1 * x2.inverse();
            Mat2 a3 = sl2_power(y3, k) * x1.inverse() * sl2_power(y3, -k) * x1;
            CHECK(std::abs(a3.trace() - aj_trace_closed(t, s, k, 3)) < 1e-8);
            CHECK(std::abs((a3 * x1.inverse()).trace() - t) < 1e-8);
        }
    }
}

TEST_CASE("component systems: structure and the small-knot reduction") {
    PretzelParams p001(0, 0, 1);
    auto systems = component_systems(p001);
    MultiPoly kd = kappa_minus_delta();

    // every emitted system carries the ambient equation
    for (const auto& cs : systems) {
        bool has_kd = false;
        for (const auto& e : cs.equations) has_kd = has_kd || e == kd;
        CHECK_MESSAGE(has_kd, cs.label);
    }

    // locate X3 and check the reduced equations for (0,0,1)
    const ComponentSystem* x3 = nullptr;
    for (const auto& cs : systems)
        if (cs.label == "X3") x3 = &cs;
    REQUIRE(x3 != nullptr);
    MultiPoly lam = MultiPoly::var("lambda");
    MultiPoly s1 = MultiPoly::var("s1"), s2 = MultiPoly::var("s2"), s3 = MultiPoly::var("s3");
    MultiPoly two = MultiPoly::from_long(2);
    CHECK(x3->equations[1] == lam - two - s1);
    CHECK(x3->equations[2] == lam - two - s2);
    CHECK(x3->equations[3] == -(s3 * s3 - s3 * lam + (s1 + s2 + s3) - two));
    CHECK(x3->equations[0] == MultiPoly::var("t") * lam - MultiPoly::var("tau"));
    REQUIRE(x3->inequations.size() == 2);
    CHECK(x3->inequations[0] == MultiPoly::var("t"));

    // X2 label count for (1,2,2) = 2 * 3 * 2
    auto big = component_systems(PretzelParams(1, 2, 2));
    int x2_count = 0;
    for (const auto& cs : big)
        if (cs.label.rfind("X2(", 0) == 0) ++x2_count;
    CHECK(x2_count == 12);
    CHECK(big.size() == 6u + 12u);

    // X0_2 carries the alternative exclusion set, flagged separately
    for (const auto& cs : big)
        if (cs.label == "X0_2") {
            CHECK(cs.inequations.size() == 1);
            CHECK(cs.alt_inequations.size() == 2);
        }
}

TEST_CASE("x2 enumeration: counts, anchors, interior exactness") {
    {
        auto entries = enumerate_x2(PretzelParams(0, 0, 1));
        REQUIRE(entries.size() == 1);
        CHECK(entries[0].s1 == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(entries[0].s2 == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(entries[0].s3 == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(entries[0].endpoint);
    }
    CHECK(enumerate_x2(PretzelParams(1, 1, 1)).size() == 4);
    {
        // the h3 = 1 entries of (1,2,2) sit over s3 = 2 cos(pi/2) = 0
        auto entries = enumerate_x2(PretzelParams(1, 2, 2));
        bool found = false;
        for (const auto& e : entries)
            if (e.h3 == 1) {
                found = true;
                CHECK(std::abs(e.s3) < 1e-12);
            }
        CHECK(found);
    }

    const long triples[10][3] = {{0, 0, 1}, {1, 1, 1}, {1, 2, 2}, {0, 1, 2}, {2, 2, 2},
                                 {0, 0, 3}, {2, 1, 1}, {1, 0, 2}, {2, 0, 3}, {1, 1, 4}};
    for (const auto& k : triples) {
        PretzelParams params(k[0], k[1], k[2]);
        auto entries = enumerate_x2(params);
        CHECK(static_cast<long>(entries.size()) == (k[0] + 1) * (k[1] + 1) * k[2]);
    }

    // interior entry of (1,1,2): exact conditions vanish at the anchor
    for (const auto& e : enumerate_x2(PretzelParams(1, 1, 2))) {
        if (e.endpoint) continue;
        std::map<std::string, cd> at{{"s1", e.s1}, {"s2", e.s2}, {"s3", e.s3}};
        for (const auto& cond : e.exact_conditions) {
            std::map<std::string, cd> needed;
            for (const auto& v : cond.vars()) needed[v] = at[v];
            CHECK(std::abs(cond.evaluate(needed)) < 1e-10);
        }
    }
}

TEST_CASE("t = 0 classifier") {
    PretzelParams p111(1, 1, 1);

    // case 1: gamma_j = beta_j at s = 1 (omega_2 - omega_1 = s - 1) and
    // s3 = 0 makes the first-kind value hit -2
    CHECK(contains_case(classify_t0({0.0, 1.0, 1.0, 0.0, 0.0}, p111), 1));

    // case 2: gamma_j = -beta_j at s = -1, and beta_3 = omega_1 = 1 never
    // vanishes for k3 = 1, so use k3 = 2 where beta_3 = s3
    PretzelParams p112(1, 1, 2);
    CHECK(contains_case(classify_t0({0.0, -1.0, -1.0, 0.0, 3.0}, p112), 2));
    CHECK_FALSE(contains_case(classify_t0({0.0, -1.0, -1.0, 0.5, 3.0}, p112), 2));

    // case 3 for (1,1,1): theta3 = 3 theta / 2 equalizes the first-kind
    // values; bisect delta to a root along that curve
    auto delta_on_curve = [&](double th) {
        double s = 2.0 * std::cos(th), x = 2.0 * std::cos(1.5 * th);
        CharPoint q{0.0, s, s, x, 0.0};
        Invariants v = point_invariants(q, false);
        return v.delta.real();
    };
    double lo = 0.5, hi = 2.5;
    // walk to a sign change first
    double step = (hi - lo) / 200.0, a = lo, b = lo;
    for (double th = lo + step; th <= hi; th += step) {
        if (delta_on_curve(th - step) * delta_on_curve(th) <= 0.0) {
            a = th - step;
            b = th;
            break;
        }
    }
    REQUIRE(a != b);
    for (int i = 0; i < 80; ++i) {
        double mid = (a + b) / 2.0;
        (delta_on_curve(a) * delta_on_curve(mid) <= 0.0 ? b : a) = mid;
    }
    double th = (a + b) / 2.0;
    CharPoint bullet3{0.0, 2.0 * std::cos(th), 2.0 * std::cos(th), 2.0 * std::cos(1.5 * th), 0.0};
    CAPTURE(th);
    CHECK(contains_case(classify_t0(bullet3, p111, 1e-7), 3));

    // random off-variety points classify to nothing
    SplitMix64 rng = derive_rng(11, "t0-off");
    for (int i = 0; i < 10; ++i) {
        CharPoint q{0.0, rng.complex_in_box(1.9), rng.complex_in_box(1.9),
                    rng.complex_in_box(1.9), rng.complex_in_box(1.9)};
        CHECK(classify_t0(q, p111).empty());
    }

    CHECK_THROWS_AS(classify_t0({1.0, 0.0, 0.0, 0.0, 0.0}, p111), domain_error);
}

TEST_CASE("membership: reducible point, conic points") {
    PretzelParams p001(0, 0, 1);
    CHECK(membership({2.0, 2.0, 2.0, 2.0, 8.0}, p001).empty());

    // interior X2 component of (1,1,2): conic points belong to it
    PretzelParams p112(1, 1, 2);
    auto entries = enumerate_x2(p112);
    const X2Entry* interior = nullptr;
    for (const auto& e : entries)
        if (!e.endpoint) interior = &e;
    REQUIRE(interior != nullptr);
    auto points = sample_x2_conic(*interior, 6, 2024);
    for (const auto& q : points) {
        CHECK(kappa_delta_residual(q) < 1e-8);
        auto labels = membership(q, p112);
        CHECK(contains_label(labels, "X2(0,0,1)"));
        CHECK_FALSE(contains_label(labels, "X3"));
    }
}

TEST_CASE("representation reconstruction on an interior conic") {
    PretzelParams p112(1, 1, 2);
    const X2Entry* interior = nullptr;
    auto entries = enumerate_x2(p112);
    for (const auto& e : entries)
        if (!e.endpoint) interior = &e;
    REQUIRE(interior != nullptr);

    for (const auto& q : sample_x2_conic(*interior, 6, 77)) {
        RepTriple rep = build_representation(q, p112);
        CHECK(relation_residual(rep) < 1e-8);
        AMatrices am = a_matrices(rep);
        CHECK(a_equality_residual(am) < 1e-8);
        CHECK(distance_max(am.a3, am.a3_alt) < 1e-9);
        // measured traces agree with the closed forms
        Invariants v = point_invariants(q, false);
        (void)v;
        CHECK(std::abs(am.a1.trace() - aj_trace_closed(q.t, q.s1, p112.k1, 1)) < 1e-7);
        CHECK(std::abs(am.a2.trace() - aj_trace_closed(q.t, q.s2, p112.k2, 2)) < 1e-7);
        CHECK(std::abs(am.a3.trace() - aj_trace_closed(q.t, q.s3, p112.k3, 3)) < 1e-7);
    }

    CHECK_THROWS_AS(build_representation({2.0, 2.0, 2.0, 2.0, 8.0}, p112), domain_error);
}

TEST_CASE("endpoint adjudication is exercised and reported") {
    // (0,0,1): the single enumerated component is entirely endpoint; its
    // exact conditions are nonzero constants, so membership ignores it and
    // the builder addresses it directly.
    PretzelParams p001(0, 0, 1);
    auto entries = enumerate_x2(p001);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].endpoint);
    int verified = 0, rejected = 0;
    for (const auto& q : sample_x2_conic(entries[0], 4, 13)) {
        double residual = 0.0;
        auto rep = try_build_representation(q, p001, 1e-8, &residual);
        if (rep) {
            ++verified;
            CHECK(relation_residual(*rep) < 1e-8);
        } else {
            ++rejected;
        }
    }
    CHECK(verified + rejected == 4);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(PretzelParams(-1, 0, 1), domain_error);
    CHECK_THROWS_AS(PretzelParams(0, -2, 1), domain_error);
    CHECK_THROWS_AS(PretzelParams(0, 0, 0), domain_error);
    CHECK(PretzelParams(1, 2, 2).name() == "P(3,5,4)");
}
