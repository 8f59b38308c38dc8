#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "pretzel/multipoly.hpp"
#include "pretzel/rng.hpp"

using namespace pretzel;

namespace {

MultiPoly V(const std::string& n) { return MultiPoly::var(n); }
MultiPoly C(long v) { return MultiPoly::from_long(v); }

// small random polynomial for property tests
MultiPoly random_poly(SplitMix64& rng, const std::vector<std::string>& vars, int max_deg,
                      int n_terms) {
    MultiPoly p;
    for (int i = 0; i < n_terms; ++i) {
        MultiPoly term = C(static_cast<long>(rng.below(9)) - 4);
        for (const auto& v : vars)
            term = term * MultiPoly::var(v, static_cast<std::uint32_t>(rng.below(max_deg + 1)));
        p += term;
    }
    return p;
}

} // namespace

TEST_CASE("canonical variable order and display") {
    MultiPoly p = C(3) * V("u").pow(2) * V("w") - C(2) * V("u") + C(1);
    CHECK(p.to_text() == "3*u^2*w - 2*u + 1");
    CHECK(p.vars() == std::vector<std::string>{"u", "w"});

    // canonical names precede unknown names; unknowns are alphabetical
    MultiPoly q = V("y") + V("tau") + V("alpha") + V("s2");
    CHECK(q.vars() == std::vector<std::string>{"s2", "tau", "alpha", "y"});

    // denominators are cleared for display by the lcm
    MultiPoly h = Rational(3, 2) * V("t") + C(1);
    CHECK(h.to_text() == "3*t + 2");
}

TEST_CASE("arithmetic basics") {
    MultiPoly x = V("x"), y = V("y");
    CHECK((x + y) * (x + y) == x.pow(2) + C(2) * x * y + y.pow(2));
    CHECK((x + y) - (x + y) == MultiPoly());
    CHECK(((x + y) - (x + y)).is_zero());
    CHECK((x - y) * (x + y) == x.pow(2) - y.pow(2));
    CHECK_THROWS_AS(x.pow(-1), domain_error);
    CHECK(x.pow(0) == C(1));
    CHECK(MultiPoly().pow(0) == C(1));

    // unused variables are pruned
    MultiPoly z = x * y - x * y + x;
    CHECK(z.vars() == std::vector<std::string>{"x"});
}

TEST_CASE("degrees, coefficients, derivative") {
    MultiPoly p = V("x").pow(3) * V("y") + V("x") + C(5);
    CHECK(p.degree("x") == 3);
    CHECK(p.degree("y") == 1);
    CHECK(p.degree("z") == 0);
    CHECK(p.total_degree() == 4);
    CHECK(MultiPoly().degree("x") == -1);
    CHECK(MultiPoly().total_degree() == -1);

    auto cs = p.coeffs_in("x");
    REQUIRE(cs.size() == 4);
    CHECK(cs[0] == C(5));
    CHECK(cs[1] == C(1));
    CHECK(cs[2].is_zero());
    CHECK(cs[3] == V("y"));
    CHECK(MultiPoly::from_coeffs(cs, "x") == p);

    CHECK(p.derivative("x") == C(3) * V("x").pow(2) * V("y") + C(1));
    CHECK(p.derivative("q").is_zero());
}

TEST_CASE("substitute") {
    MultiPoly t = V("t");
    MultiPoly p = t.pow(2) - C(1);
    CHECK(p.substitute("t", C(2)) == C(3));
    MultiPoly q = V("x").pow(2) + C(1);
    CHECK(q.substitute("x", V("y") + C(1)) == V("y").pow(2) + C(2) * V("y") + C(2));
    // substitution in an absent variable is the identity
    CHECK(q.substitute("z", C(7)) == q);
}

TEST_CASE("evaluate agrees with exact substitution") {
    MultiPoly p = C(3) * V("u").pow(2) * V("w") - C(2) * V("u") + C(1);
    std::map<std::string, std::complex<double>> at{{"u", {2.0, 0.0}}, {"w", {0.0, 1.0}}};
    std::complex<double> got = p.evaluate(at);
    std::complex<double> want = 3.0 * 4.0 * std::complex<double>(0, 1) - 4.0 + 1.0;
    CHECK(std::abs(got - want) < 1e-12);
    CHECK_THROWS_AS(p.evaluate({{"u", 1.0}}), std::invalid_argument);
}

TEST_CASE("evaluate_int is exact") {
    MultiPoly p = V("x").pow(3) - C(7) * V("y") + C(2);
    std::map<std::string, BigInt> at{{"x", BigInt(10)}, {"y", BigInt(3)}};
    CHECK(p.evaluate_int(at) == BigInt(1000 - 21 + 2));
}

TEST_CASE("content and primitive part") {
    auto cp = content_primitive(C(6) * V("x") + C(4));
    CHECK(cp.content == Rational(2));
    CHECK(cp.primitive == C(3) * V("x") + C(2));

    cp = content_primitive(Rational(1, 2) * V("x"));
    CHECK(cp.content == Rational(1, 2));
    CHECK(cp.primitive == V("x"));

    cp = content_primitive(C(-3) * V("x").pow(2));
    CHECK(cp.content == Rational(-3));
    CHECK(cp.primitive == V("x").pow(2));

    cp = content_primitive(MultiPoly());
    CHECK(cp.content == Rational(0));
    CHECK(cp.primitive.is_zero());

    // content * primitive reassembles the polynomial
    SplitMix64 rng = derive_rng(7, "content");
    for (int i = 0; i < 20; ++i) {
        MultiPoly p = random_poly(rng, {"x", "y"}, 3, 4);
        if (p.is_zero()) continue;
        auto s = content_primitive(p);
        CHECK(MultiPoly::constant(s.content) * s.primitive == p);
        CHECK(s.primitive.leading_coeff() > 0);
    }
}

TEST_CASE("exact division") {
    MultiPoly x = V("x"), y = V("y");
    CHECK(divide_exact(x.pow(2) - y.pow(2), x - y) == x + y);
    CHECK(divide_exact((x + y) * (x * x + C(3)), x * x + C(3)) == x + y);
    CHECK(!try_divide_exact(x.pow(2) + C(1), x - C(1)).has_value());
    CHECK(divide_exact(MultiPoly(), x).is_zero());
    CHECK_THROWS_AS(divide_exact(x, MultiPoly()), domain_error);
    // rational coefficients divide exactly too
    CHECK(divide_exact(Rational(1, 2) * x * y, C(2) * y) == Rational(1, 4) * x);
}

TEST_CASE("gcd") {
    MultiPoly x = V("x"), y = V("y");
    CHECK(poly_gcd((x - C(1)) * (x + C(2)).pow(2), (x + C(2)) * (x - C(3))) == x + C(2));
    CHECK(poly_gcd(x.pow(2) - C(2), x - C(3)) == C(1));
    CHECK(poly_gcd((x + y) * (x - y), (x + y) * (x + C(1))) == x + y);
    CHECK(poly_gcd(MultiPoly(), C(6) * x + C(4)) == C(3) * x + C(2));
    CHECK(poly_gcd(C(4) * x, C(6) * x) == x);
    CHECK(poly_gcd(x.pow(3) * y, x * y.pow(2)) == x * y);
    // no shared variable: gcd is 1
    CHECK(poly_gcd(x + C(1), y + C(1)) == C(1));

    // gcd divides both arguments (property, random instances)
    SplitMix64 rng = derive_rng(11, "gcd");
    for (int i = 0; i < 10; ++i) {
        MultiPoly a = random_poly(rng, {"x", "y"}, 2, 3);
        MultiPoly b = random_poly(rng, {"x", "y"}, 2, 3);
        MultiPoly m = random_poly(rng, {"x", "y"}, 1, 2);
        if (a.is_zero() || b.is_zero() || m.is_zero()) continue;
        MultiPoly g = poly_gcd(a * m, b * m);
        CHECK(try_divide_exact(a * m, g).has_value());
        CHECK(try_divide_exact(b * m, g).has_value());
        // the planted factor divides the gcd
        CHECK(try_divide_exact(g, primitive_part(m)).has_value());
    }
}

TEST_CASE("resultant oracle values") {
    MultiPoly x = V("x"), y = V("y"), a = V("a"), b = V("b");
    CHECK(resultant_uni(x.pow(2) - C(2), x - y, "x") == y.pow(2) - C(2));
    CHECK(resultant_uni(x - C(1), x + C(1), "x") == C(2));
    MultiPoly r = resultant_uni(x.pow(2) + a * x + C(1), x.pow(2) + b * x + C(1), "x");
    CHECK(r == (a - b) * (a - b));
    // shared root forces a zero resultant
    CHECK(resultant_uni((x - y) * (x + C(1)), (x - y) * (x + C(2)), "x").is_zero());
    // v-free operands
    CHECK(resultant_uni(C(3), x.pow(4) + x, "x") == C(81));
}

TEST_CASE("resultant multiplicativity") {
    SplitMix64 rng = derive_rng(13, "res");
    for (int i = 0; i < 8; ++i) {
        MultiPoly p = random_poly(rng, {"x", "y"}, 2, 3);
        MultiPoly q = random_poly(rng, {"x", "y"}, 2, 3);
        MultiPoly r = random_poly(rng, {"x", "y"}, 2, 3);
        if (p.degree("x") < 1 || q.degree("x") < 1 || r.degree("x") < 1) continue;
        CHECK(resultant_uni(p * q, r, "x") ==
              resultant_uni(p, r, "x") * resultant_uni(q, r, "x"));
    }
}

TEST_CASE("toy elimination sign convention") {
    // Res_z(y - z, y + z - 2w) = 2w - 2y; the sign-carrying content is +2 and
    // the canonical primitive is w - y (w precedes y in the global order).
    MultiPoly r = resultant_uni(V("y") - V("z"), V("y") + V("z") - C(2) * V("w"), "z");
    CHECK(r == C(2) * V("w") - C(2) * V("y"));
    auto cp = content_primitive(r);
    CHECK(cp.content == Rational(2));
    CHECK(cp.primitive == V("w") - V("y"));
}

TEST_CASE("square free") {
    MultiPoly x = V("x"), y = V("y"), w = V("w");
    CHECK(square_free((x - C(1)).pow(2) * (x + C(2)), "x") == (x - C(1)) * (x + C(2)));
    CHECK(square_free(x.pow(3), "x") == x);
    CHECK(square_free((x.pow(2) + y) * (x + y).pow(2), "x") == (x.pow(2) + y) * (x + y));
    CHECK_THROWS_AS(square_free(MultiPoly(), "x"), domain_error);

    // p / gcd(p, dp/dx) absorbs factors free of x into the gcd entirely;
    // square_free_part is the variant that keeps (one copy of) them
    MultiPoly p = y.pow(2) * (x + C(1)).pow(2);
    CHECK(square_free(p, "x") == x + C(1));
    CHECK(square_free_part(p) == y * (x + C(1)));
    CHECK(square_free_part((x + y).pow(2) * w * (w + C(1))) == (x + y) * w * (w + C(1)));
    CHECK(square_free_part(x.pow(5)) == x);
    CHECK(square_free_part(C(12)) == C(1));

    // square-free output has constant gcd with its derivative
    MultiPoly q = square_free_part((x + y).pow(3) * (x - y).pow(2));
    CHECK(q == (x + y) * (x - y));
    CHECK(poly_gcd(q, q.derivative("x")).is_constant());
}

TEST_CASE("strip monomial") {
    MultiPoly p = V("u").pow(2) * V("w") + V("u").pow(3);
    auto s = strip_monomial(p);
    CHECK(s.rest == V("w") + V("u"));
    REQUIRE(s.exponents.size() == 2);
    CHECK(s.exponents[0] == 2); // u
    CHECK(s.exponents[1] == 0); // w
}

TEST_CASE("json round trip and determinism") {
    MultiPoly p = Rational(-7, 3) * V("u").pow(2) * V("tau") + Rational(1, 2) * V("s1") - C(5);
    nlohmann::json j = p.to_json();
    CHECK(MultiPoly::from_json(j) == p);
    CHECK(j.dump() == p.to_json().dump());

    // exponent tuples align with vars; big integers survive as strings
    MultiPoly big = MultiPoly::constant(Rational(BigInt("123456789012345678901234567890"), BigInt(7)));
    CHECK(MultiPoly::from_json(big.to_json()) == big);

    CHECK_THROWS_AS(MultiPoly::from_json(nlohmann::json::array()), std::invalid_argument);
    nlohmann::json bad = {{"vars", {"x"}}, {"terms", {{{"exp", {1, 2}}, {"num", "1"}, {"den", "1"}}}}};
    CHECK_THROWS_AS(MultiPoly::from_json(bad), std::invalid_argument);
    nlohmann::json bad_den = {{"vars", {"x"}}, {"terms", {{{"exp", {1}}, {"num", "1"}, {"den", "0"}}}}};
    CHECK_THROWS_AS(MultiPoly::from_json(bad_den), std::invalid_argument);
}
