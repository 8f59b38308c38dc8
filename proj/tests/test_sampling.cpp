#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "pretzel/charvariety.hpp"
#include "pretzel/errors.hpp"

using namespace pretzel;
using cd = std::complex<double>;

namespace {

double x3_equation_residual(const CharPoint& p, const PretzelParams& params) {
    const cd lambda = p.tau / p.t;
    std::map<std::string, cd> m{
        {"s1", p.s1}, {"s2", p.s2}, {"s3", p.s3}, {"lambda", lambda}};
    double worst = 0.0;
    for (int j : {1, 2, 3}) worst = std::max(worst, std::abs(x3_equation(params, j).evaluate(m)));
    return worst;
}

} // namespace

TEST_CASE("smallest knot: sampler output matches the reduced system") {
    // For (0,0,1) the principal system collapses to s1 = s2 = lambda - 2 and
    // s3^2 + (1 - lambda) s3 + 2 lambda - 6 = 0: check every sample against
    // this hand reduction.
    PretzelParams params(0, 0, 1);
    SampleDiagnostics diag;
    auto points = sample_x3(params, 8, 42, 1e-8, &diag);
    REQUIRE(points.size() == 8);
    CHECK(diag.draws >= 1);
    for (const auto& p : points) {
        const cd lambda = p.tau / p.t;
        CHECK(std::abs(p.s1 - (lambda - 2.0)) < 1e-8);
        CHECK(std::abs(p.s2 - (lambda - 2.0)) < 1e-8);
        const cd quad = p.s3 * p.s3 + (1.0 - lambda) * p.s3 + 2.0 * lambda - 6.0;
        CHECK(std::abs(quad) < 1e-7);
        CHECK(kappa_delta_residual(p) < 1e-8);
    }
}

TEST_CASE("sampled points satisfy the defining conditions and membership") {
    for (auto [k1, k2, k3] : {std::tuple<long, long, long>{0, 0, 1}, {1, 1, 1}}) {
        PretzelParams params(k1, k2, k3);
        auto points = sample_x3(params, 6, 7);
        REQUIRE(points.size() == 6);
        for (const auto& p : points) {
            CHECK(x3_equation_residual(p, params) < 1e-8);
            CHECK(kappa_delta_residual(p) < 1e-8);
            // inequation margins
            const cd lambda = p.tau / p.t;
            const cd sigma1 = p.s1 + p.s2 + p.s3;
            CHECK(std::abs(p.t) > 1e-6);
            CHECK(std::abs(sigma1 + 2.0 - 2.0 * lambda) > 1e-6);
            // the point lands on the principal component and nothing else
            auto labels = membership(p, params);
            REQUIRE(labels.size() == 1);
            CHECK(labels[0] == "X3");
        }
    }
}

TEST_CASE("sampling is deterministic in the seed") {
    PretzelParams params(0, 0, 1);
    auto a = sample_x3(params, 5, 99);
    auto b = sample_x3(params, 5, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].t == b[i].t);
        CHECK(a[i].s1 == b[i].s1);
        CHECK(a[i].s2 == b[i].s2);
        CHECK(a[i].s3 == b[i].s3);
        CHECK(a[i].tau == b[i].tau);
    }
    auto c = sample_x3(params, 5, 100);
    bool all_equal = true;
    for (std::size_t i = 0; i < c.size(); ++i)
        all_equal = all_equal && c[i].t == a[i].t && c[i].s1 == a[i].s1;
    CHECK_FALSE(all_equal);
}

TEST_CASE("sampled points rebuild into representations") {
    for (auto [k1, k2, k3] : {std::tuple<long, long, long>{0, 0, 1}, {1, 1, 1}}) {
        PretzelParams params(k1, k2, k3);
        auto points = sample_x3(params, 5, 3);
        int good = 0;
        for (const auto& p : points) {
            double residual = 0.0;
            auto rep = try_build_representation(p, params, 1e-8, &residual);
            if (!rep) continue;
            ++good;
            CHECK(relation_residual(*rep) < 1e-8);
            AMatrices am = a_matrices(*rep);
            CHECK(a_equality_residual(am) < 1e-8);
            CHECK(distance_max(am.a3, am.a3_alt) < 1e-9);
            // closed trace forms on the rebuilt matrices
            CHECK(std::abs(am.a1.trace() - aj_trace_closed(p.t, p.s1, params.k1, 1)) < 1e-7);
            CHECK(std::abs(am.a2.trace() - aj_trace_closed(p.t, p.s2, params.k2, 2)) < 1e-7);
            CHECK(std::abs(am.a3.trace() - aj_trace_closed(p.t, p.s3, params.k3, 3)) < 1e-7);
            CHECK(std::abs((am.a1 * rep->x2.inverse()).trace() - p.t) < 1e-8);
            CHECK(std::abs((am.a1 * rep->x3.inverse()).trace() - p.t) < 1e-8);
        }
        CHECK(good >= 4); // an occasional ill-conditioned draw is tolerated
    }
}

TEST_CASE("a heavier knot samples within the envelope") {
    PretzelParams params(1, 2, 2);
    auto points = sample_x3(params, 3, 11);
    REQUIRE(points.size() == 3);
    for (const auto& p : points) {
        CHECK(x3_equation_residual(p, params) < 1e-8);
        CHECK(kappa_delta_residual(p) < 1e-8);
    }
}

TEST_CASE("sampler argument validation") {
    CHECK_THROWS_AS(sample_x3(PretzelParams(0, 0, 1), 0, 1), domain_error);
}
