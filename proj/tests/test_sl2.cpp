#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pretzel/sl2.hpp"

using namespace pretzel;
using cd = std::complex<double>;

TEST_CASE("power law against direct multiplication") {
    SplitMix64 rng = derive_rng(5, "sl2-pow");
    for (int i = 0; i < 30; ++i) {
        Mat2 x = random_sl2(rng);
        Mat2 pos = Mat2::identity();
        for (long k = 0; k <= 6; ++k) {
            CHECK(distance_max(sl2_power(x, k), pos) < 1e-9 * (1.0 + pos.norm_max()));
            pos = pos * x;
        }
        Mat2 inv = x.inverse();
        Mat2 neg = Mat2::identity();
        for (long k = 0; k >= -6; --k) {
            CHECK(distance_max(sl2_power(x, k), neg) < 1e-9 * (1.0 + neg.norm_max()));
            neg = neg * inv;
        }
    }
}

TEST_CASE("inverse via trace") {
    SplitMix64 rng = derive_rng(5, "sl2-inv");
    for (int i = 0; i < 20; ++i) {
        Mat2 x = random_sl2(rng);
        Mat2 want = x.trace() * Mat2::identity() - x;
        CHECK(distance_max(x.inverse(), want) < 1e-9);
    }
}

TEST_CASE("pair identities") {
    SplitMix64 rng = derive_rng(5, "sl2-pair");
    for (int i = 0; i < 50; ++i) {
        Mat2 x = random_sl2(rng), y = random_sl2(rng);
        auto r = trace_identity_residuals(x, y);
        CHECK(r.xyx < 1e-9 * (1.0 + x.norm_max() * y.norm_max() * x.norm_max()));
        CHECK(r.anticommutator < 1e-9 * (1.0 + x.norm_max() * y.norm_max()));
    }
}

TEST_CASE("regular pair criterion") {
    Mat2 diag{2.0, 0.0, 0.0, 0.5};
    Mat2 lower{1.0, 0.0, 1.0, 1.0};
    Mat2 upper{1.0, 1.0, 0.0, 1.0};
    CHECK(is_regular_pair(diag, lower * upper));
    CHECK(!is_regular_pair(diag, upper));
    CHECK(!is_regular_pair(upper, Mat2{1.0, 2.0, 0.0, 1.0}));
    CHECK_THROWS_AS(is_regular_pair(Mat2::identity(), diag), domain_error);
    CHECK_THROWS_AS(is_regular_pair(diag, cd(-1.0) * Mat2::identity()), domain_error);
}

TEST_CASE("regular triple criterion") {
    Mat2 id = Mat2::identity();
    CHECK(!is_regular_triple(id, id, id));
    Mat2 u1{2.0, 1.0, 0.0, 0.5};
    Mat2 u2{3.0, 2.0, 0.0, cd(1.0) / 3.0};
    Mat2 u3{1.0, 5.0, 0.0, 1.0};
    // three upper triangulars share the first basis direction
    CHECK(!is_regular_triple(u1, u2, u3));
    Mat2 l{1.0, 0.0, 4.0, 1.0};
    CHECK(is_regular_triple(u1, u2, l));
    // scalar members are ignored as constraints
    CHECK(!is_regular_triple(id, u1, u2));
    SplitMix64 rng = derive_rng(5, "sl2-triple");
    for (int i = 0; i < 10; ++i)
        CHECK(is_regular_triple(random_sl2(rng), random_sl2(rng), random_sl2(rng)));
}

TEST_CASE("triple trace quadratic frozen values") {
    // all traces 2 (identity data): double root 2
    auto q = triple_trace_quadratic(2.0, 2.0, 2.0, 2.0);
    CHECK(std::abs(q.nu1 - cd(4, 0)) < 1e-12);
    CHECK(std::abs(q.nu0 - cd(4, 0)) < 1e-12);
    CHECK(std::abs(q.roots[0] - cd(2, 0)) < 1e-12);
    CHECK(std::abs(q.roots[1] - cd(2, 0)) < 1e-12);

    // t = 0 and vanishing pair traces: x^2 - 4 = 0
    q = triple_trace_quadratic(0.0, 0.0, 0.0, 0.0);
    CHECK(std::abs(q.nu1) < 1e-12);
    CHECK(std::abs(q.nu0 - cd(-4, 0)) < 1e-12);
    CHECK(std::abs(std::abs(q.roots[0]) - 2.0) < 1e-12);
    CHECK(std::abs(q.roots[0] + q.roots[1]) < 1e-12);

    // t = 0, all pair traces 2: nu0 = 12 + 8 - 4 = 16, roots ±4i
    q = triple_trace_quadratic(0.0, 2.0, 2.0, 2.0);
    CHECK(std::abs(q.nu1) < 1e-12);
    CHECK(std::abs(q.nu0 - cd(16, 0)) < 1e-12);
    CHECK(std::min(std::abs(q.roots[0] - cd(0, 4)), std::abs(q.roots[0] - cd(0, -4))) < 1e-12);
    CHECK(std::abs(q.roots[0] + q.roots[1]) < 1e-12);
    CHECK(!q.normalization.empty());
}

TEST_CASE("measured traces satisfy the quadratic") {
    SplitMix64 rng = derive_rng(5, "sl2-adm");
    for (int i = 0; i < 50; ++i) {
        cd t = rng.complex_in_box(2.0);
        Mat2 x1 = random_sl2_with_trace(rng, t);
        Mat2 x2 = random_sl2_with_trace(rng, t);
        Mat2 x3 = random_sl2_with_trace(rng, t);
        TraceData d = measure_traces(x1, x2, x3);
        double scale = 1.0 + std::norm(d.t123);
        CHECK(admissibility_residual(d) < 1e-7 * scale);
    }
}

TEST_CASE("realize_triple worked example") {
    TraceData d{0.0, 0.0, 0.0, 0.0, 2.0};
    Mat2Triple tr = realize_triple(d);
    // canonical branch picks u = i
    CHECK(std::abs(tr.x1.a - cd(0, 1)) < 1e-9);
    CHECK(std::abs(tr.x1.b - cd(1, 0)) < 1e-9);
    CHECK(std::abs(tr.x1.c) < 1e-9);
    CHECK(std::abs(tr.x3.det() - cd(1, 0)) < 1e-9);
    TraceData got = measure_traces(tr.x1, tr.x2, tr.x3);
    CHECK(std::abs(got.t123 - d.t123) < 1e-9);
}

TEST_CASE("realize_triple round trip") {
    SplitMix64 rng = derive_rng(5, "sl2-roundtrip");
    int done = 0;
    for (int i = 0; i < 40 && done < 25; ++i) {
        cd t = rng.complex_in_box(2.0);
        Mat2 x1 = random_sl2_with_trace(rng, t);
        Mat2 x2 = random_sl2_with_trace(rng, t);
        Mat2 x3 = random_sl2_with_trace(rng, t);
        TraceData d = measure_traces(x1, x2, x3);
        Mat2Triple tr = realize_triple(d);
        TraceData got = measure_traces(tr.x1, tr.x2, tr.x3);
        CHECK(std::abs(got.t - d.t) < 1e-8 * (1.0 + std::abs(d.t)));
        CHECK(std::abs(tr.x2.trace() - d.t) < 1e-8 * (1.0 + std::abs(d.t)));
        CHECK(std::abs(tr.x3.trace() - d.t) < 1e-8 * (1.0 + std::abs(d.t)));
        CHECK(std::abs(got.t12 - d.t12) < 1e-8 * (1.0 + std::abs(d.t12)));
        CHECK(std::abs(got.t23 - d.t23) < 1e-8 * (1.0 + std::abs(d.t23)));
        CHECK(std::abs(got.t13 - d.t13) < 1e-8 * (1.0 + std::abs(d.t13)));
        CHECK(std::abs(got.t123 - d.t123) < 1e-8 * (1.0 + std::abs(d.t123)));
        ++done;
    }
    CHECK(done >= 25);
}

TEST_CASE("realize_triple rejects identity data") {
    TraceData d{2.0, 2.0, 2.0, 2.0, 2.0};
    CHECK_THROWS_AS(realize_triple(d), domain_error);
}

TEST_CASE("realize_triple handles a parabolic common trace") {
    SplitMix64 rng = derive_rng(5, "sl2-parabolic");
    Mat2 x1{1.0, 1.0, 0.0, 1.0};
    Mat2 x2{1.0, 0.0, 3.0, 1.0};
    Mat2 x3 = random_sl2_with_trace(rng, 2.0);
    TraceData d = measure_traces(x1, x2, x3);
    Mat2Triple tr = realize_triple(d);
    TraceData got = measure_traces(tr.x1, tr.x2, tr.x3);
    CHECK(std::abs(got.t12 - d.t12) < 1e-8 * (1.0 + std::abs(d.t12)));
    CHECK(std::abs(got.t123 - d.t123) < 1e-8 * (1.0 + std::abs(d.t123)));
}

TEST_CASE("inadmissible trace data is rejected") {
    // random numbers generically violate the quadratic
    TraceData d{0.3, 1.1, -0.7, 0.9, 5.0};
    if (admissibility_residual(d) > 1e-3) CHECK_THROWS_AS(realize_triple(d), domain_error);
}
