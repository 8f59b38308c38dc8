#include "pretzel/sl2.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "pretzel/chebyshev.hpp"

namespace pretzel {

namespace {

double entry_abs_max(const Mat2& m) {
    return std::max(std::max(std::abs(m.a), std::abs(m.b)),
                    std::max(std::abs(m.c), std::abs(m.d)));
}

bool near_plus_minus_identity(const Mat2& x, double tol) {
    Mat2 id = Mat2::identity();
    return distance_max(x, id) < tol || distance_max(x, cdouble(-1.0) * id) < tol;
}

Eigen::Vector4cd flatten(const Mat2& m) {
    Eigen::Vector4cd v;
    v << m.a, m.b, m.c, m.d;
    return v;
}

} // namespace

Mat2 Mat2::inverse() const {
    cdouble dt = det();
    if (std::abs(dt) < 1e-300) throw domain_error("Mat2::inverse: singular matrix");
    return {d / dt, -b / dt, -c / dt, a / dt};
}

double Mat2::norm_max() const { return entry_abs_max(*this); }

double distance_max(const Mat2& x, const Mat2& y) { return entry_abs_max(x - y); }

bool approx_sl2(const Mat2& x, double tol) { return std::abs(x.det() - 1.0) < tol; }

Mat2 sl2_power(const Mat2& x, long k) {
    cdouble t = x.trace();
    cdouble wk = omega_eval(k, t);
    cdouble wk1 = omega_eval(k - 1, t);
    return wk * x - wk1 * Mat2::identity();
}

PairIdentityResiduals trace_identity_residuals(const Mat2& x, const Mat2& y) {
    cdouble t1 = x.trace(), t2 = y.trace(), t12 = (x * y).trace();
    Mat2 lhs1 = x * y * x;
    Mat2 rhs1 = t12 * x - y.inverse();
    Mat2 lhs2 = x * y + y * x;
    Mat2 rhs2 = (t12 - t1 * t2) * Mat2::identity() + t2 * x + t1 * y;
    return {distance_max(lhs1, rhs1), distance_max(lhs2, rhs2)};
}

bool is_regular_pair(const Mat2& x, const Mat2& y, double tol) {
    if (near_plus_minus_identity(x, tol))
        throw domain_error("is_regular_pair: X is within tolerance of +/-I");
    if (near_plus_minus_identity(y, tol))
        throw domain_error("is_regular_pair: Y is within tolerance of +/-I");
    Eigen::Matrix4cd m;
    m.row(0) = flatten(Mat2::identity());
    m.row(1) = flatten(x);
    m.row(2) = flatten(y);
    m.row(3) = flatten(x * y);
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(m);
    const auto& s = svd.singularValues();
    return s(3) > tol * s(0);
}

namespace {

// The (at most two) eigendirections of a non-scalar 2x2 matrix.
std::vector<std::array<cdouble, 2>> eigendirections(const Mat2& m) {
    cdouble t = m.trace();
    cdouble disc = std::sqrt(t * t - 4.0 * m.det());
    std::vector<std::array<cdouble, 2>> dirs;
    for (cdouble mu : {0.5 * (t + disc), 0.5 * (t - disc)}) {
        // rows of (m - mu I) annihilate the eigenvector; use the larger one
        std::array<cdouble, 2> v1 = {m.b, mu - m.a};
        std::array<cdouble, 2> v2 = {mu - m.d, m.c};
        double n1 = std::abs(v1[0]) + std::abs(v1[1]);
        double n2 = std::abs(v2[0]) + std::abs(v2[1]);
        std::array<cdouble, 2> v = n1 >= n2 ? v1 : v2;
        double n = std::max(n1, n2);
        if (n < 1e-14) continue; // scalar matrix: caller handles
        dirs.push_back({v[0] / n, v[1] / n});
    }
    return dirs;
}

bool is_eigendirection(const Mat2& m, const std::array<cdouble, 2>& v, double tol) {
    cdouble w0 = m.a * v[0] + m.b * v[1];
    cdouble w1 = m.c * v[0] + m.d * v[1];
    double cross = std::abs(w0 * v[1] - w1 * v[0]);
    double scale = (std::abs(w0) + std::abs(w1)) * (std::abs(v[0]) + std::abs(v[1]));
    return cross < tol * std::max(1.0, scale);
}

} // namespace

bool is_regular_triple(const Mat2& x1, const Mat2& x2, const Mat2& x3, double tol) {
    const Mat2* mats[3] = {&x1, &x2, &x3};
    const Mat2* anchor = nullptr;
    for (const Mat2* m : mats)
        if (!near_plus_minus_identity(*m, tol)) {
            anchor = m;
            break;
        }
    // all three are scalar: every direction is a common eigenvector
    if (anchor == nullptr) return false;
    for (const auto& v : eigendirections(*anchor)) {
        bool common = true;
        for (const Mat2* m : mats)
            if (!near_plus_minus_identity(*m, tol) && !is_eigendirection(*m, v, tol)) {
                common = false;
                break;
            }
        if (common) return false;
    }
    return true;
}

TraceData measure_traces(const Mat2& x1, const Mat2& x2, const Mat2& x3) {
    TraceData d;
    d.t = x1.trace();
    d.t12 = (x1 * x2).trace();
    d.t23 = (x2 * x3).trace();
    d.t13 = (x1 * x3).trace();
    d.t123 = (x1 * x2 * x3).trace();
    return d;
}

TripleTraceQuadratic triple_trace_quadratic(cdouble t, cdouble t12, cdouble t23, cdouble t13) {
    TripleTraceQuadratic q;
    cdouble sum = t12 + t23 + t13;
    q.nu1 = t * sum - t * t * t;
    q.nu0 = t * t * (3.0 - sum) + t12 * t12 + t23 * t23 + t13 * t13 + t12 * t23 * t13 - 4.0;
    cdouble disc = std::sqrt(q.nu1 * q.nu1 - 4.0 * q.nu0);
    q.roots = {0.5 * (q.nu1 + disc), 0.5 * (q.nu1 - disc)};
    q.normalization =
        "nu0 = t^2*(3 - t12 - t23 - t13) + t12^2 + t23^2 + t13^2 + t12*t23*t13 - 4 "
        "(symmetric square list; a duplicated t13 in common transcriptions is read as t12)";
    return q;
}

double admissibility_residual(const TraceData& d) {
    TripleTraceQuadratic q = triple_trace_quadratic(d.t, d.t12, d.t23, d.t13);
    return std::abs(d.t123 * d.t123 - q.nu1 * d.t123 + q.nu0);
}

Mat2Triple realize_triple(const TraceData& d, double tol) {
    TripleTraceQuadratic q = triple_trace_quadratic(d.t, d.t12, d.t23, d.t13);
    double adm_scale = 1.0 + std::norm(d.t123) + std::abs(q.nu1 * d.t123) + std::abs(q.nu0);
    if (admissibility_residual(d) > tol * adm_scale)
        throw domain_error("realize_triple: trace data fails the admissibility quadratic");

    cdouble disc = std::sqrt(d.t * d.t - 4.0);
    cdouble u1 = 0.5 * (d.t + disc), u2 = 0.5 * (d.t - disc);
    // canonical branch: |u| >= 1, ties broken toward nonnegative imaginary part
    cdouble primary, secondary;
    if (std::abs(std::abs(u1) - std::abs(u2)) < 1e-9) {
        primary = u1.imag() >= 0 ? u1 : u2;
        secondary = u1.imag() >= 0 ? u2 : u1;
    } else if (std::abs(u1) > std::abs(u2)) {
        primary = u1;
        secondary = u2;
    } else {
        primary = u2;
        secondary = u1;
    }

    auto close = [&](cdouble got, cdouble want) {
        return std::abs(got - want) < tol * (1.0 + std::abs(want));
    };

    for (cdouble u : {primary, secondary}) {
        if (std::abs(u) < 1e-12) continue;
        Mat2 x1{u, 1.0, 0.0, 1.0 / u};
        for (cdouble v : {u, 1.0 / u}) {
            cdouble c = d.t12 - u * v - 1.0 / (u * v);
            Mat2 x2{v, 0.0, c, 1.0 / v};
            // linear system for the entries of X3 from the four remaining traces
            Eigen::Matrix4cd m;
            Eigen::Vector4cd rhs;
            m << 1.0, 0.0, 0.0, 1.0,
                 u, 0.0, 1.0, 1.0 / u,
                 v, c, 0.0, 1.0 / v,
                 u * v + c, c / u, 1.0 / v, 1.0 / (u * v);
            rhs << d.t, d.t13, d.t23, d.t123;
            Eigen::FullPivLU<Eigen::Matrix4cd> lu(m);
            if (!lu.isInvertible()) continue;
            Eigen::Vector4cd sol = lu.solve(rhs);
            Mat2 x3{sol(0), sol(1), sol(2), sol(3)};
            if (!(std::abs(x3.det() - 1.0) < tol * 10)) continue;
            TraceData got = measure_traces(x1, x2, x3);
            if (close(got.t, d.t) && close(x2.trace(), d.t) && close(x3.trace(), d.t) &&
                close(got.t12, d.t12) && close(got.t23, d.t23) && close(got.t13, d.t13) &&
                close(got.t123, d.t123))
                return {x1, x2, x3};
        }
    }
    throw domain_error("realize_triple: no reconstruction branch realizes the trace data");
}

Mat2 random_sl2(SplitMix64& rng, double box) {
    for (int tries = 0; tries < 64; ++tries) {
        cdouble a = rng.complex_in_box(box);
        cdouble b = rng.complex_in_box(box);
        cdouble c = rng.complex_in_box(box);
        if (std::abs(a) < 0.25) continue;
        cdouble d = (1.0 + b * c) / a;
        return {a, b, c, d};
    }
    throw domain_error("random_sl2: rejection sampling failed");
}

Mat2 random_sl2_with_trace(SplitMix64& rng, cdouble t, double box) {
    Mat2 m = random_sl2(rng, box);
    Mat2 companion{t, -1.0, 1.0, 0.0};
    return m * companion * m.inverse();
}

} // namespace pretzel
