#include "pretzel/roots.hpp"

#include <algorithm>
#include <cmath>

namespace pretzel {

std::vector<std::complex<double>> uni_roots(std::vector<std::complex<double>> c, double tol,
                                            int max_iter) {
    while (!c.empty() && std::abs(c.back()) == 0.0) c.pop_back();
    if (c.size() < 2) throw domain_error("uni_roots: polynomial must have positive degree");

    // exact roots at the origin deflate immediately
    std::vector<std::complex<double>> found;
    while (c.size() > 1 && std::abs(c.front()) == 0.0) {
        found.emplace_back(0.0, 0.0);
        c.erase(c.begin());
    }
    if (c.size() < 2) return found;

    // uniform scaling (roots unchanged) keeps evaluation magnitudes sane
    double top = 0.0;
    for (const auto& x : c) top = std::max(top, std::abs(x));
    for (auto& x : c) x /= top;

    const std::size_t n = c.size() - 1;
    const std::complex<double> lead = c.back();

    auto eval = [&](std::complex<double> x) {
        std::complex<double> acc = c[n];
        for (std::size_t k = n; k-- > 0;) acc = acc * x + c[k];
        return acc;
    };
    // relative backward error of z as a root: |p(z)| against the size of the
    // terms that were summed to evaluate it
    auto backward_error = [&](std::complex<double> x) {
        std::complex<double> acc = c[n];
        double scale = std::abs(c[n]);
        double ax = std::abs(x);
        for (std::size_t k = n; k-- > 0;) {
            acc = acc * x + c[k];
            scale = scale * ax + std::abs(c[k]);
        }
        return std::abs(acc) / std::max(scale, 1e-300);
    };

    // Fujiwara bound: every root has |z| <= 2 max_k |c_{n-k}/c_n|^{1/k}.
    // Unlike the Cauchy bound on the monic normalization this stays honest
    // when the coefficients span many orders of magnitude.
    double radius = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        double q = std::abs(c[n - k]) / std::abs(lead);
        if (q > 0.0) radius = std::max(radius, std::pow(q, 1.0 / static_cast<double>(k)));
    }
    radius = std::max(2.0 * radius, 0.5);
    std::vector<std::complex<double>> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        double ang = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n) + 0.7;
        z[i] = radius * std::complex<double>(std::cos(ang), std::sin(ang));
    }

    std::vector<char> done(n, 0);
    int it = 0;
    for (; it < max_iter; ++it) {
        bool all_done = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            std::complex<double> den = lead;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) den *= (z[i] - z[j]);
            if (std::abs(den) == 0.0) den = 1e-300; // coincident iterates
            z[i] -= eval(z[i]) / den;
            if (backward_error(z[i]) < tol)
                done[i] = 1;
            else
                all_done = false;
        }
        if (all_done) {
            found.insert(found.end(), z.begin(), z.end());
            return found;
        }
    }
    found.insert(found.end(), z.begin(), z.end());
    throw root_failure("uni_roots: no convergence within iteration cap", found, it);
}

std::vector<std::complex<double>> scaled_coeffs(const MultiPoly& p, const std::string& v) {
    if (p.is_zero()) throw domain_error("scaled_coeffs: zero polynomial");
    auto cs = p.coeffs_in(v);
    long max_exp = std::numeric_limits<long>::min();
    std::vector<ScaledDouble> scaled(cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (!cs[i].is_constant())
            throw domain_error("scaled_coeffs: polynomial is not univariate in " + v);
        scaled[i] = to_scaled_double(cs[i].constant_value());
        if (scaled[i].mantissa != 0.0) max_exp = std::max(max_exp, scaled[i].exp2);
    }
    std::vector<std::complex<double>> out(cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (scaled[i].mantissa == 0.0) continue;
        long sh = scaled[i].exp2 - max_exp;
        out[i] = (sh < -1074) ? 0.0 : std::ldexp(scaled[i].mantissa, static_cast<int>(sh));
    }
    return out;
}

std::vector<std::complex<double>> uni_roots(const MultiPoly& p, double tol, int max_iter) {
    if (p.vars().size() > 1)
        throw domain_error("uni_roots: polynomial has more than one variable");
    if (p.is_zero() || p.is_constant())
        throw domain_error("uni_roots: polynomial must have positive degree");
    return uni_roots(scaled_coeffs(p, p.vars().front()), tol, max_iter);
}

} // namespace pretzel
