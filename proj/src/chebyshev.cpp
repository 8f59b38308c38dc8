#include "pretzel/chebyshev.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace pretzel {

namespace {

std::mutex omega_cache_mutex;

// Cache of omega_k in the canonical variable "t" for k >= 0; append-only.
const MultiPoly& omega_nonneg(long k) {
    static std::map<long, MultiPoly> cache = {{0, MultiPoly()}, {1, MultiPoly::from_long(1)}};
    std::lock_guard<std::mutex> lock(omega_cache_mutex);
    long have = cache.rbegin()->first;
    if (k > have) {
        const MultiPoly t = MultiPoly::var("t");
        for (long i = have + 1; i <= k; ++i) cache[i] = t * cache[i - 1] - cache[i - 2];
    }
    return cache[k];
}

std::complex<double> int_pow(std::complex<double> a, long k) {
    if (k < 0) return 1.0 / int_pow(a, -k);
    std::complex<double> r = 1.0, base = a;
    while (k > 0) {
        if (k & 1) r *= base;
        k >>= 1;
        base *= base;
    }
    return r;
}

} // namespace

MultiPoly omega_poly(long k, const std::string& var) {
    MultiPoly p = k >= 0 ? omega_nonneg(k) : -omega_nonneg(-k);
    if (var != "t") p = p.substitute("t", MultiPoly::var(var));
    return p;
}

std::complex<double> omega_eval(long k, std::complex<double> t) {
    // double eigenvalue branch: omega_k -> k * a^(k-1) at a = ±1
    if (std::abs(t - 2.0) < 1e-12) return static_cast<double>(k);
    if (std::abs(t + 2.0) < 1e-12)
        return static_cast<double>(k) * ((k % 2 == 0) ? -1.0 : 1.0);
    std::complex<double> a = 0.5 * (t + std::sqrt(t * t - 4.0));
    std::complex<double> ak = int_pow(a, k);
    return (ak - 1.0 / ak) / (a - 1.0 / a);
}

MultiPoly first_kind_poly(long n, const std::string& var) {
    return omega_poly(n + 1, var) - omega_poly(n - 1, var);
}

std::complex<double> first_kind_eval(long n, std::complex<double> s) {
    return omega_eval(n + 1, s) - omega_eval(n - 1, s);
}

OmegaTriple omega_triple(long k, const std::string& var) {
    return {omega_poly(k - 1, var), omega_poly(k, var), omega_poly(k + 1, var)};
}

OmegaTripleValue omega_triple_eval(long k, std::complex<double> s) {
    return {omega_eval(k - 1, s), omega_eval(k, s), omega_eval(k + 1, s)};
}

} // namespace pretzel
