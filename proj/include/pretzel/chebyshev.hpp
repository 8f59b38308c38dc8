#pragma once

#include <complex>
#include <string>

#include "pretzel/multipoly.hpp"

namespace pretzel {

// The trace recursion family: omega_0 = 0, omega_1 = 1,
// omega_{k+1} = t*omega_k - omega_{k-1}, extended by omega_{-k} = -omega_k.
// Writing t = a + 1/a, omega_k(t) = (a^k - a^{-k}) / (a - a^{-1}); at the
// double eigenvalue t = ±2 (a = ±1) the limit is k * a^{k-1}.
MultiPoly omega_poly(long k, const std::string& var = "t");
std::complex<double> omega_eval(long k, std::complex<double> t);

// First-kind normalization: p_n = omega_{n+1} - omega_{n-1} satisfies
// p_n(a + 1/a) = a^n + a^{-n}, hence p_n(2 cos θ) = 2 cos(nθ).
MultiPoly first_kind_poly(long n, const std::string& var = "s");
std::complex<double> first_kind_eval(long n, std::complex<double> s);

// (alpha, beta, gamma) = (omega_{k-1}, omega_k, omega_{k+1}) in a named
// variable — the coefficient triple attached to a tangle with k twists.
struct OmegaTriple {
    MultiPoly alpha, beta, gamma;
};
OmegaTriple omega_triple(long k, const std::string& var);

struct OmegaTripleValue {
    std::complex<double> alpha, beta, gamma;
};
OmegaTripleValue omega_triple_eval(long k, std::complex<double> s);

} // namespace pretzel
