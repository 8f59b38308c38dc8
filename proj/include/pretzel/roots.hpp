#pragma once

#include <complex>
#include <string>
#include <vector>

#include "pretzel/multipoly.hpp"

namespace pretzel {

// All roots (with multiplicity) of the polynomial sum_k coeffs[k] * x^k by
// Durand-Kerner simultaneous iteration, started on a Fujiwara-bound circle.
// A root is accepted when its relative backward error |p(z)| / sum_k |c_k||z|^k
// drops below tol (insensitive to coefficient dynamic range); on failure
// throws root_failure carrying the partial approximations.
std::vector<std::complex<double>> uni_roots(std::vector<std::complex<double>> coeffs,
                                            double tol = 1e-10, int max_iter = 1000);

// Same for an exact univariate polynomial (at most one variable).
std::vector<std::complex<double>> uni_roots(const MultiPoly& p, double tol = 1e-10,
                                            int max_iter = 1000);

// Coefficient list of p in v, uniformly divided by a power of two chosen so
// the largest magnitude lands near 1. Exact-integer coefficients of any size
// survive the trip to double this way (the polynomial's roots are unchanged).
std::vector<std::complex<double>> scaled_coeffs(const MultiPoly& p, const std::string& v);

} // namespace pretzel
