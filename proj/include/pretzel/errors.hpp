#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace pretzel {

// Domain errors: mathematically invalid input or a computation that left its
// contract (singular system, vanishing resultant, parabolic meridian, ...).
// The CLI maps these to exit code 1; malformed input files map to exit 2.
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Root finding failed to converge; carries whatever approximations were
// reached so callers can report diagnostics.
struct root_failure : domain_error {
    root_failure(const std::string& what, std::vector<std::complex<double>> partial_roots,
                 int iterations_used)
        : domain_error(what), partial(std::move(partial_roots)), iterations(iterations_used) {}
    std::vector<std::complex<double>> partial;
    int iterations = 0;
};

// An armed arithmetic work budget ran out. Not a mathematical failure: the
// attempt was abandoned as too expensive and the caller may retry another way
// (different elimination order, larger budget).
struct budget_exceeded : domain_error {
    using domain_error::domain_error;
};

// A resultant chain died (zero resultant or collapse to a constant); names the
// stage so the caller can retry with a different elimination order.
struct elimination_error : domain_error {
    elimination_error(const std::string& what, std::string stage_variable, std::size_t stage_idx)
        : domain_error(what), variable(std::move(stage_variable)), stage(stage_idx) {}
    std::string variable;
    std::size_t stage = 0;
};

} // namespace pretzel
