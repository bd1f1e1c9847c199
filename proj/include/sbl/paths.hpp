// paths.hpp -- the +/-1 jump process: sampling, exact functionals, moment formulas

#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "sbl/rng.hpp"

namespace sbl {

// One realization of the +/-1 jump process on [0, horizon]: an initial fair
// sign and the sorted jump times, strictly inside (0, horizon). The path is
// right-continuous; its value at t is initial_sign * (-1)^{#jumps <= t}.
struct SpinPath {
    int initial_sign = 1;
    std::vector<double> jumps;
    double horizon = 1.0;

    int eval(double t) const; // throws std::out_of_range for t outside [0, horizon]
    double time_integral() const; // exact \int_0^T x_t dt
    std::size_t jump_count() const { return jumps.size(); }
};

// Unit-rate Poisson jump count; given the count, jump times iid uniform.
// Floating-point ties are dropped and the excess re-sampled.
SpinPath sample_path(Rng& rng, double horizon);

// E[X_{s_1} ... X_{s_n}] for sorted times: zero for odd n, otherwise the
// product of exp(-2 (s_{2i} - s_{2i-1})) over consecutive pairs.
// Throws std::invalid_argument on unsorted or negative input.
double exact_moment(const std::vector<double>& sorted_times);

// e^{-sum t_k} <alpha, sigma_z e^{t_1 sigma_x} sigma_z ... e^{t_n sigma_x} sigma_z beta>
// evaluated with e^{t sigma_x} = cosh(t) I + sinh(t) sigma_x, rescaled per factor
// so no intermediate overflows. Durations must be positive.
double spin_semigroup_element(const std::array<double, 2>& alpha,
                              const std::array<double, 2>& beta,
                              const std::vector<double>& durations);

// Cross-check of the finite-dimensional spin identity: the matrix element
// against the closed-form moment and against a Monte Carlo estimate, for all
// four sigma_x eigenvector combinations.
struct SpinFknReport {
    struct Row {
        const char* label;
        double matrix_element;
        double closed_moment;
        double mc_mean;
        double mc_std_error;
    };
    std::vector<Row> rows;

    double max_closed_deviation() const; // max |matrix_element - closed_moment|
    double max_mc_sigma() const;         // max |mc - closed| in std errors
};

SpinFknReport verify_spin_fkn(const std::vector<double>& durations,
                              long sample_budget, Rng& rng);

// Path serialization, one record per path: horizon, initial sign, jump count,
// jump times. CSV is line-per-record; the binary layout is the 8-byte magic
// "SBLPATH1", a little-endian uint64 record count, then per record one double
// horizon, int32 sign, uint32 count and count doubles.
void save_paths_csv(std::ostream& out, const std::vector<SpinPath>& paths);
std::vector<SpinPath> load_paths_csv(std::istream& in);
void save_paths_binary(std::ostream& out, const std::vector<SpinPath>& paths);
std::vector<SpinPath> load_paths_binary(std::istream& in);

} // namespace sbl
