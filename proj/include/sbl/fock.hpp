// fock.hpp -- truncated Fock-space oracle: assembly, spectrum, vacuum semigroup

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sbl/gibbs.hpp"
#include "sbl/linalg.hpp"
#include "sbl/model.hpp"

namespace sbl {

// Per-mode occupation caps plus an optional total boson cap.
struct TruncationSpec {
    std::vector<int> mode_caps;
    int total_cap = -1;                   // < 0: unset
    std::size_t max_dimension = 2'000'000; // memory budget guard

    static TruncationSpec uniform(std::size_t n_modes, int cap, int total = -1);
    TruncationSpec bumped(int extra) const; // all caps (and total, if set) + extra
};

// Occupation-number basis: index = 2 * occ_index + spin, spin 0 = up, 1 = down.
// Occupations are enumerated lexicographically, so index 1 is the spin-down
// vacuum.
struct FockBasis {
    std::vector<int> caps;
    int total_cap = -1;
    std::vector<std::vector<int>> occupations;

    int dim() const { return static_cast<int>(2 * occupations.size()); }
    int vacuum_down_index() const { return 1; }
    long occ_index(const std::vector<int>& occ) const; // -1 if absent
};

FockBasis enumerate_basis(std::size_t n_modes, const TruncationSpec& trunc);

// H = sigma_z + dGamma(omega) + sigma_x (lambda phi(v) + mu), real symmetric:
//   diagonal  : +-1 + sum_j omega_j n_j
//   coupling  : lambda v_j sqrt(n_j + 1) / sqrt(2) between (s, n) and (-s, n + 1_j)
//   spin flip : mu between (s, n) and (-s, n)
struct SparseHamiltonian {
    FockBasis basis;
    SparseSym matrix;
    double lambda = 0.0;
    double mu = 0.0;

    int dim() const { return matrix.dim; }
};

// Throws std::length_error when the truncated dimension exceeds the budget.
SparseHamiltonian build_hamiltonian(const ModeSet& modes, double lambda, double mu,
                                    const TruncationSpec& trunc);

struct SpectrumResult {
    double e0 = 0.0;
    double gap = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

// Two lowest eigenvalues: dense Householder+QL for small operators, otherwise
// Lanczos (full reorthogonalization, Krylov dimension <= 200). Throws
// std::runtime_error if the Krylov iteration stalls above tolerance.
SpectrumResult ground_energy(const SparseHamiltonian& h);

// <vacuum_down, e^{-time H} vacuum_down> by Krylov approximation of the matrix
// exponential; dense eigendecomposition fallback below dimension 2000.
double semigroup_vacuum(const SparseHamiltonian& h, double time);

// Both sides of the integrated-out identity
//   e^{-T} <vac, e^{-T H(lambda,mu)} vac> = E[exp(lambda^2 \int\int W xx - mu \int x)],
// the discrepancy in combined std errors, and a truncation-sensitivity row
// (caps vs caps + 2).
struct FknReport {
    double lhs = 0.0;         // e^{-T} * semigroup at the requested caps
    double lhs_bumped = 0.0;  // same at caps + 2
    Estimate rhs;             // Monte Carlo partition estimate
    double sigma = 0.0;       // |lhs - rhs| in rhs std errors
    double trunc_delta = 0.0; // |lhs - lhs_bumped|
    bool trunc_converged = false; // trunc_delta < 1 MC sigma
    bool pass = false;            // sigma <= 4 with converged truncation
};

FknReport fkn_check(const ModeSet& modes, const GibbsParams& params,
                    const TruncationSpec& trunc, long mc_budget, Rng& rng);

// Same report with the Monte Carlo side split across seeded workers.
FknReport fkn_check_parallel(const ModeSet& modes, const GibbsParams& params,
                             const TruncationSpec& trunc, long mc_budget,
                             std::uint64_t seed, int workers);

// (E(l,h) - 2 E(l,0) + E(l,-h)) / h^2, Richardson-extrapolated over h and h/2.
double finite_diff_susceptibility(const ModeSet& modes, double lambda,
                                  const TruncationSpec& trunc, double h);

// Coordinate-triplet text dump (row col value per line) for external checks.
std::string export_triplets(const SparseHamiltonian& h);

} // namespace sbl
