// observables.hpp -- partition combinatorics, energy derivatives, extrapolations

#pragma once

#include <functional>
#include <vector>

#include "sbl/gibbs.hpp"
#include "sbl/model.hpp"

namespace sbl {

struct SetPartition {
    std::vector<std::vector<int>> blocks; // disjoint, covering {1..n}, ordered by minimum
};

// All partitions of {1..n}; count = Bell(n). 1 <= n <= 12.
std::vector<SetPartition> set_partitions(int n);

// Streams the block sizes of every partition of {1..n} without materializing
// the partitions (restricted-growth-string walk).
void for_each_partition(int n, const std::function<void(const std::vector<int>&)>& fn);

// (ln g)^(n) from [g, g', ..., g^(n)]:
//   sum over partitions of (-1)^{|P|-1} (|P|-1)! prod_B g^{(|B|)} / g^{|P|}.
// Throws std::domain_error for g <= 0.
double log_derivative(const std::vector<double>& g_derivs);

// n-th cumulant from raw moments m[k] = <Y^k> (m[0] ignored):
//   u_n = sum over partitions of (-1)^{|P|-1} (|P|-1)! prod_B m_{|B|}.
double ursell_from_moments(const std::vector<double>& m, int n);

// The same partition sum with the derivative sign bookkeeping,
//   sum over partitions of (-1)^{|P|+n} (|P|-1)! prod_B m_{|B|},
// which equals (-1)^{n+1} * ursell_from_moments identically.
double moment_partition_sum(const std::vector<double>& m, int n);

// Cumulant of the accumulated moments with linear error propagation.
Estimate ursell(const MomentVector& moments, int n);

// d^n/dmu^n of the ground state energy at fixed (T, lambda, mu):
// (1/T) * moment_partition_sum over the estimated moments, with errors.
Estimate energy_derivative(const MomentVector& moments, int n, double T);

struct LadderPoint {
    double T;
    double value;
    double error;
};

struct FitResult {
    double value = 0.0; // intercept: the T -> infinity limit
    double error = 0.0;
    double slope = 0.0; // 1/T coefficient
    double slope_error = 0.0;
    double chi2 = 0.0;
    int n_points = 0;
};

// Weighted least squares of y = value + slope / T.
FitResult fit_against_inverse_T(const std::vector<LadderPoint>& points);

// E_T = -(1/T) ln Z_T - 1 per sample, then the 1/T fit. Input: (T, ln Z, err).
// Throws std::invalid_argument with fewer than 3 points.
FitResult bloch_extrapolate(const std::vector<LadderPoint>& logZ_samples);

struct SusceptibilityResult {
    Estimate chi;                    // extrapolated d^2_mu E(lambda, 0)
    std::vector<LadderPoint> ladder; // -(1/T) <(int x)^2> per T
    FitResult fit;
};

// -(1/T) <(\int x)^2>_{T,lambda,0} on a T ladder with a 1/T extrapolation.
// Rejects mu != 0 (the formula lives at the symmetry point).
SusceptibilityResult susceptibility(Rng& rng, const ExpSumKernel& kernel,
                                    const GibbsParams& params,
                                    const std::vector<double>& T_ladder,
                                    long budget, long burnin);

// The trace, when given, records the chain at the first ladder point; stats
// aggregate the move acceptances over the whole ladder.
SusceptibilityResult susceptibility_parallel(std::uint64_t seed, int workers,
                                             const ExpSumKernel& kernel,
                                             const GibbsParams& params,
                                             const std::vector<double>& T_ladder,
                                             long budget, long burnin,
                                             ChainTrace trace = {},
                                             MoveStats* stats_out = nullptr);

struct SweepOptions {
    double T = 20.0;
    long budget = 200'000;
    long burnin = 20'000;
    int n_nodes = 32;
    QuadratureRule rule = QuadratureRule::PowerStretched;
    double epsilon = 0.5; // L1 budget of the correlation bound
    std::uint64_t seed = 1;
    int workers = 1;
};

struct MassSweepRow {
    double mass;
    double lambda;
    double T;
    double value;
    double std_error;
    double ess;
    double kernel_l1; // ||W_m||_{L1} of the discretized kernel
};

struct MassSweepResult {
    std::vector<MassSweepRow> rows;
    double l1_bound = 0.0;    // (1/2) ||nu^{-1/2} v||^2, mass independent
    bool l1_bound_ok = false; // every row: kernel_l1 <= l1_bound (+tolerance)
    // True when nothing statistically indicates a divergent m -> 0 limit: a
    // bounded limit grows monotonically but with shrinking increments on a
    // log-spaced ladder, so divergence is flagged only when the increments
    // fail to shrink (4 combined sigma).
    bool bounded_trend_ok = false;
};

// Susceptibility versus boson mass at fixed lambda: discretize, build the
// kernel, estimate the second moment at the configured horizon. Requires
// lambda^2 * l1_bound <= epsilon. Throws on an empty mass list.
MassSweepResult mass_sweep(const ContinuousModel& model, double lambda,
                           const std::vector<double>& masses, const SweepOptions& opts);

// (epsilon/2)^{1/2} / ||nu^{-1/2} v||_2 with a user-supplied epsilon.
double lambda_c(const ContinuousModel& model, double epsilon);

} // namespace sbl
