// gibbs.hpp -- continuous Ising Gibbs measure: exact action, estimators, MCMC

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "sbl/kernel.hpp"
#include "sbl/paths.hpp"

namespace sbl {

struct GibbsParams {
    double lambda = 0.0;
    double mu = 0.0;
    double horizon = 1.0; // T > 0
};

// A Monte Carlo result. merged() pools parts by raw sample count:
//   mean = sum n_i mean_i / N,  var = sum n_i^2 var_i / N^2,  ess = sum ess_i.
// The pool is associative; workers are merged in index order so repeated runs
// are bit-identical.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ess = 0.0;
    long n_raw = 0;

    static Estimate merged(const std::vector<Estimate>& parts);
};

// ln of a positive Monte Carlo mean with delta-method error.
struct LogEstimate {
    double log_mean = 0.0;
    double std_error = 0.0;
    double ess = 0.0;
    long n_raw = 0;
};

// A[x] = lambda^2 sum_{I,J} sign(I) sign(J) rect_integral(I, J) - mu \int x.
// Exact for piecewise-constant paths; no time grid anywhere.
// Throws std::invalid_argument if the path horizon differs from params.
double action(const SpinPath& path, const ExpSumKernel& kernel, const GibbsParams& params);

// Action difference for flipping the path sign on [u, horizon] (what a single
// jump insertion or removal at u does). O(#intervals * #kernel terms).
double flip_tail_delta(const SpinPath& path, const ExpSumKernel& kernel,
                       const GibbsParams& params, double u);

// Sample mean of e^{A[x]} over iid reference paths, log-stabilized.
Estimate estimate_Z_reweight(Rng& rng, const ExpSumKernel& kernel,
                             const GibbsParams& params, long n_samples);
LogEstimate estimate_logZ_reweight(Rng& rng, const ExpSumKernel& kernel,
                                   const GibbsParams& params, long n_samples);

// Self-normalized importance sampling of <observable> with delta-method error.
Estimate reweight_expect(Rng& rng, const ExpSumKernel& kernel, const GibbsParams& params,
                         const std::function<double(const SpinPath&)>& observable,
                         long n_samples);

enum class MoveKind { Birth = 0, Death = 1, Shift = 2, Flip = 3 };
constexpr int kMoveCount = 4;
// Proposal mix; birth and death probabilities must stay equal.
constexpr double kMoveProbability[kMoveCount] = {0.35, 0.35, 0.20, 0.10};

struct MoveStats {
    long proposed[kMoveCount] = {0, 0, 0, 0};
    long accepted[kMoveCount] = {0, 0, 0, 0};

    double acceptance(MoveKind kind) const;
};

struct ChainState {
    SpinPath path;
    double cached_action = 0.0;
    MoveStats stats;
    long steps_since_refresh = 0;
};

ChainState init_chain(Rng& rng, const ExpSumKernel& kernel, const GibbsParams& params);

// One Metropolis-Hastings move. Acceptance ratios against the unit-rate
// Poisson reference measure (ordered-simplex density e^{-T}):
//   birth:  u ~ U(0,T),          min(1, e^{dA} T/(n+1))
//   death:  uniform jump choice, min(1, e^{dA} n/T)
//   shift:  one jump to U(0,T),  min(1, e^{dA})
//   flip:   global sign flip,    min(1, e^{dA})
// Rejected moves leave the state unchanged. The cached action is refreshed
// from scratch every 10^4 accepted-or-rejected steps.
bool mcmc_step(ChainState& state, Rng& rng, const ExpSumKernel& kernel,
               const GibbsParams& params);

// Optional measurement trace: one "step,action,value" row every stride steps.
struct ChainTrace {
    std::ostream* out = nullptr;
    long stride = 1000;
};

// MCMC time average after burn-in; std error from 32 batch means, ess from the
// integrated autocorrelation time. Throws std::runtime_error on a non-finite
// observable value.
Estimate gibbs_expect(Rng& rng, const ExpSumKernel& kernel, const GibbsParams& params,
                      const std::function<double(const SpinPath&)>& observable,
                      long budget, long burnin, ChainState* chain_out = nullptr,
                      ChainTrace trace = {});

// <(\int x)^k> for k = 1..n_max at fixed params, with the covariance of the
// estimates (32 batch means).
struct MomentVector {
    int n_max = 0;
    std::vector<double> value;            // value[k-1] = estimate of m_k
    std::vector<std::vector<double>> cov; // covariance of the estimates
    double ess = 0.0;
    long n_raw = 0;

    static MomentVector merged(const std::vector<MomentVector>& parts);
};

MomentVector moments_of_time_integral(Rng& rng, const ExpSumKernel& kernel,
                                      const GibbsParams& params, int n_max,
                                      long budget, long burnin,
                                      MoveStats* stats_out = nullptr,
                                      ChainTrace trace = {});

// ln Z by a stepping-stone bridge along the action scale: stage k samples the
// measure with action (k/n_stages) A by MCMC, and the product of the stage
// ratios E_k[exp(A/n_stages)] telescopes to Z. Independent cross-check for the
// direct reweighting estimator.
LogEstimate estimate_logZ_bridge(Rng& rng, const ExpSumKernel& kernel,
                                 const GibbsParams& params, int n_stages,
                                 long budget_per_stage, long burnin);

// Parallel drivers: worker w uses Rng::worker_stream(seed, w); results are
// merged in worker order. The trace, when given, comes from worker 0 only.
Estimate estimate_Z_reweight_parallel(std::uint64_t seed, int workers,
                                      const ExpSumKernel& kernel,
                                      const GibbsParams& params, long n_samples);
LogEstimate estimate_logZ_reweight_parallel(std::uint64_t seed, int workers,
                                            const ExpSumKernel& kernel,
                                            const GibbsParams& params, long n_samples);
MomentVector moments_parallel(std::uint64_t seed, int workers, const ExpSumKernel& kernel,
                              const GibbsParams& params, int n_max, long budget,
                              long burnin, MoveStats* stats_out = nullptr,
                              ChainTrace trace = {});

} // namespace sbl
