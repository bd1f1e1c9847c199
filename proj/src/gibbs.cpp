#include "sbl/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sbl {

namespace {

constexpr long kRefreshInterval = 10'000;

struct Interval {
    double lo, hi;
    int sign;
};

// constant-sign intervals of a path, left to right
std::vector<Interval> intervals_of(const SpinPath& path) {
    std::vector<Interval> out;
    out.reserve(path.jumps.size() + 1);
    double prev = 0.0;
    int sign = path.initial_sign;
    for (double t : path.jumps) {
        out.push_back({prev, t, sign});
        prev = t;
        sign = -sign;
    }
    out.push_back({prev, path.horizon, sign});
    return out;
}

} // namespace

double MoveStats::acceptance(MoveKind kind) const {
    const int k = static_cast<int>(kind);
    return proposed[k] ? static_cast<double>(accepted[k]) / proposed[k] : 0.0;
}

Estimate Estimate::merged(const std::vector<Estimate>& parts) {
    Estimate out;
    double var_acc = 0.0;
    for (const auto& p : parts) {
        out.n_raw += p.n_raw;
        out.ess += p.ess;
        out.mean += static_cast<double>(p.n_raw) * p.mean;
        var_acc += static_cast<double>(p.n_raw) * p.n_raw * p.std_error * p.std_error;
    }
    if (out.n_raw > 0) {
        out.mean /= static_cast<double>(out.n_raw);
        out.std_error = std::sqrt(var_acc) / static_cast<double>(out.n_raw);
    }
    return out;
}

double action(const SpinPath& path, const ExpSumKernel& kernel, const GibbsParams& params) {
    if (path.horizon != params.horizon)
        throw std::invalid_argument("action: path horizon does not match params");
    double a = -params.mu * path.time_integral();
    if (params.lambda != 0.0 && !kernel.terms.empty()) {
        const auto segs = intervals_of(path);
        double w_sum = 0.0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            w_sum += rect_integral(kernel, segs[i].lo, segs[i].hi, segs[i].lo, segs[i].hi);
            for (std::size_t j = i + 1; j < segs.size(); ++j) {
                const double cross =
                    rect_integral(kernel, segs[i].lo, segs[i].hi, segs[j].lo, segs[j].hi);
                w_sum += 2.0 * segs[i].sign * segs[j].sign * cross;
            }
        }
        a += params.lambda * params.lambda * w_sum;
    }
    return a;
}

double flip_tail_delta(const SpinPath& path, const ExpSumKernel& kernel,
                       const GibbsParams& params, double u) {
    // x -> x * (1 - 2*1_{[u,T]}) changes the action by
    //   -4 lambda^2 \int_u^T \int_0^u W(t-s) x_t x_s ds dt + 2 mu \int_u^T x_t dt,
    // and the kernel factorizes across u: per term,
    //   \int\int = [\int_0^u e^{-w(u-s)} x_s ds] [\int_u^T e^{-w(t-u)} x_t dt].
    const std::size_t n_terms = kernel.terms.size();
    std::vector<double> left(n_terms, 0.0), right(n_terms, 0.0);
    double tail_integral = 0.0;

    const auto segs = intervals_of(path);
    for (const auto& seg : segs) {
        const double lo = seg.lo, hi = seg.hi;
        if (hi > u) tail_integral += seg.sign * (hi - std::max(lo, u));
        if (params.lambda == 0.0) continue;
        if (lo < u) {
            const double q = std::min(hi, u);
            for (std::size_t j = 0; j < n_terms; ++j) {
                const double w = kernel.terms[j].rate;
                left[j] += seg.sign *
                           (std::exp(-w * (u - q)) - std::exp(-w * (u - lo))) / w;
            }
        }
        if (hi > u) {
            const double p = std::max(lo, u);
            for (std::size_t j = 0; j < n_terms; ++j) {
                const double w = kernel.terms[j].rate;
                right[j] += seg.sign *
                            (std::exp(-w * (p - u)) - std::exp(-w * (hi - u))) / w;
            }
        }
    }

    double delta = 2.0 * params.mu * tail_integral;
    if (params.lambda != 0.0) {
        double cross = 0.0;
        for (std::size_t j = 0; j < n_terms; ++j)
            cross += kernel.terms[j].weight * left[j] * right[j];
        delta += -4.0 * params.lambda * params.lambda * cross;
    }
    return delta;
}

namespace {

struct WeightedSums {
    double shift = 0.0; // common exponent shift
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    long n = 0;
};

WeightedSums weight_sums(Rng& rng, const ExpSumKernel& kernel, const GibbsParams& params,
                         long n_samples) {
    if (n_samples < 2)
        throw std::invalid_argument("estimate_Z_reweight: need at least 2 samples");
    std::vector<double> actions(n_samples);
    double peak = -std::numeric_limits<double>::infinity();
    for (long i = 0; i < n_samples; ++i) {
        const SpinPath path = sample_path(rng, params.horizon);
        actions[i] = action(path, kernel, params);
        peak = std::max(peak, actions[i]);
    }
    WeightedSums s;
    s.shift = peak;
    s.n = n_samples;
    for (double a : actions) {
        const double w = std::exp(a - peak);
        s.sum_w += w;
        s.sum_w2 += w * w;
    }
    return s;
}

Estimate estimate_from_sums(const WeightedSums& s) {
    Estimate est;
    est.n_raw = s.n;
    const double m = s.sum_w / s.n;
    const double m2 = s.sum_w2 / s.n;
    const double var = std::max(0.0, m2 - m * m) * s.n / (s.n - 1.0);
    est.mean = std::exp(s.shift) * m;
    est.std_error = std::exp(s.shift) * std::sqrt(var / s.n);
    est.ess = s.sum_w2 > 0.0 ? s.sum_w * s.sum_w / s.sum_w2 : s.n;
    return est;
}

LogEstimate log_estimate_from_sums(const WeightedSums& s) {
    LogEstimate est;
    est.n_raw = s.n;
    const double m = s.sum_w / s.n;
    const double m2 = s.sum_w2 / s.n;
    const double var = std::max(0.0, m2 - m * m) * s.n / (s.n - 1.0);
    est.log_mean = s.shift + std::log(m);
    est.std_error = std::sqrt(var / s.n) / m;
    est.ess = s.sum_w2 > 0.0 ? s.sum_w * s.sum_w / s.sum_w2 : s.n;
    return est;
}

} // namespace

Estimate estimate_Z_reweight(Rng& rng, const ExpSumKernel& kernel,
                             const GibbsParams& params, long n_samples) {
    return estimate_from_sums(weight_sums(rng, kernel, params, n_samples));
}

LogEstimate estimate_logZ_reweight(Rng& rng, const ExpSumKernel& kernel,
                                   const GibbsParams& params, long n_samples) {
    return log_estimate_from_sums(weight_sums(rng, kernel, params, n_samples));
}

Estimate reweight_expect(Rng& rng, const ExpSumKernel& kernel, const GibbsParams& params,
                         const std::function<double(const SpinPath&)>& observable,
                         long n_samples) {
    if (n_samples < 2)
        throw std::invalid_argument("reweight_expect: need at least 2 samples");
    std::vector<double> actions(n_samples), values(n_samples);
    double peak = -std::numeric_limits<double>::infinity();
    for (long i = 0; i < n_samples; ++i) {
        const SpinPath path = sample_path(rng, params.horizon);
        actions[i] = action(path, kernel, params);
        values[i] = observable(path);
        if (!std::isfinite(values[i]))
            throw std::runtime_error("reweight_expect: observable returned a non-finite value");
        peak = std::max(peak, actions[i]);
    }
    double sum_w = 0.0, sum_w2 = 0.0, sum_wy = 0.0;
    for (long i = 0; i < n_samples; ++i) {
        const double w = std::exp(actions[i] - peak);
        sum_w += w;
        sum_w2 += w * w;
        sum_wy += w * values[i];
    }
    Estimate est;
    est.n_raw = n_samples;
    est.mean = sum_wy / sum_w;
    double resid2 = 0.0;
    for (long i = 0; i < n_samples; ++i) {
        const double w = std::exp(actions[i] - peak);
        const double z = w * (values[i] - est.mean);
        resid2 += z * z;
    }
    est.std_error = std::sqrt(resid2 * n_samples / (n_samples - 1.0)) / sum_w;
    est.ess = sum_w2 > 0.0 ? sum_w * sum_w / sum_w2 : n_samples;
    return est;
}

ChainState init_chain(Rng& rng, const ExpSumKernel& kernel, const GibbsParams& params) {
    ChainState state;
    state.path = sample_path(rng, params.horizon);
    state.cached_action = action(state.path, kernel, params);
    return state;
}

namespace {

bool metropolis_accept(Rng& rng, double log_ratio) {
    if (log_ratio >= 0.0) return true;
    const double u = rng.uniform01();
    return u > 0.0 && std::log(u) < log_ratio;
}

} // namespace

bool mcmc_step(ChainState& state, Rng& rng, const ExpSumKernel& kernel,
               const GibbsParams& params) {
    SpinPath& path = state.path;
    const double T = params.horizon;
    const double n = static_cast<double>(path.jumps.size());

    MoveKind kind;
    {
        const double u = rng.uniform01();
        if (u < kMoveProbability[0]) kind = MoveKind::Birth;
        else if (u < kMoveProbability[0] + kMoveProbability[1]) kind = MoveKind::Death;
        else if (u < kMoveProbability[0] + kMoveProbability[1] + kMoveProbability[2])
            kind = MoveKind::Shift;
        else kind = MoveKind::Flip;
    }
    ++state.stats.proposed[static_cast<int>(kind)];

    bool accepted = false;
    switch (kind) {
        case MoveKind::Birth: {
            const double u = T * rng.uniform01();
            if (u > 0.0 &&
                !std::binary_search(path.jumps.begin(), path.jumps.end(), u)) {
                const double delta = flip_tail_delta(path, kernel, params, u);
                if (metropolis_accept(rng, delta + std::log(T / (n + 1.0)))) {
                    path.jumps.insert(
                        std::upper_bound(path.jumps.begin(), path.jumps.end(), u), u);
                    state.cached_action += delta;
                    accepted = true;
                }
            }
            break;
        }
        case MoveKind::Death: {
            if (!path.jumps.empty()) {
                const auto idx = std::min<std::size_t>(
                    static_cast<std::size_t>(n * rng.uniform01()), path.jumps.size() - 1);
                const double u = path.jumps[idx];
                const double delta = flip_tail_delta(path, kernel, params, u);
                if (metropolis_accept(rng, delta + std::log(n / T))) {
                    path.jumps.erase(path.jumps.begin() + idx);
                    state.cached_action += delta;
                    accepted = true;
                }
            }
            break;
        }
        case MoveKind::Shift: {
            if (!path.jumps.empty()) {
                const auto idx = std::min<std::size_t>(
                    static_cast<std::size_t>(n * rng.uniform01()), path.jumps.size() - 1);
                const double u_old = path.jumps[idx];
                const double u_new = T * rng.uniform01();
                if (u_new > 0.0 && u_new != u_old &&
                    !std::binary_search(path.jumps.begin(), path.jumps.end(), u_new)) {
                    const double d1 = flip_tail_delta(path, kernel, params, u_old);
                    SpinPath trial = path;
                    trial.jumps.erase(trial.jumps.begin() + idx);
                    const double d2 = flip_tail_delta(trial, kernel, params, u_new);
                    if (metropolis_accept(rng, d1 + d2)) {
                        trial.jumps.insert(
                            std::upper_bound(trial.jumps.begin(), trial.jumps.end(), u_new),
                            u_new);
                        path = std::move(trial);
                        state.cached_action += d1 + d2;
                        accepted = true;
                    }
                }
            }
            break;
        }
        case MoveKind::Flip: {
            const double delta = 2.0 * params.mu * path.time_integral();
            if (metropolis_accept(rng, delta)) {
                path.initial_sign = -path.initial_sign;
                state.cached_action += delta;
                accepted = true;
            }
            break;
        }
    }

    if (accepted) ++state.stats.accepted[static_cast<int>(kind)];
    if (++state.steps_since_refresh >= kRefreshInterval) {
        state.cached_action = action(path, kernel, params);
        state.steps_since_refresh = 0;
    }
    return accepted;
}

namespace {

double series_mean(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// std error of the mean from 32 contiguous batch means
double batch_std_error(const std::vector<double>& x, int n_batches = 32) {
    const long n = static_cast<long>(x.size());
    const double mean = series_mean(x);
    if (n < 2 * n_batches) {
        double var = 0.0;
        for (double v : x) var += (v - mean) * (v - mean);
        var /= std::max<long>(1, n - 1);
        return std::sqrt(var / n);
    }
    const long len = n / n_batches;
    double var_b = 0.0;
    double mean_b = 0.0;
    std::vector<double> batch(n_batches);
    for (int b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (long i = b * len; i < (b + 1) * len; ++i) s += x[i];
        batch[b] = s / len;
        mean_b += batch[b];
    }
    mean_b /= n_batches;
    for (int b = 0; b < n_batches; ++b) var_b += (batch[b] - mean_b) * (batch[b] - mean_b);
    var_b /= (n_batches - 1.0);
    return std::sqrt(var_b / n_batches);
}

// effective sample size via the integrated autocorrelation time with a
// self-consistent window (stop once lag > 6 tau)
double acf_ess(const std::vector<double>& x) {
    const long n = static_cast<long>(x.size());
    if (n < 8) return static_cast<double>(n);
    const double mean = series_mean(x);
    double c0 = 0.0;
    for (double v : x) c0 += (v - mean) * (v - mean);
    c0 /= n;
    if (c0 <= 0.0) return static_cast<double>(n);
    double tau = 0.5;
    const long max_lag = std::min<long>(n / 4, 2000);
    for (long k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (long i = 0; i + k < n; ++i) ck += (x[i] - mean) * (x[i + k] - mean);
        ck /= (n - k);
        tau += ck / c0;
        if (k >= 6.0 * tau) break;
    }
    tau = std::max(tau, 0.5);
    return std::clamp(n / (2.0 * tau), 1.0, static_cast<double>(n));
}

} // namespace

Estimate gibbs_expect(Rng& rng, const ExpSumKernel& kernel, const GibbsParams& params,
                      const std::function<double(const SpinPath&)>& observable,
                      long budget, long burnin, ChainState* chain_out, ChainTrace trace) {
    if (budget <= burnin)
        throw std::invalid_argument("gibbs_expect: budget must exceed burnin");
    ChainState state = init_chain(rng, kernel, params);
    for (long i = 0; i < burnin; ++i) mcmc_step(state, rng, kernel, params);
    const long n = budget - burnin;
    std::vector<double> series(n);
    for (long i = 0; i < n; ++i) {
        mcmc_step(state, rng, kernel, params);
        const double y = observable(state.path);
        if (!std::isfinite(y)) {
            std::ostringstream os;
            os << "gibbs_expect: non-finite observable at step " << i;
            throw std::runtime_error(os.str());
        }
        series[i] = y;
        if (trace.out && i % std::max<long>(1, trace.stride) == 0)
            (*trace.out) << i << ',' << state.cached_action << ',' << y << '\n';
    }
    Estimate est;
    est.mean = series_mean(series);
    est.std_error = batch_std_error(series);
    est.ess = acf_ess(series);
    est.n_raw = n;
    if (chain_out) *chain_out = std::move(state);
    return est;
}

MomentVector MomentVector::merged(const std::vector<MomentVector>& parts) {
    MomentVector out;
    if (parts.empty()) return out;
    out.n_max = parts.front().n_max;
    out.value.assign(out.n_max, 0.0);
    out.cov.assign(out.n_max, std::vector<double>(out.n_max, 0.0));
    for (const auto& p : parts) {
        out.n_raw += p.n_raw;
        out.ess += p.ess;
    }
    for (const auto& p : parts) {
        const double f = static_cast<double>(p.n_raw) / out.n_raw;
        for (int i = 0; i < out.n_max; ++i) {
            out.value[i] += f * p.value[i];
            for (int j = 0; j < out.n_max; ++j) out.cov[i][j] += f * f * p.cov[i][j];
        }
    }
    return out;
}

MomentVector moments_of_time_integral(Rng& rng, const ExpSumKernel& kernel,
                                      const GibbsParams& params, int n_max,
                                      long budget, long burnin, MoveStats* stats_out,
                                      ChainTrace trace) {
    if (n_max < 1) throw std::invalid_argument("moments_of_time_integral: n_max < 1");
    if (budget <= burnin)
        throw std::invalid_argument("moments_of_time_integral: budget must exceed burnin");
    ChainState state = init_chain(rng, kernel, params);
    for (long i = 0; i < burnin; ++i) mcmc_step(state, rng, kernel, params);
    const long n = budget - burnin;
    std::vector<double> series(n);
    for (long i = 0; i < n; ++i) {
        mcmc_step(state, rng, kernel, params);
        series[i] = state.path.time_integral();
        if (trace.out && i % std::max<long>(1, trace.stride) == 0)
            (*trace.out) << i << ',' << state.cached_action << ',' << series[i] << '\n';
    }
    if (stats_out) *stats_out = state.stats;

    MomentVector mv;
    mv.n_max = n_max;
    mv.n_raw = n;
    mv.ess = acf_ess(series);
    mv.value.assign(n_max, 0.0);
    mv.cov.assign(n_max, std::vector<double>(n_max, 0.0));

    // power sums, then 32 batch-mean vectors for the covariance
    std::vector<double> powers(n_max);
    const int n_batches = 32;
    const long len = std::max<long>(1, n / n_batches);
    const int used_batches = static_cast<int>(std::min<long>(n_batches, n / len));
    std::vector<std::vector<double>> batch(used_batches, std::vector<double>(n_max, 0.0));
    for (long i = 0; i < n; ++i) {
        double p = 1.0;
        for (int k = 0; k < n_max; ++k) {
            p *= series[i];
            powers[k] = p;
            mv.value[k] += p;
        }
        const long b = std::min<long>(i / len, used_batches - 1);
        for (int k = 0; k < n_max; ++k) batch[b][k] += powers[k];
    }
    for (int k = 0; k < n_max; ++k) mv.value[k] /= n;

    if (used_batches >= 2) {
        std::vector<long> counts(used_batches, len);
        counts.back() = n - len * (used_batches - 1);
        std::vector<double> bmean(n_max, 0.0);
        for (int b = 0; b < used_batches; ++b)
            for (int k = 0; k < n_max; ++k) batch[b][k] /= counts[b];
        for (int b = 0; b < used_batches; ++b)
            for (int k = 0; k < n_max; ++k) bmean[k] += batch[b][k] / used_batches;
        for (int i = 0; i < n_max; ++i)
            for (int j = 0; j < n_max; ++j) {
                double c = 0.0;
                for (int b = 0; b < used_batches; ++b)
                    c += (batch[b][i] - bmean[i]) * (batch[b][j] - bmean[j]);
                mv.cov[i][j] = c / ((used_batches - 1.0) * used_batches);
            }
    }
    return mv;
}

namespace {

template <typename Result, typename Fn>
std::vector<Result> run_workers(int workers, Fn&& fn) {
    std::vector<Result> results(workers);
    if (workers <= 1) {
        results[0] = fn(0);
        return results;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&results, &fn, w] { results[w] = fn(w); });
    for (auto& t : pool) t.join();
    return results;
}

} // namespace

Estimate estimate_Z_reweight_parallel(std::uint64_t seed, int workers,
                                      const ExpSumKernel& kernel,
                                      const GibbsParams& params, long n_samples) {
    workers = std::max(1, workers);
    const long share = std::max<long>(2, n_samples / workers);
    auto parts = run_workers<Estimate>(workers, [&](int w) {
        Rng rng = Rng::worker_stream(seed, w);
        return estimate_Z_reweight(rng, kernel, params, share);
    });
    return Estimate::merged(parts);
}

LogEstimate estimate_logZ_reweight_parallel(std::uint64_t seed, int workers,
                                            const ExpSumKernel& kernel,
                                            const GibbsParams& params, long n_samples) {
    Estimate pooled = estimate_Z_reweight_parallel(seed, workers, kernel, params, n_samples);
    LogEstimate est;
    est.n_raw = pooled.n_raw;
    est.ess = pooled.ess;
    est.log_mean = std::log(pooled.mean);
    est.std_error = pooled.std_error / pooled.mean;
    return est;
}

MomentVector moments_parallel(std::uint64_t seed, int workers, const ExpSumKernel& kernel,
                              const GibbsParams& params, int n_max, long budget,
                              long burnin, MoveStats* stats_out, ChainTrace trace) {
    workers = std::max(1, workers);
    const long share = std::max<long>(burnin + 2, budget / workers);
    std::vector<MoveStats> stats(workers);
    auto parts = run_workers<MomentVector>(workers, [&](int w) {
        Rng rng = Rng::worker_stream(seed, w);
        return moments_of_time_integral(rng, kernel, params, n_max, share, burnin,
                                        &stats[w], w == 0 ? trace : ChainTrace{});
    });
    if (stats_out) {
        MoveStats total;
        for (const auto& s : stats)
            for (int k = 0; k < kMoveCount; ++k) {
                total.proposed[k] += s.proposed[k];
                total.accepted[k] += s.accepted[k];
            }
        *stats_out = total;
    }
    return MomentVector::merged(parts);
}

LogEstimate estimate_logZ_bridge(Rng& rng, const ExpSumKernel& kernel,
                                 const GibbsParams& params, int n_stages,
                                 long budget_per_stage, long burnin) {
    if (n_stages < 1)
        throw std::invalid_argument("estimate_logZ_bridge: need at least one stage");
    if (budget_per_stage <= burnin)
        throw std::invalid_argument("estimate_logZ_bridge: budget must exceed burnin");
    LogEstimate total;
    double var = 0.0;
    for (int k = 0; k < n_stages; ++k) {
        // stage measure has action s A; scaling s maps to (sqrt(s) lambda, s mu)
        const double s = static_cast<double>(k) / n_stages;
        const GibbsParams stage{params.lambda * std::sqrt(s), params.mu * s,
                                params.horizon};
        ChainState state = init_chain(rng, kernel, stage);
        for (long i = 0; i < burnin; ++i) mcmc_step(state, rng, kernel, stage);
        const long n = budget_per_stage - burnin;
        std::vector<double> increments(n);
        double peak = -std::numeric_limits<double>::infinity();
        for (long i = 0; i < n; ++i) {
            mcmc_step(state, rng, kernel, stage);
            increments[i] = action(state.path, kernel, params) / n_stages;
            peak = std::max(peak, increments[i]);
        }
        std::vector<double> weights(n);
        for (long i = 0; i < n; ++i) weights[i] = std::exp(increments[i] - peak);
        const double mean = series_mean(weights);
        const double err = batch_std_error(weights);
        total.log_mean += peak + std::log(mean);
        var += (err / mean) * (err / mean);
        total.n_raw += n;
    }
    total.std_error = std::sqrt(var);
    total.ess = total.n_raw;
    return total;
}

} // namespace sbl
