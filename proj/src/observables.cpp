#include "sbl/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbl {

namespace {

// Lexicographic successor of a restricted growth string
// (a[0] = 0, a[i] <= 1 + max of the prefix). False once exhausted.
bool next_rgs(std::vector<int>& a) {
    const int n = static_cast<int>(a.size());
    for (int i = n - 1; i >= 1; --i) {
        int prefix_max = 0;
        for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, a[j]);
        if (a[i] <= prefix_max) {
            ++a[i];
            for (int j = i + 1; j < n; ++j) a[j] = 0;
            return true;
        }
    }
    return false;
}

} // namespace

void for_each_partition(int n, const std::function<void(const std::vector<int>&)>& fn) {
    if (n < 1 || n > 12)
        throw std::invalid_argument("for_each_partition: n must be in [1, 12]");
    std::vector<int> a(n, 0);
    std::vector<int> sizes;
    do {
        const int n_blocks = *std::max_element(a.begin(), a.end()) + 1;
        sizes.assign(n_blocks, 0);
        for (int i = 0; i < n; ++i) ++sizes[a[i]];
        fn(sizes);
    } while (next_rgs(a));
}

std::vector<SetPartition> set_partitions(int n) {
    if (n < 1 || n > 12)
        throw std::invalid_argument("set_partitions: n must be in [1, 12]");
    std::vector<int> a(n, 0);
    std::vector<SetPartition> out;
    do {
        const int n_blocks = *std::max_element(a.begin(), a.end()) + 1;
        SetPartition p;
        p.blocks.assign(n_blocks, {});
        for (int i = 0; i < n; ++i) p.blocks[a[i]].push_back(i + 1);
        out.push_back(std::move(p));
    } while (next_rgs(a));
    return out;
}

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// sum over partitions of sign(|P|) (|P|-1)! prod_B m_{|B|}, with
// sign(|P|) = (-1)^{|P|-1} (cumulants) or (-1)^{|P|+n} (derivative form).
// `grad`, when non-null, receives d(sum)/d m_k for k = 1..n.
double partition_sum(const std::vector<double>& m, int n, bool derivative_sign,
                     std::vector<double>* grad) {
    if (n < 1) throw std::invalid_argument("partition_sum: n < 1");
    if (static_cast<int>(m.size()) <= n)
        throw std::invalid_argument("partition_sum: insufficient moment order");
    if (grad) grad->assign(n + 1, 0.0);
    double total = 0.0;
    for_each_partition(n, [&](const std::vector<int>& sizes) {
        const int nb = static_cast<int>(sizes.size());
        const double sign = ((derivative_sign ? nb + n : nb - 1) % 2 == 0) ? 1.0 : -1.0;
        const double coeff = sign * factorial(nb - 1);
        double prod = 1.0;
        for (int s : sizes) prod *= m[s];
        total += coeff * prod;
        if (grad) {
            for (int b = 0; b < nb; ++b) {
                double partial = 1.0;
                for (int c = 0; c < nb; ++c)
                    if (c != b) partial *= m[sizes[c]];
                (*grad)[sizes[b]] += coeff * partial;
            }
        }
    });
    return total;
}

} // namespace

double log_derivative(const std::vector<double>& g_derivs) {
    if (g_derivs.size() < 2)
        throw std::invalid_argument("log_derivative: need g and at least one derivative");
    const double g = g_derivs[0];
    if (!(g > 0.0)) throw std::domain_error("log_derivative: g must be positive");
    const int n = static_cast<int>(g_derivs.size()) - 1;
    double total = 0.0;
    for_each_partition(n, [&](const std::vector<int>& sizes) {
        const int nb = static_cast<int>(sizes.size());
        const double sign = ((nb - 1) % 2 == 0) ? 1.0 : -1.0;
        double term = sign * factorial(nb - 1) / std::pow(g, nb);
        for (int s : sizes) term *= g_derivs[s];
        total += term;
    });
    return total;
}

double ursell_from_moments(const std::vector<double>& m, int n) {
    return partition_sum(m, n, /*derivative_sign=*/false, nullptr);
}

double moment_partition_sum(const std::vector<double>& m, int n) {
    return partition_sum(m, n, /*derivative_sign=*/true, nullptr);
}

namespace {

Estimate propagate(const MomentVector& moments, int n, bool derivative_sign,
                   double scale) {
    if (n < 1 || n > moments.n_max)
        throw std::invalid_argument("moment order n exceeds the accumulated moments");
    std::vector<double> m(moments.n_max + 1, 1.0);
    for (int k = 1; k <= moments.n_max; ++k) m[k] = moments.value[k - 1];
    std::vector<double> grad;
    const double value = partition_sum(m, n, derivative_sign, &grad);
    double var = 0.0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            var += grad[i] * moments.cov[i - 1][j - 1] * grad[j];
    Estimate est;
    est.mean = scale * value;
    est.std_error = std::abs(scale) * std::sqrt(std::max(0.0, var));
    est.ess = moments.ess;
    est.n_raw = moments.n_raw;
    return est;
}

} // namespace

Estimate ursell(const MomentVector& moments, int n) {
    return propagate(moments, n, /*derivative_sign=*/false, 1.0);
}

Estimate energy_derivative(const MomentVector& moments, int n, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("energy_derivative: T must be positive");
    return propagate(moments, n, /*derivative_sign=*/true, 1.0 / T);
}

FitResult fit_against_inverse_T(const std::vector<LadderPoint>& points) {
    FitResult fit;
    fit.n_points = static_cast<int>(points.size());
    double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : points) {
        const double sigma = std::max(p.error, 1e-15);
        const double w = 1.0 / (sigma * sigma);
        const double x = 1.0 / p.T;
        s += w;
        sx += w * x;
        sy += w * p.value;
        sxx += w * x * x;
        sxy += w * x * p.value;
    }
    const double det = s * sxx - sx * sx;
    fit.value = (sxx * sy - sx * sxy) / det;
    fit.slope = (s * sxy - sx * sy) / det;
    fit.error = std::sqrt(std::max(0.0, sxx / det));
    fit.slope_error = std::sqrt(std::max(0.0, s / det));
    for (const auto& p : points) {
        const double sigma = std::max(p.error, 1e-15);
        const double r = (p.value - fit.value - fit.slope / p.T) / sigma;
        fit.chi2 += r * r;
    }
    return fit;
}

FitResult bloch_extrapolate(const std::vector<LadderPoint>& logZ_samples) {
    if (logZ_samples.size() < 3)
        throw std::invalid_argument("bloch_extrapolate: need at least 3 T points");
    std::vector<LadderPoint> energy_points;
    energy_points.reserve(logZ_samples.size());
    for (const auto& p : logZ_samples) {
        if (!(p.T > 0.0)) throw std::invalid_argument("bloch_extrapolate: T must be positive");
        energy_points.push_back({p.T, -p.value / p.T - 1.0, p.error / p.T});
    }
    return fit_against_inverse_T(energy_points);
}

namespace {

SusceptibilityResult susceptibility_impl(
    const std::vector<double>& T_ladder, double mu, long budget, long burnin,
    const std::function<MomentVector(const GibbsParams&)>& second_moment) {
    if (mu != 0.0)
        throw std::invalid_argument("susceptibility: formula requires mu = 0");
    if (T_ladder.empty())
        throw std::invalid_argument("susceptibility: empty T ladder");
    SusceptibilityResult result;
    for (double T : T_ladder) {
        GibbsParams p{};
        p.horizon = T;
        const MomentVector mom = second_moment(p);
        const double value = -mom.value[1] / T;
        const double err = std::sqrt(std::max(0.0, mom.cov[1][1])) / T;
        result.ladder.push_back({T, value, err});
    }
    if (result.ladder.size() >= 3) {
        result.fit = fit_against_inverse_T(result.ladder);
        result.chi.mean = result.fit.value;
        result.chi.std_error = result.fit.error;
    } else {
        result.chi.mean = result.ladder.back().value;
        result.chi.std_error = result.ladder.back().error;
    }
    result.chi.n_raw = static_cast<long>(result.ladder.size()) * (budget - burnin);
    result.chi.ess = result.chi.n_raw;
    return result;
}

} // namespace

SusceptibilityResult susceptibility(Rng& rng, const ExpSumKernel& kernel,
                                    const GibbsParams& params,
                                    const std::vector<double>& T_ladder,
                                    long budget, long burnin) {
    return susceptibility_impl(T_ladder, params.mu, budget, burnin,
                               [&](const GibbsParams& p) {
                                   GibbsParams q = p;
                                   q.lambda = params.lambda;
                                   return moments_of_time_integral(rng, kernel, q, 2,
                                                                   budget, burnin);
                               });
}

SusceptibilityResult susceptibility_parallel(std::uint64_t seed, int workers,
                                             const ExpSumKernel& kernel,
                                             const GibbsParams& params,
                                             const std::vector<double>& T_ladder,
                                             long budget, long burnin, ChainTrace trace,
                                             MoveStats* stats_out) {
    int t_index = 0;
    if (stats_out) *stats_out = MoveStats{};
    return susceptibility_impl(
        T_ladder, params.mu, budget, burnin, [&](const GibbsParams& p) {
            GibbsParams q = p;
            q.lambda = params.lambda;
            const std::uint64_t seed_T = seed ^ splitmix64(0x51eadedULL + t_index);
            MoveStats stage_stats;
            const MomentVector mom =
                moments_parallel(seed_T, workers, kernel, q, 2, budget, burnin,
                                 &stage_stats, t_index == 0 ? trace : ChainTrace{});
            ++t_index;
            if (stats_out)
                for (int k = 0; k < kMoveCount; ++k) {
                    stats_out->proposed[k] += stage_stats.proposed[k];
                    stats_out->accepted[k] += stage_stats.accepted[k];
                }
            return mom;
        });
}

MassSweepResult mass_sweep(const ContinuousModel& model, double lambda,
                           const std::vector<double>& masses, const SweepOptions& opts) {
    if (masses.empty()) throw std::invalid_argument("mass_sweep: empty mass list");

    MassSweepResult result;
    result.l1_bound = 0.5 * coupling_norm2_over_nu(model);
    if (lambda * lambda * result.l1_bound > opts.epsilon)
        throw std::invalid_argument(
            "mass_sweep: lambda outside the correlation-bound window "
            "(lambda^2 * l1_bound > epsilon)");

    result.l1_bound_ok = true;
    int row_index = 0;
    for (double m : masses) {
        ContinuousModel regularized = model;
        regularized.mass = m;
        const ModeSet modes = discretize(regularized, opts.n_nodes, opts.rule);
        const ExpSumKernel kernel = kernel_from_modes(modes);
        if (kernel.l1_norm() > result.l1_bound * (1.0 + 1e-8))
            result.l1_bound_ok = false;

        GibbsParams params{lambda, 0.0, opts.T};
        const std::uint64_t row_seed = opts.seed ^ splitmix64(0xa55e7ULL + row_index++);
        const MomentVector mom = moments_parallel(row_seed, opts.workers, kernel, params,
                                                  2, opts.budget, opts.burnin);
        MassSweepRow row;
        row.mass = m;
        row.lambda = lambda;
        row.T = opts.T;
        row.value = -mom.value[1] / opts.T;
        row.std_error = std::sqrt(std::max(0.0, mom.cov[1][1])) / opts.T;
        row.ess = mom.ess;
        row.kernel_l1 = kernel.l1_norm();
        result.rows.push_back(row);
    }

    // Divergence diagnostic. A bounded limit still grows monotonically as the
    // mass drops, so flatness is the wrong test: on a log-spaced ladder a
    // log- or power-divergence keeps its increments constant or growing,
    // while a finite limit makes them shrink. Flag divergence only when
    // |value| grows monotonically AND the final increment has not dropped
    // below the first one by at least 4 combined sigma.
    result.bounded_trend_ok = true;
    const std::size_t k = result.rows.size();
    bool monotone_growth = k >= 2;
    for (std::size_t i = 0; i + 1 < k; ++i)
        if (std::abs(result.rows[i + 1].value) <= std::abs(result.rows[i].value))
            monotone_growth = false;
    if (monotone_growth && k >= 3) {
        auto increment = [&](std::size_t i) {
            return std::abs(result.rows[i + 1].value) - std::abs(result.rows[i].value);
        };
        auto increment_sigma = [&](std::size_t i) {
            return std::hypot(result.rows[i + 1].std_error, result.rows[i].std_error);
        };
        const double first = increment(0);
        const double last = increment(k - 2);
        const double sigma = std::hypot(increment_sigma(0), increment_sigma(k - 2));
        result.bounded_trend_ok = last + 4.0 * sigma < first;
    } else if (monotone_growth) {
        const double growth = std::abs(result.rows.back().value) -
                              std::abs(result.rows.front().value);
        const double sigma = std::hypot(result.rows.front().std_error,
                                        result.rows.back().std_error);
        result.bounded_trend_ok = growth <= 4.0 * sigma;
    }
    for (const auto& row : result.rows)
        if (!std::isfinite(row.value) || !std::isfinite(row.std_error))
            result.bounded_trend_ok = false;
    return result;
}

double lambda_c(const ContinuousModel& model, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("lambda_c: epsilon must be positive");
    const double norm = std::sqrt(coupling_norm2_over_nu(model));
    return std::sqrt(0.5 * epsilon) / norm;
}

} // namespace sbl
