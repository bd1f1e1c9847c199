#include "sbl/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sbl {

TruncationSpec TruncationSpec::uniform(std::size_t n_modes, int cap, int total) {
    TruncationSpec t;
    t.mode_caps.assign(n_modes, cap);
    t.total_cap = total;
    return t;
}

TruncationSpec TruncationSpec::bumped(int extra) const {
    TruncationSpec t = *this;
    for (int& c : t.mode_caps) c += extra;
    if (t.total_cap >= 0) t.total_cap += extra;
    return t;
}

long FockBasis::occ_index(const std::vector<int>& occ) const {
    const auto it = std::lower_bound(occupations.begin(), occupations.end(), occ);
    if (it == occupations.end() || *it != occ) return -1;
    return it - occupations.begin();
}

FockBasis enumerate_basis(std::size_t n_modes, const TruncationSpec& trunc) {
    if (trunc.mode_caps.size() != n_modes) {
        if (trunc.mode_caps.size() == 1) {
            TruncationSpec broad = trunc;
            broad.mode_caps.assign(n_modes, trunc.mode_caps[0]);
            return enumerate_basis(n_modes, broad);
        }
        throw std::invalid_argument("enumerate_basis: cap count does not match mode count");
    }
    for (int c : trunc.mode_caps)
        if (c < 0) throw std::invalid_argument("enumerate_basis: negative occupation cap");

    FockBasis basis;
    basis.caps = trunc.mode_caps;
    basis.total_cap = trunc.total_cap;

    // depth-first with the remaining total budget: lexicographic ascending,
    // all-zero state first
    std::vector<int> occ(n_modes, 0);
    const auto grow = [&](auto&& self, std::size_t j, int budget) -> void {
        if (j == n_modes) {
            basis.occupations.push_back(occ);
            if (2 * basis.occupations.size() > trunc.max_dimension)
                throw std::length_error("enumerate_basis: truncation dimension over budget");
            return;
        }
        int cap = trunc.mode_caps[j];
        if (trunc.total_cap >= 0) cap = std::min(cap, budget);
        for (int v = 0; v <= cap; ++v) {
            occ[j] = v;
            self(self, j + 1, budget - v);
        }
        occ[j] = 0;
    };
    grow(grow, 0, trunc.total_cap >= 0 ? trunc.total_cap : 0);
    return basis;
}

SparseHamiltonian build_hamiltonian(const ModeSet& modes, double lambda, double mu,
                                    const TruncationSpec& trunc) {
    SparseHamiltonian h;
    h.lambda = lambda;
    h.mu = mu;
    h.basis = enumerate_basis(modes.modes.size(), trunc);
    const auto& occs = h.basis.occupations;
    const int dim = h.basis.dim();

    std::vector<int> rows, cols;
    std::vector<double> vals;
    rows.reserve(occs.size() * (3 + 2 * modes.modes.size()));

    auto push = [&](int r, int c, double v) {
        if (v == 0.0) return;
        rows.push_back(r);
        cols.push_back(c);
        vals.push_back(v);
    };

    for (std::size_t o = 0; o < occs.size(); ++o) {
        const auto& occ = occs[o];
        double boson_energy = 0.0;
        int total = 0;
        for (std::size_t j = 0; j < modes.modes.size(); ++j) {
            boson_energy += modes.modes[j].omega * occ[j];
            total += occ[j];
        }
        for (int s = 0; s < 2; ++s) {
            const int row = static_cast<int>(2 * o) + s;
            push(row, row, (s == 0 ? 1.0 : -1.0) + boson_energy);
            if (mu != 0.0) push(row, 2 * static_cast<int>(o) + (1 - s), mu);
        }
        if (lambda == 0.0) continue;
        for (std::size_t j = 0; j < modes.modes.size(); ++j) {
            if (occ[j] >= h.basis.caps[j]) continue;
            if (h.basis.total_cap >= 0 && total >= h.basis.total_cap) continue;
            std::vector<int> up = occ;
            ++up[j];
            const long o2 = h.basis.occ_index(up);
            if (o2 < 0) continue;
            const double amp =
                lambda * modes.modes[j].v * std::sqrt(occ[j] + 1.0) * M_SQRT1_2;
            for (int s = 0; s < 2; ++s) {
                const int row = static_cast<int>(2 * o) + s;
                const int col = static_cast<int>(2 * o2) + (1 - s);
                push(row, col, amp);
                push(col, row, amp);
            }
        }
    }
    h.matrix = csr_from_triplets(dim, std::move(rows), std::move(cols), std::move(vals));
    return h;
}

namespace {

constexpr int kKrylovCap = 200;

std::vector<double> deterministic_start(int dim) {
    std::vector<double> v(dim);
    std::uint64_t x = 0x2545f4914f6cdd1dULL;
    for (int i = 0; i < dim; ++i) {
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        v[i] = 0.5 + static_cast<double>((x * 0x2545f4914f6cdd1dULL) >> 11) * 0x1.0p-53;
    }
    return v;
}

void dense_from_sparse(const SparseSym& m, std::vector<double>& dense) {
    dense.assign(static_cast<std::size_t>(m.dim) * m.dim, 0.0);
    for (int i = 0; i < m.dim; ++i)
        for (long k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
            dense[static_cast<std::size_t>(i) * m.dim + m.col[k]] += m.val[k];
}

} // namespace

SpectrumResult ground_energy(const SparseHamiltonian& h) {
    const int dim = h.dim();
    SpectrumResult out;
    if (dim <= 400) {
        std::vector<double> dense, values, vectors;
        dense_from_sparse(h.matrix, dense);
        sym_eigen(std::move(dense), dim, values, vectors);
        out.e0 = values[0];
        out.gap = dim > 1 ? std::max(0.0, values[1] - values[0]) : 0.0;
        out.iterations = dim;
        return out;
    }

    LanczosResult lz = lanczos(h.matrix, deterministic_start(dim),
                               std::min(dim, kKrylovCap));
    const int k = static_cast<int>(lz.alpha.size());
    std::vector<double> d = lz.alpha;
    std::vector<double> e(lz.beta);
    e.resize(k, 0.0);
    std::vector<double> z(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) z[static_cast<std::size_t>(i) * k + i] = 1.0;
    tridiag_eigen(d, e, k, &z);

    std::vector<int> order(k);
    for (int i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
    out.e0 = d[order[0]];
    out.gap = k > 1 ? std::max(0.0, d[order[1]] - d[order[0]]) : 0.0;
    out.iterations = k;

    const double tail = std::abs(z[static_cast<std::size_t>(k - 1) * k + order[0]]);
    out.residual = lz.exhausted ? 0.0 : lz.final_beta * tail;
    const double scale = std::max(1.0, std::abs(out.e0));
    if (!lz.exhausted && k >= kKrylovCap && out.residual > 1e-9 * scale)
        throw std::runtime_error("ground_energy: Lanczos did not converge within the iteration cap");
    return out;
}

double semigroup_vacuum(const SparseHamiltonian& h, double time) {
    if (time < 0.0) throw std::invalid_argument("semigroup_vacuum: negative time");
    if (time == 0.0) return 1.0;
    const int dim = h.dim();
    const int vac = h.basis.vacuum_down_index();

    std::vector<double> start(dim, 0.0);
    start[vac] = 1.0;
    LanczosResult lz = lanczos(h.matrix, std::move(start), std::min(dim, kKrylovCap));
    const int k_total = static_cast<int>(lz.alpha.size());

    auto krylov_value = [&](int k) -> double {
        std::vector<double> d(lz.alpha.begin(), lz.alpha.begin() + k);
        std::vector<double> e(k, 0.0);
        for (int i = 0; i + 1 < k; ++i) e[i] = lz.beta[i];
        std::vector<double> z(static_cast<std::size_t>(k) * k, 0.0);
        for (int i = 0; i < k; ++i) z[static_cast<std::size_t>(i) * k + i] = 1.0;
        tridiag_eigen(d, e, k, &z);
        double value = 0.0;
        for (int i = 0; i < k; ++i) {
            const double c = z[i]; // first row: overlap of e_1 with Ritz vector i
            value += c * c * std::exp(-time * d[i]);
        }
        return value;
    };

    if (lz.exhausted || k_total >= dim) return krylov_value(k_total);

    double prev = krylov_value(std::max(1, k_total / 2));
    const double value = krylov_value(k_total);
    if (std::abs(value - prev) <= 1e-12 * std::max(std::abs(value), 1e-300))
        return value;

    // Krylov estimate still moving; fall back to a dense decomposition
    if (dim <= 2000) {
        std::vector<double> dense, values, vectors;
        dense_from_sparse(h.matrix, dense);
        sym_eigen(std::move(dense), dim, values, vectors);
        double out = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double c = vectors[static_cast<std::size_t>(vac) * dim + i];
            out += c * c * std::exp(-time * values[i]);
        }
        return out;
    }
    throw std::runtime_error("semigroup_vacuum: Krylov tolerance not reached");
}

namespace {

FknReport finish_fkn_report(const ModeSet& modes, const GibbsParams& params,
                            const TruncationSpec& trunc, Estimate rhs) {
    FknReport report;
    const double damp = std::exp(-params.horizon);

    const SparseHamiltonian h = build_hamiltonian(modes, params.lambda, params.mu, trunc);
    report.lhs = damp * semigroup_vacuum(h, params.horizon);

    const SparseHamiltonian h2 =
        build_hamiltonian(modes, params.lambda, params.mu, trunc.bumped(2));
    report.lhs_bumped = damp * semigroup_vacuum(h2, params.horizon);
    report.trunc_delta = std::abs(report.lhs - report.lhs_bumped);

    report.rhs = rhs;
    const double sigma_floor = std::max(report.rhs.std_error, 1e-12);
    report.sigma = std::abs(report.lhs - report.rhs.mean) / sigma_floor;
    report.trunc_converged = report.trunc_delta < sigma_floor;
    report.pass = report.trunc_converged && report.sigma <= 4.0;
    return report;
}

} // namespace

FknReport fkn_check(const ModeSet& modes, const GibbsParams& params,
                    const TruncationSpec& trunc, long mc_budget, Rng& rng) {
    const ExpSumKernel kernel = kernel_from_modes(modes);
    return finish_fkn_report(modes, params, trunc,
                             estimate_Z_reweight(rng, kernel, params, mc_budget));
}

FknReport fkn_check_parallel(const ModeSet& modes, const GibbsParams& params,
                             const TruncationSpec& trunc, long mc_budget,
                             std::uint64_t seed, int workers) {
    const ExpSumKernel kernel = kernel_from_modes(modes);
    return finish_fkn_report(
        modes, params, trunc,
        estimate_Z_reweight_parallel(seed, workers, kernel, params, mc_budget));
}

double finite_diff_susceptibility(const ModeSet& modes, double lambda,
                                  const TruncationSpec& trunc, double h) {
    if (!(h > 0.0))
        throw std::invalid_argument("finite_diff_susceptibility: h must be positive");
    auto energy = [&](double mu) {
        return ground_energy(build_hamiltonian(modes, lambda, mu, trunc)).e0;
    };
    const double e0 = energy(0.0);
    auto second_diff = [&](double step) {
        return (energy(step) - 2.0 * e0 + energy(-step)) / (step * step);
    };
    const double coarse = second_diff(h);
    const double fine = second_diff(0.5 * h);
    return (4.0 * fine - coarse) / 3.0;
}

std::string export_triplets(const SparseHamiltonian& h) {
    std::ostringstream os;
    os.precision(17);
    os << h.matrix.dim << " " << h.matrix.dim << " " << h.matrix.nnz() << "\n";
    for (int i = 0; i < h.matrix.dim; ++i)
        for (long k = h.matrix.row_ptr[i]; k < h.matrix.row_ptr[i + 1]; ++k)
            os << i << " " << h.matrix.col[k] << " " << h.matrix.val[k] << "\n";
    return os.str();
}

} // namespace sbl
