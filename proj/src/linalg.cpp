#include "sbl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sbl {

void SparseSym::multiply(const double* x, double* y) const {
    for (int i = 0; i < dim; ++i) {
        double s = 0.0;
        for (long k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

SparseSym csr_from_triplets(int dim, std::vector<int> rows, std::vector<int> cols,
                            std::vector<double> vals) {
    const std::size_t nnz = vals.size();
    std::vector<std::size_t> order(nnz);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rows[a] != rows[b] ? rows[a] < rows[b] : cols[a] < cols[b];
    });
    SparseSym m;
    m.dim = dim;
    m.row_ptr.assign(dim + 1, 0);
    m.col.reserve(nnz);
    m.val.reserve(nnz);
    std::vector<int> kept_row;
    kept_row.reserve(nnz);
    int last_r = -1, last_c = -1;
    for (std::size_t idx : order) {
        const int r = rows[idx], c = cols[idx];
        if (r == last_r && c == last_c) {
            m.val.back() += vals[idx];
            continue;
        }
        m.col.push_back(c);
        m.val.push_back(vals[idx]);
        kept_row.push_back(r);
        last_r = r;
        last_c = c;
    }
    for (int r : kept_row) ++m.row_ptr[r + 1];
    for (int i = 0; i < dim; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

void sym_tridiagonalize(std::vector<double>& a, int n, std::vector<double>& diag,
                        std::vector<double>& off) {
    diag.assign(n, 0.0);
    std::vector<double> e(n, 0.0);
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::abs(a[i * n + k]);
            if (scale == 0.0) {
                e[i] = a[i * n + l];
            } else {
                for (int k = 0; k <= l; ++k) {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                double f = a[i * n + l];
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    a[j * n + i] = a[i * n + j] / h;
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += a[j * n + k] * a[i * n + k];
                    for (int k = j + 1; k <= l; ++k) g += a[k * n + j] * a[i * n + k];
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a[i * n + j];
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k)
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        diag[i] = h;
    }
    diag[0] = 0.0;
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const int l = i - 1;
        if (diag[i] != 0.0) {
            for (int j = 0; j <= l; ++j) {
                double g = 0.0;
                for (int k = 0; k <= l; ++k) g += a[i * n + k] * a[k * n + j];
                for (int k = 0; k <= l; ++k) a[k * n + j] -= g * a[k * n + i];
            }
        }
        diag[i] = a[i * n + i];
        a[i * n + i] = 1.0;
        for (int j = 0; j <= l; ++j) a[j * n + i] = a[i * n + j] = 0.0;
    }
    off.assign(n, 0.0);
    for (int i = 1; i < n; ++i) off[i - 1] = e[i];
}

void tridiag_eigen(std::vector<double>& diag, std::vector<double>& off, int n,
                   std::vector<double>* z) {
    if (n == 1) return;
    std::vector<double> e(off.begin(), off.begin() + n);
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
                if (std::abs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw std::runtime_error("tridiag_eigen: too many QL iterations");
                double g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = diag[m] - diag[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        diag[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = diag[i + 1] - p;
                    r = (diag[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    diag[i + 1] = g + p;
                    g = c * r - b;
                    if (z) {
                        double* zz = z->data();
                        for (int k = 0; k < n; ++k) {
                            f = zz[k * n + i + 1];
                            zz[k * n + i + 1] = s * zz[k * n + i] + c * f;
                            zz[k * n + i] = c * zz[k * n + i] - s * f;
                        }
                    }
                }
                if (r == 0.0 && i >= l) continue;
                diag[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

void sym_eigen(std::vector<double> a, int n, std::vector<double>& values,
               std::vector<double>& vectors) {
    std::vector<double> off;
    sym_tridiagonalize(a, n, values, off);
    tridiag_eigen(values, off, n, &a);
    // sort ascending, permuting eigenvector columns
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return values[i] < values[j]; });
    std::vector<double> sorted_vals(n);
    vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        sorted_vals[j] = values[order[j]];
        for (int k = 0; k < n; ++k) vectors[k * n + j] = a[k * n + order[j]];
    }
    values = std::move(sorted_vals);
}

LanczosResult lanczos(const SparseSym& a, std::vector<double> start, int max_iter) {
    LanczosResult res;
    const int n = a.dim;
    double norm = 0.0;
    for (double v : start) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw std::invalid_argument("lanczos: zero start vector");
    for (double& v : start) v /= norm;
    res.basis.push_back(std::move(start));

    std::vector<double> w(n);
    for (int k = 0;; ++k) {
        const std::vector<double>& vk = res.basis[k];
        a.multiply(vk.data(), w.data());
        double alpha = 0.0;
        for (int i = 0; i < n; ++i) alpha += w[i] * vk[i];
        res.alpha.push_back(alpha);
        for (int i = 0; i < n; ++i) w[i] -= alpha * vk[i];
        if (k > 0) {
            const std::vector<double>& vm = res.basis[k - 1];
            const double b = res.beta[k - 1];
            for (int i = 0; i < n; ++i) w[i] -= b * vm[i];
        }
        // full reorthogonalization, two passes
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& vb : res.basis) {
                double d = 0.0;
                for (int i = 0; i < n; ++i) d += w[i] * vb[i];
                for (int i = 0; i < n; ++i) w[i] -= d * vb[i];
            }
        }
        double beta = 0.0;
        for (int i = 0; i < n; ++i) beta += w[i] * w[i];
        beta = std::sqrt(beta);
        double scale = 1.0;
        for (double av : res.alpha) scale = std::max(scale, std::abs(av));
        if (beta <= 1e-14 * scale) {
            res.exhausted = true;
            res.final_beta = beta;
            break;
        }
        if (k + 1 >= max_iter || k + 1 >= n) {
            res.final_beta = beta;
            break;
        }
        res.beta.push_back(beta);
        std::vector<double> next(n);
        for (int i = 0; i < n; ++i) next[i] = w[i] / beta;
        res.basis.push_back(std::move(next));
    }
    return res;
}

} // namespace sbl
