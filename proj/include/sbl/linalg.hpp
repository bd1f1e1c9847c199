// linalg.hpp -- symmetric eigensolvers: Householder + implicit QL, Lanczos

#pragma once

#include <vector>

namespace sbl {

// Symmetric sparse matrix in CSR form (full pattern stored).
struct SparseSym {
    int dim = 0;
    std::vector<long> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    void multiply(const double* x, double* y) const;
    std::size_t nnz() const { return val.size(); }
};

// Builds CSR from unordered triplets; duplicate entries are summed.
SparseSym csr_from_triplets(int dim, std::vector<int> rows, std::vector<int> cols,
                            std::vector<double> vals);

// Householder reduction of a dense symmetric matrix (row-major, n x n) to
// tridiagonal form. On return `a` holds the accumulated orthogonal transform,
// diag the diagonal and off[i] the coupling of (i, i+1).
void sym_tridiagonalize(std::vector<double>& a, int n, std::vector<double>& diag,
                        std::vector<double>& off);

// Implicit-shift QL for a symmetric tridiagonal matrix. diag/off as above.
// If z is non-null (row-major n x n, preloaded with the identity or with an
// accumulated transform), its columns become the eigenvectors. Eigenvalues are
// returned in diag, unsorted.
void tridiag_eigen(std::vector<double>& diag, std::vector<double>& off, int n,
                   std::vector<double>* z);

// Full eigen-decomposition of a dense symmetric matrix. Values ascending,
// eigenvector i in column i of `vectors`.
void sym_eigen(std::vector<double> a, int n, std::vector<double>& values,
               std::vector<double>& vectors);

struct LanczosResult {
    std::vector<double> alpha;
    std::vector<double> beta; // beta[k] couples k and k+1; size = alpha.size() - 1
    std::vector<std::vector<double>> basis;
    double final_beta = 0.0; // coupling out of the last kept vector
    bool exhausted = false;  // Krylov space complete (happy breakdown)
};

// Lanczos with full reorthogonalization (two Gram-Schmidt passes per step).
LanczosResult lanczos(const SparseSym& a, std::vector<double> start, int max_iter);

} // namespace sbl
