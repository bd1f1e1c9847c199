// quadrature.hpp -- Gauss-Legendre rules and adaptive Gauss-Kronrod integration

#pragma once

#include <functional>
#include <vector>

namespace sbl {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0; // estimated
    bool converged = false;
    long evaluations = 0;

    bool finite() const;
};

// n-point Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b,
                    std::vector<double>& nodes, std::vector<double>& weights);

// Adaptive 15-point Gauss-Kronrod on [a, b]. Interior nodes only, so
// integrable endpoint singularities are allowed. A non-finite integrand
// value makes the result non-finite and not converged; it never throws.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-12, double rel_tol = 1e-10,
                     long max_evaluations = 2'000'000);

} // namespace sbl
