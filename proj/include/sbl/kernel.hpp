// kernel.hpp -- the Ising pair kernel W(t) as a finite sum of decaying exponentials

#pragma once

#include <vector>

#include "sbl/model.hpp"

namespace sbl {

// W(t) = sum_j weight_j * exp(-rate_j |t|), weight_j >= 0, rate_j > 0.
// Even and monotone decreasing in |t| by construction.
struct ExpSumKernel {
    struct Term {
        double weight;
        double rate;
    };
    std::vector<Term> terms;

    double eval(double t) const;
    double at_zero() const; // sum of weights
    double l1_norm() const; // integral over the whole real line
    double min_rate() const;
};

// One term (v_j^2 / 4, omega_j) per mode.
ExpSumKernel kernel_from_modes(const ModeSet& modes);

// Exact \int_a^b \int_c^d W(t - s) dt ds, term by term in closed form.
// Overlapping rectangles are decomposed into ordered pieces plus the diagonal
// square; the diagonal formula switches to its Taylor expansion for
// rate*(b-a) < 1e-6. Throws std::invalid_argument on reversed endpoints.
double rect_integral(const ExpSumKernel& kernel, double a, double b, double c, double d);

} // namespace sbl
