#include "sbl/kernel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sbl {

double ExpSumKernel::eval(double t) const {
    const double at = std::abs(t);
    double s = 0.0;
    for (const auto& term : terms) s += term.weight * std::exp(-term.rate * at);
    return s;
}

double ExpSumKernel::at_zero() const {
    double s = 0.0;
    for (const auto& term : terms) s += term.weight;
    return s;
}

double ExpSumKernel::l1_norm() const {
    double s = 0.0;
    for (const auto& term : terms) s += 2.0 * term.weight / term.rate;
    return s;
}

double ExpSumKernel::min_rate() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& term : terms) m = std::min(m, term.rate);
    return m;
}

ExpSumKernel kernel_from_modes(const ModeSet& modes) {
    ExpSumKernel kernel;
    kernel.terms.reserve(modes.modes.size());
    for (const auto& mode : modes.modes)
        kernel.terms.push_back({0.25 * mode.v * mode.v, mode.omega});
    return kernel;
}

namespace {

// \int over [l0,l1] x [r0,r1] of e^{-rate |t-s|} with l1 <= r0.
// Factored form e^{-rate gap} (1-e^{-rate len1})(1-e^{-rate len2})/rate^2
// avoids the cancellation of the four-exponential expansion.
double ordered_piece(double rate, double l0, double l1, double r0, double r1) {
    const double gap = r0 - l1;
    const double e1 = -std::expm1(-rate * (l1 - l0));
    const double e2 = -std::expm1(-rate * (r1 - r0));
    return std::exp(-rate * gap) * e1 * e2 / (rate * rate);
}

// \int over [a,a+len]^2 of e^{-rate |t-s|} = 2 [len/rate - (1-e^{-rate len})/rate^2].
double square_piece(double rate, double len) {
    const double z = rate * len;
    if (z < 1e-6) {
        // z + expm1(-z) = z^2/2 - z^3/6 + ... loses all digits; use the series
        return len * len * (1.0 - z / 3.0 + z * z / 12.0);
    }
    return 2.0 * (z + std::expm1(-z)) / (rate * rate);
}

} // namespace

double rect_integral(const ExpSumKernel& kernel, double a, double b, double c, double d) {
    if (b < a || d < c)
        throw std::invalid_argument("rect_integral: reversed interval endpoints");
    if (a == b || c == d) return 0.0;

    const double lo = std::max(a, c);
    const double hi = std::min(b, d);

    double total = 0.0;
    if (hi <= lo) {
        // disjoint rectangles; order them along the time axis
        for (const auto& term : kernel.terms) {
            const double piece = (b <= c) ? ordered_piece(term.rate, a, b, c, d)
                                          : ordered_piece(term.rate, c, d, a, b);
            total += term.weight * piece;
        }
        return total;
    }

    // Split both axes at the overlap [lo, hi]. At most one of the leading and
    // one of the trailing side pieces is non-empty, so every cross pair below
    // is ordered.
    const double s_seg[3][2] = {{a, lo}, {lo, hi}, {hi, b}};
    const double t_seg[3][2] = {{c, lo}, {lo, hi}, {hi, d}};
    for (const auto& term : kernel.terms) {
        double sum = 0.0;
        for (int i = 0; i < 3; ++i) {
            if (s_seg[i][0] >= s_seg[i][1]) continue;
            for (int j = 0; j < 3; ++j) {
                if (t_seg[j][0] >= t_seg[j][1]) continue;
                if (i == 1 && j == 1) {
                    sum += square_piece(term.rate, hi - lo);
                } else if (s_seg[i][1] <= t_seg[j][0]) {
                    sum += ordered_piece(term.rate, s_seg[i][0], s_seg[i][1],
                                         t_seg[j][0], t_seg[j][1]);
                } else {
                    sum += ordered_piece(term.rate, t_seg[j][0], t_seg[j][1],
                                         s_seg[i][0], s_seg[i][1]);
                }
            }
        }
        total += term.weight * sum;
    }
    return total;
}

} // namespace sbl
