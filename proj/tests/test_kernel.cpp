#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sbl/kernel.hpp"
#include "sbl/model.hpp"

using namespace sbl;

namespace {

ExpSumKernel single_term(double w, double rate) { return ExpSumKernel{{{w, rate}}}; }

ExpSumKernel random_kernel(std::mt19937_64& eng) {
    std::uniform_int_distribution<int> n_terms(1, 4);
    std::uniform_real_distribution<double> weight(0.0, 2.0);
    std::uniform_real_distribution<double> rate(0.05, 8.0);
    ExpSumKernel k;
    const int n = n_terms(eng);
    for (int i = 0; i < n; ++i) k.terms.push_back({weight(eng), rate(eng)});
    return k;
}

} // namespace

TEST_CASE("kernel from a single mode") {
    const ModeSet modes = make_mode_set({{1.0, std::sqrt(2.0)}});
    const ExpSumKernel k = kernel_from_modes(modes);
    REQUIRE(k.terms.size() == 1);
    CHECK(k.at_zero() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(k.eval(1.3) == doctest::Approx(0.5 * std::exp(-1.3)).epsilon(1e-15));
}

TEST_CASE("kernel from two unit modes") {
    const ModeSet modes = make_mode_set({{1.0, 1.0}, {2.0, 1.0}});
    CHECK(kernel_from_modes(modes).at_zero() == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("zero couplings give the zero kernel") {
    const ModeSet modes = make_mode_set({{1.0, 0.0}, {3.0, 0.0}});
    const ExpSumKernel k = kernel_from_modes(modes);
    CHECK(k.eval(0.0) == 0.0);
    CHECK(k.eval(2.0) == 0.0);
    CHECK(k.l1_norm() == 0.0);
}

TEST_CASE("evaluation is even and decreasing") {
    const ExpSumKernel k = single_term(0.5, 1.0);
    CHECK(k.eval(-2.0) == doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-15));
    CHECK(k.eval(-2.0) == doctest::Approx(k.eval(2.0)).epsilon(1e-15));
    CHECK(k.eval(0.0) == doctest::Approx(k.at_zero()).epsilon(1e-15));
    CHECK(k.eval(0.5) > k.eval(1.0));
}

TEST_CASE("L1 norm closed form") {
    CHECK(single_term(0.5, 1.0).l1_norm() == doctest::Approx(1.0).epsilon(1e-15));

    // massless preset: ||W||_1 = (1/2) ||omega^{-1/2} v||^2 = 2 pi
    ContinuousModel m;
    m.dimension = 3;
    m.delta = -0.5;
    const ExpSumKernel k = kernel_from_modes(discretize(m, 64));
    CHECK(k.l1_norm() == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
}

TEST_CASE("L1 norm equals truncated integral plus analytic tail") {
    std::mt19937_64 eng(42);
    for (int rep = 0; rep < 20; ++rep) {
        const ExpSumKernel k = random_kernel(eng);
        const double t_star = 50.0 / k.min_rate();
        const double body =
            2.0 * oracle::integrate_1d([&](double t) { return k.eval(t); }, 0.0, t_star, 1e-14);
        double tail = 0.0;
        for (const auto& term : k.terms)
            tail += 2.0 * term.weight * std::exp(-term.rate * t_star) / term.rate;
        CHECK(k.l1_norm() == doctest::Approx(body + tail).epsilon(1e-9));
    }
}

TEST_CASE("rect integral closed forms") {
    const ExpSumKernel k = single_term(0.5, 1.0);
    // identical square [0,1]^2: 2 w [L - (1 - e^{-1})] = e^{-1}
    CHECK(rect_integral(k, 0, 1, 0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    const double quad =
        oracle::rect_quadrature([&](double t) { return k.eval(t); }, 0, 1, 0, 1, 1.0);
    CHECK(rect_integral(k, 0, 1, 0, 1) == doctest::Approx(quad).epsilon(1e-10));

    CHECK(rect_integral(k, 0.3, 0.3, 0.0, 2.0) == 0.0);
    CHECK(rect_integral(k, 0.0, 2.0, 0.7, 0.7) == 0.0);
    CHECK_THROWS_AS(rect_integral(k, 1.0, 0.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rect_integral(k, 0.0, 1.0, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("rect integral is symmetric in its two intervals") {
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> point(0.0, 5.0);
    for (int rep = 0; rep < 50; ++rep) {
        const ExpSumKernel k = random_kernel(eng);
        double a = point(eng), b = point(eng), c = point(eng), d = point(eng);
        if (a > b) std::swap(a, b);
        if (c > d) std::swap(c, d);
        const double ij = rect_integral(k, a, b, c, d);
        const double ji = rect_integral(k, c, d, a, b);
        CHECK(ij == doctest::Approx(ji).epsilon(1e-12));
    }
}

TEST_CASE("1000 random rectangles against the 2D quadrature oracle") {
    std::mt19937_64 eng(2024);
    std::uniform_real_distribution<double> point(0.0, 6.0);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const ExpSumKernel k = random_kernel(eng);
        double a = point(eng), b = point(eng), c = point(eng), d = point(eng);
        if (a > b) std::swap(a, b);
        if (c > d) std::swap(c, d);
        double sharpness = 0.0;
        for (const auto& term : k.terms) sharpness = std::max(sharpness, term.rate);
        const double closed = rect_integral(k, a, b, c, d);
        const double quad =
            oracle::rect_quadrature([&](double t) { return k.eval(t); }, a, b, c, d,
                                    sharpness);
        const double scale = std::max({std::abs(closed), std::abs(quad), 1e-12});
        worst = std::max(worst, std::abs(closed - quad) / scale);
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("additivity over rectangular partitions") {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> point(0.0, 4.0);
    std::uniform_real_distribution<double> unit(0.1, 0.9);
    for (int rep = 0; rep < 200; ++rep) {
        const ExpSumKernel k = random_kernel(eng);
        double a = point(eng), b = point(eng), c = point(eng), d = point(eng);
        if (a > b) std::swap(a, b);
        if (c > d) std::swap(c, d);
        const double s_cut = a + unit(eng) * (b - a);
        const double t_cut = c + unit(eng) * (d - c);
        const double whole = rect_integral(k, a, b, c, d);
        const double parts = rect_integral(k, a, s_cut, c, t_cut) +
                             rect_integral(k, a, s_cut, t_cut, d) +
                             rect_integral(k, s_cut, b, c, t_cut) +
                             rect_integral(k, s_cut, b, t_cut, d);
        CHECK(whole == doctest::Approx(parts).epsilon(1e-11));
    }
}

TEST_CASE("tiny rate*length stays accurate across the series switch") {
    const ExpSumKernel k = single_term(1.0, 1e-4);
    for (double len : {1e-4, 1e-3, 5e-3, 0.02}) {
        // rate*len from 1e-8 to 2e-6 straddles the 1e-6 Taylor threshold
        const double closed = rect_integral(k, 0.0, len, 0.0, len);
        // reference: w len^2 (1 - z/3 + z^2/12), z = rate*len
        const double z = 1e-4 * len;
        const double reference = len * len * (1.0 - z / 3.0 + z * z / 12.0);
        CHECK(closed == doctest::Approx(reference).epsilon(1e-9));
    }
}
