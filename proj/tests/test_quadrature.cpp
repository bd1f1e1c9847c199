#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sbl/quadrature.hpp"

using namespace sbl;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    std::vector<double> x, w;
    gauss_legendre(8, 0.0, 1.0, x, w);
    // degree up to 2n-1 = 15
    for (int p = 0; p <= 15; ++p) {
        double s = 0.0;
        for (int j = 0; j < 8; ++j) s += w[j] * std::pow(x[j], p);
        CHECK(s == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
}

TEST_CASE("gauss-legendre weights sum to the interval length") {
    std::vector<double> x, w;
    gauss_legendre(64, 0.0, 2.5, x, w);
    double s = 0.0;
    for (double v : w) s += v;
    CHECK(s == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(x.front() > 0.0);
    CHECK(x.back() < 2.5);
}

TEST_CASE("adaptive integration of smooth and singular integrands") {
    auto q1 = integrate([](double t) { return std::exp(-t); }, 0.0, 10.0);
    CHECK(q1.converged);
    CHECK(q1.value == doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-12));

    // integrable endpoint singularity 1/sqrt(r)
    auto q2 = integrate([](double r) { return 1.0 / std::sqrt(r); }, 0.0, 1.0, 1e-12, 1e-10);
    CHECK(q2.converged);
    CHECK(q2.value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("non-finite integrand is reported, not thrown") {
    auto q = integrate([](double r) { return 1.0 / r; }, 0.0, 1.0, 1e-12, 1e-10, 50'000);
    CHECK_FALSE(q.converged);
}

TEST_CASE("reversed limits flip the sign") {
    auto fwd = integrate([](double t) { return t * t; }, 0.0, 2.0);
    auto rev = integrate([](double t) { return t * t; }, 2.0, 0.0);
    CHECK(fwd.value == doctest::Approx(-rev.value).epsilon(1e-14));
}
