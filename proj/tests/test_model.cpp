#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sbl/kernel.hpp"
#include "sbl/model.hpp"

using namespace sbl;

namespace {

ContinuousModel ir_singular_example() {
    // d=3, nu(k) = |k|, v = chi_{|k|<=1} |k|^{-1/2}
    ContinuousModel m;
    m.dimension = 3;
    m.mass = 0.0;
    m.amplitude = 1.0;
    m.delta = -0.5;
    m.cutoff = 1.0;
    return m;
}

} // namespace

TEST_CASE("infrared-singular example passes every hypothesis clause") {
    const ValidationReport report = validate_hypotheses(ir_singular_example());
    for (const auto& clause : report.clauses) {
        INFO(clause.name, ": ", clause.detail);
        CHECK(clause.pass);
    }
    CHECK(report.all_pass());
}

TEST_CASE("bounded compactly supported coupling passes") {
    ContinuousModel m = ir_singular_example();
    m.delta = 0.0;
    CHECK(validate_hypotheses(m).all_pass());
}

TEST_CASE("non-square-integrable coupling fails the L2 clause") {
    ContinuousModel m = ir_singular_example();
    m.delta = -1.6; // 2*delta + d = -0.2
    const ValidationReport report = validate_hypotheses(m);
    const auto* clause = report.find("sbmin.v_square_integrable");
    REQUIRE(clause != nullptr);
    CHECK_FALSE(clause->pass);
    CHECK_FALSE(report.all_pass());
}

TEST_CASE("divergent shift integrals fail without crashing") {
    // d=1: 1/nu(k+p) = 1/|k+p| is log-divergent at k = -p, so the probe
    // quadrature cannot converge; the clause must fail, not throw.
    ContinuousModel m = ir_singular_example();
    m.dimension = 1;
    m.delta = -0.4; // v stays square integrable: 2*delta + d = 0.2 > 0
    const ValidationReport report = validate_hypotheses(m);
    const auto* clause = report.find("gsexists.shift_integral");
    REQUIRE(clause != nullptr);
    CHECK_FALSE(clause->pass);
}

TEST_CASE("skipped integral clauses report failure when v is not square integrable") {
    ContinuousModel m = ir_singular_example();
    m.delta = -1.6;
    const ValidationReport report = validate_hypotheses(m);
    CHECK_FALSE(report.find("gsexists.shift_integral")->pass);
    CHECK_FALSE(report.find("gsexists.holder_integral")->pass);
}

TEST_CASE("discretize: zero amplitude gives zero couplings") {
    ContinuousModel m = ir_singular_example();
    m.amplitude = 0.0;
    const ModeSet modes = discretize(m, 16);
    for (const auto& mode : modes.modes) CHECK(mode.v == 0.0);
}

TEST_CASE("kernel at zero from the massless preset equals pi/2") {
    // W(0) = (1/4) * 4pi * int_0^1 r^2 r^{-1} dr = pi/2
    const ModeSet modes = discretize(ir_singular_example(), 64, QuadratureRule::GaussLegendre);
    const double w0 = kernel_from_modes(modes).at_zero();
    CHECK(w0 == doctest::Approx(M_PI_2).epsilon(1e-6));

    const double reference =
        0.25 * 4.0 * M_PI *
        oracle::integrate_1d([](double r) { return r > 0.0 ? r * r / r : 0.0; }, 0.0, 1.0);
    CHECK(w0 == doctest::Approx(reference).epsilon(1e-9));
}

TEST_CASE("massive dispersion: omega_j = sqrt(nu^2 + m^2) >= m") {
    ContinuousModel m = ir_singular_example();
    m.mass = 0.5;
    const RadialGrid grid = radial_nodes(m, 32, QuadratureRule::GaussLegendre);
    const ModeSet modes = discretize(m, 32, QuadratureRule::GaussLegendre);
    REQUIRE(grid.r.size() == modes.modes.size());
    for (std::size_t j = 0; j < grid.r.size(); ++j) {
        CHECK(modes.modes[j].omega == doctest::Approx(std::hypot(grid.r[j], 0.5)).epsilon(1e-14));
        CHECK(modes.modes[j].omega >= 0.5 - 1e-12);
    }
}

TEST_CASE("refinement convergence of the discrete norms") {
    auto norms = [](const ModeSet& modes) {
        return std::pair{modes.sum_v2(), modes.sum_v2_over_w()};
    };
    for (QuadratureRule rule :
         {QuadratureRule::GaussLegendre, QuadratureRule::PowerStretched}) {
        ContinuousModel massless = ir_singular_example();
        ContinuousModel massive = ir_singular_example();
        massive.mass = 0.2;
        for (const ContinuousModel& m : {massless, massive}) {
            const auto [v2_a, vw_a] = norms(discretize(m, 128, rule));
            const auto [v2_b, vw_b] = norms(discretize(m, 256, rule));
            CHECK(std::abs(v2_a - v2_b) / v2_b < 1e-6);
            CHECK(std::abs(vw_a - vw_b) / vw_b < 1e-6);
        }
    }
}

TEST_CASE("power-stretched rule matches the continuum norm on a singular density") {
    ContinuousModel m = ir_singular_example();
    m.delta = -0.9; // radial density r^{2 delta + d - 1} = r^{0.2}
    m.mass = 0.3;
    const ModeSet modes = discretize(m, 64, QuadratureRule::PowerStretched);
    const double reference = coupling_norm2(m);
    CHECK(modes.sum_v2() == doctest::Approx(reference).epsilon(1e-8));
}

TEST_CASE("continuum norms against the independent quadrature oracle") {
    const ContinuousModel m = ir_singular_example();
    // ||v||^2 = 4pi int r^2 r^{-1} = 2pi; ||omega^{-1/2} v||^2 = 4pi (massless)
    CHECK(coupling_norm2(m) == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
    CHECK(coupling_norm2_over_omega(m) == doctest::Approx(4.0 * M_PI).epsilon(1e-9));
    CHECK(coupling_norm2_over_nu(m) == doctest::Approx(4.0 * M_PI).epsilon(1e-9));
}

TEST_CASE("input validation") {
    const ContinuousModel m = ir_singular_example();
    CHECK_THROWS_AS(discretize(m, 0), std::invalid_argument);
    CHECK_THROWS_AS(parse_rule("simpson"), std::invalid_argument);
    ContinuousModel bad = m;
    bad.delta = -1.6;
    CHECK_THROWS_AS(discretize(bad, 16), std::domain_error);

    CHECK_THROWS_AS(make_mode_set({}), std::invalid_argument);
    CHECK_THROWS_AS(make_mode_set({{0.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(make_mode_set({{-1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("nu profiles") {
    CHECK(NuProfile::parse("linear").eval(0.3) == doctest::Approx(0.3));
    const NuProfile p = NuProfile::parse("power:2");
    CHECK(p.eval(0.5) == doctest::Approx(0.25));
    CHECK(p.grows_unbounded());
    CHECK_THROWS_AS(NuProfile::parse("power:-1"), std::invalid_argument);
    CHECK_THROWS_AS(NuProfile::parse("gaussian"), std::invalid_argument);
}
