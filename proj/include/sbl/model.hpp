// model.hpp -- radial spin-boson problem specifications and their discretization

#pragma once

#include <string>
#include <vector>

namespace sbl {

// Radial dispersion base nu(r). Shipped preset: nu(r) = r.
struct NuProfile {
    enum class Kind { Linear, Power };
    Kind kind = Kind::Linear;
    double exponent = 1.0; // Power: nu(r) = r^exponent, exponent > 0

    double eval(double r) const;
    bool grows_unbounded() const;
    std::string name() const;
    static NuProfile parse(const std::string& spec);
};

// Spin-boson problem in radial form on R^d:
//   omega(k) = sqrt(nu(|k|)^2 + mass^2)
//   v(k)     = amplitude * |k|^delta * 1{|k| <= cutoff}
struct ContinuousModel {
    int dimension = 3;
    NuProfile nu{};
    double mass = 0.0;
    double amplitude = 1.0;
    double delta = 0.0;
    double cutoff = 1.0;

    double omega(double r) const;
    double coupling(double r) const; // radial profile of v
    double sphere_area() const;      // |S^{d-1}|
};

// Finite list of boson modes; |v_j|^2 carries the quadrature weight.
struct ModeSet {
    struct Mode {
        double omega; // > 0
        double v;     // real
    };
    std::vector<Mode> modes;

    double min_omega() const;
    double sum_v2() const;       // ~ ||v||^2
    double sum_v2_over_w() const; // ~ ||omega^{-1/2} v||^2
};

// Throws std::invalid_argument on an empty list or a non-positive frequency.
ModeSet make_mode_set(std::vector<ModeSet::Mode> modes);

struct HypothesisClause {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<HypothesisClause> clauses;

    bool all_pass() const;
    const HypothesisClause* find(const std::string& name) const;
};

// Checks the selfadjointness, path-measure and ground-state hypotheses for a
// radial model. Exponent conditions are decided analytically from (d, delta);
// the shift-integral conditions are probed by adaptive quadrature on a grid
// of probe momenta |p| <= 1. Quadrature failure marks the clause failed.
ValidationReport validate_hypotheses(const ContinuousModel& model);

enum class QuadratureRule {
    GaussLegendre,  // plain nodes on [0, cutoff]
    PowerStretched, // r = cutoff * u^(2/(2 delta + d)); resolves the r -> 0 singularity
};
QuadratureRule parse_rule(const std::string& name);
std::string rule_name(QuadratureRule rule);

struct RadialGrid {
    std::vector<double> r;      // nodes in (0, cutoff)
    std::vector<double> weight; // d r weights
};

RadialGrid radial_nodes(const ContinuousModel& model, int n_nodes, QuadratureRule rule);

// Radial reduction of the k-integral: v_j^2 = q_j * S_{d-1} * r_j^{d-1} * v(r_j)^2,
// omega_j = sqrt(nu(r_j)^2 + mass^2). Requires the square-integrability clauses.
ModeSet discretize(const ContinuousModel& model, int n_nodes,
                   QuadratureRule rule = QuadratureRule::GaussLegendre);

// ||v||_2^2, ||omega^{-1/2} v||_2^2 and ||nu^{-1/2} v||_2^2 of the continuous
// model, by adaptive quadrature of the radial integrand.
double coupling_norm2(const ContinuousModel& model);
double coupling_norm2_over_omega(const ContinuousModel& model);
double coupling_norm2_over_nu(const ContinuousModel& model);

} // namespace sbl
