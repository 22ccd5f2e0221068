#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "refute/data.hpp"
#include "refute/simplex.hpp"

namespace refute {

// Joint cell probabilities Pr(Y=y, D=d, Z=z), stored at index 4y + 2d + z.
struct RoyDistribution {
    std::array<double, 8> p{};

    double operator()(int y, int d, int z) const { return p[static_cast<std::size_t>(4 * y + 2 * d + z)]; }
    double& operator()(int y, int d, int z) { return p[static_cast<std::size_t>(4 * y + 2 * d + z)]; }
    double pz(int z) const;
    double py_z(int y, int z) const;  // Pr(Y=y, Z=z)
    void validate() const;            // DataError unless a distribution with Pr(Z=1) in (0,1)
    static RoyDistribution from_sample(const Sample& s);  // requires binary Y
    static RoyDistribution parse(const std::string& cells);  // "p000,p001,...,p111"
    json to_json() const;
};

struct RoyRefutability {
    bool rejected = false;
    double slack = 0.0;  // Pr(Y=0|Z=0) - Pr(Y=0|Z=1)
};
RoyRefutability check_roy_refutable(const RoyDistribution& f);

// max{Pr(Y=0,Z=1) - Pr(Y=0,Z=0) Pr(Z=1)/Pr(Z=0), 0}
double min_efficiency_loss(const RoyDistribution& f);
// The same quantity as the two-variable linear program over (C_1^{011}, C_0^{101}).
double min_efficiency_loss_lp(const RoyDistribution& f);
// Over every completed structure matching f with both dominance inequalities, no z=0 restriction.
double min_efficiency_loss_full_lp(const RoyDistribution& f);

// Index of C_d^{ykz}: y = Y(1), k = Y(0).
constexpr int roy_var(int d, int y, int k, int z) { return ((d * 2 + y) * 2 + k) * 2 + z; }
std::string roy_var_name(int index);

struct RoyPolyhedron {
    RoyDistribution f;
    double m_el = 0.0;
    LinearProgram lp{16};
    double residual(const Eigen::VectorXd& x) const { return lp.residual(x); }
};
RoyPolyhedron build_polyhedron(const RoyDistribution& f);

struct RoyOptimum {
    double value = 0.0;
    Eigen::VectorXd x;
    double residual = 0.0;
};
RoyOptimum optimize_functional(const RoyPolyhedron& poly, const Eigen::VectorXd& objective, LpSense sense);

// Coefficients of Pr(Y(1)=1 | Z=z) as a linear functional of the C's.
Eigen::VectorXd y1_functional(const RoyDistribution& f, int z);

struct Bounds2 {
    double lo = 0.0;
    double hi = 0.0;
};

struct PotentialOutcomeBounds {
    std::array<Bounds2, 2> sharp;      // closed form, index z
    std::array<Bounds2, 2> simple;  // simpler display: [Pr(Y=1,D=1|z), Pr(Y=1|z) + 1(z=1) m/Pr(Z=1)]
    std::array<Bounds2, 2> lp;
    double m_el = 0.0;
    json to_json() const;
};

std::array<Bounds2, 2> sharp_y1_bounds(const RoyDistribution& f);
std::array<Bounds2, 2> simple_y1_bounds(const RoyDistribution& f);
// Throws ConsistencyError when the closed form and the LP disagree by more than tol.
PotentialOutcomeBounds potential_outcome_bounds(const RoyDistribution& f, double tol = 1e-9);

// Percentile intervals for the sharp bounds under row resampling; not part of the identification result.
struct RoyBootstrap {
    std::array<Bounds2, 2> lo_ci;
    std::array<Bounds2, 2> hi_ci;
    double min_el_lo = 0.0;
    double min_el_hi = 0.0;
    int replications = 0;
    json to_json() const;
};
RoyBootstrap roy_bootstrap(const Sample& s, double alpha, int B, std::uint64_t seed, unsigned threads = 1);

}  // namespace refute
