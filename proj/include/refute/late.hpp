#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "refute/data.hpp"
#include "refute/density.hpp"
#include "refute/intervals.hpp"

namespace refute {

inline constexpr double kWeakIdFloor = 1e-4;

struct TrimmedSets {
    IntervalSet y1;
    IntervalSet y0;
    double b = 0.0;
    const IntervalSet& set(int d) const { return d == 1 ? y1 : y0; }
};

struct IamDiagnostic {
    bool passes = true;
    double violation_mass_1 = 0.0;
    double violation_mass_0 = 0.0;
    json to_json() const;
};

// Nonnegativity of both density differences on the grid, allowing values down to -tol.
IamDiagnostic check_iam_implication(const DensityEstimate& est, double tol = 0.0);

// {y in band : f_h(y,d) >= b} from the piecewise-linear interpolant on the grid, plus tails.
IntervalSet super_level_set(const std::vector<double>& grid, const std::vector<double>& f,
                            double b, double band_lo, double band_hi);
TrimmedSets estimate_trimmed_sets(const DensityEstimate& est, const TailSpec& tails, double b,
                                  double band_lo, double band_hi);

struct LateVariance {
    double sigma = 0.0;  // sqrt(Pi' Gamma' D' Sigma D Gamma Pi)
    Eigen::Vector4d Pi;
    Eigen::Matrix<double, 6, 4> Gamma;
    Eigen::Matrix<double, 6, 6> D;
    Eigen::Matrix<double, 6, 6> Sigma;
};

struct LateEstimate {
    double estimate = 0.0;
    double mass1 = 0.0;  // P(Y1,1) - Q(Y1,1)
    double mass0 = 0.0;  // Q(Y0,0) - P(Y0,0)
    double numer1 = 0.0;
    double numer0 = 0.0;
    double se = 0.0;     // sigma / sqrt(n)
    double sigma = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double alpha = 0.05;
    std::size_t n = 0;
    json to_json() const;
};

// Raw sample moments shared by the point and bound estimators.
struct LateMoments {
    double p1 = 0.0, p0 = 0.0;
    double pi1 = 0.0, pi2 = 0.0, pi3 = 0.0, pi4 = 0.0;
    // n x 6 matrix of (1(Z=1), 1(Z=0), Y w1 1(Y1), Y w0 1(Y0), w1 1(Y1), w0 1(Y0))
    Eigen::MatrixXd X;
};

LateMoments late_moments(const Sample& s, const TrimmedSets& sets);

// Point estimate only; throws WeakIdentification when either complier mass is below floor.
LateEstimate estimate_late(const Sample& s, const TrimmedSets& sets, double floor = kWeakIdFloor);
LateVariance late_variance(const Sample& s, const TrimmedSets& sets, double floor = kWeakIdFloor);
// Per-observation influence values of the estimator; their sample variance equals sigma^2.
std::vector<double> late_influence(const Sample& s, const TrimmedSets& sets);
// Estimate, standard error and the centred (1 - alpha) interval.
LateEstimate late_ci(const Sample& s, const TrimmedSets& sets, double alpha,
                     double floor = kWeakIdFloor);

struct UnionMember {
    TailSpec tails;
    bool feasible = false;
    LateEstimate est;
};

struct UnionCI {
    double lo = 0.0;
    double hi = 0.0;
    int feasible = 0;
    std::vector<UnionMember> members;
    json to_json() const;
};

UnionCI conservative_union_ci(const Sample& s, const DensityEstimate& est, double b,
                              double band_lo, double band_hi, double alpha,
                              double floor = kWeakIdFloor);

double normal_quantile(double p);

// (E[Y|Z=1] - E[Y|Z=0]) / (E[D|Z=1] - E[D|Z=0]) with a delta-method interval.
struct WaldEstimate {
    double estimate = 0.0;
    double first_stage = 0.0;  // E[D|Z=1] - E[D|Z=0]
    double reduced_form = 0.0;
    double se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n = 0;
    json to_json() const;
};
// WeakIdentification when |first stage| < floor.
WaldEstimate wald_estimate(const Sample& s, double alpha, double floor = kWeakIdFloor);

// Density, trimmed sets and the known-tail interval under one configuration.
struct LatePointResult {
    DensityEstimate density;
    TrimmedSets sets;
    IamDiagnostic diagnostic;
    LateEstimate est;
};

LatePointResult late_point(const Sample& s, const RunConfig& cfg, const Kernel& k = {});

}  // namespace refute
