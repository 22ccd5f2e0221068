#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "refute/data.hpp"
#include "refute/density.hpp"
#include "refute/late.hpp"

namespace refute {

enum class Regime { Below, Point, Above };
std::string regime_name(Regime r);

struct DeltaEstimate {
    double delta = 0.0;  // mass1 - mass0
    double mass1 = 0.0;
    double mass0 = 0.0;
    double kappa = 0.0;
    Regime regime = Regime::Point;
    bool near_boundary = false;  // |delta| in [kappa, 2 kappa]
    json to_json() const;
};

DeltaEstimate estimate_delta(const Sample& s, const TrimmedSets& sets, double kappa);

enum class Side { Lower, Upper };

// Which side of the instrument gets the correction mass, and which way it is collected.
struct Correction {
    int d = 1;         // side with the smaller complier mass
    int direction = 1; // +1 collects Y <= t, -1 collects Y >= t
};
Correction correction_for(Regime regime, Side side);

struct ThresholdEstimate {
    double t = 0.0;
    double criterion = 0.0;
    double target = 0.0;        // |delta|
    double collected = 0.0;     // mean(m_d 1(R(t)))
    double available = 0.0;     // total correction mass
    int direction = 1;
    bool multiplicity = false;  // distinct mass levels achieve the minimum
    bool saturated = false;     // |delta| exceeds the available mass
    json to_json() const;
};

// Per-observation correction weight m_d(i): the min{p, q} mass carried by observation i.
std::vector<double> correction_weights(const Sample& s, const TrimmedSets& sets, int d);

// Minimal-distance scan over the order statistics of Y plus -inf/+inf.
ThresholdEstimate estimate_threshold(const Sample& s, const TrimmedSets& sets,
                                     const DeltaEstimate& delta, Side side);

struct BoundVariance {
    double sigma = 0.0;
    double v = 0.0;         // kernel estimate of the correction density at t
    bool unstable = false;  // v below 1e-6 or t infinite
    Eigen::RowVectorXd Gamma;   // 1 x 6 gradient in (N_d, K, N_o, M_o, KM, M_d)
    Eigen::MatrixXd M1;         // 6 x 14
    Eigen::MatrixXd M2;         // 6 x 14
    Eigen::MatrixXd Sigma;      // 14 x 14
};

struct BoundSide {
    double value = 0.0;
    ThresholdEstimate threshold;
    double sigma = 0.0;
    double se = 0.0;
    bool unstable = false;
    json to_json() const;
};

struct BoundEstimate {
    Regime regime = Regime::Point;
    BoundSide lower;
    BoundSide upper;
    double ci_lo = 0.0;  // lower - z se_l
    double ci_hi = 0.0;  // upper + z se_u
    double alpha = 0.05;
    std::size_t n = 0;
    json to_json() const;
};

// Bound value at a given threshold; t = -inf / +inf are allowed.
double bound_at(const Sample& s, const TrimmedSets& sets, int d, int direction, double t);

BoundVariance bound_variance(const Sample& s, const TrimmedSets& sets, const ThresholdEstimate& th,
                             int d, const Kernel& k, double h);
// Per-observation influence values matching bound_variance.
std::vector<double> bound_influence(const Sample& s, const TrimmedSets& sets,
                                    const ThresholdEstimate& th, int d);

BoundEstimate estimate_bounds(const Sample& s, const TrimmedSets& sets, const DeltaEstimate& delta,
                              double alpha = 0.05, const Kernel& k = {}, double h = 0.2,
                              double floor = kWeakIdFloor);

// Percentile interval of a bound under row resampling with the trimmed sets held fixed.
struct BootstrapInterval {
    double lo = 0.0;
    double hi = 0.0;
    int replications = 0;
};
BootstrapInterval bootstrap_bound(const Sample& s, const TrimmedSets& sets, Regime regime, Side side,
                                  double alpha, int B, std::uint64_t seed, unsigned threads = 1);

}  // namespace refute
