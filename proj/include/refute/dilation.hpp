#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "refute/data.hpp"

namespace refute {

// Interval-observed outcome: Y* is only known to lie in [y_l, y_u].
struct IntervalSample {
    std::vector<double> yl;
    std::vector<double> yu;
    std::size_t size() const { return yl.size(); }
    void validate() const;  // DataError naming the first row with y_l > y_u
};

struct DilationConfig {
    Rule radius = {"log n", [](std::size_t n) { return std::log(static_cast<double>(n)); }};  // c_n
    Rule rate = {"n", [](std::size_t n) { return static_cast<double>(n); }};                 // a_n
    int bootstrap = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    // ConfigError unless c_n > 0 and c_n / sqrt(a_n) decreases between n = 1e3 and n = 1e6
    void validate() const;
    double dilation_radius(std::size_t n) const;  // c_n / sqrt(a_n)
};

// sup_x |F_a(x) - F_b(x)| for two empirical CDFs, evaluated at the pooled jump points
double sup_distance(std::vector<double> a, std::vector<double> b);
// sup_x |F_n(x) - F(x)| for a continuous reference CDF
double sup_distance_to_cdf(std::vector<double> values, const std::function<double(double)>& cdf);

// (1-alpha) quantile of eta_b = max over columns of sup_x |sqrt(n)(F_n^b - F_n)|; rows resampled jointly.
double bootstrap_critical_value(const std::vector<std::vector<double>>& columns, int B, double alpha,
                                std::uint64_t seed, unsigned threads = 1);
double bootstrap_critical_value(const std::vector<double>& values, int B, double alpha, std::uint64_t seed,
                                unsigned threads = 1);

// Model-specific projection: smallest CDF-ball radius around F_n reaching a distribution with T(theta, F) = 0.
class DilationModel {
public:
    virtual ~DilationModel() = default;
    virtual std::string name() const = 0;
    virtual double distance_to_feasible(double theta) const = 0;
    // smallest interval containing every theta within distance r
    virtual std::pair<double, double> dilated_bounds(double r) const = 0;
};

// theta = E[Y*] with identified set [E Y_l, E Y_u]; the support [lo, hi] bounds where mass may be moved.
class IntervalMeanModel : public DilationModel {
public:
    IntervalMeanModel(const IntervalSample& s, std::optional<std::pair<double, double>> support = std::nullopt);
    std::string name() const override { return "interval-mean"; }
    double distance_to_feasible(double theta) const override;
    std::pair<double, double> dilated_bounds(double r) const override;
    double support_lo() const { return lo_; }
    double support_hi() const { return hi_; }
    double mean_l() const { return mean_l_; }
    double mean_u() const { return mean_u_; }

private:
    std::vector<double> yl_;  // sorted
    std::vector<double> yu_;  // sorted
    double lo_, hi_;
    double mean_l_, mean_u_;
};

// ConfigError for models without a projection routine.
std::unique_ptr<DilationModel> make_model(const std::string& name, const IntervalSample& s,
                                          std::optional<std::pair<double, double>> support = std::nullopt);

std::vector<double> theta_grid(double lo, double hi, int points);

// {theta in grid : distance_to_feasible(theta) < radius}
std::vector<double> dilated_set(const DilationModel& model, const std::vector<double>& grid, double radius);

struct DilationRegion {
    double radius = 0.0;
    double lo = 0.0;  // continuous dilated bounds
    double hi = 0.0;
    std::vector<double> grid_members;
    double critical_value = 0.0;  // c*(alpha), confidence regions only
    json to_json() const;
};

DilationRegion estimated_identified_set(const DilationModel& model, const std::vector<double>& grid, std::size_t n,
                                        const DilationConfig& cfg);
DilationRegion confidence_region(const DilationModel& model, const IntervalSample& s,
                                 const std::vector<double>& grid, const DilationConfig& cfg);

struct IntervalStats {
    double t_nf = 0.0;
    double t_con = 0.0;
};
// sqrt(n)[(mean Y_u - a)_-^2 + (b - mean Y_l)_-^2] and sqrt(n)[(b - mean Y_u)_-^2 + (mean Y_l - a)_-^2]
IntervalStats interval_data_stats(const IntervalSample& s, double a, double b);

}  // namespace refute
