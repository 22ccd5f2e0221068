#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "refute/intervals.hpp"

namespace refute {

using json = nlohmann::json;

struct Sample {
    std::vector<double> y;
    std::vector<int> d;
    std::vector<int> z;

    std::size_t size() const { return y.size(); }
    // Throws DataError on shape/binary violations, ConfigError when one Z-arm is empty.
    void validate() const;
};

// Joint empirical measures of (Y, D) given Z=1 (P side) and given Z=0 (Q side).
class EmpiricalPQ {
public:
    explicit EmpiricalPQ(const Sample& s);

    double prZ1() const { return prZ1_; }
    double prZ0() const { return 1.0 - prZ1_; }
    std::size_t n() const { return n_; }
    std::size_t nZ(int z) const { return nz_[z]; }

    // P(B,d) = Pr(Y in B, D=d | Z=1); Q(B,d) = Pr(Y in B, D=d | Z=0)
    double P(const IntervalSet& B, int d) const { return measure(B, d, 1); }
    double Q(const IntervalSet& B, int d) const { return measure(B, d, 0); }
    double p_mass(int d) const { return static_cast<double>(cell(d, 1).size()) / nz_[1]; }
    double q_mass(int d) const { return static_cast<double>(cell(d, 0).size()) / nz_[0]; }
    // right-continuous CDFs P((-inf,y],d), Q((-inf,y],d)
    double p_cdf(double y, int d) const;
    double q_cdf(double y, int d) const;

    // sorted Y values in cell (D=d, Z=z)
    const std::vector<double>& cell(int d, int z) const { return cells_[2 * d + z]; }

    bool operator==(const EmpiricalPQ& o) const;

private:
    double measure(const IntervalSet& B, int d, int z) const;
    std::size_t n_ = 0;
    double prZ1_ = 0.0;
    std::array<std::size_t, 2> nz_{};
    std::array<std::vector<double>, 4> cells_;
};

EmpiricalPQ build_empirical(const Sample& s);

// Known tail-sign assumption. true = the tail belongs to the set of d.
struct TailSpec {
    std::array<bool, 2> upper{false, false};  // index d
    std::array<bool, 2> lower{false, false};

    // bit k of code: upper[1], upper[0], lower[1], lower[0] for k = 0..3
    static TailSpec from_code(int code);
    int code() const;
    // parses "u1=full,u0=empty,l1=empty,l0=full" or a 4-char string like "0101" (u1 u0 l1 l0)
    static TailSpec parse(const std::string& text);
    std::string str() const;
    json to_json() const;
    bool operator==(const TailSpec&) const = default;
};

// Tuning sequence stored as a named closure over n.
struct Rule {
    std::string name;
    std::function<double(std::size_t)> eval;
    double operator()(std::size_t n) const { return eval(n); }
};

namespace rules {
Rule fixed(double v);
Rule rate_bandwidth();                   // n^{-1/5}
Rule rate_trimming(double scale = 1.0);  // scale * n^{-1/4} / log n
Rule kappa(double scale = 1.0);             // scale * log n / sqrt n
Rule scaled_bandwidth(double sd);         // sd * log n / (2 n^{1/5})
Rule density_trimming(double mean_density);  // n^{-1/4} * mean_density
}  // namespace rules

struct RunConfig {
    Rule bandwidth_rule = rules::rate_bandwidth();
    Rule trimming_rule = rules::rate_trimming();
    Rule threshold_rule = rules::kappa();
    std::size_t n = 0;
    double h = 0.0;
    double b = 0.0;
    double kappa = 0.0;
    double band_lo = -2.5;
    double band_hi = 7.0;
    TailSpec tails;
    double alpha = 0.05;
    int bootstrap = 1000;
    std::uint64_t seed = 1;

    // re-evaluates h, b, kappa at a new n
    RunConfig& at(std::size_t n_new);
    void validate() const;
    json to_json() const;
    // rules given as numbers become fixed rules; named theorem rules are recognised
    static RunConfig from_json(const json& j);
};

// Data-driven configuration: bandwidth, trimming, band and tails from the sample (n >= 20).
// A supplied trimming level replaces the mean-density rule, which fails when that mean is not positive.
RunConfig default_empirical_config(const Sample& s, std::optional<double> trimming = std::nullopt);

double sample_sd(const std::vector<double>& v);
// generalized inverse of the empirical CDF: inf{y : F_n(y) >= p}
double quantile(std::vector<double> v, double p);

}  // namespace refute
