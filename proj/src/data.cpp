#include "refute/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "refute/density.hpp"
#include "refute/errors.hpp"

namespace refute {

void Sample::validate() const {
    if (y.empty()) throw DataError("sample is empty");
    if (d.size() != y.size() || z.size() != y.size())
        throw DataError("y, d, z have different lengths");
    std::size_t nz1 = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i])) throw DataError("non-finite y at row " + std::to_string(i + 1));
        if (d[i] != 0 && d[i] != 1) throw DataError("d not in {0,1} at row " + std::to_string(i + 1));
        if (z[i] != 0 && z[i] != 1) throw DataError("z not in {0,1} at row " + std::to_string(i + 1));
        nz1 += z[i];
    }
    if (nz1 == 0 || nz1 == y.size())
        throw ConfigError("degenerate instrument: every observation has the same z");
}

EmpiricalPQ::EmpiricalPQ(const Sample& s) {
    s.validate();
    n_ = s.size();
    for (std::size_t i = 0; i < n_; ++i) {
        ++nz_[s.z[i]];
        cells_[2 * s.d[i] + s.z[i]].push_back(s.y[i]);
    }
    for (auto& c : cells_) std::sort(c.begin(), c.end());
    prZ1_ = static_cast<double>(nz_[1]) / n_;
}

double EmpiricalPQ::measure(const IntervalSet& B, int d, int z) const {
    const auto& c = cell(d, z);
    std::size_t count = 0;
    for (const auto& iv : B.parts()) {
        auto lo = std::lower_bound(c.begin(), c.end(), iv.lo);
        auto hi = std::upper_bound(c.begin(), c.end(), iv.hi);
        if (hi > lo) count += static_cast<std::size_t>(hi - lo);
    }
    return static_cast<double>(count) / nz_[z];
}

double EmpiricalPQ::p_cdf(double y, int d) const {
    const auto& c = cell(d, 1);
    return static_cast<double>(std::upper_bound(c.begin(), c.end(), y) - c.begin()) / nz_[1];
}

double EmpiricalPQ::q_cdf(double y, int d) const {
    const auto& c = cell(d, 0);
    return static_cast<double>(std::upper_bound(c.begin(), c.end(), y) - c.begin()) / nz_[0];
}

bool EmpiricalPQ::operator==(const EmpiricalPQ& o) const {
    return n_ == o.n_ && nz_ == o.nz_ && cells_ == o.cells_;
}

EmpiricalPQ build_empirical(const Sample& s) { return EmpiricalPQ(s); }

TailSpec TailSpec::from_code(int code) {
    TailSpec t;
    t.upper[1] = code & 1;
    t.upper[0] = code & 2;
    t.lower[1] = code & 4;
    t.lower[0] = code & 8;
    return t;
}

int TailSpec::code() const {
    return (upper[1] ? 1 : 0) | (upper[0] ? 2 : 0) | (lower[1] ? 4 : 0) | (lower[0] ? 8 : 0);
}

TailSpec TailSpec::parse(const std::string& text) {
    TailSpec t;
    if (text.size() == 4 && text.find_first_not_of("01") == std::string::npos) {
        t.upper[1] = text[0] == '1';
        t.upper[0] = text[1] == '1';
        t.lower[1] = text[2] == '1';
        t.lower[0] = text[3] == '1';
        return t;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq != 2) throw ConfigError("bad tail item '" + item + "'");
        std::string key = item.substr(0, 2), val = item.substr(3);
        bool full;
        if (val == "full") full = true;
        else if (val == "empty") full = false;
        else throw ConfigError("tail value must be full or empty: '" + item + "'");
        if (key == "u1") t.upper[1] = full;
        else if (key == "u0") t.upper[0] = full;
        else if (key == "l1") t.lower[1] = full;
        else if (key == "l0") t.lower[0] = full;
        else throw ConfigError("unknown tail key '" + key + "'");
    }
    return t;
}

std::string TailSpec::str() const {
    auto f = [](bool b) { return b ? "full" : "empty"; };
    return std::string("u1=") + f(upper[1]) + ",u0=" + f(upper[0]) + ",l1=" + f(lower[1]) +
           ",l0=" + f(lower[0]);
}

json TailSpec::to_json() const {
    return json{{"upper_d1", upper[1]}, {"upper_d0", upper[0]},
                {"lower_d1", lower[1]}, {"lower_d0", lower[0]}};
}

namespace rules {

Rule fixed(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return {"fixed:" + os.str(), [v](std::size_t) { return v; }};
}

Rule rate_bandwidth() {
    return {"n^-1/5", [](std::size_t n) { return std::pow(static_cast<double>(n), -0.2); }};
}

Rule rate_trimming(double scale) {
    return {"scale*n^-1/4/log(n):" + std::to_string(scale), [scale](std::size_t n) {
                double x = static_cast<double>(n);
                return scale * std::pow(x, -0.25) / std::log(x);
            }};
}

Rule kappa(double scale) {
    return {"scale*log(n)/sqrt(n):" + std::to_string(scale), [scale](std::size_t n) {
                double x = static_cast<double>(n);
                return scale * std::log(x) / std::sqrt(x);
            }};
}

Rule scaled_bandwidth(double sd) {
    return {"sd*log(n)/(2n^1/5)", [sd](std::size_t n) {
                double x = static_cast<double>(n);
                return sd * std::log(x) / (2.0 * std::pow(x, 0.2));
            }};
}

Rule density_trimming(double mean_density) {
    return {"n^-1/4*mean_density", [mean_density](std::size_t n) {
                return std::pow(static_cast<double>(n), -0.25) * mean_density;
            }};
}

}  // namespace rules

RunConfig& RunConfig::at(std::size_t n_new) {
    n = n_new;
    h = bandwidth_rule(n);
    b = trimming_rule(n);
    kappa = threshold_rule(n);
    return *this;
}

void RunConfig::validate() const {
    if (!(band_lo < band_hi)) throw ConfigError("trimming band needs M_l < M_u");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    if (bootstrap < 1) throw ConfigError("bootstrap count must be >= 1");
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("bandwidth must be positive");
    if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("trimming level must be positive");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be positive");
}

json RunConfig::to_json() const {
    return json{{"n", n},
                {"bandwidth_rule", bandwidth_rule.name},
                {"trimming_rule", trimming_rule.name},
                {"threshold_rule", threshold_rule.name},
                {"h", h},
                {"b", b},
                {"kappa", kappa},
                {"band", {band_lo, band_hi}},
                {"tails", tails.str()},
                {"alpha", alpha},
                {"bootstrap", bootstrap},
                {"seed", seed}};
}

namespace {

Rule rule_from_json(const json& j, Rule fallback) {
    if (j.is_number()) return rules::fixed(j.get<double>());
    if (!j.is_string()) return fallback;
    auto s = j.get<std::string>();
    if (s == "n^-1/5") return rules::rate_bandwidth();
    auto colon = s.find(':');
    std::string head = s.substr(0, colon);
    double arg = colon == std::string::npos ? 1.0 : std::stod(s.substr(colon + 1));
    if (head == "fixed") return rules::fixed(arg);
    if (head == "scale*n^-1/4/log(n)") return rules::rate_trimming(arg);
    if (head == "scale*log(n)/sqrt(n)") return rules::kappa(arg);
    throw ConfigError("unknown rule '" + s + "'");
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    if (j.contains("bandwidth_rule")) c.bandwidth_rule = rule_from_json(j["bandwidth_rule"], c.bandwidth_rule);
    if (j.contains("trimming_rule")) c.trimming_rule = rule_from_json(j["trimming_rule"], c.trimming_rule);
    if (j.contains("threshold_rule")) c.threshold_rule = rule_from_json(j["threshold_rule"], c.threshold_rule);
    if (j.contains("band")) {
        c.band_lo = j["band"].at(0).get<double>();
        c.band_hi = j["band"].at(1).get<double>();
    }
    if (j.contains("tails")) c.tails = TailSpec::parse(j["tails"].get<std::string>());
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("bootstrap")) c.bootstrap = j["bootstrap"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    c.at(j.value("n", std::size_t{2}));
    return c;
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / (v.size() - 1));
}

double quantile(std::vector<double> v, double p) {
    if (v.empty()) throw DataError("quantile of an empty vector");
    std::sort(v.begin(), v.end());
    double k = std::ceil(p * static_cast<double>(v.size()) - 1e-12);
    std::size_t idx = k < 1.0 ? 0 : static_cast<std::size_t>(k) - 1;
    return v[std::min(idx, v.size() - 1)];
}

namespace {

// empirical variance of the cell's values in the upper (upper=true) or lower 10% tail
double tail_variance(const std::vector<double>& cell, bool upper) {
    if (cell.size() < 2) return 0.0;
    double cut = quantile(cell, upper ? 0.9 : 0.1);
    std::vector<double> tail;
    for (double y : cell)
        if (upper ? y >= cut : y <= cut) tail.push_back(y);
    double sd = sample_sd(tail);
    return sd * sd;
}

}  // namespace

RunConfig default_empirical_config(const Sample& s, std::optional<double> trimming) {
    s.validate();
    const std::size_t n = s.size();
    if (n < 20) throw ConfigError("data-driven configuration needs n >= 20, got " + std::to_string(n));
    double sd = sample_sd(s.y);
    if (!(sd > 0.0)) throw ConfigError("Y has zero standard deviation; bandwidth would be 0");

    RunConfig c;
    c.bandwidth_rule = rules::scaled_bandwidth(sd);
    c.h = c.bandwidth_rule(n);
    c.band_lo = quantile(s.y, 0.01);
    c.band_hi = quantile(s.y, 0.99);
    if (!(c.band_lo < c.band_hi)) throw ConfigError("1% and 99% quantiles of Y coincide");

    EmpiricalPQ emp(s);
    if (trimming) {
        c.trimming_rule = rules::fixed(*trimming);
    } else {
        Kernel k;
        double total = 0.0;
        for (double y : s.y) {
            total += cell_density(emp, k, c.h, 1, 1, y) - cell_density(emp, k, c.h, 1, 0, y);
            total += cell_density(emp, k, c.h, 0, 0, y) - cell_density(emp, k, c.h, 0, 1, y);
        }
        double mean_density = total / n;
        if (!(mean_density > 0.0))
            throw ConfigError("mean estimated density difference is not positive; trimming level undefined (pass a fixed trimming level)");
        c.trimming_rule = rules::density_trimming(mean_density);
    }
    c.b = c.trimming_rule(n);
    c.threshold_rule = rules::kappa();
    c.kappa = c.threshold_rule(n);
    c.n = n;

    for (int d = 0; d < 2; ++d) {
        int own = d, other = 1 - d;
        double pr_own = own == 1 ? emp.p_mass(d) : emp.q_mass(d);
        double pr_other = other == 1 ? emp.p_mass(d) : emp.q_mass(d);
        const auto& c_own = emp.cell(d, own);
        const auto& c_other = emp.cell(d, other);
        c.tails.upper[d] = tail_variance(c_own, true) * pr_own * pr_own >=
                           tail_variance(c_other, true) * pr_other * pr_other;
        c.tails.lower[d] = tail_variance(c_own, false) * pr_own * pr_own >=
                           tail_variance(c_other, false) * pr_other * pr_other;
    }
    return c;
}

}  // namespace refute
