#include "refute/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "refute/errors.hpp"
#include "refute/parallel.hpp"

namespace refute {

void IntervalSample::validate() const {
    if (yl.size() != yu.size()) throw DataError("y_l and y_u have different lengths");
    if (yl.empty()) throw DataError("interval sample is empty");
    for (std::size_t i = 0; i < yl.size(); ++i) {
        if (!std::isfinite(yl[i]) || !std::isfinite(yu[i]))
            throw DataError("row " + std::to_string(i + 1) + ": interval endpoints must be finite");
        if (yl[i] > yu[i]) throw DataError("row " + std::to_string(i + 1) + ": y_l exceeds y_u");
    }
}

void DilationConfig::validate() const {
    for (std::size_t n : {1000ul, 1000000ul})
        if (!(radius(n) > 0.0) || !(rate(n) > 0.0)) throw ConfigError("dilation radius and rate must be positive");
    if (!(dilation_radius(1000000) < dilation_radius(1000)))
        throw ConfigError("c_n / sqrt(a_n) must shrink with n");
    if (bootstrap < 100) throw ConfigError("at least 100 bootstrap replications are required");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1]");
}

double DilationConfig::dilation_radius(std::size_t n) const { return radius(n) / std::sqrt(rate(n)); }

double sup_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < a.size() || j < b.size()) {
        double x = j >= b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return best;
}

double sup_distance_to_cdf(std::vector<double> values, const std::function<double(double)>& cdf) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double best = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double f = cdf(values[i]);
        best = std::max({best, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return best;
}

namespace {

// rank of each row among the distinct values of one column
struct RankedColumn {
    std::vector<std::size_t> rank;
    std::size_t levels = 0;
    std::vector<std::size_t> base_count;  // multiplicity of each distinct value in the original sample
};

RankedColumn rank_column(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    RankedColumn c;
    c.rank.resize(v.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k == 0 || v[order[k]] != v[order[k - 1]]) {
            ++c.levels;
            c.base_count.push_back(0);
        }
        c.rank[order[k]] = c.levels - 1;
        ++c.base_count.back();
    }
    return c;
}

}  // namespace

double bootstrap_critical_value(const std::vector<std::vector<double>>& columns, int B, double alpha,
                                std::uint64_t seed, unsigned threads) {
    if (columns.empty() || columns[0].empty()) throw DataError("bootstrap needs a nonempty sample");
    if (B < 100) throw ConfigError("bootstrap count must be at least 100");
    const std::size_t n = columns[0].size();
    for (const auto& c : columns)
        if (c.size() != n) throw DataError("bootstrap columns have different lengths");
    std::vector<RankedColumn> ranked;
    for (const auto& c : columns) ranked.push_back(rank_column(c));
    const double sn = std::sqrt(static_cast<double>(n));
    std::vector<double> eta(static_cast<std::size_t>(B));
    parallel_for(eta.size(), threads, [&](std::size_t b) {
        std::mt19937_64 rng(derive_seed(seed, b));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> draws(n);
        for (auto& d : draws) d = pick(rng);
        double worst = 0.0;
        for (const auto& col : ranked) {
            std::vector<long> diff(col.levels, 0);
            for (std::size_t d : draws) ++diff[col.rank[d]];
            long cum = 0;
            for (std::size_t k = 0; k < col.levels; ++k) {
                cum += diff[k] - static_cast<long>(col.base_count[k]);
                worst = std::max(worst, std::abs(static_cast<double>(cum)));
            }
        }
        eta[b] = sn * worst / static_cast<double>(n);
    });
    return quantile(eta, 1.0 - alpha);
}

double bootstrap_critical_value(const std::vector<double>& values, int B, double alpha, std::uint64_t seed,
                                unsigned threads) {
    return bootstrap_critical_value(std::vector<std::vector<double>>{values}, B, alpha, seed, threads);
}

IntervalMeanModel::IntervalMeanModel(const IntervalSample& s, std::optional<std::pair<double, double>> support)
    : yl_(s.yl), yu_(s.yu) {
    s.validate();
    std::sort(yl_.begin(), yl_.end());
    std::sort(yu_.begin(), yu_.end());
    lo_ = support ? support->first : yl_.front();
    hi_ = support ? support->second : yu_.back();
    if (lo_ > yl_.front() || hi_ < yu_.back()) throw ConfigError("support must contain every observed interval");
    const double n = static_cast<double>(s.size());
    mean_l_ = std::accumulate(yl_.begin(), yl_.end(), 0.0) / n;
    mean_u_ = std::accumulate(yu_.begin(), yu_.end(), 0.0) / n;
}

std::pair<double, double> IntervalMeanModel::dilated_bounds(double r) const {
    r = std::clamp(r, 0.0, 1.0);
    const std::size_t n = yu_.size();
    const double dn = static_cast<double>(n);
    // lowest r mass of Y_u moves to the upper support point; highest r mass of Y_l to the lower one
    double up = mean_u_, down = mean_l_, left = r;
    for (std::size_t i = 0; i < n && left > 0.0; ++i) {
        double w = std::min(left, 1.0 / dn);
        up += w * (hi_ - yu_[i]);
        down -= w * (yl_[n - 1 - i] - lo_);
        left -= w;
    }
    return {down, up};
}

double IntervalMeanModel::distance_to_feasible(double theta) const {
    if (theta >= mean_l_ && theta <= mean_u_) return 0.0;
    const std::size_t n = yu_.size();
    const double dn = static_cast<double>(n);
    if (theta > mean_u_) {
        if (theta > hi_) return kInf;
        double cum = mean_u_;
        for (std::size_t i = 0; i < n; ++i) {
            double gain = hi_ - yu_[i];
            if (cum + gain / dn >= theta) return static_cast<double>(i) / dn + (theta - cum) / gain;
            cum += gain / dn;
        }
        return 1.0;
    }
    if (theta < lo_) return kInf;
    double cum = mean_l_;
    for (std::size_t i = 0; i < n; ++i) {
        double loss = yl_[n - 1 - i] - lo_;
        if (cum - loss / dn <= theta) return static_cast<double>(i) / dn + (cum - theta) / loss;
        cum -= loss / dn;
    }
    return 1.0;
}

std::unique_ptr<DilationModel> make_model(const std::string& name, const IntervalSample& s,
                                          std::optional<std::pair<double, double>> support) {
    if (name == "interval-mean") return std::make_unique<IntervalMeanModel>(s, support);
    throw ConfigError("no projection routine for model '" + name + "'");
}

std::vector<double> theta_grid(double lo, double hi, int points) {
    if (points < 2 || !(hi > lo)) throw ConfigError("theta grid needs hi > lo and at least 2 points");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (points - 1);
    return g;
}

std::vector<double> dilated_set(const DilationModel& model, const std::vector<double>& grid, double radius) {
    std::vector<double> out;
    for (double t : grid)
        if (model.distance_to_feasible(t) < radius) out.push_back(t);
    return out;
}

json DilationRegion::to_json() const {
    return json{{"radius", radius}, {"bounds", {lo, hi}}, {"grid_members", grid_members.size()},
                {"grid_min", grid_members.empty() ? json(nullptr) : json(grid_members.front())},
                {"grid_max", grid_members.empty() ? json(nullptr) : json(grid_members.back())},
                {"critical_value", critical_value}};
}

namespace {

DilationRegion region_at(const DilationModel& model, const std::vector<double>& grid, double radius) {
    DilationRegion r;
    r.radius = radius;
    std::tie(r.lo, r.hi) = model.dilated_bounds(radius);
    r.grid_members = dilated_set(model, grid, radius);
    return r;
}

}  // namespace

DilationRegion estimated_identified_set(const DilationModel& model, const std::vector<double>& grid, std::size_t n,
                                        const DilationConfig& cfg) {
    cfg.validate();
    return region_at(model, grid, cfg.dilation_radius(n));
}

DilationRegion confidence_region(const DilationModel& model, const IntervalSample& s,
                                 const std::vector<double>& grid, const DilationConfig& cfg) {
    cfg.validate();
    double c = bootstrap_critical_value({s.yl, s.yu}, cfg.bootstrap, cfg.alpha, cfg.seed, cfg.threads);
    DilationRegion r = region_at(model, grid, c / std::sqrt(static_cast<double>(s.size())));
    r.critical_value = c;
    return r;
}

IntervalStats interval_data_stats(const IntervalSample& s, double a, double b) {
    s.validate();
    const double n = static_cast<double>(s.size());
    const double ml = std::accumulate(s.yl.begin(), s.yl.end(), 0.0) / n;
    const double mu = std::accumulate(s.yu.begin(), s.yu.end(), 0.0) / n;
    auto neg2 = [](double x) { return x < 0.0 ? x * x : 0.0; };
    IntervalStats t;
    t.t_nf = std::sqrt(n) * (neg2(mu - a) + neg2(b - ml));
    t.t_con = std::sqrt(n) * (neg2(b - mu) + neg2(ml - a));
    return t;
}

}  // namespace refute
