#include "refute/late.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "refute/errors.hpp"

namespace refute {

json IamDiagnostic::to_json() const {
    return json{{"passes", passes},
                {"violation_mass_1", violation_mass_1},
                {"violation_mass_0", violation_mass_0}};
}

IamDiagnostic check_iam_implication(const DensityEstimate& est, double tol) {
    IamDiagnostic out;
    const auto& g = est.grid;
    for (int d = 0; d < 2; ++d) {
        const auto& f = est.f(d);
        double mass = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (f[j] < -tol) out.passes = false;
            if (j + 1 < g.size())
                mass += 0.5 * (std::max(-f[j], 0.0) + std::max(-f[j + 1], 0.0)) * (g[j + 1] - g[j]);
        }
        (d == 1 ? out.violation_mass_1 : out.violation_mass_0) = mass;
    }
    return out;
}

IntervalSet super_level_set(const std::vector<double>& grid, const std::vector<double>& f,
                            double b, double band_lo, double band_hi) {
    // piecewise-linear interpolant restricted to the band; band ends are interpolated too
    auto value = [&](double y) {
        if (y <= grid.front()) return f.front() - b;
        if (y >= grid.back()) return f.back() - b;
        auto it = std::upper_bound(grid.begin(), grid.end(), y);
        std::size_t j = static_cast<std::size_t>(it - grid.begin());
        double w = (y - grid[j - 1]) / (grid[j] - grid[j - 1]);
        return (1.0 - w) * f[j - 1] + w * f[j] - b;
    };
    std::vector<double> ys{band_lo}, gs{value(band_lo)};
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (grid[j] > band_lo && grid[j] < band_hi) {
            ys.push_back(grid[j]);
            gs.push_back(f[j] - b);
        }
    }
    ys.push_back(band_hi);
    gs.push_back(value(band_hi));

    std::vector<Interval> parts;
    bool inside = gs[0] >= 0.0;
    double start = ys[0];
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
        double g0 = gs[j], g1 = gs[j + 1];
        if (inside && g1 < 0.0) {
            double cross = g0 == g1 ? ys[j] : ys[j] + (ys[j + 1] - ys[j]) * g0 / (g0 - g1);
            parts.push_back({start, cross});
            inside = false;
        } else if (!inside && g1 >= 0.0) {
            start = g1 == g0 ? ys[j + 1] : ys[j] + (ys[j + 1] - ys[j]) * g0 / (g0 - g1);
            inside = true;
        }
    }
    if (inside) parts.push_back({start, ys.back()});
    return IntervalSet(std::move(parts));
}

TrimmedSets estimate_trimmed_sets(const DensityEstimate& est, const TailSpec& tails, double b,
                                  double band_lo, double band_hi) {
    TrimmedSets out;
    out.b = b;
    for (int d = 0; d < 2; ++d) {
        IntervalSet s = super_level_set(est.grid, est.f(d), b, band_lo, band_hi);
        std::vector<Interval> extra;
        if (tails.upper[d]) extra.push_back({band_hi, kInf});
        if (tails.lower[d]) extra.push_back({-kInf, band_lo});
        s = s.unite(IntervalSet(std::move(extra)));
        (d == 1 ? out.y1 : out.y0) = std::move(s);
    }
    return out;
}

json LateEstimate::to_json() const {
    return json{{"estimate", estimate}, {"complier_mass_1", mass1}, {"complier_mass_0", mass0},
                {"sigma", sigma},       {"se", se},                 {"ci", {ci_lo, ci_hi}},
                {"alpha", alpha},       {"n", n}};
}

LateMoments late_moments(const Sample& s, const TrimmedSets& sets) {
    s.validate();
    const std::size_t n = s.size();
    LateMoments m;
    double nz1 = 0;
    for (int z : s.z) nz1 += z;
    m.p1 = nz1 / n;
    m.p0 = 1.0 - m.p1;
    m.X.resize(static_cast<Eigen::Index>(n), 6);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = s.y[i];
        const int d = s.d[i], z = s.z[i];
        double w1 = (d == 1 && z == 1 ? 1.0 / m.p1 : 0.0) - (d == 1 && z == 0 ? 1.0 / m.p0 : 0.0);
        double w0 = (d == 0 && z == 0 ? 1.0 / m.p0 : 0.0) - (d == 0 && z == 1 ? 1.0 / m.p1 : 0.0);
        double in1 = sets.y1.contains(y) ? 1.0 : 0.0;
        double in0 = sets.y0.contains(y) ? 1.0 : 0.0;
        auto r = static_cast<Eigen::Index>(i);
        m.X(r, 0) = z;
        m.X(r, 1) = 1 - z;
        m.X(r, 2) = y * w1 * in1;
        m.X(r, 3) = y * w0 * in0;
        m.X(r, 4) = w1 * in1;
        m.X(r, 5) = w0 * in0;
    }
    Eigen::RowVectorXd mean = m.X.colwise().mean();
    m.pi1 = mean(2);
    m.pi2 = mean(3);
    m.pi3 = mean(4);
    m.pi4 = mean(5);
    return m;
}

namespace {

void check_masses(const LateMoments& m, double floor) {
    if (!(m.pi3 > floor))
        throw WeakIdentification("weak identification: complier mass for d=1 is " +
                                     std::to_string(m.pi3), m.pi3);
    if (!(m.pi4 > floor))
        throw WeakIdentification("weak identification: complier mass for d=0 is " +
                                     std::to_string(m.pi4), m.pi4);
}

Eigen::Matrix<double, 2, 4> gamma_star(const Sample& s, const TrimmedSets& sets) {
    // E[Y 1(D=d,Z=z) 1(Y in Y_d)] and E[1(D=d,Z=z) 1(Y in Y_d)]
    double ey[2][2] = {{0, 0}, {0, 0}}, e[2][2] = {{0, 0}, {0, 0}};
    const double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const int d = s.d[i], z = s.z[i];
        if (sets.set(d).contains(s.y[i])) {
            ey[d][z] += s.y[i] / n;
            e[d][z] += 1.0 / n;
        }
    }
    Eigen::Matrix<double, 2, 4> g;
    g << ey[1][1], -ey[0][1], e[1][1], -e[0][1],
        -ey[1][0], ey[0][0], -e[1][0], e[0][0];
    return g;
}

}  // namespace

LateEstimate estimate_late(const Sample& s, const TrimmedSets& sets, double floor) {
    LateMoments m = late_moments(s, sets);
    check_masses(m, floor);
    LateEstimate out;
    out.n = s.size();
    out.mass1 = m.pi3;
    out.mass0 = m.pi4;
    out.numer1 = m.pi1;
    out.numer0 = m.pi2;
    out.estimate = m.pi1 / m.pi3 - m.pi2 / m.pi4;
    out.sigma = out.se = std::nan("");
    out.ci_lo = out.ci_hi = std::nan("");
    return out;
}

LateVariance late_variance(const Sample& s, const TrimmedSets& sets, double floor) {
    LateMoments m = late_moments(s, sets);
    check_masses(m, floor);
    LateVariance v;
    Eigen::MatrixXd centred = m.X.rowwise() - m.X.colwise().mean();
    v.Sigma = (centred.transpose() * centred) / static_cast<double>(s.size() - (s.size() > 1 ? 1 : 0));
    v.D.setIdentity();
    v.D(0, 0) = -1.0 / (m.p1 * m.p1);
    v.D(1, 1) = -1.0 / (m.p0 * m.p0);
    v.Gamma.setZero();
    v.Gamma.topRows<2>() = gamma_star(s, sets);
    v.Gamma.bottomRows<4>().setIdentity();
    v.Pi << 1.0 / m.pi3, -1.0 / m.pi4, -m.pi1 / (m.pi3 * m.pi3), m.pi2 / (m.pi4 * m.pi4);
    Eigen::Matrix<double, 6, 1> g = v.D * v.Gamma * v.Pi;
    double q = g.dot(v.Sigma * g);
    v.sigma = std::sqrt(std::max(q, 0.0));
    return v;
}

std::vector<double> late_influence(const Sample& s, const TrimmedSets& sets) {
    LateMoments m = late_moments(s, sets);
    LateVariance v = late_variance(s, sets, 0.0);
    Eigen::Matrix<double, 6, 1> g = v.D * v.Gamma * v.Pi;
    Eigen::RowVectorXd mean = m.X.colwise().mean();
    std::vector<double> psi(s.size());
    for (Eigen::Index i = 0; i < m.X.rows(); ++i) psi[static_cast<std::size_t>(i)] = (m.X.row(i) - mean).dot(g.transpose());
    return psi;
}

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

LateEstimate late_ci(const Sample& s, const TrimmedSets& sets, double alpha, double floor) {
    LateEstimate out = estimate_late(s, sets, floor);
    LateVariance v = late_variance(s, sets, floor);
    out.alpha = alpha;
    out.sigma = v.sigma;
    out.se = v.sigma / std::sqrt(static_cast<double>(s.size()));
    double z = normal_quantile(1.0 - alpha / 2.0);
    out.ci_lo = out.estimate - z * out.se;
    out.ci_hi = out.estimate + z * out.se;
    return out;
}

json UnionCI::to_json() const {
    json members_j = json::array();
    for (const auto& m : members) {
        json e{{"tails", m.tails.str()}, {"feasible", m.feasible}};
        if (m.feasible) e["result"] = m.est.to_json();
        members_j.push_back(e);
    }
    return json{{"ci", {lo, hi}}, {"feasible_conditions", feasible}, {"conditions", members_j}};
}

UnionCI conservative_union_ci(const Sample& s, const DensityEstimate& est, double b,
                              double band_lo, double band_hi, double alpha, double floor) {
    UnionCI out;
    out.lo = kInf;
    out.hi = -kInf;
    for (int code = 0; code < 16; ++code) {
        UnionMember m;
        m.tails = TailSpec::from_code(code);
        TrimmedSets sets = estimate_trimmed_sets(est, m.tails, b, band_lo, band_hi);
        try {
            m.est = late_ci(s, sets, alpha, floor);
            m.feasible = true;
            ++out.feasible;
            out.lo = std::min(out.lo, m.est.ci_lo);
            out.hi = std::max(out.hi, m.est.ci_hi);
        } catch (const WeakIdentification&) {
            m.feasible = false;
        }
        out.members.push_back(std::move(m));
    }
    if (out.feasible == 0)
        throw WeakIdentification("weak identification under all 16 tail conditions", 0.0);
    return out;
}

LatePointResult late_point(const Sample& s, const RunConfig& cfg, const Kernel& k) {
    LatePointResult r;
    r.density = estimate_density_diff(s, k, cfg.h, default_grid(cfg.band_lo, cfg.band_hi, k, cfg.h));
    r.diagnostic = check_iam_implication(r.density, cfg.b);
    r.sets = estimate_trimmed_sets(r.density, cfg.tails, cfg.b, cfg.band_lo, cfg.band_hi);
    r.est = late_ci(s, r.sets, cfg.alpha);
    return r;
}

json WaldEstimate::to_json() const {
    return json{{"estimate", estimate}, {"first_stage", first_stage}, {"reduced_form", reduced_form},
                {"se", se}, {"ci", {ci_lo, ci_hi}}, {"n", n}};
}

WaldEstimate wald_estimate(const Sample& s, double alpha, double floor) {
    s.validate();
    const std::size_t n = s.size();
    double n1 = 0, y1 = 0, y0 = 0, d1 = 0, d0 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (s.z[i]) {
            ++n1;
            y1 += s.y[i];
            d1 += s.d[i];
        } else {
            y0 += s.y[i];
            d0 += s.d[i];
        }
    }
    const double n0 = static_cast<double>(n) - n1;
    WaldEstimate w;
    w.n = n;
    w.reduced_form = y1 / n1 - y0 / n0;
    w.first_stage = d1 / n1 - d0 / n0;
    if (std::abs(w.first_stage) < floor)
        throw WeakIdentification("first stage E[D|Z=1] - E[D|Z=0] is below the floor", w.first_stage);
    w.estimate = w.reduced_form / w.first_stage;
    const double p = n1 / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = s.y[i] - w.estimate * s.d[i];
        double c = s.z[i] ? (e - (y1 - w.estimate * d1) / n1) / p : -(e - (y0 - w.estimate * d0) / n0) / (1.0 - p);
        ss += c * c;
    }
    w.se = std::sqrt(ss / static_cast<double>(n)) / std::abs(w.first_stage) / std::sqrt(static_cast<double>(n));
    const double zq = normal_quantile(1.0 - alpha / 2.0);
    w.ci_lo = w.estimate - zq * w.se;
    w.ci_hi = w.estimate + zq * w.se;
    return w;
}

}  // namespace refute
