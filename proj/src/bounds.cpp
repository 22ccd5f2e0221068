#include "refute/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "refute/errors.hpp"
#include "refute/parallel.hpp"

namespace refute {

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Below: return "below";
        case Regime::Point: return "point";
        case Regime::Above: return "above";
    }
    return "?";
}

json DeltaEstimate::to_json() const {
    return json{{"delta", delta},   {"complier_mass_1", mass1}, {"complier_mass_0", mass0},
                {"kappa", kappa},   {"regime", regime_name(regime)},
                {"near_boundary", near_boundary}};
}

DeltaEstimate estimate_delta(const Sample& s, const TrimmedSets& sets, double kappa) {
    LateMoments m = late_moments(s, sets);
    DeltaEstimate out;
    out.mass1 = m.pi3;
    out.mass0 = m.pi4;
    out.delta = m.pi3 - m.pi4;
    out.kappa = kappa;
    if (out.delta < -kappa) out.regime = Regime::Below;
    else if (out.delta > kappa) out.regime = Regime::Above;
    else out.regime = Regime::Point;
    double a = std::abs(out.delta);
    out.near_boundary = a >= kappa && a <= 2.0 * kappa;
    return out;
}

Correction correction_for(Regime regime, Side side) {
    if (regime == Regime::Point) throw ConfigError("threshold estimation needs a bound regime");
    Correction c;
    c.d = regime == Regime::Below ? 1 : 0;
    // d=1: small Y(1) values lower the bound; d=0: large Y(0) values lower it
    bool small = (c.d == 1) == (side == Side::Lower);
    c.direction = small ? 1 : -1;
    return c;
}

json ThresholdEstimate::to_json() const {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); };
    return json{{"t", num(t)},
                {"criterion", criterion},
                {"target", target},
                {"collected", collected},
                {"available", available},
                {"collect", direction > 0 ? "y<=t" : "y>=t"},
                {"multiplicity", multiplicity},
                {"saturated", saturated}};
}

namespace {

struct Arms {
    double a1 = 0.0, a0 = 0.0;
    double a(int z) const { return z == 1 ? a1 : a0; }
};

Arms arms(const Sample& s) {
    Arms a;
    for (int z : s.z) a.a1 += z;
    a.a1 /= static_cast<double>(s.size());
    a.a0 = 1.0 - a.a1;
    return a;
}

bool in_region(double y, int direction, double t) { return direction > 0 ? y <= t : y >= t; }

}  // namespace

std::vector<double> correction_weights(const Sample& s, const TrimmedSets& sets, int d) {
    const Arms a = arms(s);
    const int o = 1 - d;
    std::vector<double> w(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.d[i] != d) continue;
        bool in = sets.set(d).contains(s.y[i]);
        if (s.z[i] == d && !in) w[i] = 1.0 / a.a(d);
        else if (s.z[i] == o && in) w[i] = 1.0 / a.a(o);
    }
    return w;
}

ThresholdEstimate estimate_threshold(const Sample& s, const TrimmedSets& sets,
                                     const DeltaEstimate& delta, Side side) {
    const Correction c = correction_for(delta.regime, side);
    const std::vector<double> w = correction_weights(s, sets, c.d);
    const double n = static_cast<double>(s.size());
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return c.direction > 0 ? s.y[i] < s.y[j] : s.y[i] > s.y[j];
    });

    ThresholdEstimate out;
    out.direction = c.direction;
    out.target = std::abs(delta.delta);
    out.available = std::accumulate(w.begin(), w.end(), 0.0) / n;
    out.saturated = out.target > out.available + 1e-12;

    double mass = 0.0;
    out.t = c.direction > 0 ? -kInf : kInf;
    out.collected = 0.0;
    out.criterion = out.target * out.target;
    std::size_t k = 0;
    while (k < order.size()) {
        const double yk = s.y[order[k]];
        while (k < order.size() && s.y[order[k]] == yk) mass += w[order[k++]] / n;
        const double crit = (mass - out.target) * (mass - out.target);
        const double tol = 1e-15 * std::max(1.0, out.criterion);
        if (crit < out.criterion - tol) {
            out.criterion = crit;
            out.t = yk;
            out.collected = mass;
            out.multiplicity = false;
        } else if (std::abs(crit - out.criterion) <= tol && std::abs(mass - out.collected) > 1e-15) {
            // distinct mass level at the same distance: keep the smaller threshold
            out.multiplicity = true;
            if (yk < out.t) {
                out.t = yk;
                out.collected = mass;
            }
        }
    }
    return out;
}

json BoundSide::to_json() const {
    return json{{"value", value}, {"threshold", threshold.to_json()}, {"sigma", sigma},
                {"se", se},       {"variance_unstable", unstable}};
}

json BoundEstimate::to_json() const {
    return json{{"regime", regime_name(regime)}, {"lower", lower.to_json()},
                {"upper", upper.to_json()},      {"ci", {ci_lo, ci_hi}},
                {"alpha", alpha},                {"n", n}};
}

namespace {

constexpr int kRaw = 14;

// Raw per-observation moments; see bound_variance for the layout.
Eigen::MatrixXd raw_moments(const Sample& s, const TrimmedSets& sets, int d, int direction, double t) {
    const int o = 1 - d;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.size()), kRaw);
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto r = static_cast<Eigen::Index>(i);
        const double y = s.y[i];
        const int di = s.d[i], zi = s.z[i];
        X(r, zi == 1 ? 0 : 1) = 1.0;
        const bool in1 = sets.y1.contains(y), in0 = sets.y0.contains(y);
        if (di == 1 && in1) {
            X(r, zi == 1 ? 2 : 3) = y;
            X(r, zi == 1 ? 4 : 5) = 1.0;
        }
        if (di == 0 && in0) {
            X(r, zi == 0 ? 6 : 7) = y;
            X(r, zi == 0 ? 8 : 9) = 1.0;
        }
        if (di == d && in_region(y, direction, t)) {
            const bool in = sets.set(d).contains(y);
            if (zi == d && !in) {
                X(r, 10) = y;
                X(r, 12) = 1.0;
            } else if (zi == o && in) {
                X(r, 11) = y;
                X(r, 13) = 1.0;
            }
        }
    }
    return X;
}

struct Intermediates {
    double Nd, K, No, Mo, KM, Md, bound;
    Eigen::MatrixXd J;  // 6 x 14 Jacobian, rows (N_d, K, N_o, M_o, KM, M_d)
};

Intermediates intermediates(const Eigen::RowVectorXd& m, int d) {
    const int o = 1 - d;
    const double a1 = m(0), a0 = m(1);
    auto a = [&](int z) { return z == 1 ? a1 : a0; };
    auto acol = [](int z) { return z == 1 ? 0 : 1; };
    Intermediates r;
    r.J = Eigen::MatrixXd::Zero(6, kRaw);
    // adds sign * x/a_z to row, with its derivatives
    auto term = [&](int row, int xcol, int z, double sign) {
        double x = m(xcol), az = a(z);
        r.J(row, xcol) += sign / az;
        r.J(row, acol(z)) += -sign * x / (az * az);
        return sign * x / az;
    };
    // N_1 = A11/a1 - A10/a0, M_1 = B11/a1 - B10/a0, N_0 = A00/a0 - A01/a1, M_0 = B00/a0 - B01/a1
    const int rowNd = 0, rowK = 1, rowNo = 2, rowMo = 3, rowKM = 4, rowMd = 5;
    auto N = [&](int side, int row) {
        return side == 1 ? term(row, 2, 1, 1.0) + term(row, 3, 0, -1.0)
                         : term(row, 6, 0, 1.0) + term(row, 7, 1, -1.0);
    };
    auto M = [&](int side, int row) {
        return side == 1 ? term(row, 4, 1, 1.0) + term(row, 5, 0, -1.0)
                         : term(row, 8, 0, 1.0) + term(row, 9, 1, -1.0);
    };
    r.Nd = N(d, rowNd);
    r.No = N(o, rowNo);
    r.Mo = M(o, rowMo);
    r.Md = M(d, rowMd);
    r.K = term(rowK, 10, d, 1.0) + term(rowK, 11, o, 1.0);
    r.KM = term(rowKM, 12, d, 1.0) + term(rowKM, 13, o, 1.0);
    const double sd = d == 1 ? 1.0 : -1.0;
    r.bound = sd * (r.Nd + r.K - r.No) / r.Mo;
    return r;
}

Eigen::RowVectorXd gamma_row(const Intermediates& im, int d) {
    const double sd = d == 1 ? 1.0 : -1.0;
    Eigen::RowVectorXd g(6);
    g << sd / im.Mo, sd / im.Mo, -sd / im.Mo, -im.bound / im.Mo, 0.0, 0.0;
    return g;
}

// effect of the estimated threshold: dK/dt * dt/dtheta with h = KM - (M_o - M_d)
Eigen::MatrixXd threshold_effect(const Intermediates& im, double t, int direction, double v) {
    Eigen::MatrixXd M2 = Eigen::MatrixXd::Zero(6, kRaw);
    if (!std::isfinite(t)) return M2;
    Eigen::RowVectorXd grad_h = im.J.row(4) - im.J.row(3) + im.J.row(5);
    double dK_dt = direction * t * v;
    double dh_dt = direction * v;
    if (v > 0.0) M2.row(1) = dK_dt * (-grad_h / dh_dt);
    else M2.row(1) = -t * grad_h;  // limit of the ratio
    return M2;
}

}  // namespace

double bound_at(const Sample& s, const TrimmedSets& sets, int d, int direction, double t) {
    Eigen::MatrixXd X = raw_moments(s, sets, d, direction, t);
    Eigen::RowVectorXd m = X.colwise().mean();
    return intermediates(m, d).bound;
}

BoundVariance bound_variance(const Sample& s, const TrimmedSets& sets, const ThresholdEstimate& th,
                             int d, const Kernel& k, double h) {
    Eigen::MatrixXd X = raw_moments(s, sets, d, th.direction, th.t);
    Eigen::RowVectorXd m = X.colwise().mean();
    Intermediates im = intermediates(m, d);

    BoundVariance out;
    if (std::isfinite(th.t)) {
        const std::vector<double> w = correction_weights(s, sets, d);
        double acc = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i)
            if (w[i] != 0.0) acc += w[i] * k((s.y[i] - th.t) / h);
        out.v = acc / (static_cast<double>(s.size()) * h);
    }
    out.unstable = !std::isfinite(th.t) || out.v < 1e-6;
    Eigen::MatrixXd centred = X.rowwise() - m;
    out.Sigma = centred.transpose() * centred / static_cast<double>(std::max<std::size_t>(s.size() - 1, 1));
    out.Gamma = gamma_row(im, d);
    out.M1 = im.J;
    out.M2 = threshold_effect(im, th.t, th.direction, out.v);
    Eigen::RowVectorXd g = out.Gamma * (out.M1 + out.M2);
    out.sigma = std::sqrt(std::max(0.0, (g * out.Sigma * g.transpose())(0, 0)));
    return out;
}

std::vector<double> bound_influence(const Sample& s, const TrimmedSets& sets,
                                    const ThresholdEstimate& th, int d) {
    Eigen::MatrixXd X = raw_moments(s, sets, d, th.direction, th.t);
    Eigen::RowVectorXd m = X.colwise().mean();
    Intermediates im = intermediates(m, d);
    Eigen::RowVectorXd g = gamma_row(im, d) * (im.J + threshold_effect(im, th.t, th.direction, 0.0));
    std::vector<double> psi(s.size());
    for (Eigen::Index i = 0; i < X.rows(); ++i) psi[static_cast<std::size_t>(i)] = (X.row(i) - m).dot(g);
    return psi;
}

BoundEstimate estimate_bounds(const Sample& s, const TrimmedSets& sets, const DeltaEstimate& delta,
                              double alpha, const Kernel& k, double h, double floor) {
    BoundEstimate out;
    out.regime = delta.regime;
    out.alpha = alpha;
    out.n = s.size();
    const double z = normal_quantile(1.0 - alpha / 2.0);
    const double rn = std::sqrt(static_cast<double>(s.size()));
    if (delta.regime == Regime::Point) {
        LateEstimate e = late_ci(s, sets, alpha, floor);
        for (BoundSide* b : {&out.lower, &out.upper}) {
            b->value = e.estimate;
            b->sigma = e.sigma;
            b->se = e.se;
        }
        out.ci_lo = e.ci_lo;
        out.ci_hi = e.ci_hi;
        return out;
    }
    const double Mo = std::max(delta.mass1, delta.mass0);
    if (!(Mo > floor)) throw WeakIdentification("weak identification: largest complier mass is " + std::to_string(Mo), Mo);
    for (Side side : {Side::Lower, Side::Upper}) {
        Correction c = correction_for(delta.regime, side);
        BoundSide& b = side == Side::Lower ? out.lower : out.upper;
        b.threshold = estimate_threshold(s, sets, delta, side);
        b.value = bound_at(s, sets, c.d, c.direction, b.threshold.t);
        BoundVariance v = bound_variance(s, sets, b.threshold, c.d, k, h);
        b.sigma = v.sigma;
        b.se = v.sigma / rn;
        b.unstable = v.unstable;
    }
    out.ci_lo = out.lower.value - z * out.lower.se;
    out.ci_hi = out.upper.value + z * out.upper.se;
    return out;
}

BootstrapInterval bootstrap_bound(const Sample& s, const TrimmedSets& sets, Regime regime, Side side,
                                  double alpha, int B, std::uint64_t seed, unsigned threads) {
    if (regime == Regime::Point) throw ConfigError("bootstrap of a bound needs a bound regime");
    const Correction c = correction_for(regime, side);
    std::vector<double> vals(static_cast<std::size_t>(B), std::nan(""));
    parallel_for(vals.size(), threads, [&](std::size_t b) {
        std::mt19937_64 rng(derive_seed(seed, b));
        std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
        Sample r;
        r.y.resize(s.size());
        r.d.resize(s.size());
        r.z.resize(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            std::size_t j = pick(rng);
            r.y[i] = s.y[j];
            r.d[i] = s.d[j];
            r.z[i] = s.z[j];
        }
        try {
            DeltaEstimate dlt = estimate_delta(r, sets, 0.0);
            dlt.regime = regime;
            ThresholdEstimate th = estimate_threshold(r, sets, dlt, side);
            vals[b] = bound_at(r, sets, c.d, c.direction, th.t);
        } catch (const Error&) {
        }
    });
    std::erase_if(vals, [](double v) { return !std::isfinite(v); });
    BootstrapInterval out;
    out.replications = static_cast<int>(vals.size());
    if (vals.empty()) throw WeakIdentification("bootstrap produced no finite bound", 0.0);
    out.lo = quantile(vals, alpha / 2.0);
    out.hi = quantile(vals, 1.0 - alpha / 2.0);
    return out;
}

}  // namespace refute
