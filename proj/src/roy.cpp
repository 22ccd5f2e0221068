#include "refute/roy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "refute/errors.hpp"
#include "refute/parallel.hpp"

namespace refute {

double RoyDistribution::pz(int z) const {
    double s = 0.0;
    for (int y = 0; y < 2; ++y)
        for (int d = 0; d < 2; ++d) s += (*this)(y, d, z);
    return s;
}

double RoyDistribution::py_z(int y, int z) const { return (*this)(y, 0, z) + (*this)(y, 1, z); }

void RoyDistribution::validate() const {
    double total = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0) throw DataError("cell probabilities must be finite and nonnegative");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DataError("cell probabilities sum to " + std::to_string(total));
    double p1 = pz(1);
    if (!(p1 > 0.0 && p1 < 1.0)) throw DataError("Pr(Z=1) must lie in (0,1)");
}

RoyDistribution RoyDistribution::from_sample(const Sample& s) {
    s.validate();
    RoyDistribution f;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double y = s.y[i];
        if (y != 0.0 && y != 1.0)
            throw DataError("row " + std::to_string(i + 1) + ": outcome must be 0 or 1 for the Roy model");
        f(static_cast<int>(y), s.d[i], s.z[i]) += 1.0;
    }
    for (double& v : f.p) v /= static_cast<double>(s.size());
    double total = 0.0;
    for (double v : f.p) total += v;
    f.p[7] += 1.0 - total;  // absorb rounding so the sum check is exact
    f.validate();
    return f;
}

RoyDistribution RoyDistribution::parse(const std::string& cells) {
    RoyDistribution f;
    std::stringstream ss(cells);
    std::string tok;
    std::size_t k = 0;
    while (std::getline(ss, tok, ',')) {
        if (k >= 8) throw DataError("expected 8 cell probabilities");
        try {
            std::size_t used = 0;
            f.p[k] = std::stod(tok, &used);
            if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw DataError("cell " + std::to_string(k + 1) + ": cannot parse '" + tok + "'");
        }
        ++k;
    }
    if (k != 8) throw DataError("expected 8 cell probabilities, got " + std::to_string(k));
    f.validate();
    return f;
}

json RoyDistribution::to_json() const {
    json j = json::object();
    for (int y = 0; y < 2; ++y)
        for (int d = 0; d < 2; ++d)
            for (int z = 0; z < 2; ++z)
                j["p" + std::to_string(y) + std::to_string(d) + std::to_string(z)] = (*this)(y, d, z);
    return j;
}

RoyRefutability check_roy_refutable(const RoyDistribution& f) {
    RoyRefutability r;
    double c1 = f.py_z(0, 1) / f.pz(1), c0 = f.py_z(0, 0) / f.pz(0);
    r.slack = c0 - c1;
    r.rejected = c1 > c0;
    return r;
}

double min_efficiency_loss(const RoyDistribution& f) {
    double p0 = f.pz(0);
    if (!(p0 > 0.0)) throw DataError("Pr(Z=0) must be positive");
    return std::max(f.py_z(0, 1) - f.py_z(0, 0) * f.pz(1) / p0, 0.0);
}

double min_efficiency_loss_lp(const RoyDistribution& f) {
    if (!(f.pz(0) > 0.0)) throw DataError("Pr(Z=0) must be positive");
    // x0 = C_1^{011}, x1 = C_0^{101}
    LinearProgram lp(2);
    lp.c << 1.0, 1.0;
    Eigen::RowVector2d e0(1.0, 0.0), e1(0.0, 1.0), both(1.0, 1.0);
    lp.add_le(e0, f(0, 1, 1));
    lp.add_le(e1, f(0, 0, 1));
    lp.add_le(-both, -(f.py_z(0, 1) - f.py_z(0, 0) * f.pz(1) / f.pz(0)));
    LpResult r = solve_lp(lp);
    if (r.status != LpStatus::Optimal) throw ConsistencyError("efficiency-loss LP is " + lp_status_name(r.status));
    return r.value;
}

std::string roy_var_name(int index) {
    int z = index & 1, k = (index >> 1) & 1, y = (index >> 2) & 1, d = (index >> 3) & 1;
    return "C" + std::to_string(d) + "^" + std::to_string(y) + std::to_string(k) + std::to_string(z);
}

namespace {

Eigen::RowVectorXd unit16(std::initializer_list<int> idx, double v = 1.0) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(16);
    for (int i : idx) r(i) += v;
    return r;
}

// Observational matching: Pr(Y=y,D=1,Z=z) = C_1^{y0z} + C_1^{y1z}, Pr(Y=y,D=0,Z=z) = C_0^{0yz} + C_0^{1yz}.
void add_matching(LinearProgram& lp, const RoyDistribution& f) {
    for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 2; ++y) {
            lp.add_eq(unit16({roy_var(1, y, 0, z), roy_var(1, y, 1, z)}), f(y, 1, z));
            lp.add_eq(unit16({roy_var(0, 0, y, z), roy_var(0, 1, y, z)}), f(y, 0, z));
        }
}

Eigen::RowVectorXd q_row(int y, int k, int z, double scale) {
    return unit16({roy_var(1, y, k, z), roy_var(0, y, k, z)}, scale);
}

}  // namespace

double min_efficiency_loss_full_lp(const RoyDistribution& f) {
    f.validate();
    const double p1 = f.pz(1), p0 = f.pz(0);
    LinearProgram lp(16);
    add_matching(lp, f);
    lp.add_le(q_row(1, 1, 0, 1.0 / p0) - q_row(1, 1, 1, 1.0 / p1), 0.0);
    lp.add_le(q_row(0, 0, 1, 1.0 / p1) - q_row(0, 0, 0, 1.0 / p0), 0.0);
    lp.c = unit16({roy_var(0, 1, 0, 0), roy_var(1, 0, 1, 0), roy_var(0, 1, 0, 1), roy_var(1, 0, 1, 1)}).transpose();
    LpResult r = solve_lp(lp);
    if (r.status != LpStatus::Optimal) throw ConsistencyError("efficiency-loss LP is " + lp_status_name(r.status));
    return r.value;
}

RoyPolyhedron build_polyhedron(const RoyDistribution& f) {
    f.validate();
    RoyPolyhedron poly;
    poly.f = f;
    poly.m_el = min_efficiency_loss(f);
    const double p1 = f.pz(1), p0 = f.pz(0);
    LinearProgram& lp = poly.lp;
    add_matching(lp, f);
    lp.add_eq(unit16({roy_var(1, 0, 1, 0)}), 0.0);
    lp.add_eq(unit16({roy_var(0, 1, 0, 0)}), 0.0);
    lp.add_eq(unit16({roy_var(0, 1, 0, 1), roy_var(1, 0, 1, 1)}), poly.m_el);
    lp.add_le(q_row(1, 1, 0, 1.0 / p0) - q_row(1, 1, 1, 1.0 / p1), 0.0);

    LinearProgram probe = lp;
    LpResult r = solve_lp(probe);
    if (r.status != LpStatus::Optimal) {
        std::ostringstream msg;
        msg << "Roy polyhedron is " << lp_status_name(r.status) << " for cells " << f.to_json().dump();
        throw ConsistencyError(msg.str());
    }
    return poly;
}

RoyOptimum optimize_functional(const RoyPolyhedron& poly, const Eigen::VectorXd& objective, LpSense sense) {
    if (objective.size() != 16) throw ConfigError("Roy objective needs 16 coefficients");
    LinearProgram lp = poly.lp;
    lp.c = objective;
    lp.sense = sense;
    LpResult r = solve_lp(lp);
    if (r.status == LpStatus::Unbounded) throw ConsistencyError("Roy functional is unbounded");
    if (r.status != LpStatus::Optimal) throw ConsistencyError("Roy polyhedron is infeasible");
    RoyOptimum out;
    out.value = r.value;
    out.x = r.x;
    out.residual = lp.residual(r.x);
    if (out.residual > 1e-9)
        throw ConsistencyError("LP vertex violates constraints by " + std::to_string(out.residual));
    return out;
}

Eigen::VectorXd y1_functional(const RoyDistribution& f, int z) {
    return unit16({roy_var(1, 1, 1, z), roy_var(0, 1, 1, z), roy_var(1, 1, 0, z), roy_var(0, 1, 0, z)},
                  1.0 / f.pz(z))
        .transpose();
}

std::array<Bounds2, 2> sharp_y1_bounds(const RoyDistribution& f) {
    const double m = min_efficiency_loss(f);
    const double p1 = f.pz(1), p0 = f.pz(0);
    std::array<Bounds2, 2> b;
    // z = 1: the loss C_0^{101} counts toward Y(1)=1 and is capped by the D=0, Y=0 cell
    b[1].lo = (f(1, 1, 1) + std::max(0.0, m - f(0, 1, 1))) / p1;
    b[1].hi = (f.py_z(1, 1) + std::min(m, f(0, 0, 1))) / p1;
    // z = 0: Y(1)=1 among D=0 is capped by the dominance condition
    b[0].lo = f(1, 1, 0) / p0;
    b[0].hi = (f(1, 1, 0) + std::min(f(1, 0, 0), p0 / p1 * f.py_z(1, 1))) / p0;
    return b;
}

std::array<Bounds2, 2> simple_y1_bounds(const RoyDistribution& f) {
    const double m = min_efficiency_loss(f);
    std::array<Bounds2, 2> b;
    for (int z = 0; z < 2; ++z) {
        b[static_cast<std::size_t>(z)].lo = f(1, 1, z) / f.pz(z);
        b[static_cast<std::size_t>(z)].hi = f.py_z(1, z) / f.pz(z);
    }
    b[1].hi += m / f.pz(1);
    return b;
}

json PotentialOutcomeBounds::to_json() const {
    auto arr = [](const std::array<Bounds2, 2>& b) {
        return json{{"z0", {b[0].lo, b[0].hi}}, {"z1", {b[1].lo, b[1].hi}}};
    };
    return json{{"m_el_min", m_el}, {"sharp", arr(sharp)}, {"lp", arr(lp)}, {"simple", arr(simple)}};
}

PotentialOutcomeBounds potential_outcome_bounds(const RoyDistribution& f, double tol) {
    RoyPolyhedron poly = build_polyhedron(f);
    PotentialOutcomeBounds out;
    out.m_el = poly.m_el;
    out.sharp = sharp_y1_bounds(f);
    out.simple = simple_y1_bounds(f);
    for (int z = 0; z < 2; ++z) {
        Eigen::VectorXd c = y1_functional(f, z);
        auto& b = out.lp[static_cast<std::size_t>(z)];
        b.lo = optimize_functional(poly, c, LpSense::Minimize).value;
        b.hi = optimize_functional(poly, c, LpSense::Maximize).value;
        const auto& s = out.sharp[static_cast<std::size_t>(z)];
        if (std::abs(b.lo - s.lo) > tol || std::abs(b.hi - s.hi) > tol) {
            std::ostringstream msg;
            msg.precision(12);
            msg << "closed-form Y(1) bounds disagree with the LP at z=" << z << ": [" << s.lo << ", " << s.hi
                << "] vs [" << b.lo << ", " << b.hi << "]";
            throw ConsistencyError(msg.str());
        }
    }
    return out;
}

json RoyBootstrap::to_json() const {
    auto iv = [](const Bounds2& b) { return json::array({b.lo, b.hi}); };
    return json{{"replications", replications},
                {"m_el_min", {min_el_lo, min_el_hi}},
                {"z0", {{"lower_bound", iv(lo_ci[0])}, {"upper_bound", iv(hi_ci[0])}}},
                {"z1", {{"lower_bound", iv(lo_ci[1])}, {"upper_bound", iv(hi_ci[1])}}}};
}

RoyBootstrap roy_bootstrap(const Sample& s, double alpha, int B, std::uint64_t seed, unsigned threads) {
    RoyDistribution::from_sample(s);  // rejects non-binary outcomes
    struct Draw {
        bool ok = false;
        std::array<Bounds2, 2> b;
        double m = 0.0;
    };
    std::vector<Draw> draws(static_cast<std::size_t>(B));
    parallel_for(draws.size(), threads, [&](std::size_t k) {
        std::mt19937_64 rng(derive_seed(seed, k));
        std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
        RoyDistribution f;
        for (std::size_t i = 0; i < s.size(); ++i) {
            std::size_t j = pick(rng);
            f(static_cast<int>(s.y[j]), s.d[j], s.z[j]) += 1.0 / static_cast<double>(s.size());
        }
        if (!(f.pz(1) > 0.0 && f.pz(0) > 0.0)) return;
        draws[k].ok = true;
        draws[k].b = sharp_y1_bounds(f);
        draws[k].m = min_efficiency_loss(f);
    });
    RoyBootstrap out;
    std::vector<double> m;
    std::array<std::vector<double>, 4> v;
    for (const auto& d : draws) {
        if (!d.ok) continue;
        m.push_back(d.m);
        for (int z = 0; z < 2; ++z) {
            v[static_cast<std::size_t>(2 * z)].push_back(d.b[static_cast<std::size_t>(z)].lo);
            v[static_cast<std::size_t>(2 * z + 1)].push_back(d.b[static_cast<std::size_t>(z)].hi);
        }
    }
    out.replications = static_cast<int>(m.size());
    if (m.empty()) throw DataError("bootstrap produced no replication with both instrument arms");
    out.min_el_lo = quantile(m, alpha / 2.0);
    out.min_el_hi = quantile(m, 1.0 - alpha / 2.0);
    for (int z = 0; z < 2; ++z) {
        auto zi = static_cast<std::size_t>(z);
        out.lo_ci[zi] = {quantile(v[2 * zi], alpha / 2.0), quantile(v[2 * zi], 1.0 - alpha / 2.0)};
        out.hi_ci[zi] = {quantile(v[2 * zi + 1], alpha / 2.0), quantile(v[2 * zi + 1], 1.0 - alpha / 2.0)};
    }
    return out;
}

}  // namespace refute
