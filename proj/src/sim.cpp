#include "refute/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "refute/errors.hpp"
#include "refute/late.hpp"
#include "refute/parallel.hpp"

namespace refute {

namespace {

double normal_pdf(double y, double mean, double sd) {
    double u = (y - mean) / sd;
    return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double integrate(const std::function<double(double)>& f, double a, double b) {
    if (!(a < b)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

}  // namespace

double SimDesign::sub_density(int d, int z, double y) const {
    double s = 0.0;
    for (const auto& g : cell(d, z)) s += g.weight * normal_pdf(y, g.mean, g.sd);
    return s;
}

double SimDesign::cell_mass(int d, int z) const {
    double s = 0.0;
    for (const auto& g : cell(d, z)) s += g.weight;
    return s;
}

double SimDesign::diff(int d, double y) const {
    return d == 1 ? sub_density(1, 1, y) - sub_density(1, 0, y)
                  : sub_density(0, 0, y) - sub_density(0, 1, y);
}

void SimDesign::validate() const {
    if (!(prZ1 > 0.0 && prZ1 < 1.0)) throw ConfigError("design Pr(Z=1) must lie in (0,1)");
    for (const auto& c : cells)
        for (const auto& g : c)
            if (!(g.weight >= 0.0) || !(g.sd > 0.0)) throw ConfigError("invalid mixture component");
    double lo = kInf, hi = -kInf;
    for (const auto& c : cells)
        for (const auto& g : c) {
            lo = std::min(lo, g.mean - 40.0 * g.sd);
            hi = std::max(hi, g.mean + 40.0 * g.sd);
        }
    for (int z = 0; z < 2; ++z) {
        double total = integrate([&](double y) { return sub_density(1, z, y) + sub_density(0, z, y); }, lo, hi);
        if (std::abs(total - 1.0) > 1e-6)
            throw ConfigError("design arm z=" + std::to_string(z) + " integrates to " + std::to_string(total));
    }
}

SimDesign SimDesign::swapped() const {
    // f(y,1) = p1 - q1 and f(y,0) = q0 - p0: exchanging d and z labels maps one side onto the other
    SimDesign out = *this;
    out.name = name + "-swapped";
    out.prZ1 = 1.0 - prZ1;
    for (int d = 0; d < 2; ++d)
        for (int z = 0; z < 2; ++z) out.cell(1 - d, 1 - z) = cell(d, z);
    std::swap(out.tails.upper[0], out.tails.upper[1]);
    std::swap(out.tails.lower[0], out.tails.lower[1]);
    return out;
}

SimDesign builtin_design(const std::string& name) {
    SimDesign d;
    d.name = name;
    d.prZ1 = 0.6;
    d.band_lo = -2.5;
    d.band_hi = 7.0;
    d.tails.upper = {true, false};  // index d: Y_0 has both tails, Y_1 none
    d.tails.lower = {true, false};
    const double sq = std::sqrt(3.0);
    if (name == "normal-mix") {
        d.cell(1, 1) = {{0.5, 3.0, 1.0}};
        d.cell(0, 1) = {{0.5, 3.0, 1.0}};
        d.cell(1, 0) = {{0.5, 2.5, sq}};
        d.cell(0, 0) = {{0.5, 2.5, sq}};
    } else if (name == "gap-below") {
        d.cell(1, 1) = {{0.4, 3.0, 1.0}};
        d.cell(0, 1) = {{0.6, 3.0, 1.0}};
        d.cell(1, 0) = {{0.5, 2.5, sq}};
        d.cell(0, 0) = {{0.5, 2.5, sq}};
    } else {
        throw ConfigError("unknown builtin design '" + name + "'");
    }
    return d;
}

namespace {
std::string cell_key(int d, int z) { return "d" + std::to_string(d) + "z" + std::to_string(z); }
}  // namespace

SimDesign SimDesign::from_json(const json& j) {
    SimDesign d;
    try {
        d.name = j.value("name", std::string("custom"));
        d.prZ1 = j.at("prZ1").get<double>();
        if (j.contains("band")) {
            d.band_lo = j.at("band").at(0).get<double>();
            d.band_hi = j.at("band").at(1).get<double>();
        }
        if (j.contains("tails")) d.tails = TailSpec::parse(j.at("tails").get<std::string>());
        for (int dd = 0; dd < 2; ++dd)
            for (int z = 0; z < 2; ++z)
                for (const auto& g : j.at("cells").at(cell_key(dd, z)))
                    d.cell(dd, z).push_back({g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>()});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed design: ") + e.what());
    }
    d.validate();
    return d;
}

json SimDesign::to_json() const {
    json cj = json::object();
    for (int dd = 0; dd < 2; ++dd)
        for (int z = 0; z < 2; ++z) {
            json arr = json::array();
            for (const auto& g : cell(dd, z)) arr.push_back({g.weight, g.mean, g.sd});
            cj[cell_key(dd, z)] = arr;
        }
    return json{{"name", name}, {"prZ1", prZ1}, {"band", {band_lo, band_hi}}, {"tails", tails.str()}, {"cells", cj}};
}

SimDesign load_design(const std::string& spec) {
    const std::string prefix = "builtin:";
    if (spec.rfind(prefix, 0) == 0) return builtin_design(spec.substr(prefix.size()));
    std::ifstream in(spec);
    if (!in) throw DataError("cannot open design file '" + spec + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("design file '" + spec + "' is not valid JSON: " + e.what());
    }
    return SimDesign::from_json(j);
}

Sample draw_sample(const SimDesign& design, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);
    Sample s;
    s.y.reserve(n);
    s.d.reserve(n);
    s.z.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        int z = unif(rng) < design.prZ1 ? 1 : 0;
        double u = unif(rng) * (design.cell_mass(1, z) + design.cell_mass(0, z));
        int d = 0;
        const Gaussian* pick = nullptr;
        for (int dd = 1; dd >= 0 && !pick; --dd)
            for (const auto& g : design.cell(dd, z)) {
                if (u < g.weight) {
                    pick = &g;
                    d = dd;
                    break;
                }
                u -= g.weight;
            }
        if (!pick) {  // rounding in the last component
            d = design.cell(0, z).empty() ? 1 : 0;
            pick = &design.cell(d, z).back();
        }
        s.y.push_back(pick->mean + pick->sd * norm(rng));
        s.d.push_back(d);
        s.z.push_back(z);
    }
    return s;
}

PopulationLate true_identified_late(const SimDesign& design, double threshold) {
    double lo = kInf, hi = -kInf;
    for (const auto& c : design.cells)
        for (const auto& g : c) {
            lo = std::min(lo, g.mean - 40.0 * g.sd);
            hi = std::max(hi, g.mean + 40.0 * g.sd);
        }
    PopulationLate out;
    for (int d = 0; d < 2; ++d) {
        auto g = [&](double y) { return design.diff(d, y) - threshold; };
        // sign changes on a fine scan, refined by bracketing root search
        const int steps = 40000;
        std::vector<double> cuts{lo};
        double prev_y = lo, prev_g = g(lo);
        for (int k = 1; k <= steps; ++k) {
            double y = lo + (hi - lo) * k / steps;
            double gy = g(y);
            if ((prev_g < 0.0) != (gy < 0.0)) {
                boost::uintmax_t iters = 200;
                auto r = boost::math::tools::toms748_solve(
                    g, prev_y, y, prev_g, gy, boost::math::tools::eps_tolerance<double>(52), iters);
                cuts.push_back(0.5 * (r.first + r.second));
            }
            prev_y = y;
            prev_g = gy;
        }
        cuts.push_back(hi);
        double mass = 0.0, numer = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            double a = cuts[k], b = cuts[k + 1];
            if (g(0.5 * (a + b)) < 0.0) continue;
            mass += integrate([&](double y) { return design.diff(d, y); }, a, b);
            numer += integrate([&](double y) { return y * design.diff(d, y); }, a, b);
        }
        (d == 1 ? out.mass1 : out.mass0) = mass;
        (d == 1 ? out.numer1 : out.numer0) = numer;
    }
    if (!(out.mass1 > kWeakIdFloor) || !(out.mass0 > kWeakIdFloor))
        throw WeakIdentification("design has no complier mass", std::min(out.mass1, out.mass0));
    out.late = out.numer1 / out.mass1 - out.numer0 / out.mass0;
    return out;
}

CoverageConfig coverage_preset(const std::string& name) {
    CoverageConfig c;
    if (name == "n1000-b0.2-h0.4") {
        c.n = 1000;
        c.bandwidth = rules::fixed(0.4);
        c.trimming = rules::rate_trimming(0.2);
    } else if (name == "n5000-b0.12-h0.2") {
        c.n = 5000;
        c.bandwidth = rules::fixed(0.2);
        c.trimming = rules::rate_trimming(0.12);
    } else if (name == "n5000-b0.135-h0.2") {
        c.n = 5000;
        c.bandwidth = rules::fixed(0.2);
        c.trimming = rules::rate_trimming(0.135);
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return c;
}

json CoverageResult::to_json(bool with_reps) const {
    json j{{"truth", truth},         {"coverage", coverage},   {"covered", covered},
           {"successful", successful}, {"failed", failed},     {"mean_estimate", mean_estimate},
           {"mc_sd", mc_sd},         {"mean_se", mean_se}};
    if (with_reps) {
        json arr = json::array();
        for (const auto& r : reps)
            arr.push_back({{"ok", r.ok}, {"estimate", r.estimate}, {"se", r.se},
                           {"ci", {r.lo, r.hi}}, {"covered", r.covered}, {"error", r.error}});
        j["replications"] = arr;
    }
    return j;
}

void CoverageResult::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    out << "rep,ok,estimate,se,lo,hi,covered\n";
    for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto& r = reps[i];
        out << i << ',' << r.ok << ',' << r.estimate << ',' << r.se << ',' << r.lo << ',' << r.hi
            << ',' << r.covered << '\n';
    }
}

CoverageResult run_coverage(const SimDesign& design, const CoverageConfig& cfg) {
    return run_coverage(design, cfg, true_identified_late(design).late);
}

CoverageResult run_coverage(const SimDesign& design, const CoverageConfig& cfg, double truth) {
    CoverageResult out;
    out.truth = truth;
    out.reps.resize(cfg.m);
    const double h = cfg.bandwidth(cfg.n);
    const double b = cfg.trimming(cfg.n);
    parallel_for(cfg.m, cfg.threads, [&](std::size_t i) {
        Replication& r = out.reps[i];
        try {
            Sample s = draw_sample(design, cfg.n, derive_seed(cfg.seed, i));
            DensityEstimate est = estimate_density_diff(
                s, cfg.kernel, h, default_grid(design.band_lo, design.band_hi, cfg.kernel, h));
            if (cfg.kind == CiKind::KnownTail) {
                TrimmedSets sets = estimate_trimmed_sets(est, design.tails, b, design.band_lo, design.band_hi);
                LateEstimate e = late_ci(s, sets, cfg.alpha);
                r.estimate = e.estimate;
                r.se = e.se;
                r.lo = e.ci_lo;
                r.hi = e.ci_hi;
            } else {
                UnionCI u = conservative_union_ci(s, est, b, design.band_lo, design.band_hi, cfg.alpha);
                const auto& own = u.members[static_cast<std::size_t>(design.tails.code())];
                r.estimate = own.feasible ? own.est.estimate : std::nan("");
                r.se = own.feasible ? own.est.se : std::nan("");
                r.lo = u.lo;
                r.hi = u.hi;
            }
            r.ok = true;
            r.covered = r.lo <= truth && truth <= r.hi;
        } catch (const Error& e) {
            r.ok = false;
            r.error = e.what();
        }
    });
    double sum = 0.0, sumsq = 0.0, sum_se = 0.0;
    std::size_t k = 0;
    for (const auto& r : out.reps) {
        if (!r.ok) {
            ++out.failed;
            continue;
        }
        ++out.successful;
        out.covered += r.covered;
        if (std::isfinite(r.estimate)) {
            sum += r.estimate;
            sumsq += r.estimate * r.estimate;
            sum_se += r.se;
            ++k;
        }
    }
    out.coverage = out.successful ? static_cast<double>(out.covered) / out.successful : 0.0;
    if (k > 0) {
        out.mean_estimate = sum / k;
        out.mean_se = sum_se / k;
        out.mc_sd = k > 1 ? std::sqrt(std::max(0.0, (sumsq - k * out.mean_estimate * out.mean_estimate) / (k - 1))) : 0.0;
    }
    return out;
}

}  // namespace refute
