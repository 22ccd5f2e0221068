#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "refute/errors.hpp"
#include "refute/late.hpp"
#include "refute/sim.hpp"

using namespace refute;

namespace {

DensityEstimate population_density(const SimDesign& des, double lo, double hi, std::size_t points = 2001) {
    DensityEstimate e;
    e.grid = linspace(lo, hi, points);
    for (double y : e.grid) {
        e.f1.push_back(des.diff(1, y));
        e.f0.push_back(des.diff(0, y));
    }
    e.h = 0.0;
    return e;
}

IntervalSet atoms_set(const std::vector<double>& ys) {
    std::vector<Interval> parts;
    for (double y : ys) parts.push_back({y, y});
    return IntervalSet(parts);
}

// identified LATE by direct summation over a finite support
struct FinitePopulation {
    std::vector<testutil::Atom> atoms;
    double late = 0.0;
    double mass1 = 0.0;
    double mass0 = 0.0;
    std::vector<double> y1, y0;
};

FinitePopulation random_population(std::mt19937_64& rng, int support) {
    std::uniform_int_distribution<int> cnt(1, 30);
    FinitePopulation pop;
    for (int k = 0; k < support; ++k) {
        double y = 0.5 * k - 1.0;
        for (int d = 0; d < 2; ++d)
            for (int z = 0; z < 2; ++z) pop.atoms.push_back({y, d, z, cnt(rng) + (d == z ? 15 : 0)});
    }
    double n1 = 0, n0 = 0;
    for (const auto& a : pop.atoms) (a.z ? n1 : n0) += a.count;
    double num1 = 0, num0 = 0;
    for (int k = 0; k < support; ++k) {
        double y = 0.5 * k - 1.0;
        auto prob = [&](int d, int z) {
            for (const auto& a : pop.atoms)
                if (a.y == y && a.d == d && a.z == z) return a.count / (z ? n1 : n0);
            return 0.0;
        };
        double g1 = prob(1, 1) - prob(1, 0);  // p(y,1) - q(y,1)
        double g0 = prob(0, 0) - prob(0, 1);  // q(y,0) - p(y,0)
        if (g1 >= 0) {
            pop.y1.push_back(y);
            num1 += y * g1;
            pop.mass1 += g1;
        }
        if (g0 >= 0) {
            pop.y0.push_back(y);
            num0 += y * g0;
            pop.mass0 += g0;
        }
    }
    pop.late = num1 / pop.mass1 - num0 / pop.mass0;
    return pop;
}

// The estimator as a smooth map of ten raw sample means, differentiated numerically.
double late_from_means(const std::array<double, 9>& m) {
    // m = (Pr(Z=1), E[Y 1(11) 1(Y1)], E[Y 1(10) 1(Y1)], E[1(11) 1(Y1)], E[1(10) 1(Y1)],
    //      E[Y 1(00) 1(Y0)], E[Y 1(01) 1(Y0)], E[1(00) 1(Y0)], E[1(01) 1(Y0)])
    const double p1 = m[0], p0 = 1.0 - m[0];
    double n1 = m[1] / p1 - m[2] / p0, d1 = m[3] / p1 - m[4] / p0;
    double n0 = m[5] / p0 - m[6] / p1, d0 = m[7] / p0 - m[8] / p1;
    return n1 / d1 - n0 / d0;
}

double delta_method_sigma(const Sample& s, const TrimmedSets& sets) {
    const std::size_t n = s.size();
    std::vector<std::array<double, 9>> rows(n);
    std::array<double, 9> mean{};
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = rows[i];
        r.fill(0.0);
        r[0] = s.z[i];
        const double y = s.y[i];
        const bool in1 = sets.y1.contains(y), in0 = sets.y0.contains(y);
        if (s.d[i] == 1 && in1) {
            r[s.z[i] ? 1 : 2] = y;
            r[s.z[i] ? 3 : 4] = 1.0;
        }
        if (s.d[i] == 0 && in0) {
            r[s.z[i] ? 6 : 5] = y;
            r[s.z[i] ? 8 : 7] = 1.0;
        }
        for (int k = 0; k < 9; ++k) mean[static_cast<std::size_t>(k)] += r[static_cast<std::size_t>(k)] / n;
    }
    std::array<double, 9> grad{};
    for (std::size_t k = 0; k < 9; ++k) {
        const double eps = 1e-6;
        auto up = mean, dn = mean;
        up[k] += eps;
        dn[k] -= eps;
        grad[k] = (late_from_means(up) - late_from_means(dn)) / (2 * eps);
    }
    double var = 0.0;
    for (const auto& r : rows) {
        double v = 0.0;
        for (std::size_t k = 0; k < 9; ++k) v += grad[k] * (r[k] - mean[k]);
        var += v * v;
    }
    return std::sqrt(var / static_cast<double>(n - 1));
}

}  // namespace

TEST_SUITE("late-point") {

TEST_CASE("testable implication diagnostic") {
    DensityEstimate flat;
    flat.grid = linspace(0, 1, 11);
    flat.f1.assign(11, 0.1);
    flat.f0.assign(11, 0.1);
    IamDiagnostic ok = check_iam_implication(flat);
    CHECK(ok.passes);
    CHECK(ok.violation_mass_1 == 0.0);
    CHECK(ok.violation_mass_0 == 0.0);

    SimDesign des = builtin_design("normal-mix");
    // p(0,1) - q(0,1) from the design's Gaussian components, written out directly
    double at0 = 0.5 * testutil::normal_pdf(0.0, 3.0, 1.0) - 0.5 * testutil::normal_pdf(0.0, 2.5, std::sqrt(3.0));
    CHECK(at0 < 0.0);
    CHECK(des.diff(1, 0.0) == doctest::Approx(at0).epsilon(1e-12));
    IamDiagnostic bad = check_iam_implication(population_density(des, -2.5, 7.0));
    CHECK_FALSE(bad.passes);
    CHECK(bad.violation_mass_1 > 0.0);

    IamDiagnostic mirror = check_iam_implication(population_density(des.swapped(), -2.5, 7.0));
    CHECK_FALSE(mirror.passes);
    CHECK(mirror.violation_mass_0 == doctest::Approx(bad.violation_mass_1).epsilon(1e-12));
    CHECK(mirror.violation_mass_1 == doctest::Approx(bad.violation_mass_0).epsilon(1e-12));

    DensityEstimate slight = flat;
    slight.f1[3] = -0.01;
    CHECK_FALSE(check_iam_implication(slight).passes);
    CHECK(check_iam_implication(slight, 0.02).passes);
}

TEST_CASE("trimmed sets on the design's population densities") {
    SimDesign des = builtin_design("normal-mix");
    DensityEstimate pop = population_density(des, -2.5, 7.0);
    TrimmedSets sets = estimate_trimmed_sets(pop, des.tails, 1e-12, -2.5, 7.0);
    // crossings of 0.5 N(3,1) and 0.5 N(2.5,3): (y-3)^2/2 - (y-2.5)^2/6 = log sqrt 3
    const double a = 1.0 / 3.0, b = -3.0 + 2.5 / 3.0, c = 4.5 - 6.25 / 6.0 - std::log(std::sqrt(3.0));
    const double r1 = (-b - std::sqrt(b * b - 4 * a * c)) / (2 * a), r2 = (-b + std::sqrt(b * b - 4 * a * c)) / (2 * a);
    REQUIRE(sets.y1.parts().size() == 1);
    CHECK(sets.y1.parts()[0].lo == doctest::Approx(r1).epsilon(1e-4));
    CHECK(sets.y1.parts()[0].hi == doctest::Approx(r2).epsilon(1e-4));
    // Y_0: both tails plus the band outside (r1, r2)
    CHECK(sets.y0.contains(-100.0));
    CHECK(sets.y0.contains(100.0));
    CHECK(sets.y0.contains(r1 - 0.01));
    CHECK_FALSE(sets.y0.contains(0.5 * (r1 + r2)));
    CHECK(sets.y0.contains(r2 + 0.01));

    TrimmedSets high = estimate_trimmed_sets(pop, des.tails, 10.0, -2.5, 7.0);
    CHECK(high.y1.empty());
    CHECK_FALSE(high.y0.contains(0.0));
    CHECK(high.y0.contains(-3.0));
    CHECK(high.y0.contains(8.0));
}

TEST_CASE("ties at the trimming level are included") {
    std::vector<double> grid = linspace(0, 1, 21), f(21, 0.3);
    IntervalSet s = super_level_set(grid, f, 0.3, 0.0, 1.0);
    CHECK(s.contains(0.0));
    CHECK(s.contains(0.5));
    CHECK(s.contains(1.0));
}

TEST_CASE("trimmed sets shrink as the level rises") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> noise(0.0, 0.2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> grid = linspace(-1, 1, 64), f;
        for (double g : grid) f.push_back(std::sin(3 * g) * 0.5 + noise(rng));
        double b1 = std::abs(noise(rng)), b2 = b1 + std::abs(noise(rng));
        IntervalSet lo = super_level_set(grid, f, b1, -0.9, 0.9), hi = super_level_set(grid, f, b2, -0.9, 0.9);
        for (double y = -0.9; y <= 0.9; y += 0.001)
            if (hi.contains(y)) CHECK(lo.contains(y));
    }
}

TEST_CASE("trimming ignores changes outside the band") {
    std::vector<double> grid = linspace(-2, 2, 81), f, g;
    for (double y : grid) {
        f.push_back(std::cos(y));
        g.push_back(std::cos(y) + (std::abs(y) > 1.5 ? 5.0 * y : 0.0));
    }
    IntervalSet a = super_level_set(grid, f, 0.6, -1.5, 1.5), b = super_level_set(grid, g, 0.6, -1.5, 1.5);
    for (double y = -1.5; y <= 1.5; y += 0.003) CHECK(a.contains(y) == b.contains(y));
}

TEST_CASE("perfect compliance with full sets is the mean difference") {
    std::mt19937_64 rng(2);
    Sample s = testutil::random_sample(rng, 500);
    s.d = s.z;
    TrimmedSets sets{IntervalSet::all(), IntervalSet::all(), 0.0};
    double m1 = 0, m0 = 0, n1 = 0, n0 = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.z[i]) m1 += s.y[i], ++n1;
        else m0 += s.y[i], ++n0;
    }
    CHECK(estimate_late(s, sets).estimate == doctest::Approx(m1 / n1 - m0 / n0).epsilon(1e-12));
    CHECK(wald_estimate(s, 0.05).estimate == doctest::Approx(m1 / n1 - m0 / n0).epsilon(1e-12));
}

TEST_CASE("finite-support populations match the identified LATE by summation") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        FinitePopulation pop = random_population(rng, 10);
        if (pop.mass1 < 1e-3 || pop.mass0 < 1e-3) continue;
        Sample s = testutil::replicate(pop.atoms);
        TrimmedSets sets{atoms_set(pop.y1), atoms_set(pop.y0), 0.0};
        LateEstimate e = estimate_late(s, sets);
        CHECK(e.estimate == doctest::Approx(pop.late).epsilon(1e-10));
        CHECK(e.mass1 == doctest::Approx(pop.mass1).epsilon(1e-10));
        CHECK(e.mass0 == doctest::Approx(pop.mass0).epsilon(1e-10));
    }
}

TEST_CASE("weak identification carries the offending mass") {
    std::mt19937_64 rng(6);
    Sample s = testutil::random_sample(rng, 100);
    TrimmedSets sets{IntervalSet(), IntervalSet::all(), 0.0};
    try {
        estimate_late(s, sets);
        FAIL("expected WeakIdentification");
    } catch (const WeakIdentification& e) {
        CHECK(e.mass() == 0.0);
    }
    Sample no_first_stage = s;
    for (std::size_t i = 0; i < s.size(); ++i) no_first_stage.d[i] = static_cast<int>(i % 2);
    for (std::size_t i = 0; i < s.size(); ++i) no_first_stage.z[i] = static_cast<int>((i / 2) % 2);
    CHECK_THROWS_AS(wald_estimate(no_first_stage, 0.05), WeakIdentification);
}

TEST_CASE("plug-in variance equals the numerical delta method") {
    std::mt19937_64 rng(77);
    SimDesign des = builtin_design("normal-mix");
    for (int trial = 0; trial < 5; ++trial) {
        Sample s = draw_sample(des, 2000, rng());
        DensityEstimate est = estimate_density_diff(s, Kernel{}, 0.3, default_grid(-2.5, 7.0, Kernel{}, 0.3));
        TrimmedSets sets = estimate_trimmed_sets(est, des.tails, 0.01, -2.5, 7.0);
        LateVariance v = late_variance(s, sets);
        CHECK(v.sigma == doctest::Approx(delta_method_sigma(s, sets)).epsilon(1e-5));
        CHECK((v.Sigma - v.Sigma.transpose()).norm() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(v.Sigma);
        CHECK(eig.eigenvalues().minCoeff() > -1e-10);
        CHECK(v.D(0, 0) < 0.0);
        auto psi = late_influence(s, sets);
        double ss = 0;
        for (double p : psi) ss += p * p;
        CHECK(std::sqrt(ss / (psi.size() - 1)) == doctest::Approx(v.sigma).epsilon(1e-9));
    }
}

TEST_CASE("known-tail interval is centred") {
    std::mt19937_64 rng(12);
    SimDesign des = builtin_design("normal-mix");
    for (int t = 0; t < 10; ++t) {
        Sample s = draw_sample(des, 1000, rng());
        DensityEstimate est = estimate_density_diff(s, Kernel{}, 0.4, default_grid(-2.5, 7.0, Kernel{}, 0.4));
        LateEstimate e = late_ci(s, estimate_trimmed_sets(est, des.tails, 0.01, -2.5, 7.0), 0.05);
        CHECK(e.ci_lo <= e.estimate);
        CHECK(e.estimate <= e.ci_hi);
        CHECK(e.sigma >= 0.0);
        CHECK(e.ci_hi - e.estimate == doctest::Approx(e.estimate - e.ci_lo));
        CHECK(std::abs(e.mass1) <= 1.0);
        CHECK(std::abs(e.mass0) <= 1.0);
    }
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("location and scale equivariance of the full pipeline") {
    SimDesign des = builtin_design("normal-mix");
    Sample s = draw_sample(des, 3000, 8);
    Kernel k;
    auto pipeline = [&](const Sample& x, double shift, double lambda) {
        double h = 0.3 * lambda, lo = -2.5 * lambda + shift, hi = 7.0 * lambda + shift;
        std::vector<double> grid;
        for (double g : default_grid(-2.5, 7.0, k, 0.3)) grid.push_back(g * lambda + shift);
        DensityEstimate est = estimate_density_diff(x, k, h, grid);
        return estimate_late(x, estimate_trimmed_sets(est, des.tails, 0.01 / lambda, lo, hi)).estimate;
    };
    const double base = pipeline(s, 0.0, 1.0);
    Sample shifted = s, scaled = s;
    for (auto& y : shifted.y) y += 0.75;
    for (auto& y : scaled.y) y *= 2.0;
    CHECK(pipeline(shifted, 0.75, 1.0) == doctest::Approx(base).epsilon(1e-9));
    CHECK(pipeline(scaled, 0.0, 2.0) == doctest::Approx(2.0 * base).epsilon(1e-9));
}

TEST_CASE("union interval over tail conditions") {
    SimDesign des = builtin_design("normal-mix");
    Sample s = draw_sample(des, 2000, 19);
    Kernel k;
    DensityEstimate est = estimate_density_diff(s, k, 0.3, default_grid(-2.5, 7.0, k, 0.3));
    UnionCI u = conservative_union_ci(s, est, 0.01, -2.5, 7.0, 0.05);
    CHECK(u.members.size() == 16);
    LateEstimate known = late_ci(s, estimate_trimmed_sets(est, des.tails, 0.01, -2.5, 7.0), 0.05);
    CHECK(u.lo <= known.ci_lo);
    CHECK(u.hi >= known.ci_hi);

    // a band wider than the data makes every tail condition irrelevant
    double ymin = *std::min_element(s.y.begin(), s.y.end()), ymax = *std::max_element(s.y.begin(), s.y.end());
    DensityEstimate wide = estimate_density_diff(s, k, 0.3, default_grid(ymin - 1, ymax + 1, k, 0.3));
    UnionCI same = conservative_union_ci(s, wide, 0.01, ymin - 1, ymax + 1, 0.05);
    LateEstimate single = late_ci(s, estimate_trimmed_sets(wide, des.tails, 0.01, ymin - 1, ymax + 1), 0.05);
    CHECK(same.feasible == 16);
    CHECK(same.lo == doctest::Approx(single.ci_lo).epsilon(1e-12));
    CHECK(same.hi == doctest::Approx(single.ci_hi).epsilon(1e-12));

    Sample tiny{{0.0, 10.0, 20.0, 30.0}, {1, 0, 1, 0}, {1, 1, 0, 0}};
    DensityEstimate flat;
    flat.grid = linspace(-1, 31, 50);
    flat.f1.assign(50, -1.0);
    flat.f0.assign(50, -1.0);
    CHECK_THROWS(conservative_union_ci(tiny, flat, 0.5, 40.0, 41.0, 0.05));
}

TEST_CASE("Wald interval uses the delta method") {
    std::mt19937_64 rng(5);
    Sample s = testutil::random_sample(rng, 4000);
    WaldEstimate w = wald_estimate(s, 0.05);
    // cross-check against the ratio of two independent-arm mean differences with a numerical gradient
    double sy[2] = {0, 0}, sd[2] = {0, 0}, nz[2] = {0, 0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        sy[s.z[i]] += s.y[i];
        sd[s.z[i]] += s.d[i];
        nz[s.z[i]] += 1;
    }
    CHECK(w.estimate == doctest::Approx((sy[1] / nz[1] - sy[0] / nz[0]) / (sd[1] / nz[1] - sd[0] / nz[0])));
    CHECK(w.ci_lo < w.estimate);
    CHECK(w.se > 0.0);
    // se agrees with the Monte Carlo spread across resamples
    std::vector<double> boot;
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    for (int b = 0; b < 400; ++b) {
        Sample r;
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto j = pick(rng);
            r.y.push_back(s.y[j]);
            r.d.push_back(s.d[j]);
            r.z.push_back(s.z[j]);
        }
        boot.push_back(wald_estimate(r, 0.05).estimate);
    }
    CHECK(sample_sd(boot) == doctest::Approx(w.se).epsilon(0.15));
}

}  // TEST_SUITE
