#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "refute/bounds.hpp"
#include "refute/errors.hpp"
#include "refute/sim.hpp"
#include "oracle_bounds.hpp"

using namespace refute;
using namespace oracle;


TEST_SUITE("late-bounds") {

TEST_CASE("regime trichotomy") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    Sample s = testutil::random_sample(rng, 300);
    TrimmedSets sets{IntervalSet::all(), IntervalSet::all(), 0.0};
    for (double kappa : {1e-4, 0.01, 0.05, 0.3}) {
        DeltaEstimate d = estimate_delta(s, sets, kappa);
        int hits = (d.delta < -kappa) + (d.delta > kappa) + (std::abs(d.delta) <= kappa);
        CHECK(hits == 1);
        if (d.delta < -kappa) CHECK(d.regime == Regime::Below);
        else if (d.delta > kappa) CHECK(d.regime == Regime::Above);
        else CHECK(d.regime == Regime::Point);
        CHECK(d.near_boundary == (std::abs(d.delta) >= kappa && std::abs(d.delta) <= 2 * kappa));
        CHECK(d.delta == doctest::Approx(d.mass1 - d.mass0));
    }
}

TEST_CASE("symmetric arms give zero delta and collapse the bounds") {
    // identical (Y, D) composition in both arms
    Sample s;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nrm;
    for (int i = 0; i < 200; ++i) {
        double y = nrm(rng);
        int d = i % 3 == 0;
        for (int z = 0; z < 2; ++z) {
            s.y.push_back(y);
            s.d.push_back(d);
            s.z.push_back(z);
        }
    }
    TrimmedSets sets{IntervalSet::all(), IntervalSet::all(), 0.0};
    DeltaEstimate d = estimate_delta(s, sets, 0.01);
    CHECK(d.delta == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(d.regime == Regime::Point);
}

TEST_CASE("bound estimators on exact populations match the summation oracle") {
    std::mt19937_64 rng(2024);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const bool negative = trial % 2 == 0;
        CountPopulation pop = exact_population(rng, negative);
        OracleBounds o = summation_bounds(pop);
        if (std::abs(o.delta) < 1e-9) continue;
        Sample s = pop.sample();
        TrimmedSets sets{pop.set(1), pop.set(0), 0.0};
        DeltaEstimate de = estimate_delta(s, sets, 1e-9);
        REQUIRE(de.regime == (negative ? Regime::Below : Regime::Above));
        CHECK(de.delta == doctest::Approx(o.delta).epsilon(1e-12));
        BoundEstimate be = estimate_bounds(s, sets, de, 0.05, Kernel{}, 0.5);
        CHECK(std::abs(be.lower.value - o.lower) < 1e-9);
        CHECK(std::abs(be.upper.value - o.upper) < 1e-9);
        CHECK(be.lower.value <= be.upper.value + 1e-12);
        if (negative) CHECK(be.lower.threshold.t <= be.upper.threshold.t);
        else CHECK(be.lower.threshold.t >= be.upper.threshold.t);
        ++checked;
    }
    CHECK(checked > 250);
}

TEST_CASE("threshold scan agrees with a grid search on the defining inequality") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> cnt(0, 12);
    for (int trial = 0; trial < 200; ++trial) {
        CountPopulation pop;
        for (int j = 0; j < 10; ++j) {
            pop.ys.push_back(0.3 * j);
            pop.counts.push_back({cnt(rng) + 5, cnt(rng), cnt(rng), cnt(rng) + 2});
        }
        pop.balance();
        Sample s = pop.sample();
        TrimmedSets sets{pop.set(1), pop.set(0), 0.0};
        DeltaEstimate de = estimate_delta(s, sets, 1e-9);
        if (de.regime != Regime::Below) continue;
        ThresholdEstimate th = estimate_threshold(s, sets, de, Side::Lower);
        if (th.saturated) continue;
        // grid search: t with int_{(-inf,t)} m <= |delta| <= int_{(-inf,t]} m
        std::vector<double> hits;
        std::vector<double> grid;
        for (double t = -1.0; t <= 4.0; t += 0.001) grid.push_back(t);
        grid.insert(grid.end(), pop.ys.begin(), pop.ys.end());
        std::sort(grid.begin(), grid.end());
        for (double t : grid) {
            double below = 0, upto = 0;
            for (std::size_t j = 0; j < pop.ys.size(); ++j) {
                double m = std::min(pop.p(j, 1), pop.q(j, 1));
                if (pop.ys[j] < t) below += m;
                if (pop.ys[j] <= t) upto += m;
            }
            if (below <= std::abs(de.delta) + 1e-12 && std::abs(de.delta) <= upto + 1e-12) hits.push_back(t);
        }
        REQUIRE_FALSE(hits.empty());
        // crossing atom k*: first support point whose cumulative mass reaches |delta|
        std::vector<double> prefix;
        double run = 0;
        for (std::size_t j = 0; j < pop.ys.size(); ++j) {
            run += std::min(pop.p(j, 1), pop.q(j, 1));
            prefix.push_back(run);
        }
        std::size_t kstar = 0;
        while (prefix[kstar] < std::abs(de.delta) - 1e-12) ++kstar;
        CHECK(hits.front() == doctest::Approx(pop.ys[kstar]));
        // the scan lands on the crossing level or the one just before it
        const double before = kstar == 0 ? 0.0 : prefix[kstar - 1];
        const bool on_level = std::abs(th.collected - prefix[kstar]) < 1e-12;
        const bool prev_level = std::abs(th.collected - before) < 1e-12;
        CHECK((on_level || prev_level));
        double first_at_level = -kInf;
        for (std::size_t j = 0; j < prefix.size(); ++j)
            if (std::abs(prefix[j] - th.collected) < 1e-12) {
                first_at_level = pop.ys[j];
                break;
            }
        if (th.collected > 1e-12) CHECK(th.t == first_at_level);
    }
}

TEST_CASE("scan reaches the global minimum of the criterion") {
    SimDesign des = builtin_design("gap-below");
    Sample s = draw_sample(des, 1500, 5);
    DensityEstimate est = estimate_density_diff(s, Kernel{}, 0.3, default_grid(-2.5, 7.0, Kernel{}, 0.3));
    TrimmedSets sets = estimate_trimmed_sets(est, des.tails, 0.002, -2.5, 7.0);
    DeltaEstimate de = estimate_delta(s, sets, 0.01);
    REQUIRE(de.regime == Regime::Below);
    std::vector<double> w = correction_weights(s, sets, 1);
    for (Side side : {Side::Lower, Side::Upper}) {
        ThresholdEstimate th = estimate_threshold(s, sets, de, side);
        const int dir = th.direction;
        for (std::size_t k = 0; k < s.size(); k += 7) {
            double t = s.y[k], mass = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i)
                if (dir > 0 ? s.y[i] <= t : s.y[i] >= t) mass += w[i] / s.size();
            double crit = (mass - std::abs(de.delta)) * (mass - std::abs(de.delta));
            CHECK(th.criterion <= crit + 1e-15);
        }
    }
}

TEST_CASE("saturation when the gap exceeds the available mass") {
    // no overlap between p and q on the d=1 side: min mass is zero everywhere
    Sample s{{0.0, 1.0, 2.0, 0.5, 3.0, 4.0, 5.0, 1.5}, {1, 0, 0, 0, 0, 0, 0, 0}, {1, 1, 1, 1, 0, 0, 0, 0}};
    TrimmedSets sets{IntervalSet({{-1, 0.2}}), IntervalSet({{2.5, 6.0}}), 0.0};
    DeltaEstimate de = estimate_delta(s, sets, 1e-6);
    REQUIRE(de.regime == Regime::Below);
    CHECK(de.delta == doctest::Approx(-0.5));
    ThresholdEstimate th = estimate_threshold(s, sets, de, Side::Lower);
    CHECK(th.saturated);
    CHECK(th.target > th.available);
}

TEST_CASE("regime boundary activation") {
    std::mt19937_64 rng(4);
    Sample s = draw_sample(builtin_design("gap-below"), 800, 3);
    TrimmedSets sets{IntervalSet({{1.0, 4.5}}), IntervalSet({{-kInf, 1.0}, {4.5, kInf}}), 0.0};
    DeltaEstimate de = estimate_delta(s, sets, 1.0);
    double kappa = std::abs(de.delta) * (1.0 - 1e-12);
    DeltaEstimate edge = estimate_delta(s, sets, kappa);
    CHECK(edge.regime != Regime::Point);
    CHECK(edge.near_boundary);
    ThresholdEstimate th = estimate_threshold(s, sets, edge, Side::Lower);
    CHECK(std::isfinite(th.criterion));
    CHECK_THROWS_AS(correction_for(Regime::Point, Side::Lower), ConfigError);
}

TEST_CASE("point regime reproduces the point estimate") {
    Sample s = draw_sample(builtin_design("normal-mix"), 2000, 9);
    DensityEstimate est = estimate_density_diff(s, Kernel{}, 0.3, default_grid(-2.5, 7.0, Kernel{}, 0.3));
    SimDesign des = builtin_design("normal-mix");
    TrimmedSets sets = estimate_trimmed_sets(est, des.tails, 0.01, -2.5, 7.0);
    DeltaEstimate de = estimate_delta(s, sets, 10.0);
    BoundEstimate be = estimate_bounds(s, sets, de);
    LateEstimate pe = late_ci(s, sets, 0.05);
    CHECK(be.regime == Regime::Point);
    CHECK(be.lower.value == doctest::Approx(pe.estimate));
    CHECK(be.upper.value == doctest::Approx(pe.estimate));
}

TEST_CASE("oracle bounds collapse at zero gap") {
    // Delta = 0 exactly: both bounds are the point value
    CountPopulation sym;
    sym.ys = {0.0, 1.0, 2.0};
    sym.counts = {std::array<int, 4>{2, 1, 1, 3}, std::array<int, 4>{1, 1, 1, 1}, std::array<int, 4>{3, 2, 2, 2}};
    sym.balance();
    OracleBounds o = summation_bounds(sym);
    if (std::abs(o.delta) < 1e-12) {
        CHECK(o.lower == doctest::Approx(o.point));
        CHECK(o.upper == doctest::Approx(o.point));
    }
}

TEST_CASE("bound width grows with the gap in the oracle") {
    // fixed d=1 side, d=0 complier mass increased step by step
    CountPopulation pop;
    pop.ys = {0, 1, 2, 3, 4, 5};
    pop.counts = {std::array<int, 4>{2, 3, 5, 8}, std::array<int, 4>{1, 2, 4, 6}, std::array<int, 4>{3, 1, 6, 9},
                  std::array<int, 4>{2, 2, 5, 7}, std::array<int, 4>{1, 3, 4, 6}, std::array<int, 4>{2, 1, 6, 8}};
    double prev = -1.0, prev_delta = 1.0;
    for (int extra = 0; extra < 12; ++extra) {
        CountPopulation p = pop;
        p.counts[static_cast<std::size_t>(extra % 6)][0] += extra;
        for (int j = 0; j < extra; ++j) p.counts[static_cast<std::size_t>(j % 6)][0] += 1;
        p.balance();
        OracleBounds o = summation_bounds(p);
        if (o.delta >= 0 || o.delta > prev_delta) continue;
        CHECK(o.upper - o.lower >= prev - 1e-12);
        prev = o.upper - o.lower;
        prev_delta = o.delta;
    }
}

TEST_CASE("variance pieces") {
    SimDesign des = builtin_design("gap-below");
    Sample s = draw_sample(des, 3000, 12);
    DensityEstimate est = estimate_density_diff(s, Kernel{}, 0.3, default_grid(-2.5, 7.0, Kernel{}, 0.3));
    TrimmedSets sets = estimate_trimmed_sets(est, des.tails, 0.002, -2.5, 7.0);
    DeltaEstimate de = estimate_delta(s, sets, 0.01);
    REQUIRE(de.regime == Regime::Below);
    BoundEstimate be = estimate_bounds(s, sets, de, 0.05, Kernel{}, 0.3);
    for (const BoundSide* side : {&be.lower, &be.upper}) {
        CHECK(side->sigma >= 0.0);
        CHECK(side->se == doctest::Approx(side->sigma / std::sqrt(3000.0)));
    }
    CHECK(be.ci_lo <= be.lower.value);
    CHECK(be.ci_hi >= be.upper.value);
    ThresholdEstimate th = estimate_threshold(s, sets, de, Side::Lower);
    BoundVariance v = bound_variance(s, sets, th, 1, Kernel{}, 0.3);
    auto psi = bound_influence(s, sets, th, 1);
    double ss = 0;
    for (double x : psi) ss += x * x;
    CHECK(std::sqrt(ss / (psi.size() - 1)) == doctest::Approx(v.sigma).epsilon(1e-8));
    CHECK(bound_at(s, sets, 1, 1, th.t) == doctest::Approx(be.lower.value));
    // t = -inf collects nothing: the uncorrected numerator over the larger mass
    double none = bound_at(s, sets, 1, 1, -kInf);
    LateEstimate pe = estimate_late(s, sets);
    CHECK(none == doctest::Approx((pe.numer1 - pe.numer0) / pe.mass0));
}

}  // TEST_SUITE
