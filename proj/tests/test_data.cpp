#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "refute/data.hpp"
#include "refute/errors.hpp"
#include "refute/io.hpp"
#include "refute/sim.hpp"

using namespace refute;

TEST_SUITE("data") {

TEST_CASE("two-point sample") {
    Sample s{{1.0, 2.0}, {1, 0}, {1, 0}};
    EmpiricalPQ e = build_empirical(s);
    CHECK(e.prZ1() == doctest::Approx(0.5));
    CHECK(e.p_mass(1) == doctest::Approx(1.0));
    CHECK(e.q_mass(0) == doctest::Approx(1.0));
    CHECK(e.P(IntervalSet::all(), 1) + e.P(IntervalSet::all(), 0) == doctest::Approx(1.0));
    CHECK(e.Q(IntervalSet::all(), 1) + e.Q(IntervalSet::all(), 0) == doctest::Approx(1.0));
}

TEST_CASE("perfect compliance empties the off-diagonal cells") {
    std::mt19937_64 rng(3);
    Sample s = testutil::random_sample(rng, 200);
    s.d = s.z;
    EmpiricalPQ e(s);
    CHECK(e.q_mass(1) == 0.0);
    CHECK(e.p_mass(0) == 0.0);
}

TEST_CASE("design draw has Pr(Z=1) near 0.6") {
    Sample s = draw_sample(builtin_design("normal-mix"), 5000, 17);
    CHECK(std::abs(EmpiricalPQ(s).prZ1() - 0.6) < 0.02);
}

TEST_CASE("validation errors") {
    CHECK_THROWS_AS(Sample({}, {}, {}).validate(), DataError);
    CHECK_THROWS_AS(Sample({1.0, 2.0}, {1, 2}, {1, 0}).validate(), DataError);
    CHECK_THROWS_AS(Sample({1.0, 2.0}, {1, 0}, {1, 1}).validate(), ConfigError);
    CHECK_THROWS_AS(Sample({1.0, 2.0}, {1}, {1, 0}).validate(), DataError);
}

TEST_CASE("empirical measures are invariant to row permutation") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Sample s = testutil::random_sample(rng, 60);
        std::vector<std::size_t> idx(s.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        Sample t;
        for (auto i : idx) {
            t.y.push_back(s.y[i]);
            t.d.push_back(s.d[i]);
            t.z.push_back(s.z[i]);
        }
        CHECK(EmpiricalPQ(s) == EmpiricalPQ(t));
    }
}

TEST_CASE("P-side CDFs sum to at most one, reaching one at max Y given Z=1") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Sample s = testutil::random_sample(rng, 80);
        EmpiricalPQ e(s);
        double ymax = -kInf;
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s.z[i]) ymax = std::max(ymax, s.y[i]);
        for (double y : s.y) CHECK(e.p_cdf(y, 1) + e.p_cdf(y, 0) <= 1.0 + 1e-12);
        CHECK(e.p_cdf(ymax, 1) + e.p_cdf(ymax, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("interval-set measure matches direct counting") {
    std::mt19937_64 rng(8);
    Sample s = testutil::random_sample(rng, 300);
    EmpiricalPQ e(s);
    IntervalSet B({{-0.5, 0.3}, {1.0, 2.0}});
    double p1 = 0, q0 = 0, n1 = 0, n0 = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        bool in = B.contains(s.y[i]);
        if (s.z[i]) {
            ++n1;
            p1 += in && s.d[i] == 1;
        } else {
            ++n0;
            q0 += in && s.d[i] == 0;
        }
    }
    CHECK(e.P(B, 1) == doctest::Approx(p1 / n1));
    CHECK(e.Q(B, 0) == doctest::Approx(q0 / n0));
}

TEST_CASE("data-driven configuration") {
    Sample s = draw_sample(builtin_design("normal-mix"), 3010, 4);
    RunConfig c = default_empirical_config(s, 0.01);
    CHECK(c.band_lo == quantile(s.y, 0.01));
    CHECK(c.band_hi == quantile(s.y, 0.99));
    CHECK(c.h == doctest::Approx(sample_sd(s.y) * std::log(3010.0) / (2.0 * std::pow(3010.0, 0.2))));

    Sample small{{1, 2, 3}, {0, 1, 0}, {1, 0, 1}};
    CHECK_THROWS_AS(default_empirical_config(small), ConfigError);
    Sample flat = draw_sample(builtin_design("normal-mix"), 50, 1);
    std::fill(flat.y.begin(), flat.y.end(), 2.0);
    CHECK_THROWS_AS(default_empirical_config(flat), ConfigError);
}

TEST_CASE("theorem rules are positive and decreasing") {
    for (const Rule& r : {rules::rate_bandwidth(), rules::rate_trimming(), rules::kappa()}) {
        for (std::size_t n : {2ul, 20ul, 5000ul}) {
            CHECK(r(n) > 0.0);
            if (n >= 20) CHECK(r(4 * n) < r(n));
        }
    }
    CHECK(rules::rate_bandwidth()(5000) == doctest::Approx(std::pow(5000.0, -0.2)));
    CHECK(rules::rate_trimming()(5000) == doctest::Approx(std::pow(5000.0, -0.25) / std::log(5000.0)));
    CHECK(rules::kappa()(5000) == doctest::Approx(std::log(5000.0) / std::sqrt(5000.0)));
}

TEST_CASE("run config validation and JSON") {
    RunConfig c;
    c.at(1000);
    CHECK_NOTHROW(c.validate());
    RunConfig back = RunConfig::from_json(c.to_json());
    CHECK(back.at(1000).h == doctest::Approx(c.h));
    CHECK(back.b == doctest::Approx(c.b));
    c.band_lo = 3.0;
    c.band_hi = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.alpha = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("tail spec codes cover all sixteen combinations") {
    std::vector<std::string> seen;
    for (int code = 0; code < 16; ++code) {
        TailSpec t = TailSpec::from_code(code);
        CHECK(t.code() == code);
        CHECK(TailSpec::parse(t.str()) == t);
        seen.push_back(t.str());
    }
    std::sort(seen.begin(), seen.end());
    CHECK(std::unique(seen.begin(), seen.end()) == seen.end());
    CHECK(TailSpec::parse("0101").upper[0]);
    CHECK_FALSE(TailSpec::parse("0101").upper[1]);
    CHECK_THROWS(TailSpec::parse("u1=maybe"));
}

TEST_CASE("quantile is the generalized inverse") {
    std::vector<double> v{3, 1, 2, 5, 4};
    CHECK(quantile(v, 0.2) == 1.0);
    CHECK(quantile(v, 0.21) == 2.0);
    CHECK(quantile(v, 1.0) == 5.0);
}

}  // TEST_SUITE

TEST_SUITE("io") {

TEST_CASE("csv loading") {
    Sample s = sample_from_csv(parse_csv("z,y,d,extra\n1,0.5,1,a\n0,1.5,0,b\n\n"));
    CHECK(s.size() == 2);
    CHECK(s.y[1] == 1.5);
    CHECK(s.z[0] == 1);
    CHECK_THROWS_WITH_AS(parse_csv(""), doctest::Contains("empty"), DataError);
    CHECK_THROWS_WITH_AS(parse_csv("y,d,z\n"), doctest::Contains("no data rows"), DataError);
    CHECK_THROWS_WITH_AS(sample_from_csv(parse_csv("y,d\n1,0\n")), doctest::Contains("'z'"), DataError);
    CHECK_THROWS_WITH_AS(sample_from_csv(parse_csv("y,d,z\n1,0,1\n2,2,0\n")), doctest::Contains("row 2"), DataError);
    CHECK_THROWS_WITH_AS(sample_from_csv(parse_csv("y,d,z\n1,0,1\nabc,1,0\n")), doctest::Contains("row 2"), DataError);
    CHECK_THROWS_AS(parse_csv("y,d,z\n1,0\n"), DataError);
    CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("interval csv") {
    IntervalSample s = intervals_from_csv(parse_csv("y_l,y_u\n0,1\n-1,2\n"));
    CHECK(s.size() == 2);
    CHECK_THROWS_WITH_AS(intervals_from_csv(parse_csv("y_l,y_u\n0,1\n3,2\n")), doctest::Contains("row 2"), DataError);
}

}  // TEST_SUITE
