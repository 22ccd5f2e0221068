#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "refute/cli.hpp"

using namespace refute;

namespace {

struct Outcome {
    int code;
    std::string out, err;
    json report() const { return json::parse(out); }
};

Outcome call(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(REFUTE_TEST_DATA) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& body) {
    std::ofstream(name) << body;
    return name;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("late point on the small fixture") {
    Outcome o = call({"late", "point", "--input", data("tiny.csv")});
    REQUIRE(o.code == kExitOk);
    json r = o.report();
    CHECK(r["command"] == "late point");
    CHECK(r["n"] == 50);
    CHECK(r["results"].contains("late"));
    CHECK(r["results"].contains("wald_comparison"));
    CHECK(r["results"].contains("testable_implication"));
    // identical invocations give identical bytes
    CHECK(call({"late", "point", "--input", data("tiny.csv")}).out == o.out);
}

TEST_CASE("bounds, test and union variants") {
    Outcome b = call({"late", "bounds", "--input", data("delta_neg.csv"), "--b", "0.002", "--h", "0.3", "--tails",
                      "0101", "--band", "-2.5,7", "--kappa-scale", "0.2"});
    REQUIRE(b.code == kExitOk);
    json r = b.report();
    CHECK(r["results"]["delta"]["regime"] == "below");
    CHECK(r["results"]["bounds"]["lower"]["value"].get<double>() <= r["results"]["bounds"]["upper"]["value"].get<double>());

    Outcome t = call({"late", "test", "--input", data("tiny.csv")});
    CHECK(t.code == kExitOk);
    Outcome u = call({"late", "point", "--input", data("card_like_3010.csv"), "--union"});
    CHECK(u.code == kExitOk);
    CHECK(u.report()["results"].contains("union"));
    // --union and --tails exclude each other
    CHECK(call({"late", "point", "--input", data("tiny.csv"), "--union", "--tails", "0101"}).code == kExitUsage);
}

TEST_CASE("roy, structures, dilate and simulate") {
    Outcome roy = call({"roy", "bounds", "--cells", "0.1,0.15,0.1,0.15,0.15,0.1,0.15,0.1"});
    REQUIRE(roy.code == kExitOk);
    CHECK(roy.report()["results"]["refutability"]["rejected"] == true);
    CHECK(call({"roy", "bounds", "--input", data("roy_binary.csv"), "--bootstrap", "100"}).code == kExitOk);
    CHECK(call({"roy", "bounds"}).code == kExitUsage);

    Outcome st = call({"structures", "analyze", "--space", data("entry_space.json")});
    CHECK(st.code == kExitOk);

    Outcome dl = call({"dilate", "region", "--input", data("intervals.csv"), "--a", "-0.2", "--b", "0.2", "--boot",
                       "200", "--grid", "101"});
    REQUIRE(dl.code == kExitOk);
    CHECK(dl.report()["results"].contains("confidence_region"));
    CHECK(dl.report()["results"].contains("hypothesis"));

    Outcome sim = call({"simulate", "coverage", "--n", "300", "--m", "6", "--h", "0.4", "--threads", "2"});
    REQUIRE(sim.code == kExitOk);
    Outcome sim1 = call({"simulate", "coverage", "--n", "300", "--m", "6", "--h", "0.4", "--threads", "1"});
    CHECK(sim1.report()["results"] == sim.report()["results"]);
}

TEST_CASE("table rendering") {
    Outcome o = call({"roy", "bounds", "--cells", "0.1,0.15,0.1,0.15,0.15,0.1,0.15,0.1", "--format", "table"});
    REQUIRE(o.code == kExitOk);
    CHECK(o.out.find("results.refutability.rejected") != std::string::npos);
    CHECK(render_table(json{{"a", {{"b", 1}}}}).find("a.b") != std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(call({"--bogus"}).code == kExitUsage);
    CHECK(call({}).code == kExitUsage);
    Outcome help = call({"--help"});
    CHECK(help.code == kExitOk);
    CHECK(help.out.find("late") != std::string::npos);

    Outcome missing = call({"late", "point", "--input", "/nonexistent.csv"});
    CHECK(missing.code == kExitData);
    CHECK(missing.report()["error"]["type"] == "data");
    CHECK(missing.err.find("error:") == 0);

    std::string bad = write_temp("cli_bad_d.csv", "y,d,z\n1,0,1\n2,2,0\n");
    Outcome bd = call({"late", "point", "--input", bad});
    CHECK(bd.code == kExitData);
    CHECK(bd.err.find("row 2") != std::string::npos);
    std::remove(bad.c_str());

    // the same (Y, D) rows in both arms: no compliers anywhere
    std::ostringstream body;
    body << "y,d,z\n";
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nrm;
    for (int i = 0; i < 200; ++i) {
        double y = nrm(rng);
        body << y << ',' << i % 2 << ",0\n" << y << ',' << i % 2 << ",1\n";
    }
    std::string flat = write_temp("cli_flat.csv", body.str());
    Outcome weak = call({"late", "point", "--input", flat, "--b", "0.01"});
    CHECK(weak.code == kExitWeakId);
    CHECK(weak.report()["error"].contains("message"));
    std::remove(flat.c_str());

    CHECK(call({"simulate", "coverage", "--preset", "nope"}).code == kExitData);
}

}  // TEST_SUITE
