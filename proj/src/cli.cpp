#include "refute/cli.hpp"

#include <chrono>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "refute/bounds.hpp"
#include "refute/dilation.hpp"
#include "refute/errors.hpp"
#include "refute/io.hpp"
#include "refute/late.hpp"
#include "refute/parallel.hpp"
#include "refute/roy.hpp"
#include "refute/sim.hpp"
#include "refute/structures.hpp"

namespace refute {

namespace {

struct Global {
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string format = "json";
    bool timing = false;
};

struct LateOpts {
    std::string input;
    double alpha = 0.05;
    std::string tails;
    bool use_union = false;
    std::optional<double> b, h;
    std::string band;
    std::string kernel = "epanechnikov";
    double kappa_scale = 1.0;
    int bootstrap = 0;
    std::string density_csv;
};

struct RoyOpts {
    std::string input, cells;
    double alpha = 0.05;
    int bootstrap = 0;
};

struct StructOpts {
    std::string space, assumption, extension, hypothesis;
};

struct DilateOpts {
    std::string input;
    std::optional<double> a, b;
    double alpha = 0.05;
    int boot = 1000;
    int grid = 401;
    std::string support;
    double radius_scale = 1.0;
};

struct SimOpts {
    std::string design = "builtin:normal-mix";
    std::string preset;
    std::optional<std::size_t> n, m;
    std::optional<double> b, h;
    bool b_literal = false;
    bool use_union = false;
    double alpha = 0.05;
    std::string kernel = "epanechnikov";
    std::string csv;
    bool reps = false;
};

struct Outcome {
    json config = json::object();
    json results = json::object();
    json warnings = json::array();
    json n = nullptr;
};

std::pair<double, double> parse_pair(const std::string& text, const std::string& what) {
    auto comma = text.find(',');
    try {
        if (comma == std::string::npos) throw std::invalid_argument(text);
        std::size_t used = 0;
        std::string a = text.substr(0, comma), b = text.substr(comma + 1);
        double lo = std::stod(a, &used);
        if (used != a.size()) throw std::invalid_argument(a);
        double hi = std::stod(b, &used);
        if (used != b.size()) throw std::invalid_argument(b);
        if (!(lo < hi)) throw ConfigError(what + " needs LO < HI, got '" + text + "'");
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw ConfigError(what + " must be LO,HI, got '" + text + "'");
    }
}

std::vector<std::string> split_names(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); }

json set_json(const IntervalSet& s) {
    json arr = json::array();
    for (const auto& p : s.parts()) arr.push_back({num(p.lo), num(p.hi)});
    return arr;
}

RunConfig late_config(const Sample& s, const LateOpts& o, const Global& g) {
    RunConfig c = default_empirical_config(s, o.b);
    if (o.h) c.bandwidth_rule = rules::fixed(*o.h);
    c.threshold_rule = rules::kappa(o.kappa_scale);
    if (!o.band.empty()) std::tie(c.band_lo, c.band_hi) = parse_pair(o.band, "--band");
    if (!o.tails.empty()) c.tails = TailSpec::parse(o.tails);
    c.alpha = o.alpha;
    c.seed = g.seed;
    if (o.bootstrap > 0) c.bootstrap = o.bootstrap;
    c.at(s.size());
    c.validate();
    return c;
}

DensityEstimate density_for(const Sample& s, const RunConfig& c, const Kernel& k) {
    return estimate_density_diff(s, k, c.h, default_grid(c.band_lo, c.band_hi, k, c.h));
}

void add_wald(const Sample& s, double alpha, Outcome& out, const LateEstimate* est) {
    try {
        WaldEstimate w = wald_estimate(s, alpha);
        json cmp{{"wald", w.to_json()}, {"complier_mass_iam", w.first_stage}};
        if (est) cmp["late_minus_wald"] = est->estimate - w.estimate;
        out.results["wald_comparison"] = cmp;
    } catch (const WeakIdentification& e) {
        out.results["wald_comparison"] = nullptr;
        out.warnings.push_back(std::string("wald estimate unavailable: ") + e.what());
    }
}

void warn_diagnostic(const IamDiagnostic& d, Outcome& out) {
    if (!d.passes)
        out.warnings.push_back("density form of the IA-M testable implication fails (violation masses " +
                               std::to_string(d.violation_mass_1) + ", " + std::to_string(d.violation_mass_0) + ")");
}

Outcome cmd_late_point(const LateOpts& o, const Global& g) {
    Sample s = load_sample_csv(o.input);
    RunConfig c = late_config(s, o, g);
    Kernel k = Kernel::parse(o.kernel);
    Outcome out;
    out.n = s.size();
    out.config = c.to_json();
    out.config["kernel"] = k.name();
    out.config["mode"] = o.use_union ? "union" : "known-tail";
    DensityEstimate dens = density_for(s, c, k);
    IamDiagnostic diag = check_iam_implication(dens, c.b);
    out.results["testable_implication"] = diag.to_json();
    warn_diagnostic(diag, out);
    if (o.use_union) {
        UnionCI u = conservative_union_ci(s, dens, c.b, c.band_lo, c.band_hi, c.alpha);
        out.results["union"] = u.to_json();
        add_wald(s, c.alpha, out, nullptr);
        return out;
    }
    TrimmedSets sets = estimate_trimmed_sets(dens, c.tails, c.b, c.band_lo, c.band_hi);
    out.results["trimmed_sets"] = {{"y1", set_json(sets.y1)}, {"y0", set_json(sets.y0)}};
    LateEstimate est = late_ci(s, sets, c.alpha);
    out.results["late"] = est.to_json();
    add_wald(s, c.alpha, out, &est);
    return out;
}

Outcome cmd_late_test(const LateOpts& o, const Global& g) {
    Sample s = load_sample_csv(o.input);
    RunConfig c = late_config(s, o, g);
    Kernel k = Kernel::parse(o.kernel);
    Outcome out;
    out.n = s.size();
    out.config = c.to_json();
    out.config["kernel"] = k.name();
    DensityEstimate dens = density_for(s, c, k);
    IamDiagnostic diag = check_iam_implication(dens, c.b);
    json r = diag.to_json();
    r["tolerance"] = c.b;
    r["grid_points"] = dens.grid.size();
    r["min_f1"] = *std::min_element(dens.f1.begin(), dens.f1.end());
    r["min_f0"] = *std::min_element(dens.f0.begin(), dens.f0.end());
    out.results["testable_implication"] = r;
    warn_diagnostic(diag, out);
    if (!o.density_csv.empty()) {
        dens.write_csv(o.density_csv);
        out.results["density_csv"] = o.density_csv;
    }
    return out;
}

Outcome cmd_late_bounds(const LateOpts& o, const Global& g) {
    Sample s = load_sample_csv(o.input);
    RunConfig c = late_config(s, o, g);
    Kernel k = Kernel::parse(o.kernel);
    Outcome out;
    out.n = s.size();
    out.config = c.to_json();
    out.config["kernel"] = k.name();
    out.config["kappa_scale"] = o.kappa_scale;
    DensityEstimate dens = density_for(s, c, k);
    TrimmedSets sets = estimate_trimmed_sets(dens, c.tails, c.b, c.band_lo, c.band_hi);
    DeltaEstimate de = estimate_delta(s, sets, c.kappa);
    out.results["delta"] = de.to_json();
    BoundEstimate be = estimate_bounds(s, sets, de, c.alpha, k, c.h);
    out.results["bounds"] = be.to_json();
    if (de.near_boundary) {
        out.warnings.push_back("|delta| lies in [kappa, 2 kappa]; the point-regime result is reported alongside");
        try {
            out.results["point_regime_alternative"] = late_ci(s, sets, c.alpha).to_json();
        } catch (const WeakIdentification& e) {
            out.results["point_regime_alternative"] = nullptr;
            out.warnings.push_back(std::string("point-regime alternative unavailable: ") + e.what());
        }
    }
    if (be.regime != Regime::Point) {
        if (be.lower.unstable) out.warnings.push_back("lower-bound variance unstable (density at threshold near 0 or threshold infinite)");
        if (be.upper.unstable) out.warnings.push_back("upper-bound variance unstable (density at threshold near 0 or threshold infinite)");
        if (be.lower.threshold.saturated || be.upper.threshold.saturated)
            out.warnings.push_back("|delta| exceeds the available correction mass; threshold saturated");
        if (o.bootstrap > 0) {
            BootstrapInterval bl = bootstrap_bound(s, sets, be.regime, Side::Lower, c.alpha, o.bootstrap, g.seed, g.threads);
            BootstrapInterval bu = bootstrap_bound(s, sets, be.regime, Side::Upper, c.alpha, o.bootstrap,
                                                   derive_seed(g.seed, 1), g.threads);
            out.results["bootstrap"] = {{"lower", {bl.lo, bl.hi}}, {"upper", {bu.lo, bu.hi}},
                                        {"replications", {bl.replications, bu.replications}}};
        }
    }
    return out;
}

Outcome cmd_roy(const RoyOpts& o, const Global& g) {
    Outcome out;
    RoyDistribution f;
    std::optional<Sample> s;
    if (!o.input.empty()) {
        s = load_sample_csv(o.input);
        f = RoyDistribution::from_sample(*s);
        out.n = s->size();
    } else if (!o.cells.empty()) {
        f = RoyDistribution::parse(o.cells);
    } else {
        throw ConfigError("roy bounds needs --input or --cells");
    }
    out.config = {{"source", s ? "sample" : "cells"}, {"alpha", o.alpha}, {"bootstrap", o.bootstrap}, {"seed", g.seed}};
    RoyRefutability ref = check_roy_refutable(f);
    PotentialOutcomeBounds pob = potential_outcome_bounds(f);
    out.results["distribution"] = f.to_json();
    out.results["refutability"] = {{"rejected", ref.rejected}, {"slack", ref.slack}};
    out.results["bounds"] = pob.to_json();
    for (int z = 0; z < 2; ++z) {
        const auto& a = pob.sharp[static_cast<std::size_t>(z)];
        const auto& b = pob.simple[static_cast<std::size_t>(z)];
        if (std::abs(a.lo - b.lo) > 1e-9 || std::abs(a.hi - b.hi) > 1e-9)
            out.warnings.push_back("simple closed-form bounds differ from the LP optimum at z=" + std::to_string(z));
    }
    if (o.bootstrap > 0) {
        if (!s) throw ConfigError("--bootstrap requires --input");
        out.results["bootstrap"] = roy_bootstrap(*s, o.alpha, o.bootstrap, g.seed, g.threads).to_json();
    }
    return out;
}

std::optional<IndexSet> named_set(const FiniteSpace& sp, const json& j, const std::string& flag, const char* key) {
    if (!flag.empty()) return sp.lookup(split_names(flag));
    if (j.contains(key)) {
        try {
            return sp.lookup(j.at(key).get<std::vector<std::string>>());
        } catch (const json::exception& e) {
            throw DataError(std::string("'") + key + "' must be a list of structure names: " + e.what());
        }
    }
    return std::nullopt;
}

Outcome cmd_structures(const StructOpts& o, const Global&) {
    json j = read_json_file(o.space);
    FiniteSpace sp = FiniteSpace::from_json(j);
    auto A = named_set(sp, j, o.assumption, "assumption");
    if (!A) throw ConfigError("no assumption given (--assumption or an 'assumption' key in the space file)");
    auto ext = named_set(sp, j, o.extension, "extension");
    auto hyp = named_set(sp, j, o.hypothesis, "hypothesis");
    Outcome out;
    out.config = {{"space", o.space}, {"structures", sp.size()}, {"outcomes", sp.outcome_count()}};
    out.results = analyze_space(sp, *A, ext, hyp);
    if (!out.results.value("complete", true))
        out.warnings.push_back("space is not complete; strong-extension guarantees apply to its completion");
    return out;
}

Outcome cmd_dilate(const DilateOpts& o, const Global& g) {
    IntervalSample s = load_interval_csv(o.input);
    std::optional<std::pair<double, double>> support;
    if (!o.support.empty()) support = parse_pair(o.support, "--support");
    IntervalMeanModel model(s, support);
    DilationConfig dc;
    if (o.radius_scale != 1.0) {
        double scale = o.radius_scale;
        std::ostringstream name;
        name << scale << " log n";
        dc.radius = {name.str(), [scale](std::size_t n) { return scale * std::log(static_cast<double>(n)); }};
    }
    dc.bootstrap = o.boot;
    dc.alpha = o.alpha;
    dc.seed = g.seed;
    dc.threads = g.threads;
    dc.validate();
    std::vector<double> grid = theta_grid(model.support_lo(), model.support_hi(), o.grid);
    Outcome out;
    out.n = s.size();
    out.config = {{"model", model.name()},     {"radius_rule", dc.radius.name}, {"rate_rule", dc.rate.name},
                  {"alpha", dc.alpha},         {"bootstrap", dc.bootstrap},     {"grid_points", o.grid},
                  {"support", {model.support_lo(), model.support_hi()}}, {"seed", g.seed}};
    out.results["plugin_identified_set"] = {model.mean_l(), model.mean_u()};
    out.results["estimated_set"] = estimated_identified_set(model, grid, s.size(), dc).to_json();
    out.results["confidence_region"] = confidence_region(model, s, grid, dc).to_json();
    if (o.a || o.b) {
        if (!o.a || !o.b) throw ConfigError("--a and --b must be given together");
        if (*o.a > *o.b) throw ConfigError("--a must not exceed --b");
        IntervalStats st = interval_data_stats(s, *o.a, *o.b);
        out.results["hypothesis"] = {{"interval", {*o.a, *o.b}}, {"t_nf", st.t_nf}, {"t_con", st.t_con}};
    }
    return out;
}

Outcome cmd_simulate(const SimOpts& o, const Global& g) {
    SimDesign des = load_design(o.design);
    CoverageConfig cc = o.preset.empty() ? CoverageConfig{} : coverage_preset(o.preset);
    if (o.n) cc.n = *o.n;
    if (o.m) cc.m = *o.m;
    if (o.b) cc.trimming = o.b_literal ? rules::fixed(*o.b) : rules::rate_trimming(*o.b);
    if (o.h) cc.bandwidth = rules::fixed(*o.h);
    if (o.use_union) cc.kind = CiKind::Union;
    cc.alpha = o.alpha;
    cc.kernel = Kernel::parse(o.kernel);
    cc.seed = g.seed;
    cc.threads = g.threads;
    if (cc.n < 2 || cc.m < 1) throw ConfigError("simulate coverage needs n >= 2 and m >= 1");
    CoverageResult r = run_coverage(des, cc);
    Outcome out;
    out.n = cc.n;
    out.config = {{"design", des.to_json()},      {"n", cc.n},
                  {"m", cc.m},                    {"bandwidth_rule", cc.bandwidth.name},
                  {"h", cc.bandwidth(cc.n)},      {"trimming_rule", cc.trimming.name},
                  {"b", cc.trimming(cc.n)},       {"alpha", cc.alpha},
                  {"estimator", cc.kind == CiKind::Union ? "union" : "known-tail"},
                  {"kernel", cc.kernel.name()},   {"seed", cc.seed}};
    out.results = r.to_json(o.reps);
    if (r.failed > 0) out.warnings.push_back(std::to_string(r.failed) + " replications failed and were excluded");
    if (!o.csv.empty()) {
        r.write_csv(o.csv);
        out.results["csv"] = o.csv;
    }
    return out;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
    auto scalar_array = [](const json& a) {
        for (const auto& e : a)
            if (e.is_structured()) return false;
        return true;
    };
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
    } else if (j.is_array() && !scalar_array(j)) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", rows);
    } else {
        rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
    }
}

}  // namespace

std::string render_table(const json& report) {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(report, "", rows);
    std::size_t width = 0;
    for (const auto& r : rows) width = std::max(width, r.first.size());
    std::ostringstream os;
    for (const auto& [k, v] : rows) os << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
    return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Estimation and inference under refutable-assumption extensions", "refute"};
    app.set_help_flag("--help", "print help and exit");  // -h is taken by the bandwidth flag
    app.fallthrough();
    app.require_subcommand(1);
    Global g;
    app.add_option("--seed", g.seed, "master RNG seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker cap (0 = all cores)")->capture_default_str();
    app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"json", "table"}))->capture_default_str();
    app.add_flag("--timing", g.timing, "add wall-clock timing to the report (breaks byte-identical output)");

    LateOpts lo;
    auto* late = app.add_subcommand("late", "LATE under strong extensions of IA-M");
    late->require_subcommand(1);
    auto late_common = [&](CLI::App* sc) {
        sc->add_option("--input", lo.input, "CSV with columns y,d,z")->required();
        sc->add_option("--alpha", lo.alpha, "confidence level parameter")->capture_default_str();
        sc->add_option("--b", lo.b, "fixed trimming level (default: data-driven)");
        sc->add_option("--h", lo.h, "fixed bandwidth (default: data-driven)");
        sc->add_option("--band", lo.band, "trimming band LO,HI (default: 1% and 99% quantiles)");
        sc->add_option("--tails", lo.tails, "tail spec, e.g. 0101 or u1=empty,u0=full,l1=empty,l0=full");
        sc->add_option("--kernel", lo.kernel, "epanechnikov or triangular")->capture_default_str();
    };
    auto* late_point_cmd = late->add_subcommand("point", "point-identified LATE and confidence interval");
    late_common(late_point_cmd);
    auto* union_flag = late_point_cmd->add_flag("--union", lo.use_union, "union of the 16 tail-condition intervals");
    late_point_cmd->get_option("--tails")->excludes(union_flag);
    auto* late_bounds_cmd = late->add_subcommand("bounds", "LATE bounds under full instrument independence");
    late_common(late_bounds_cmd);
    late_bounds_cmd->add_option("--kappa-scale", lo.kappa_scale, "kappa_n = S log n / sqrt n")->capture_default_str();
    late_bounds_cmd->add_option("--bootstrap", lo.bootstrap, "percentile bootstrap replications (0 = off)");
    auto* late_test_cmd = late->add_subcommand("test", "density-form testable implication of IA-M");
    late_common(late_test_cmd);
    late_test_cmd->add_option("--density-csv", lo.density_csv, "write grid,f1,f0 to this path");

    RoyOpts ro;
    auto* roy = app.add_subcommand("roy", "generalized Roy model");
    roy->require_subcommand(1);
    auto* roy_bounds_cmd = roy->add_subcommand("bounds", "refutability, minimal efficiency loss and outcome bounds");
    roy_bounds_cmd->add_option("--input", ro.input, "CSV with binary y and columns d,z");
    roy_bounds_cmd->add_option("--cells", ro.cells, "eight probabilities Pr(Y,D,Z) in order p000,...,p111");
    roy_bounds_cmd->add_option("--alpha", ro.alpha)->capture_default_str();
    roy_bounds_cmd->add_option("--bootstrap", ro.bootstrap, "percentile bootstrap replications (input only)");

    StructOpts so;
    auto* st = app.add_subcommand("structures", "finite structure spaces");
    st->require_subcommand(1);
    auto* st_an = st->add_subcommand("analyze", "refutable/confirmable sets, extensions and decidability");
    st_an->add_option("--space", so.space, "JSON structure space")->required();
    st_an->add_option("--assumption", so.assumption, "comma-separated structure names");
    st_an->add_option("--extension", so.extension, "comma-separated structure names");
    st_an->add_option("--hypothesis", so.hypothesis, "comma-separated structure names");

    DilateOpts dopt;
    auto* dil = app.add_subcommand("dilate", "dilation-based estimation and inference");
    dil->require_subcommand(1);
    auto* dil_reg = dil->add_subcommand("region", "estimated set and confidence region for interval data");
    dil_reg->add_option("--input", dopt.input, "CSV with columns y_l,y_u")->required();
    dil_reg->add_option("--a", dopt.a, "lower end of the hypothesised interval");
    dil_reg->add_option("--b", dopt.b, "upper end of the hypothesised interval");
    dil_reg->add_option("--alpha", dopt.alpha)->capture_default_str();
    dil_reg->add_option("--boot", dopt.boot, "bootstrap replications")->capture_default_str();
    dil_reg->add_option("--grid", dopt.grid, "theta grid points")->capture_default_str();
    dil_reg->add_option("--support", dopt.support, "support LO,HI (default: sample range)");
    dil_reg->add_option("--radius-scale", dopt.radius_scale, "c_n = S log n")->capture_default_str();

    SimOpts sopt;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo harness");
    sim->require_subcommand(1);
    auto* cov = sim->add_subcommand("coverage", "coverage of LATE confidence intervals");
    cov->add_option("--design", sopt.design, "builtin:NAME or a JSON design file")->capture_default_str();
    cov->add_option("--preset", sopt.preset, "n1000-b0.2-h0.4, n5000-b0.12-h0.2 or n5000-b0.135-h0.2");
    cov->add_option("--n", sopt.n, "sample size");
    cov->add_option("--m", sopt.m, "replications");
    cov->add_option("--b", sopt.b, "trimming scale: b_n = B n^{-1/4} / log n");
    cov->add_flag("--b-literal", sopt.b_literal, "use --b as the trimming level itself");
    cov->add_option("--h", sopt.h, "fixed bandwidth");
    cov->add_flag("--union", sopt.use_union, "conservative union interval");
    cov->add_option("--alpha", sopt.alpha)->capture_default_str();
    cov->add_option("--kernel", sopt.kernel)->capture_default_str();
    cov->add_option("--csv", sopt.csv, "per-replication CSV (estimate, se, covered)");
    cov->add_flag("--reps", sopt.reps, "include per-replication rows in the report");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
        return kExitUsage;
    }
    if (roy_bounds_cmd->parsed() && ro.input.empty() == ro.cells.empty()) {
        err << "error: roy bounds needs exactly one of --input or --cells\n\n" << roy_bounds_cmd->help();
        return kExitUsage;
    }

    std::string command;
    std::function<Outcome()> fn;
    if (late_point_cmd->parsed()) command = "late point", fn = [&] { return cmd_late_point(lo, g); };
    else if (late_bounds_cmd->parsed()) command = "late bounds", fn = [&] { return cmd_late_bounds(lo, g); };
    else if (late_test_cmd->parsed()) command = "late test", fn = [&] { return cmd_late_test(lo, g); };
    else if (roy_bounds_cmd->parsed()) command = "roy bounds", fn = [&] { return cmd_roy(ro, g); };
    else if (st_an->parsed()) command = "structures analyze", fn = [&] { return cmd_structures(so, g); };
    else if (dil_reg->parsed()) command = "dilate region", fn = [&] { return cmd_dilate(dopt, g); };
    else command = "simulate coverage", fn = [&] { return cmd_simulate(sopt, g); };

    json report{{"command", command}, {"argv", args}};
    auto fail = [&](const std::string& kind, const std::string& msg, int code) {
        report["error"] = {{"type", kind}, {"message", msg}};
        err << "error: " << msg << '\n';
        out << (g.format == "json" ? report.dump(2) + "\n" : render_table(report));
        return code;
    };
    const auto start = std::chrono::steady_clock::now();
    try {
        Outcome o = fn();
        report["n"] = o.n;
        report["config"] = o.config;
        report["results"] = o.results;
        report["warnings"] = o.warnings;
    } catch (const WeakIdentification& e) {
        report["error_mass"] = e.mass();
        return fail("weak_identification", e.what(), kExitWeakId);
    } catch (const DataError& e) {
        return fail("data", e.what(), kExitData);
    } catch (const ConfigError& e) {
        return fail("config", e.what(), kExitData);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), kExitUsage);
    }
    if (g.timing)
        report["timing_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << (g.format == "json" ? report.dump(2) + "\n" : render_table(report));
    return kExitOk;
}

}  // namespace refute
