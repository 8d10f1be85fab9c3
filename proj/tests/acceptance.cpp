// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Sample sizes and tolerances are fixed
// here; use --only to run a subset while developing.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

#include "ach/engine.hpp"
#include "ach/io.hpp"
#include "ach/oracle.hpp"
#include "ach/stats.hpp"
#include "reference.hpp"

using namespace ach;

namespace {

// Relaxation-time law.
constexpr double kExponent = 2.0;
constexpr double kExponentTol = 0.2;
constexpr double kPrefactorLo = 0.06;
constexpr double kPrefactorHi = 0.24;
// Failure decay in N^(1/4).
constexpr double kMinRSquared = 0.9;
constexpr double kDecayRatioTol = 0.3;
// Collapse.
constexpr double kCollapseTol = 0.1;
// Small lattices.
constexpr double kBaselineFactor = 100.0;
constexpr double kSizeRatio = 2.0;
constexpr double kSizeRatioTol = 0.4;
// Connectivity sweep.
constexpr double kSeparationSigmas = 2.0;
constexpr double kConstancyLevel = 0.01;
// Random vs separable.
constexpr double kOrderingSigmas = 2.0;
// Property suite.
constexpr double kEquivalenceLevel = 0.01;

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Context {
    int threads = 1;
    std::filesystem::path out_dir;
    bool quiet = false;
};

std::string fmt(double x, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << x;
    return s.str();
}

CampaignConfig lattice_config(std::vector<int> F, std::vector<int> sides, int mappings, int runs, std::uint64_t seed,
                              const Context& ctx) {
    CampaignConfig cfg;
    cfg.input_sizes = std::move(F);
    cfg.topology.kind = TopologyKind::Lattice;
    cfg.topology.sides = std::move(sides);
    cfg.runs_per_mapping = runs;
    cfg.min_realizations = cfg.max_realizations = mappings;
    cfg.seed = seed;
    cfg.threads = ctx.threads;
    return cfg;
}

std::vector<PointResult> campaign(const CampaignConfig& cfg, const Context& ctx, const std::string& name) {
    CampaignHooks hooks;
    hooks.on_point = [&](const PointResult& p) {
        if (ctx.quiet) return;
        std::cout << "    " << to_string(p.point.topology) << " N=" << p.point.nodes << " param=" << p.point.parameter
                  << " F=" << p.point.F << " " << to_string(p.mapping_kind) << "  P_m=" << fmt(p.pm, 5) << " +- "
                  << fmt(p.pm_stderr, 3) << "  T/N=" << fmt(p.mean_T_over_N, 5) << " +- " << fmt(p.t_stderr, 3)
                  << "  (" << p.realizations << "x" << p.runs_per_mapping << ")" << std::endl;
    };
    CampaignResult r = run_campaign(cfg, hooks);
    if (!ctx.out_dir.empty()) write_results(r, all_fits(r.points), ctx.out_dir / name);
    return r.points;
}

Verdict relaxation_time_law(const Context& ctx) {
    const auto pts = campaign(lattice_config({11, 21, 31, 41}, {30}, 500, 100, 101, ctx), ctx, "relaxation_time");
    std::vector<double> F, t;
    for (const auto& p : pts) {
        F.push_back(p.point.F);
        t.push_back(p.mean_T_over_N);
    }
    const FitResult fit = fit_power_law(F, t);
    const bool pass = std::abs(fit.a - kExponent) <= kExponentTol && fit.b >= kPrefactorLo && fit.b <= kPrefactorHi;
    return {pass, "T/N = " + fmt(fit.b) + " F^" + fmt(fit.a) + " (R^2 " + fmt(fit.r_squared) + "); need exponent " +
                      fmt(kExponent) + " +- " + fmt(kExponentTol) + " and prefactor in [" + fmt(kPrefactorLo) + ", " +
                      fmt(kPrefactorHi) + "]"};
}

Verdict failure_decay(const Context& ctx) {
    auto pts = campaign(lattice_config({41}, {30, 40, 50}, 1000, 10, 202, ctx), ctx, "failure_decay_41");
    const auto wide = campaign(lattice_config({91}, {30, 40, 50}, 200, 5, 203, ctx), ctx, "failure_decay_91");
    pts.insert(pts.end(), wide.begin(), wide.end());
    const auto fits = fit_points(pts, FitModel::OneMinusPmVsN4Root);
    std::map<std::string, FitResult> by_group;
    for (const auto& f : fits) by_group[f.group] = f;
    if (!by_group.count("lattice teacher F=41") || !by_group.count("lattice teacher F=91")) {
        return {false, "too few unsaturated points to fit 1 - P_m at F = 41 and F = 91"};
    }
    const FitResult& a41 = by_group["lattice teacher F=41"];
    const FitResult& a91 = by_group["lattice teacher F=91"];
    const bool linear = a41.points == 3 && a41.a > 0.0 && a41.r_squared >= kMinRSquared;
    const double ratio = a41.a / a91.a;
    const double expected = 91.0 / 41.0;
    const bool scaled = a91.a > 0.0 && std::abs(ratio / expected - 1.0) <= kDecayRatioTol;
    return {linear && scaled, "F=41: a=" + fmt(a41.a) + " b=" + fmt(a41.b) + " R^2=" + fmt(a41.r_squared) +
                                  " (need a>0, R^2>=" + fmt(kMinRSquared) + "); F=91: a=" + fmt(a91.a) +
                                  "; a41/a91=" + fmt(ratio) + " (need " + fmt(expected) + " within " +
                                  fmt(100 * kDecayRatioTol) + "%)"};
}

Verdict collapse(const Context& ctx) {
    // u = F / N^(1/4) spans [4, 10] on both lattices.
    auto pts = campaign(lattice_config({23, 27, 31, 35, 39, 43, 47, 51, 55}, {30}, 100, 10, 303, ctx), ctx,
                        "collapse_900");
    const auto big = campaign(lattice_config({27, 31, 35, 39, 43, 47, 51, 55, 59, 63}, {40}, 100, 10, 304, ctx), ctx,
                              "collapse_1600");
    pts.insert(pts.end(), big.begin(), big.end());
    const CollapseResult c = scaling_collapse(pts, 900);
    if (!c.quality) return {false, "no overlapping curves"};
    return {*c.quality <= kCollapseTol,
            "largest P_m gap between N=900 and N=1600 curves " + fmt(*c.quality) + " (need <= " + fmt(kCollapseTol) + ")"};
}

Verdict small_lattices(const Context& ctx) {
    std::vector<int> F;
    for (int f = 11; f <= 41; f += 2) F.push_back(f);
    const auto small = campaign(lattice_config(F, {5}, 500, 100, 404, ctx), ctx, "small_25");
    const auto mid = campaign(lattice_config(F, {10}, 200, 50, 405, ctx), ctx, "small_100");
    std::vector<PointResult> all = small;
    all.insert(all.end(), mid.begin(), mid.end());
    const auto fits = fit_points(all, FitModel::PmVsF);
    std::map<int, FitResult> by_n;
    for (const auto& f : fits) by_n[f.group == "lattice teacher N=25" ? 25 : f.group == "lattice teacher N=100" ? 100 : 0] = f;
    if (!by_n.count(25) || !by_n.count(100)) return {false, "too few unsaturated points to fit P_m vs F"};

    bool baseline = true;
    double worst = INFINITY;
    for (const auto& p : small) {
        if (p.point.F < 21) continue;
        const double factor = p.pm / std::ldexp(1.0, -p.point.F);
        worst = std::min(worst, factor);
        baseline = baseline && factor >= kBaselineFactor;
    }
    const FitResult& f25 = by_n[25];
    const double ratio = f25.a / by_n[100].a;
    const bool linear = f25.a > 0.0 && f25.r_squared >= kMinRSquared;
    const bool scaled = std::abs(ratio / kSizeRatio - 1.0) <= kSizeRatioTol;
    return {linear && baseline && scaled,
            "N=25: a=" + fmt(f25.a) + " R^2=" + fmt(f25.r_squared) + "; min P_m 2^F for F>=21 " + fmt(worst) +
                " (need >= " + fmt(kBaselineFactor) + "); a25/a100=" + fmt(ratio) + " (need " + fmt(kSizeRatio) +
                " within " + fmt(100 * kSizeRatioTol) + "%)"};
}

Verdict connectivity(const Context& ctx) {
    CampaignConfig cfg;
    cfg.input_sizes = {21, 31};
    cfg.topology.kind = TopologyKind::RandomRegular;
    cfg.topology.nodes = 100;
    cfg.topology.connectivities = {2, 3, 4, 5, 6, 7, 8, 9, 10};
    cfg.topology.graphs_per_point = 1000;
    cfg.runs_per_mapping = 10;
    cfg.min_realizations = cfg.max_realizations = 1000;
    cfg.seed = 505;
    cfg.threads = ctx.threads;
    const auto pts = campaign(cfg, ctx, "connectivity");

    bool pass = true;
    std::string detail;
    for (int F : cfg.input_sizes) {
        std::map<int, PointResult> by_c;
        for (const auto& p : pts) {
            if (p.point.F == F) by_c[p.point.parameter] = p;
        }
        const PointResult& c4 = by_c[4];
        bool minimum = c4.mean_T_over_N <= by_c[2].mean_T_over_N;
        for (int C = 6; C <= 10; ++C) minimum = minimum && c4.mean_T_over_N <= by_c[C].mean_T_over_N;
        auto sigmas = [&](int C) {
            const PointResult& p = by_c[C];
            return (p.mean_T_over_N - c4.mean_T_over_N) / std::hypot(p.t_stderr, c4.t_stderr);
        };
        const bool separated = sigmas(2) >= kSeparationSigmas && sigmas(10) >= kSeparationSigmas;

        // Constancy of P_m across C: chi-square against the weighted mean.
        double wsum = 0.0, wpm = 0.0;
        for (const auto& [C, p] : by_c) {
            const double w = 1.0 / std::max(p.pm_stderr * p.pm_stderr, 1e-12);
            wsum += w;
            wpm += w * p.pm;
        }
        const double mean = wpm / wsum;
        double chi2 = 0.0;
        for (const auto& [C, p] : by_c) chi2 += (p.pm - mean) * (p.pm - mean) / std::max(p.pm_stderr * p.pm_stderr, 1e-12);
        const double pval = boost::math::cdf(
            boost::math::complement(boost::math::chi_squared(static_cast<double>(by_c.size()) - 1.0), chi2));
        const bool flat = pval > kConstancyLevel;

        pass = pass && minimum && separated && flat;
        detail += (detail.empty() ? "" : "; ") + std::string("F=") + std::to_string(F) +
                  ": T/N(C=4) minimal over C=2,6..10 " + (minimum ? "yes" : "no") + ", C=2 gap " + fmt(sigmas(2), 3) +
                  " sigma, C=10 gap " + fmt(sigmas(10), 3) + " sigma (need >= " + fmt(kSeparationSigmas) +
                  "), P_m constancy p=" + fmt(pval, 3) + " (need > " + fmt(kConstancyLevel) + ")";
    }
    return {pass, detail};
}

Verdict random_vs_separable(const Context& ctx) {
    CampaignConfig cfg = lattice_config({11, 15, 21, 25}, {10}, 500, 20, 606, ctx);
    const auto separable = campaign(cfg, ctx, "separable");
    cfg.mapping_kind = MappingKind::RandomOutput;
    const auto random = campaign(cfg, ctx, "random");
    bool pass = true;
    std::string detail;
    for (std::size_t i = 0; i < separable.size(); ++i) {
        const PointResult& s = separable[i];
        const PointResult& r = random[i];
        const double bound = s.pm + kOrderingSigmas * std::hypot(s.pm_stderr, r.pm_stderr);
        pass = pass && r.pm <= bound;
        detail += (detail.empty() ? "" : "; ") + std::string("F=") + std::to_string(s.point.F) + " random " +
                  fmt(r.pm) + " vs separable " + fmt(s.pm);
    }
    return {pass, detail + " (need random <= separable + " + fmt(kOrderingSigmas) + " combined stderr)"};
}

// Property suite: exact invariants plus the two small statistical checks.
Verdict properties(const Context& ctx) {
    std::vector<std::string> failed;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok && std::find(failed.begin(), failed.end(), what) == failed.end()) failed.push_back(what);
    };

    // Homogeneous absorption, cached costs against recounts along whole runs.
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        Rng rng(seed);
        const int F = 1 + 2 * static_cast<int>(seed % 6);
        const Graph g = square_lattice(3 + static_cast<int>(seed % 4));
        const Mapping m = seed % 2 ? generate_random_mapping(F, 2 * F, rng) : generate_teacher_mapping(F, 2 * F, rng);
        const int known = seed % 2 ? ref::brute_force(m).min_cost : 0;
        Population pop(g, m, rng);
        while (!pop.absorbed()) {
            pop.step(rng);
            for (int i = 0; i < pop.size(); ++i) {
                expect(pop.cost(i) == ref::misclassified(pop.string(i).spins(), m), "cached cost along runs");
            }
        }
        std::vector<ref::Spins> strings;
        for (int i = 0; i < pop.size(); ++i) strings.push_back(pop.string(i).spins());
        expect(std::all_of(strings.begin(), strings.end(), [&](const auto& s) { return s == strings[0]; }),
               "homogeneous absorption");
        const RunResult res = run_to_absorption(g, m, known, rng);
        expect(res.absorbed && res.final_cost == ref::misclassified(res.final_string.spins(), m),
               "homogeneous absorption");
    }

    // Cost against direct recount over every string, F <= 11.
    for (int F = 1; F <= 11; F += 2) {
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            Rng rng(seed * 100 + static_cast<std::uint64_t>(F));
            const Mapping m = seed % 2 ? generate_random_mapping(F, 2 * F, rng) : generate_teacher_mapping(F, 2 * F, rng);
            for (std::uint64_t v = 0; v < (std::uint64_t{1} << F); ++v) {
                const ref::Spins s = ref::decode(v, F);
                const WeightString w = WeightString::from_spins(s);
                const int c = ref::misclassified(s, m);
                expect(cost(w, m) == c, "exhaustive cost recount");
                expect(cost_from_fields(compute_local_fields(w, m), m) == c, "exhaustive cost recount");
            }
        }
    }

    // Teacher strings misclassify nothing.
    for (int F = 1; F <= 101; F += 2) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Rng rng(seed);
            const Mapping m = generate_teacher_mapping(F, 2 * F, rng);
            expect(ref::misclassified(m.teacher()->spins(), m) == 0, "teacher zero cost");
            expect(cost(*m.teacher(), m) == 0, "teacher zero cost");
        }
    }

    // Gray-code oracle against plain enumeration.
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        Rng rng(seed);
        const int F = 1 + 2 * static_cast<int>(seed % 6);
        const Mapping m = seed % 2 ? generate_random_mapping(F, 2 * F, rng) : generate_teacher_mapping(F, F, rng);
        const ref::Enumeration e = ref::brute_force(m);
        const OracleResult r = exhaustive_min_cost(m, kDefaultOracleLimit, 1 + static_cast<int>(seed % 3));
        expect(r.min_cost == e.min_cost && r.minimizer_count == e.minimizers && r.minimizer.spins() == e.smallest,
               "oracle against enumeration");
    }

    // Active-list events against whole-lattice target picks, F = 5, N = 9.
    {
        const Graph g = square_lattice(3);
        Rng mrng(77);
        const Mapping m = generate_teacher_mapping(5, 10, mrng);
        std::map<ref::Spins, int> fast, naive;
        for (int r = 0; r < 20000; ++r) {
            Rng rng(static_cast<std::uint64_t>(r));
            ++fast[run_to_absorption(g, m, 0, rng).final_string.spins()];
            std::mt19937_64 nrng(5'000'000 + static_cast<std::uint64_t>(r));
            std::vector<ref::Spins> init(9, ref::Spins(5));
            for (auto& s : init) {
                for (auto& v : s) v = std::uniform_int_distribution<int>(0, 1)(nrng) ? 1 : -1;
            }
            ++naive[ref::naive_run(g, m, init, nrng).final_string];
        }
        const double p = ref::chi_square_homogeneity_p(fast, naive);
        if (!ctx.quiet) std::cout << "    active-list vs whole-lattice homogeneity p = " << fmt(p) << std::endl;
        expect(p > kEquivalenceLevel, "active-list equivalence");
    }

    // F = 1: a run fails exactly when every agent starts wrong, so 1 - P_m = 2^-N.
    {
        const Graph g = square_lattice(3);
        constexpr int kRuns = 200000;
        int failures = 0;
        for (int r = 0; r < kRuns; ++r) {
            Rng rng(9'000'000 + static_cast<std::uint64_t>(r));
            const Mapping m = generate_teacher_mapping(1, 2, rng);
            Population pop(g, m, rng);
            bool any_correct = false;
            for (int i = 0; i < pop.size(); ++i) any_correct = any_correct || pop.cost(i) == 0;
            const RunResult res = run_to_absorption(pop, 0, rng);
            expect(res.success == any_correct, "F = 1 exact result");
            failures += res.success ? 0 : 1;
        }
        const double q = std::ldexp(1.0, -9);
        const double z = (failures - kRuns * q) / std::sqrt(kRuns * q * (1 - q));
        if (!ctx.quiet) std::cout << "    F = 1, N = 9: " << failures << " failures in " << kRuns << " runs, z = " << fmt(z, 3) << std::endl;
        expect(std::abs(z) < 4.0, "F = 1 exact result");
    }

    // Same seed, same bytes, for any worker count.
    {
        CampaignConfig cfg = lattice_config({3, 7}, {3, 5}, 12, 6, 707, ctx);
        cfg.threads = 1;
        std::ostringstream a, b, c;
        write_results_csv(a, run_campaign(cfg).points);
        write_results_csv(b, run_campaign(cfg).points);
        cfg.threads = 4;
        write_results_csv(c, run_campaign(cfg).points);
        expect(a.str() == b.str() && a.str() == c.str(), "determinism replay");
    }

    std::string detail = "homogeneous absorption, cost recount, teacher zero cost, oracle, active-list equivalence, "
                         "F = 1 exact, determinism replay";
    if (!failed.empty()) {
        detail = "failed:";
        for (const auto& f : failed) detail += " [" + f + "]";
    }
    return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ACH acceptance suite"};
    std::vector<int> only;
    Context ctx;
    ctx.threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
    std::string out_dir;
    app.add_option("--only", only, "Criteria to run (default: all)")->check(CLI::Range(1, 7))->delimiter(',');
    app.add_option("--threads", ctx.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", out_dir, "Write per-criterion results here");
    app.add_flag("--quiet", ctx.quiet, "Only print verdict lines");
    CLI11_PARSE(app, argc, argv);
    ctx.out_dir = out_dir;

    const std::vector<std::pair<std::string, std::function<Verdict(const Context&)>>> criteria{
        {"relaxation-time law T/N = c F^p", relaxation_time_law},
        {"failure decay in N^(1/4)", failure_decay},
        {"scaling collapse in F/N^(1/4)", collapse},
        {"small-lattice exponential decay and baseline", small_lattices},
        {"connectivity optimum near C = 4", connectivity},
        {"random mappings no easier than separable", random_vs_separable},
        {"property suite", properties},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second(ctx);
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << criteria[i].first << " | "
                  << v.detail << " [" << std::fixed << std::setprecision(1) << secs << " s]" << std::defaultfloat
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
