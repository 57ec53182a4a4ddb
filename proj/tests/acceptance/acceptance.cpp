// Acceptance criteria 1-12. One PASS/FAIL line per criterion; exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]

#include "cli/app.hpp"
#include "rbising/analysis.hpp"
#include "rbising/common.hpp"
#include "rbising/contour.hpp"
#include "rbising/ensemble.hpp"
#include "rbising/gibbs.hpp"
#include "rbising/polymer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace rbising;
namespace fs = std::filesystem;

namespace {

constexpr double split_tol = 1e-12;
constexpr double contour_tol = 1e-9;
constexpr double cluster_identity_tol = 1e-10;
constexpr double energy_tol = 1e-12;
constexpr double llt_d2_tol = 0.05;
constexpr double llt_d34_tol = 0.1;
constexpr double bc_exponent_tol = 0.15;
constexpr double weak_llt_toy_tol = 0.15;
constexpr double weak_llt_cluster_max = -0.35;
constexpr double plus_fraction_tol = 0.05;
constexpr double flip_seed_fraction = 0.8;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

ModelParams at_beta(double beta)
{
    ModelParams p;
    p.beta = beta;
    return p;
}

std::vector<int> all_of(const PolymerSystem& s)
{
    std::vector<int> v(static_cast<std::size_t>(s.size()));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

Outcome c1_split()
{
    const auto dist = FieldDistribution::rademacher(0.5);
    double worst = 0.0;
    for (int n : {2, 3, 4})
        for (double beta : {0.5, 1.0, 2.0})
            for (std::uint64_t s = 0; s < 50; ++s) {
                const LatticeSpec L = build(2, n);
                worst = std::max(worst, enumerate(L, sample(dist, L, derive_seed(1, s)), at_beta(beta)).split_residual());
            }
    return {worst < split_tol, "max residual " + fmt(worst) + " (tol " + fmt(split_tol) + ")"};
}

Outcome c2_contour()
{
    const auto dist = FieldDistribution::rademacher(0.5);
    double worst = 0.0;
    std::map<double, double> by_beta;
    for (int n : {2, 3, 4}) {
        const LatticeSpec L = build(2, n);
        const auto cat = shared_catalog(L);
        for (double beta : {1.0, 1.5, 2.0})
            for (std::uint64_t s = 0; s < 20; ++s) {
                const BoundaryField f = sample(dist, L, derive_seed(2, s));
                const ModelParams p = at_beta(beta);
                const ZPm z = z_pm_contour(*cat, build_weights(*cat, f, p), f, p);
                const ExactResult r = enumerate(L, f, p);
                const double rel = std::max(std::abs(std::expm1(z.logZ_plus - r.logZ_plus)),
                                            std::abs(std::expm1(z.logZ_minus - r.logZ_minus)));
                worst = std::max(worst, rel);
                by_beta[beta] = std::max(by_beta[beta], rel);
            }
    }
    std::string detail = "max rel error " + fmt(worst) + " (tol " + fmt(contour_tol) + "); by beta";
    for (const auto& [b, e] : by_beta)
        detail += " " + fmt(b) + ":" + fmt(e);
    return {worst < contour_tol, detail};
}

Outcome c3_cluster_identity()
{
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 200; ++k) {
        const PolymerSystem s = random_system(1 + static_cast<int>(k % 6), 0.2, 0.5, derive_seed(3, k));
        cplx sum(0.0, 0.0);
        for (const cplx& w : truncated_weight_table(s, all_of(s)))
            sum += w;
        const cplx z = partition_fn(s, all_of(s));
        worst = std::max(worst, std::abs(std::exp(sum) - z) / std::abs(z));
    }
    return {worst < cluster_identity_tol, "max rel error " + fmt(worst) + " over 200 systems"};
}

Outcome c4_kp_bounds()
{
    int kp_systems = 0, kp_fail = 0, drawn = 0;
    for (std::uint64_t k = 0; kp_systems < 100 && k < 100000; ++k) {
        ++drawn;
        const int size = 1 + static_cast<int>(k % 6);
        const PolymerSystem s = random_system(size, 0.2, 0.5, derive_seed(4, k));
        const std::vector<double> a(static_cast<std::size_t>(size), 1.0), b(static_cast<std::size_t>(size), 0.0);
        if (!kp_check(s, a, b).pass)
            continue;
        ++kp_systems;
        for (int g = 0; g < size; ++g)
            kp_fail += !kp_cluster_bound_check(s, a, b, g).pass;
    }

    int der_families = 0, der_fail = 0;
    for (std::uint64_t k = 0; der_families < 50 && k < 100000; ++k) {
        const int size = 1 + static_cast<int>(k % 6);
        const PolymerSystem base = random_system(size, 0.05, 0.5, derive_seed(5, k));
        WeightFamily fam;
        fam.system = base;
        fam.weights = [base](double eta) {
            std::vector<cplx> w = base.weights();
            for (std::size_t i = 0; i < w.size(); ++i)
                w[i] *= std::exp(eta * static_cast<double>(i + 1) / 4.0);
            return w;
        };
        const std::vector<double> a(static_cast<std::size_t>(size), 0.5), c(static_cast<std::size_t>(size), 1.0);
        const BoundCheck r = derivative_bound_check(fam, a, a, c, static_cast<int>(k % static_cast<std::uint64_t>(size)),
                                                    0.0, 1e-5, false);
        if (!r.precondition_ok)
            continue;
        ++der_families;
        der_fail += !r.pass;
    }

    int diff_families = 0, diff_fail = 0;
    for (std::uint64_t k = 0; diff_families < 50 && k < 100000; ++k) {
        const int size = 1 + static_cast<int>(k % 6);
        const PolymerSystem s1 = random_system(size, 0.04, 0.5, derive_seed(6, k));
        const PolymerSystem s2 = random_system(size, 0.04, 0.0, derive_seed(7, k));
        const std::vector<double> a(static_cast<std::size_t>(size), 0.5), c(static_cast<std::size_t>(size), 1.0);
        const BoundCheck r = difference_bound_check(s1, s2.weights(), a, a, c,
                                                    static_cast<int>(k % static_cast<std::uint64_t>(size)), false);
        if (!r.precondition_ok)
            continue;
        ++diff_families;
        diff_fail += !r.pass;
    }
    const bool pass = kp_systems == 100 && kp_fail == 0 && der_families == 50 && der_fail == 0 &&
                      diff_families == 50 && diff_fail == 0;
    return {pass, "cluster bound " + std::to_string(kp_systems) + " systems (" + std::to_string(drawn) +
                      " drawn), failures " + std::to_string(kp_fail) + "; derivative " + std::to_string(der_families) +
                      " families, failures " + std::to_string(der_fail) + "; difference " +
                      std::to_string(diff_families) + " families, failures " + std::to_string(diff_fail)};
}

double energy_identity_error(const SpinConfig& cfg, const BoundaryField& f, const ModelParams& p, const LatticeSpec& L)
{
    const ContourSet set = extract(cfg, L);
    double faces = 0.0;
    for (const auto& g : set.contours)
        faces += g.size();
    std::vector<std::int64_t> ps, ms;
    for (std::int64_t i = 0; i < L.size(); ++i)
        (cfg.spin(i) > 0 ? ps : ms).push_back(i);
    const double via = 2.0 * p.beta * faces + e_term(f, p, ps, +1) + e_term(f, p, ms, -1);
    return std::abs(via - energy(cfg, f, p, L));
}

Outcome c5_energy_theta()
{
    const auto dist = FieldDistribution::rademacher(0.5);
    const ModelParams p = at_beta(1.3);
    double worst = 0.0;
    const LatticeSpec L3 = build(2, 3);
    const BoundaryField f3 = sample(dist, L3, 5);
    for (std::uint64_t b = 0; b < 512; ++b)
        worst = std::max(worst, energy_identity_error(SpinConfig::from_bits(9, b), f3, p, L3));
    const LatticeSpec L4 = build(2, 4);
    const BoundaryField f4 = sample(dist, L4, 5);
    Rng rng(derive_seed(5, 1));
    for (int k = 0; k < 200; ++k)
        worst = std::max(worst, energy_identity_error(SpinConfig::from_bits(16, rng() & 0xFFFF), f4, p, L4));
    std::size_t contours = 0, theta_fail = 0;
    for (int n = 1; n <= 4; ++n) {
        const Catalog cat = catalog(build(2, n), 0);
        for (const auto& g : cat.contours) {
            ++contours;
            theta_fail += !theta_check(g, 2);
        }
    }
    return {worst < energy_tol && theta_fail == 0, "energy max error " + fmt(worst) + " over 712 configs; theta bound " +
                                                       std::to_string(contours - theta_fail) + "/" +
                                                       std::to_string(contours) + " contours"};
}

Outcome c6_llt()
{
    const auto r = FieldDistribution::rademacher(1.0);
    const double s2 = llt_exponent_fit(r, 2, 50, 100).fit.slope;
    const double s3 = llt_exponent_fit(r, 3, 20, 60).fit.slope;
    const double s4 = llt_exponent_fit(r, 4, 10, 24).fit.slope;
    const bool pass =
        std::abs(s2 + 0.5) <= llt_d2_tol && std::abs(s3 + 1.0) <= llt_d34_tol && std::abs(s4 + 1.5) <= llt_d34_tol;
    return {pass, "slopes d2 " + fmt(s2) + ", d3 " + fmt(s3) + ", d4 " + fmt(s4)};
}

Outcome c7_borel_cantelli()
{
    const auto r = FieldDistribution::rademacher(1.0);
    const SequenceSpec full;
    SequenceSpec sparse;
    sparse.sparse = true;
    sparse.omega = 1.0;
    const auto d2 = borel_cantelli_report(r, 2, 1.0, 0.0, full, 400);
    const auto d4 = borel_cantelli_report(r, 4, 1.0, 0.0, full, 400);
    const auto sp = borel_cantelli_report(r, 2, 1.0, 0.0, sparse, 200);
    const bool pass = !d2.convergent && std::abs(d2.tail_exponent + 0.5) <= bc_exponent_tol && d4.convergent &&
                      std::abs(d4.tail_exponent + 1.5) <= bc_exponent_tol && sp.convergent &&
                      std::abs(sp.tail_exponent + 1.5) <= bc_exponent_tol;
    auto tag = [](const BorelCantelliReport& b) {
        return fmt(b.tail_exponent) + (b.convergent ? " convergent" : " divergent");
    };
    return {pass, "d2 full " + tag(d2) + "; d4 full " + tag(d4) + "; d2 sparse omega=1 " + tag(sp)};
}

Outcome c8_gaussian()
{
    const auto r = FieldDistribution::rademacher(0.5);
    FOptions opt;
    opt.method = FMethod::cluster;
    const std::vector<double> ts{0.05, 0.1, 0.15, 0.2};
    bool pass = true;
    std::string detail;
    for (int n : {6, 8, 12}) {
        const LatticeSpec L = build(2, n);
        const CharFnEstimate est = char_fn_mc(L, r, at_beta(2.0), ts, 100000, 8, opt);
        double min_margin = 1e300;
        for (const auto& row : gaussian_bound_check(est, r, L)) {
            pass = pass && row.pass;
            min_margin = std::min(min_margin, row.margin());
        }
        detail += "n=" + std::to_string(n) + " min margin " + fmt(min_margin) + " residual " + fmt(est.residual) + "; ";
    }
    detail += "bound + 3 SE at every t";
    return {pass, detail};
}

Outcome c9_weak_llt()
{
    const auto r = FieldDistribution::rademacher(0.5);
    std::vector<int> ns;
    for (int n = 8; n <= 40; n += 2)
        ns.push_back(n);
    FOptions toy;
    toy.method = FMethod::toy;
    const WeakLltFit t = weak_llt_fit(2, r, at_beta(2.0), -1.0, 1.0, 0.0, ns, 1, 9, toy);
    FOptions cl;
    cl.method = FMethod::cluster;
    const WeakLltFit c = weak_llt_fit(2, r, at_beta(2.0), -1.0, 1.0, 0.0, ns, 20000, 9, cl);
    const bool pass = std::abs(t.fit.slope + 0.5) <= weak_llt_toy_tol && c.fit.slope <= weak_llt_cluster_max &&
                      !c.lower_bound_only;
    return {pass, "toy slope " + fmt(t.fit.slope) + ", cluster slope " + fmt(c.fit.slope)};
}

Outcome c10_chaotic()
{
    const auto r = FieldDistribution::rademacher(0.5);
    FOptions opt;
    opt.method = FMethod::mc;
    opt.mc.sweeps = 400;
    opt.mc.burn_in = 100;
    opt.mc.temperatures = 12;
    opt.mc.beta_min = 0.3;
    opt.mc.seed = 1;
    opt.replicas = 4;
    std::vector<std::int64_t> ns;
    for (std::int64_t n = 4; n <= 20; ++n)
        ns.push_back(n);
    const int seeds = 200;
    double plus_sum = 0.0;
    int plus_seeds = 0, flip_seeds = 0, antisym_fail = 0, undecided = 0;
    for (int s = 0; s < seeds; ++s) {
        const std::uint64_t master = derive_seed(10, static_cast<std::uint64_t>(s));
        const ScanResult a = limit_point_scan(r, 2, at_beta(2.0), ns, master, opt, {{1.0, 0.0}});
        const ScanResult b = limit_point_scan(r, 2, at_beta(2.0), ns, master, opt, {{1.0, 0.0}}, true);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const auto& x = a.records[i];
            const auto& y = b.records[i];
            antisym_fail += !(y.S == -x.S && y.sign == -x.sign && y.mc_m == -x.mc_m);
            undecided += x.undecided;
        }
        if (!std::isnan(a.summary.plus_fraction)) {
            plus_sum += a.summary.plus_fraction;
            ++plus_seeds;
        }
        flip_seeds += a.summary.sign_flips > 0;
    }
    const double plus = plus_sum / plus_seeds;
    const double flips = static_cast<double>(flip_seeds) / seeds;
    const bool pass = std::abs(plus - 0.5) <= plus_fraction_tol && flips >= flip_seed_fraction && antisym_fail == 0;
    return {pass, "plus fraction " + fmt(plus) + ", seeds with a flip " + fmt(flips) + ", antisymmetry failures " +
                      std::to_string(antisym_fail) + ", undecided rows " + std::to_string(undecided)};
}

Outcome c11_magnetization()
{
    const auto dist = FieldDistribution::rademacher(0.5);
    const ModelParams p = at_beta(2.0);
    const Site origin{0, 0};
    double gap[2][10];
    int k = 0;
    for (int n : {3, 4}) {
        const LatticeSpec L = build(2, n);
        const std::int64_t o = L.index(origin);
        const double ref = pm_reference(L, p, +1).mag[static_cast<std::size_t>(o)];
        for (std::uint64_t s = 0; s < 10; ++s) {
            const ExactResult r = enumerate(L, sample(dist, L, derive_seed(11, s)), p);
            gap[k][s] = std::abs(r.mag_plus[static_cast<std::size_t>(o)] - ref);
        }
        ++k;
    }
    int decreasing = 0;
    double worst_ratio = 0.0;
    for (int s = 0; s < 10; ++s) {
        decreasing += gap[1][s] < gap[0][s];
        worst_ratio = std::max(worst_ratio, gap[1][s] / gap[0][s]);
    }
    return {decreasing == 10, std::to_string(decreasing) + "/10 seeds decreasing, worst ratio " + fmt(worst_ratio)};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> run_files(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

Outcome c12_determinism()
{
    const std::vector<std::vector<std::string>> commands{
        {"exact", "--n", "3", "--seeds", "4", "--beta", "1.5"},
        {"contour-check", "--n", "3"},
        {"polymer-test", "--samples", "50"},
        {"ensemble-check", "--n", "3", "--beta", "2", "--seeds", "4"},
        {"mc", "--n", "6", "--sweeps", "2000", "--burn-in", "200", "--seeds", "3", "--temperatures", "3"},
        {"toy", "--d", "2", "--n-range", "10:60"},
        {"charfn", "--n", "4", "--samples", "500", "--beta", "2", "--method", "cluster"},
        {"llt", "--n-range", "8:20:2", "--method", "cluster", "--samples", "500"},
        {"scan", "--n-range", "4:10", "--method", "mc", "--sweeps", "200", "--burn-in", "50", "--replicas", "3",
         "--temperatures", "4"},
        {"verify", "--suite", "polymer", "--suite", "analysis"}};
    const fs::path base = fs::temp_directory_path() / "rbising-acceptance-determinism";
    int mismatches = 0, failures = 0;
    std::string bad;
    std::streambuf* saved = std::cout.rdbuf();
    std::ostringstream sink;
    for (const auto& cmd : commands) {
        std::vector<std::map<std::string, std::string>> outputs;
        for (const char* threads : {"1", "1", "4"}) {
            const fs::path root = base / (cmd[0] + "-" + threads + "-" + std::to_string(outputs.size()));
            fs::remove_all(root);
            auto args = cmd;
            args.insert(args.end(), {"--threads", threads, "--out", root.string()});
            std::cout.rdbuf(sink.rdbuf());
            const int code = cli::run_cli(args);
            std::cout.rdbuf(saved);
            failures += code != 0;
            outputs.push_back(run_files(root));
        }
        if (outputs[0].empty() || outputs[0] != outputs[1] || outputs[0] != outputs[2]) {
            ++mismatches;
            bad += " " + cmd[0];
        }
    }
    fs::remove_all(base);
    return {mismatches == 0 && failures == 0, std::to_string(commands.size()) + " subcommands, mismatches " +
                                                  std::to_string(mismatches) + bad + ", nonzero exits " +
                                                  std::to_string(failures)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria{
        {1, "partition split identity", 60, c1_split},
        {2, "contour ensemble against enumeration", 300, c2_contour},
        {3, "cluster expansion identity", 10, c3_cluster_identity},
        {4, "Kotecky-Preiss bounds", 30, c4_kp_bounds},
        {5, "energy identity and theta bound", 30, c5_energy_theta},
        {6, "toy local-limit exponents", 60, c6_llt},
        {7, "Borel-Cantelli classification", 60, c7_borel_cantelli},
        {8, "Gaussian characteristic-function bound", 900, c8_gaussian},
        {9, "weak local-limit scaling", 600, c9_weak_llt},
        {10, "chaotic size dependence", 1800, c10_chaotic},
        {11, "magnetization equivalence", 300, c11_magnetization},
        {12, "determinism", 1e300, c12_determinism}};

    std::set<int> only;
    for (int i = 1; i < argc; ++i)
        only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("criterion %2d %s: %s | %s | %.1f s%s\n", c.id, c.name, pass ? "PASS" : "FAIL", o.detail.c_str(),
                    secs, in_time ? "" : " (over budget)");
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
