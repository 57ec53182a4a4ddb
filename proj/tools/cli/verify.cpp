#include "app.hpp"

#include "rbising/analysis.hpp"
#include "rbising/common.hpp"
#include "rbising/contour.hpp"
#include "rbising/ensemble.hpp"
#include "rbising/gibbs.hpp"
#include "rbising/montecarlo.hpp"
#include "rbising/polymer.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace rbising::cli {

namespace {

class Checker {
public:
    explicit Checker(SuiteResult& r) : r_(r) {}

    void expect(bool ok, const std::string& what)
    {
        if (!ok)
            r_.failures.push_back(what);
    }

    void close(double got, double want, double tol, const std::string& what)
    {
        if (!(std::abs(got - want) <= tol)) {
            std::ostringstream os;
            os.precision(17);
            os << what << ": got " << got << ", want " << want << " +/- " << tol;
            r_.failures.push_back(os.str());
        }
    }

private:
    SuiteResult& r_;
};

// Oracle perturbation used by the negative control.
double fault(bool on)
{
    return on ? 1e-3 : 0.0;
}

void polymer_suite(Checker& c, bool broken)
{
    double worst = 0.0;
    int kp_systems = 0;
    for (int i = 0; i < 40; ++i) {
        const PolymerSystem sys = random_system(1 + i % 6, 0.2, 0.5, derive_seed(11, static_cast<std::uint64_t>(i)));
        std::vector<int> all(static_cast<std::size_t>(sys.size()));
        std::iota(all.begin(), all.end(), 0);
        const cplx z = partition_fn(sys, all) * (1.0 + fault(broken));
        cplx s(0.0, 0.0);
        for (const cplx& w : truncated_weight_table(sys, all))
            s += w;
        worst = std::max(worst, std::abs(std::exp(s) - z) / std::abs(z));
        const std::vector<double> a(all.size(), 1.0), b(all.size(), 0.0);
        if (kp_check(sys, a, b).pass) {
            ++kp_systems;
            for (int g = 0; g < sys.size(); ++g)
                c.expect(kp_cluster_bound_check(sys, a, b, g).pass, "KP cluster bound, system " + std::to_string(i));
        }
    }
    c.close(worst, 0.0, 1e-10, "cluster identity exp(sum w^T) = Z");
    c.expect(kp_systems > 0, "no random system satisfied KP");
    c.close(std::abs(partition_fn(PolymerSystem(std::vector<cplx>{}), {}) - 1.0), 0.0, 0.0, "Z of the empty system");
}

void contour_suite(Checker& c, bool broken)
{
    const LatticeSpec L = build(2, 3);
    const BoundaryField f = sample(FieldDistribution::rademacher(0.5), L, 5);
    ModelParams p;
    p.beta = 1.3;
    double worst = 0.0;
    int antisym = 0;
    for (std::uint64_t bits = 0; bits < 512; ++bits) {
        const SpinConfig cfg = SpinConfig::from_bits(9, bits);
        const ContourSet set = extract(cfg, L);
        double faces = 0.0;
        for (const auto& g : set.contours)
            faces += g.size();
        std::vector<std::int64_t> ps, ms;
        for (std::int64_t i = 0; i < 9; ++i)
            (cfg.spin(i) > 0 ? ps : ms).push_back(i);
        const double via = 2.0 * p.beta * faces + e_term(f, p, ps, +1) + e_term(f, p, ms, -1) + fault(broken);
        worst = std::max(worst, std::abs(via - energy(cfg, f, p, L)));
        antisym += exterior_sign(cfg.negated(), L) != -set.exterior_sign;
    }
    c.close(worst, 0.0, 1e-12, "energy/contour identity, d=2 n=3");
    c.expect(antisym == 0, "exterior sign antisymmetry");
    c.expect(catalog(build(2, 2), 0).contours.size() == 7, "catalog size d=2 n=2");
    const Catalog cat = catalog(L, 0);
    for (const auto& g : cat.contours)
        c.expect(theta_check(g, 2), "theta bound");
    c.close(theta(2), 3.0 + 2.0 * std::sqrt(2.0), 1e-12, "theta(2)");
}

void gibbs_suite(Checker& c, bool broken)
{
    const LatticeSpec L = build(2, 3);
    const auto dist = FieldDistribution::rademacher(0.5);
    ModelParams p;
    p.beta = 1.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const BoundaryField f = sample(dist, L, s);
        const ExactResult r = enumerate(L, f, p);
        c.close(r.split_residual(), 0.0, 1e-12, "split identity");
        const ExactResult m = enumerate(L, f.negated(), p);
        c.expect(m.F == -r.F, "F(-lambda) = -F(lambda)");
    }
    ModelParams hot;
    hot.beta = 0.0;
    const ExactResult z = enumerate(build(2, 2), constant_field(build(2, 2), 0.0), hot);
    c.close(z.logZ, std::log(16.0) + fault(broken), 1e-12, "beta = 0 partition function");
}

void ensemble_suite(Checker& c, bool broken)
{
    const LatticeSpec L = build(2, 3);
    ModelParams p;
    p.beta = 2.0;
    const auto dist = FieldDistribution::rademacher(0.5);
    const ClusterExpansion ce(L, 8);
    for (std::uint64_t s = 0; s < 3; ++s) {
        const BoundaryField f = sample(dist, L, s);
        const ExactResult r = enumerate(L, f, p);
        const ZPm z = z_pm_contour(L, f, p);
        c.close(z.F, r.F + fault(broken), 1e-6, "contour ensemble F, beta = 2");
        c.close(ce.F(f, p), r.F, 1e-5, "cluster F, beta = 2");
        c.expect(ce.F(f.negated(), p) == -ce.F(f, p), "cluster F antisymmetry");
    }
}

void analysis_suite(Checker& c, bool broken)
{
    const auto r1 = FieldDistribution::rademacher(1.0);
    c.close(s_distribution(r1, 12).prob(0.0), 924.0 / 4096.0 + fault(broken), 1e-14, "P(S_12 = 0)");
    c.close(llt_exponent_fit(r1, 2, 50, 100).fit.slope, -0.5, 0.05, "toy local-limit slope, d=2");
    const LatticeSpec L = build(2, 2);
    ModelParams p;
    p.beta = 2.0;
    const auto r5 = FieldDistribution::rademacher(0.5);
    const cplx psi = char_fn_exact(L, r5, p, 0.3);
    c.close(psi.imag(), 0.0, 1e-12, "Im psi for a symmetric law");
    c.close(std::abs(char_fn_exact(L, r5, p, 0.0) - 1.0), 0.0, 1e-15, "psi(0)");
}

void montecarlo_suite(Checker& c, bool broken)
{
    const LatticeSpec L = build(2, 2);
    const BoundaryField f = sample(FieldDistribution::rademacher(0.5), L, 3);
    ModelParams p;
    p.beta = 0.7;
    const SpinSystem sys(L, f, p);
    // Detailed balance of single-site kernels on all 16 states.
    double worst = 0.0;
    for (int bits = 0; bits < 16; ++bits) {
        std::vector<std::int8_t> s(4);
        for (int i = 0; i < 4; ++i)
            s[static_cast<std::size_t>(i)] = (bits >> i) & 1 ? 1 : -1;
        for (int i = 0; i < 4; ++i) {
            auto t = s;
            t[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(-t[static_cast<std::size_t>(i)]);
            for (Algorithm a : {Algorithm::heat_bath, Algorithm::metropolis}) {
                const double fwd = std::exp(-sys.energy(s)) * sys.flip_probability(s, i, a);
                const double bwd = std::exp(-sys.energy(t)) * sys.flip_probability(t, i, a);
                worst = std::max(worst, std::abs(fwd - bwd) / std::max(fwd, bwd));
            }
        }
    }
    c.close(worst, fault(broken), 1e-12, "detailed balance, 4 sites");
    McParams mc;
    mc.burn_in = 200;
    mc.seed = 9;
    for (Algorithm a : {Algorithm::heat_bath, Algorithm::wolff_ghost}) {
        mc.algorithm = a;
        const double tv = stationarity_check(L, f, p, mc, 40000);
        c.expect(tv < 0.03, algorithm_name(a) + " stationarity (TV distance " + std::to_string(tv) + ")");
    }
}

const std::map<std::string, std::function<void(Checker&, bool)>>& suites()
{
    static const std::map<std::string, std::function<void(Checker&, bool)>> s{
        {"polymer", polymer_suite}, {"contour", contour_suite}, {"gibbs", gibbs_suite},
        {"ensemble", ensemble_suite}, {"analysis", analysis_suite}, {"montecarlo", montecarlo_suite}};
    return s;
}

} // namespace

std::vector<std::string> suite_names()
{
    return {"polymer", "contour", "gibbs", "ensemble", "analysis", "montecarlo"};
}

SuiteResult run_suite(const std::string& name, const std::string& inject_fault)
{
    SuiteResult r;
    r.name = name;
    const auto it = suites().find(name);
    if (it == suites().end()) {
        r.failures.push_back("unknown suite");
        return r;
    }
    Checker c(r);
    try {
        it->second(c, inject_fault == name);
    } catch (const std::exception& e) {
        r.failures.push_back(std::string("exception: ") + e.what());
    }
    r.pass = r.failures.empty();
    return r;
}

} // namespace rbising::cli
