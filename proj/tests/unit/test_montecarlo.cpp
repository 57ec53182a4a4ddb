#include "doctest.h"

#include "rbising/common.hpp"
#include "rbising/gibbs.hpp"
#include "rbising/montecarlo.hpp"

#include <cmath>
#include <numeric>

using namespace rbising;

namespace {

ModelParams at_beta(double beta)
{
    ModelParams p;
    p.beta = beta;
    return p;
}

McParams chain(std::int64_t sweeps, std::int64_t burn_in, std::uint64_t seed)
{
    McParams mc;
    mc.sweeps = sweeps;
    mc.burn_in = burn_in;
    mc.seed = seed;
    return mc;
}

} // namespace

TEST_CASE("parameter validation")
{
    McParams mc = chain(100, 100, 1);
    CHECK_THROWS_AS(mc.validate(), ParamError);
    mc = chain(100, 10, 1);
    mc.thin = 0;
    CHECK_THROWS_AS(mc.validate(), ParamError);
    mc = chain(100, 10, 1);
    mc.temperatures = 0;
    CHECK_THROWS_AS(mc.validate(), ParamError);
    CHECK_THROWS_AS(parse_algorithm("gibbs"), ParamError);
    CHECK(parse_algorithm(algorithm_name(Algorithm::wolff_ghost)) == Algorithm::wolff_ghost);
    const LatticeSpec L = build(4, 2);
    CHECK_THROWS_AS(run(L, constant_field(L, 0.0), at_beta(1.0), chain(100, 10, 1)), UnsupportedError);
}

TEST_CASE("detailed balance of single-site kernels")
{
    const LatticeSpec L = build(2, 2);
    ModelParams p = at_beta(0.9);
    p.eta = 0.2;
    p.probe_site = Site{0, 0};
    const SpinSystem sys(L, sample(FieldDistribution::uniform(0.7), L, 5), p);
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
    CHECK(worst < 1e-14);
}

TEST_CASE("chain energy matches the model energy")
{
    const LatticeSpec L = build(2, 3);
    const BoundaryField f = sample(FieldDistribution::rademacher(0.5), L, 2);
    const SpinSystem sys(L, f, at_beta(1.4));
    for (std::uint64_t b = 0; b < 512; b += 37) {
        const SpinConfig c = SpinConfig::from_bits(9, b);
        CHECK(sys.energy(c.to_int8()) == doctest::Approx(energy(c, f, at_beta(1.4), L)).epsilon(1e-14));
    }
}

TEST_CASE("stationarity against the exact distribution")
{
    const LatticeSpec L = build(2, 2);
    CHECK(stationarity_check(L, constant_field(L, 0.0), at_beta(0.5), chain(10, 100, 1), 10000000) < 0.01);
    CHECK(stationarity_check(L, constant_field(L, 0.0), at_beta(0.0), chain(10, 100, 2), 10000000) < 0.005);
    const BoundaryField f = sample(FieldDistribution::rademacher(0.5), L, 3);
    for (Algorithm a : {Algorithm::metropolis, Algorithm::wolff_ghost}) {
        McParams mc = chain(10, 100, 4);
        mc.algorithm = a;
        CHECK(stationarity_check(L, f, at_beta(0.7), mc, 2000000) < 0.01);
    }
    McParams pt = chain(10, 100, 5);
    pt.temperatures = 4;
    pt.beta_min = 0.2;
    CHECK(stationarity_check(L, f, at_beta(0.7), pt, 2000000) < 0.01);
    CHECK_THROWS_AS(stationarity_check(build(2, 5), constant_field(build(2, 5), 0.0), at_beta(1.0), pt, 10), SizeError);
}

TEST_CASE("a broken kernel is detected")
{
    const LatticeSpec L = build(2, 2);
    const SweepKernel biased = [](std::vector<std::int8_t>& s, Rng& rng) {
        for (auto& x : s)
            x = uniform01(rng) < 0.8 ? 1 : -1;
    };
    CHECK(stationarity_check(L, constant_field(L, 0.0), at_beta(0.5), chain(10, 100, 1), 200000, biased) > 0.1);
}

TEST_CASE("magnetization estimates")
{
    const LatticeSpec L = build(2, 3);
    const McResult hot = run(L, constant_field(L, 0.0), at_beta(0.0), chain(20000, 100, 3));
    REQUIRE(hot.m.reported);
    CHECK(hot.m.se >= 0.0);
    CHECK(std::abs(hot.m.mean) < 3.0 * hot.m.se);

    const BoundaryField f = sample(FieldDistribution::rademacher(0.5), L, 8);
    const ExactResult r = enumerate(L, f, at_beta(1.0));
    const double exact_m = std::accumulate(r.mag.begin(), r.mag.end(), 0.0) / 9.0;
    const McResult est = run(L, f, at_beta(1.0), chain(200000, 1000, 4));
    CHECK(std::abs(est.m.mean - exact_m) < 3.0 * est.m.se);
    for (std::size_t i = 0; i < 9; ++i)
        CHECK(std::abs(est.site[i].mean - r.mag[i]) < 4.0 * est.site[i].se);

    const LatticeSpec big = build(2, 16);
    const McResult ordered = run(big, constant_field(big, 0.5), at_beta(2.0), chain(2000, 200, 5));
    CHECK(ordered.m.mean > 0.9);

    const McResult few = run(L, f, at_beta(1.0), chain(20, 10, 4));
    CHECK(!few.m.reported);
}

TEST_CASE("identical seeds give identical chains")
{
    const LatticeSpec L = build(2, 6);
    const BoundaryField f = sample(FieldDistribution::rademacher(0.5), L, 1);
    McParams mc = chain(3000, 100, 77);
    mc.temperatures = 3;
    mc.beta_min = 0.5;
    const McResult a = run(L, f, at_beta(1.5), mc);
    const McResult b = run(L, f, at_beta(1.5), mc);
    CHECK(a.m.mean == b.m.mean);
    CHECK(a.m.se == b.m.se);
    const DominantSign da = dominant_sign(L, f, at_beta(1.5), mc, 4);
    const DominantSign db = dominant_sign(L, f, at_beta(1.5), mc, 4);
    CHECK(da.replica_signs == db.replica_signs);
    CHECK(da.mean_m == db.mean_m);
}

TEST_CASE("dominant sign")
{
    const LatticeSpec L = build(2, 8);
    McParams mc = chain(500, 100, 1);
    mc.temperatures = 8;
    mc.beta_min = 0.3;
    const DominantSign plus = dominant_sign(L, constant_field(L, 0.5), at_beta(2.0), mc);
    CHECK(plus.sign == 1);
    CHECK(plus.confidence == 1.0);
    CHECK(!plus.undecided);
    const DominantSign minus = dominant_sign(L, constant_field(L, -0.5), at_beta(2.0), mc);
    CHECK(minus.sign == -1);
    CHECK(minus.confidence == 1.0);
}

// Seeds with S = 0 have |F| of order 1e-3 at n = 4: the two basins carry equal weight and no
// sampler resolves the sign, so agreement is scored on seeds with |F| >= 1.
TEST_CASE("dominant sign follows the exact boundary free energy")
{
    const LatticeSpec L = build(2, 4);
    McParams mc = chain(400, 100, 3);
    mc.temperatures = 8;
    mc.beta_min = 0.3;
    int agree = 0, total = 0, opposite = 0, flipped_total = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const BoundaryField f = sample(FieldDistribution::rademacher(0.5), L, s);
        const double F = enumerate(L, f, at_beta(2.0)).F;
        if (std::abs(F) < 1.0)
            continue;
        const DominantSign d = dominant_sign(L, f, at_beta(2.0), mc);
        ++total;
        agree += d.sign == (F > 0 ? 1 : -1);
        if (flipped_total < 10) {
            ++flipped_total;
            opposite += dominant_sign(L, f.negated(), at_beta(2.0), mc).sign == -d.sign;
        }
    }
    CHECK(total >= 60);
    CHECK(agree >= 0.95 * total);
    CHECK(opposite == flipped_total);
}
