#include "doctest.h"

#include "rbising/common.hpp"
#include "rbising/contour.hpp"
#include "rbising/gibbs.hpp"

#include <cmath>
#include <random>

using namespace rbising;

namespace {

// Independent energy: every ordered neighbour pair counted once via index order.
double energy_oracle(const std::vector<int>& s, const LatticeSpec& L, const std::vector<double>& h, double beta)
{
    double e = 0.0;
    for (std::int64_t i = 0; i < L.size(); ++i) {
        const Site x = L.coords(i);
        for (int a = 0; a < L.d(); ++a) {
            Site y = x;
            ++y[static_cast<std::size_t>(a)];
            if (L.contains(y))
                e -= beta * (s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(L.index(y))] - 1);
        }
        e -= h[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(i)];
    }
    return e;
}

std::vector<int> spins_of(std::uint64_t bits, std::int64_t n)
{
    std::vector<int> s(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        s[static_cast<std::size_t>(i)] = (bits >> i) & 1ULL ? 1 : -1;
    return s;
}

ModelParams at_beta(double beta)
{
    ModelParams p;
    p.beta = beta;
    return p;
}

} // namespace

TEST_CASE("energy examples")
{
    const LatticeSpec L = build(2, 2);
    CHECK(energy(SpinConfig(4, +1), constant_field(L, 1.0), at_beta(1.0), L) == -4.0);
    SpinConfig one(4, +1);
    one.flip(0);
    CHECK(energy(one, constant_field(L, 0.0), at_beta(1.0), L) == 4.0);
    for (std::uint64_t b = 0; b < 16; ++b) {
        const SpinConfig c = SpinConfig::from_bits(4, b);
        CHECK(energy(c, constant_field(L, 0.0), at_beta(0.7), L) == energy(c.negated(), constant_field(L, 0.0), at_beta(0.7), L));
    }
}

TEST_CASE("energy matches a direct bond sum")
{
    const LatticeSpec L = build(2, 3);
    const BoundaryField f = sample(FieldDistribution::uniform(0.8), L, 17);
    ModelParams p = at_beta(2.0);
    p.probe_site = Site{0, 1};
    p.eta = 0.3;
    std::vector<double> h = f.values();
    h[static_cast<std::size_t>(L.index(Site{0, 1}))] += 0.3;
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        const std::uint64_t bits = rng() & 511;
        CHECK(energy(SpinConfig::from_bits(9, bits), f, p, L) ==
              doctest::Approx(energy_oracle(spins_of(bits, 9), L, h, 2.0)).epsilon(1e-14));
    }
}

TEST_CASE("plus and minus boundary energies")
{
    const LatticeSpec L = build(2, 2);
    CHECK(energy_pm(SpinConfig(4, +1), +1, at_beta(1.0), L) == -4.0);
    const LatticeSpec L3 = build(2, 3);
    std::vector<double> h(9, 0.0);
    for (std::int64_t i : L3.boundary_indices())
        h[static_cast<std::size_t>(i)] = 2.0;
    for (std::uint64_t b = 0; b < 512; ++b) {
        const SpinConfig c = SpinConfig::from_bits(9, b);
        CHECK(energy_pm(c, +1, at_beta(2.0), L3) == energy_pm(c.negated(), -1, at_beta(2.0), L3));
        CHECK(energy_pm(c, +1, at_beta(2.0), L3) == doctest::Approx(energy_oracle(spins_of(b, 9), L3, h, 2.0)));
    }
}

TEST_CASE("infinite temperature, zero field")
{
    const LatticeSpec L = build(2, 2);
    const ExactResult r = enumerate(L, constant_field(L, 0.0), at_beta(0.0));
    CHECK(std::exp(r.logZ) == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(r.F == 0.0);
    for (double m : r.mag)
        CHECK(std::abs(m) < 1e-15);
}

TEST_CASE("partition split over plus and minus configurations")
{
    for (int n = 2; n <= 4; ++n) {
        const LatticeSpec L = build(2, n);
        for (double beta : {0.5, 1.0, 2.0})
            for (std::uint64_t s = 0; s < 50; ++s) {
                const ExactResult r = enumerate(L, sample(FieldDistribution::rademacher(0.5), L, s), at_beta(beta));
                CHECK(r.split_residual() < 1e-12);
                CHECK(r.count_plus + r.count_minus == (1ULL << L.size()));
                CHECK(r.count_plus == r.count_minus);
            }
    }
    const LatticeSpec L = build(2, 3);
    const ExactResult r = enumerate(L, sample(FieldDistribution::rademacher(0.5), L, 42), at_beta(1.0));
    CHECK(std::abs(std::exp(r.logZ_plus) + std::exp(r.logZ_minus) - std::exp(r.logZ)) / std::exp(r.logZ) < 1e-12);
}

TEST_CASE("enumeration agrees with a brute-force sum")
{
    const LatticeSpec L = build(2, 3);
    const BoundaryField f = sample(FieldDistribution::rademacher(0.5), L, 9);
    const ExactResult r = enumerate(L, f, at_beta(1.3));
    LogSumExp all, plus;
    std::vector<double> m(9, 0.0);
    double z = 0.0;
    for (std::uint64_t b = 0; b < 512; ++b) {
        const SpinConfig c = SpinConfig::from_bits(9, b);
        const double w = -energy_oracle(spins_of(b, 9), L, f.values(), 1.3);
        all.add(w);
        if (exterior_sign(c, L) > 0)
            plus.add(w);
        z += std::exp(w);
        for (int i = 0; i < 9; ++i)
            m[static_cast<std::size_t>(i)] += std::exp(w) * c.spin(i);
    }
    CHECK(r.logZ == doctest::Approx(all.value()).epsilon(1e-13));
    CHECK(r.logZ_plus == doctest::Approx(plus.value()).epsilon(1e-13));
    for (int i = 0; i < 9; ++i)
        CHECK(r.mag[static_cast<std::size_t>(i)] == doctest::Approx(m[static_cast<std::size_t>(i)] / z).epsilon(1e-12));
}

TEST_CASE("spin-flip covariance")
{
    const LatticeSpec L = build(2, 3);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const BoundaryField f = sample(FieldDistribution::uniform(0.5), L, s);
        const ExactResult a = enumerate(L, f, at_beta(1.0));
        const ExactResult b = enumerate(L, f.negated(), at_beta(1.0));
        CHECK(b.F == doctest::Approx(-a.F).epsilon(1e-12));
        CHECK(b.logZ == doctest::Approx(a.logZ).epsilon(1e-12));
        for (std::size_t i = 0; i < a.mag.size(); ++i) {
            CHECK(b.mag[i] == doctest::Approx(-a.mag[i]).epsilon(1e-10));
            CHECK(b.mag_plus[i] == doctest::Approx(-a.mag_minus[i]).epsilon(1e-10));
            CHECK(std::abs(a.mag[i]) <= 1.0);
        }
    }
    CHECK(enumerate(L, constant_field(L, 0.0), at_beta(1.7)).F == 0.0);
}

TEST_CASE("raising the field does not lower magnetizations")
{
    const LatticeSpec L = build(2, 3);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const BoundaryField f = sample(FieldDistribution::rademacher(0.5), L, s);
        const ExactResult base = enumerate(L, f, at_beta(0.8));
        for (double delta : {0.1, 0.2}) {
            std::vector<double> v = f.values();
            for (std::int64_t i : L.boundary_indices())
                v[static_cast<std::size_t>(i)] += delta;
            const ExactResult up = enumerate(L, BoundaryField(L, v, s, "shifted"), at_beta(0.8));
            for (std::size_t i = 0; i < v.size(); ++i)
                CHECK(up.mag[i] >= base.mag[i] - 1e-12);
        }
    }
}

TEST_CASE("size caps")
{
    const LatticeSpec L = build(2, 5);
    CHECK_THROWS_AS(enumerate(L, constant_field(L, 0.0), at_beta(1.0)), SizeError);
    CHECK_THROWS_AS(enumerate(build(2, 6), constant_field(build(2, 6), 0.0), at_beta(1.0), 40), SizeError);
    CHECK_THROWS_AS(pm_reference(L, at_beta(1.0), +1), SizeError);
}

TEST_CASE("plus and minus reference states")
{
    const LatticeSpec L = build(2, 3);
    const PmResult hot = pm_reference(L, at_beta(0.0), +1);
    for (double m : hot.mag)
        CHECK(std::abs(m) < 1e-15);
    const PmResult plus = pm_reference(L, at_beta(1.0), +1);
    const PmResult minus = pm_reference(L, at_beta(1.0), -1);
    for (std::size_t i = 0; i < plus.mag.size(); ++i)
        CHECK(plus.mag[i] == doctest::Approx(-minus.mag[i]).epsilon(1e-12));
    std::vector<double> h(9, 0.0);
    for (std::int64_t i : L.boundary_indices())
        h[static_cast<std::size_t>(i)] = 1.0;
    double z = 0.0, m0 = 0.0;
    for (std::uint64_t b = 0; b < 512; ++b) {
        const auto s = spins_of(b, 9);
        const double w = std::exp(-energy_oracle(s, L, h, 1.0));
        z += w;
        m0 += w * s[4];
    }
    CHECK(plus.mag[4] == doctest::Approx(m0 / z).epsilon(1e-12));
    CHECK(plus.mag[4] > 0.0);
}

TEST_CASE("probe derivative")
{
    const LatticeSpec L = build(2, 3);
    const BoundaryField zero = constant_field(L, 0.0);
    const auto [m0, fd0] = probe_derivative_check(L, zero, at_beta(0.0), Site{0, 0}, 1e-4);
    CHECK(std::abs(m0) < 1e-12);
    CHECK(std::abs(fd0) < 1e-8);
    const BoundaryField f = sample(FieldDistribution::rademacher(0.5), L, 3);
    for (const Site& x : {Site{0, 0}, Site{1, -1}}) {
        const auto [m, fd] = probe_derivative_check(L, f, at_beta(1.0), x, 1e-4);
        CHECK(std::abs(m - fd) < 1e-6);
        const ExactResult r = enumerate(L, f, at_beta(1.0));
        const auto [mp, fdp] = probe_derivative_check(L, f, at_beta(1.0), x, 1e-4, Restriction::plus);
        CHECK(mp == doctest::Approx(r.mag_plus[static_cast<std::size_t>(L.index(x))]).epsilon(1e-12));
        CHECK(std::abs(mp - fdp) < 1e-6);
    }
}

TEST_CASE("uniform configurations lie on their own side")
{
    for (int n = 2; n <= 4; ++n) {
        const LatticeSpec L = build(2, n);
        const auto& table = omega_plus_table(L);
        CHECK(in_omega_plus(table, (1ULL << L.size()) - 1));
        CHECK(!in_omega_plus(table, 0));
    }
}

TEST_CASE("spin configurations pack and unpack")
{
    const SpinConfig c = SpinConfig::from_bits(9, 0b101100111);
    CHECK(c.pack() == 0b101100111);
    CHECK(SpinConfig::from_spins(c.unpack()) == c);
    CHECK(c.negated().pack() == (~0b101100111ULL & 511));
}
