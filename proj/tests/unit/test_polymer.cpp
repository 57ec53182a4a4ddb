#include "doctest.h"

#include "rbising/common.hpp"
#include "rbising/polymer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

using namespace rbising;

namespace {

std::vector<int> all_of(const PolymerSystem& s)
{
    std::vector<int> v(static_cast<std::size_t>(s.size()));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

// Direct sum over compatible subsets of the polymers selected by `mask`.
cplx z_oracle(const PolymerSystem& s, std::uint32_t mask)
{
    cplx z(0.0, 0.0);
    for (std::uint32_t sub = mask;; sub = (sub - 1) & mask) {
        bool ok = true;
        cplx w(1.0, 0.0);
        for (int i = 0; i < s.size() && ok; ++i) {
            if (!((sub >> i) & 1U))
                continue;
            w *= s.weight(i);
            for (int j = i + 1; j < s.size(); ++j)
                if ((sub >> j) & 1U && s.incompatible(i, j))
                    ok = false;
        }
        if (ok)
            z += w;
        if (sub == 0)
            break;
    }
    return z;
}

cplx wt_oracle(const PolymerSystem& s, std::uint32_t delta)
{
    cplx acc(0.0, 0.0);
    for (std::uint32_t sub = delta;; sub = (sub - 1) & delta) {
        const int sign = (std::popcount(delta ^ sub) % 2) ? -1 : 1;
        acc += static_cast<double>(sign) * std::log(z_oracle(s, sub));
        if (sub == 0)
            break;
    }
    return acc;
}

std::vector<int> members(std::uint32_t mask)
{
    std::vector<int> out;
    for (int i = 0; i < 32; ++i)
        if ((mask >> i) & 1U)
            out.push_back(i);
    return out;
}

PolymerSystem pair(cplx w1, cplx w2, bool incompatible)
{
    PolymerSystem s(std::vector<cplx>{w1, w2});
    if (incompatible)
        s.set_incompatible(0, 1);
    return s;
}

} // namespace

TEST_CASE("relation is reflexive and symmetric")
{
    PolymerSystem s(std::vector<cplx>{0.1, 0.2, 0.3});
    s.set_incompatible(0, 2);
    for (int i = 0; i < 3; ++i) {
        CHECK(s.incompatible(i, i));
        for (int j = 0; j < 3; ++j)
            CHECK(s.incompatible(i, j) == s.incompatible(j, i));
    }
    CHECK(s.incompatible(2, 0));
    CHECK(!s.incompatible(0, 1));
}

TEST_CASE("partition function examples")
{
    const PolymerSystem s = pair(0.1, 0.3, true);
    CHECK(partition_fn(s, {}) == cplx(1.0, 0.0));
    CHECK(std::abs(partition_fn(s, {0}) - cplx(1.1, 0.0)) < 1e-15);
    CHECK(std::abs(partition_fn(s, {0, 1}) - cplx(1.4, 0.0)) < 1e-15);
    CHECK(std::abs(partition_fn(pair(0.1, 0.3, false), {0, 1}) - cplx(1.43, 0.0)) < 1e-15);
    CHECK_THROWS_AS(partition_fn(PolymerSystem(std::vector<cplx>(23, 0.01)), all_of(PolymerSystem(std::vector<cplx>(23, 0.01)))),
                    SizeError);
}

TEST_CASE("truncated weight examples")
{
    const PolymerSystem single(std::vector<cplx>{0.25});
    CHECK(std::abs(truncated_weight(single, {0}) - std::log(1.25)) < 1e-15);
    CHECK(std::abs(truncated_weight(pair(0.1, 0.1, false), {0, 1})) < 1e-15);
    const cplx w = truncated_weight(pair(0.1, 0.1, true), {0, 1});
    CHECK(w.real() == doctest::Approx(std::log(1.2) - 2.0 * std::log(1.1)).epsilon(1e-13));
    CHECK(w.real() == doctest::Approx(-0.00826).epsilon(1e-3));
    CHECK_THROWS_AS(truncated_weight(PolymerSystem(std::vector<cplx>{-1.0}), {0}), SingularityError);
}

TEST_CASE("cluster predicate")
{
    PolymerSystem chain(std::vector<cplx>{0.1, 0.1, 0.1});
    chain.set_incompatible(0, 1);
    chain.set_incompatible(1, 2);
    CHECK(is_cluster(chain, {0}));
    CHECK(!is_cluster(chain, {0, 2}));
    CHECK(is_cluster(chain, {0, 1, 2}));
    CHECK(!is_cluster(pair(0.1, 0.1, false), {0, 1}));
}

TEST_CASE("cluster identity on random systems")
{
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const PolymerSystem s = random_system(1 + k % 6, 0.2, 0.5, derive_seed(1, static_cast<std::uint64_t>(k)));
        std::vector<cplx> real_w;
        for (const cplx& w : s.weights())
            real_w.push_back(cplx(w.real(), 0.0));
        const PolymerSystem r = s.with_weights(real_w);
        cplx sum(0.0, 0.0);
        for (const cplx& w : truncated_weight_table(r, all_of(r)))
            sum += w;
        const cplx z = z_oracle(r, (1U << r.size()) - 1);
        worst = std::max(worst, std::abs(std::exp(sum) - z) / std::abs(z));
    }
    for (int k = 0; k < 50; ++k) {
        const PolymerSystem s = random_system(1 + k % 6, 0.1, 0.5, derive_seed(2, static_cast<std::uint64_t>(k)));
        cplx sum(0.0, 0.0);
        for (const cplx& w : truncated_weight_table(s, all_of(s)))
            sum += w;
        const cplx z = z_oracle(s, (1U << s.size()) - 1);
        worst = std::max(worst, std::abs(std::exp(sum) - z) / std::abs(z));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("truncated weights against the inversion formula")
{
    for (int k = 0; k < 30; ++k) {
        const PolymerSystem s = random_system(5, 0.2, 0.4, derive_seed(3, static_cast<std::uint64_t>(k)));
        for (std::uint32_t d = 1; d < 32; ++d) {
            const cplx want = wt_oracle(s, d);
            CHECK(std::abs(truncated_weight(s, members(d)) - want) < 1e-12);
            if (!is_cluster(s, members(d)))
                CHECK(std::abs(want) < 1e-12);
        }
        // Summing stored weights over subsets of any sub-family recovers log Z there.
        for (std::uint32_t lam = 1; lam < 32; ++lam) {
            cplx acc(0.0, 0.0);
            for (std::uint32_t d = lam; d; d = (d - 1) & lam)
                acc += wt_oracle(s, d);
            CHECK(std::abs(acc - std::log(z_oracle(s, lam))) < 1e-12);
        }
        for (int i = 0; i < 5; ++i)
            CHECK(truncated_weight(s, {i}) == std::log(1.0 + s.weight(i)));
    }
}

TEST_CASE("Kotecky-Preiss condition examples")
{
    const PolymerSystem zero(std::vector<cplx>{0.0, 0.0});
    const KpReport r0 = kp_check(zero, {1.0, 1.0}, {0.0, 0.0});
    CHECK(r0.pass);
    CHECK(r0.entries[0].lhs == 0.0);
    const KpReport pass = kp_check(PolymerSystem(std::vector<cplx>{0.1}), {1.0}, {0.0});
    CHECK(pass.pass);
    CHECK(pass.entries[0].lhs == doctest::Approx(std::exp(1.0) * 0.1).epsilon(1e-14));
    const KpReport fail = kp_check(PolymerSystem(std::vector<cplx>{0.5}), {1.0}, {0.0});
    CHECK(!fail.pass);
    CHECK(fail.entries[0].lhs == doctest::Approx(1.359).epsilon(1e-3));
    CHECK(fail.entries[0].margin() < 0.0);
}

TEST_CASE("cluster bound")
{
    const BoundCheck z = kp_cluster_bound_check(PolymerSystem(std::vector<cplx>{0.0, 0.0}), {1.0, 1.0}, {0.0, 0.0}, 0);
    CHECK(z.lhs == 0.0);
    CHECK(z.pass);
    const BoundCheck one = kp_cluster_bound_check(PolymerSystem(std::vector<cplx>{0.1}), {1.0}, {0.0}, 0);
    CHECK(one.lhs == doctest::Approx(std::log(1.1)).epsilon(1e-14));
    CHECK(one.pass);
    CHECK_THROWS_AS(kp_cluster_bound_check(PolymerSystem(std::vector<cplx>{0.5}), {1.0}, {0.0}, 0), PreconditionError);
    const BoundCheck loose = kp_cluster_bound_check(PolymerSystem(std::vector<cplx>{0.5}), {1.0}, {0.0}, 0, false);
    CHECK(!loose.precondition_ok);

    for (int k = 0; k < 100; ++k) {
        const int size = 1 + k % 8;
        PolymerSystem s = random_system(size, 0.5, 0.5, derive_seed(4, static_cast<std::uint64_t>(k)));
        const std::vector<double> a(static_cast<std::size_t>(size), 1.0), b(static_cast<std::size_t>(size), 0.0);
        double worst = 0.0;
        for (const auto& e : kp_check(s, a, b).entries)
            worst = std::max(worst, e.lhs);
        if (worst > 1.0) {
            std::vector<cplx> w = s.weights();
            for (cplx& x : w)
                x *= 0.95 / worst;
            s = s.with_weights(w);
        }
        REQUIRE(kp_check(s, a, b).pass);
        for (int g = 0; g < size; ++g)
            CHECK(kp_cluster_bound_check(s, a, b, g).pass);
    }
}

TEST_CASE("derivative bound")
{
    WeightFamily flat;
    flat.system = PolymerSystem(std::vector<cplx>{0.0});
    flat.weights = [](double) { return std::vector<cplx>{0.1}; };
    const BoundCheck f = derivative_bound_check(flat, {1.0}, {1.0}, {1.0}, 0, 0.0, 1e-5);
    CHECK(std::abs(f.lhs) < 1e-9);

    WeightFamily grow;
    grow.system = PolymerSystem(std::vector<cplx>{0.0});
    grow.weights = [](double eta) { return std::vector<cplx>{0.1 * std::exp(eta)}; };
    grow.derivative = [](double eta) { return std::vector<cplx>{0.1 * std::exp(eta)}; };
    const BoundCheck g = derivative_bound_check(grow, {1.0}, {1.0}, {1.0}, 0, 0.0, 1e-5);
    CHECK(g.lhs == doctest::Approx(0.1 / 1.1).epsilon(1e-12));
    CHECK(g.rhs == 2.0);
    CHECK(g.pass);
    WeightFamily numeric = grow;
    numeric.derivative = nullptr;
    CHECK(derivative_bound_check(numeric, {1.0}, {1.0}, {1.0}, 0, 0.0, 1e-5).lhs ==
          doctest::Approx(0.1 / 1.1).epsilon(1e-8));
    // An infinite c on a polymer with zero derivative contributes nothing.
    const BoundCheck inf = derivative_bound_check(flat, {1.0}, {1.0}, {c_infinity}, 0, 0.0, 1e-5);
    CHECK(inf.lhs == 0.0);

    int checked = 0;
    for (int k = 0; k < 30; ++k) {
        const int size = 1 + k % 6;
        const PolymerSystem base = random_system(size, 0.05, 0.5, derive_seed(5, static_cast<std::uint64_t>(k)));
        WeightFamily fam;
        fam.system = base;
        fam.weights = [base](double eta) {
            std::vector<cplx> w = base.weights();
            for (cplx& x : w)
                x *= std::exp(eta);
            return w;
        };
        const std::vector<double> a(static_cast<std::size_t>(size), 0.5), c(static_cast<std::size_t>(size), 1.0);
        const BoundCheck r = derivative_bound_check(fam, a, a, c, 0, 0.0, 1e-5, false);
        if (r.precondition_ok) {
            CHECK(r.pass);
            ++checked;
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("difference bound")
{
    const PolymerSystem w1(std::vector<cplx>{0.1});
    CHECK(difference_bound_check(w1, {0.1}, {1.0}, {1.0}, {1.0}, 0).lhs == 0.0);
    // e^{a+b} * 0.2 exceeds a = 1 here, so the example only runs with the precondition relaxed.
    CHECK_THROWS_AS(difference_bound_check(w1, {0.2}, {1.0}, {1.0}, {1.0}, 0), PreconditionError);
    const BoundCheck r = difference_bound_check(w1, {0.2}, {1.0}, {1.0}, {1.0}, 0, false);
    CHECK(!r.precondition_ok);
    CHECK(r.lhs == doctest::Approx(std::log(1.2) - std::log(1.1)).epsilon(1e-13));
    CHECK(r.lhs == doctest::Approx(0.087).epsilon(1e-2));
    CHECK(r.pass);

    int checked = 0;
    for (int k = 0; k < 30; ++k) {
        const int size = 1 + k % 6;
        const PolymerSystem s1 = random_system(size, 0.04, 0.5, derive_seed(6, static_cast<std::uint64_t>(k)));
        const PolymerSystem s2 = random_system(size, 0.04, 0.0, derive_seed(7, static_cast<std::uint64_t>(k)));
        const std::vector<double> a(static_cast<std::size_t>(size), 0.5), c(static_cast<std::size_t>(size), 1.0);
        const BoundCheck d = difference_bound_check(s1, s2.weights(), a, a, c, 0, false);
        if (d.precondition_ok) {
            CHECK(d.pass);
            ++checked;
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("hard-core gas against brute force")
{
    std::mt19937_64 rng(10);
    for (int k = 0; k < 40; ++k) {
        const int m = 1 + static_cast<int>(rng() % 10);
        std::vector<HardCorePolymer> polys;
        for (int i = 0; i < m; ++i) {
            HardCorePolymer p;
            for (int v = 0; v < 8; ++v)
                if (rng() % 4 == 0)
                    p.vertices.push_back(v);
            if (p.vertices.empty())
                p.vertices.push_back(static_cast<int>(rng() % 8));
            p.log_weight = -2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            polys.push_back(p);
        }
        LogSumExp z;
        for (std::uint32_t sub = 0; sub < (1U << m); ++sub) {
            std::uint32_t used = 0;
            double lw = 0.0;
            bool ok = true;
            for (int i = 0; i < m && ok; ++i) {
                if (!((sub >> i) & 1U))
                    continue;
                std::uint32_t mine = 0;
                for (int v : polys[static_cast<std::size_t>(i)].vertices)
                    mine |= 1U << v;
                ok = (mine & used) == 0;
                used |= mine;
                lw += polys[static_cast<std::size_t>(i)].log_weight;
            }
            if (ok)
                z.add(lw);
        }
        CHECK(hard_core_log_partition(polys) == doctest::Approx(z.value()).epsilon(1e-12));
    }
}
