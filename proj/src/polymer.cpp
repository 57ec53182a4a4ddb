#include "rbising/polymer.hpp"

#include "rbising/common.hpp"

#include <algorithm>
#include <bit>
#include <string>
#include <unordered_map>

namespace rbising {

PolymerSystem::PolymerSystem(std::vector<cplx> weights) : weights_(std::move(weights))
{
    const std::size_t n = weights_.size();
    incompat_.assign(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
        incompat_[i * n + i] = 1;
}

PolymerSystem PolymerSystem::with_weights(std::vector<cplx> weights) const
{
    if (weights.size() != weights_.size())
        throw ParamError("with_weights: weight count does not match polymer count");
    PolymerSystem s = *this;
    s.weights_ = std::move(weights);
    return s;
}

void PolymerSystem::set_incompatible(int i, int j)
{
    const std::size_t n = weights_.size();
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n)
        throw ParamError("set_incompatible: polymer index out of range");
    incompat_[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] = 1;
    incompat_[static_cast<std::size_t>(j) * n + static_cast<std::size_t>(i)] = 1;
}

namespace {

void check_subset(const PolymerSystem& sys, const std::vector<int>& subset, int cap, const char* what)
{
    if (static_cast<int>(subset.size()) > cap)
        throw SizeError(std::string(what) + ": subset of " + std::to_string(subset.size()) +
                        " polymers exceeds cap " + std::to_string(cap));
    std::vector<int> s = subset;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
        throw ParamError(std::string(what) + ": repeated polymer index");
    for (int i : s)
        if (i < 0 || i >= sys.size())
            throw ParamError(std::string(what) + ": polymer index out of range");
}

// Closed incompatibility neighbourhoods as masks over subset positions.
std::vector<std::uint32_t> local_neighbourhoods(const PolymerSystem& sys, const std::vector<int>& subset)
{
    const std::size_t k = subset.size();
    std::vector<std::uint32_t> nb(k, 0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (sys.incompatible(subset[i], subset[j]))
                nb[i] |= 1u << j;
    return nb;
}

// Z over all sub-masks: Z(S) = Z(S∖f) + w_f Z(S∖N[f]), f the lowest element.
std::vector<cplx> z_table(const std::vector<cplx>& w, const std::vector<std::uint32_t>& nb)
{
    const std::size_t k = nb.size();
    std::vector<cplx> z(std::size_t{1} << k);
    z[0] = 1.0;
    for (std::uint32_t s = 1; s < z.size(); ++s) {
        const int f = std::countr_zero(s);
        z[s] = z[s & ~(1u << f)] + w[static_cast<std::size_t>(f)] * z[s & ~nb[static_cast<std::size_t>(f)]];
    }
    return z;
}

std::vector<cplx> log_table(const std::vector<cplx>& z)
{
    std::vector<cplx> l(z.size());
    for (std::size_t s = 0; s < z.size(); ++s) {
        if (std::abs(z[s]) < 1e-12)
            throw SingularityError("partition function of a sub-family vanishes; log undefined");
        l[s] = std::log(z[s]);
    }
    return l;
}

void mobius(std::vector<cplx>& t)
{
    for (std::size_t bit = 1; bit < t.size(); bit <<= 1)
        for (std::size_t s = 0; s < t.size(); ++s)
            if (s & bit)
                t[s] -= t[s ^ bit];
}

std::vector<cplx> local_weights(const PolymerSystem& sys, const std::vector<int>& subset)
{
    std::vector<cplx> w;
    w.reserve(subset.size());
    for (int i : subset)
        w.push_back(sys.weight(i));
    return w;
}

cplx partition_rec(std::uint32_t s, const std::vector<cplx>& w, const std::vector<std::uint32_t>& nb)
{
    if (s == 0)
        return 1.0;
    const int f = std::countr_zero(s);
    return partition_rec(s & ~(1u << f), w, nb) +
           w[static_cast<std::size_t>(f)] * partition_rec(s & ~nb[static_cast<std::size_t>(f)], w, nb);
}

bool connected(std::uint32_t s, const std::vector<std::uint32_t>& nb)
{
    if (s == 0)
        return false;
    std::uint32_t seen = s & (~s + 1);
    std::uint32_t frontier = seen;
    while (frontier) {
        const int f = std::countr_zero(frontier);
        frontier &= frontier - 1;
        const std::uint32_t fresh = nb[static_cast<std::size_t>(f)] & s & ~seen;
        seen |= fresh;
        frontier |= fresh;
    }
    return seen == s;
}

std::vector<int> all_polymers(const PolymerSystem& sys)
{
    std::vector<int> all(static_cast<std::size_t>(sys.size()));
    for (int i = 0; i < sys.size(); ++i)
        all[static_cast<std::size_t>(i)] = i;
    return all;
}

void check_functions(const PolymerSystem& sys, const std::vector<double>& f, const char* name)
{
    if (static_cast<int>(f.size()) != sys.size())
        throw ParamError(std::string("function ") + name + " must have one value per polymer");
    for (double v : f)
        if (!(v >= 0.0))
            throw ParamError(std::string("function ") + name + " must be >= 0");
}

double c_times(double c, double x)
{
    return x == 0.0 ? 0.0 : c * x;
}

// Σ_{Γ incompatible with Γ0} c(Γ) e^{(a+b)(Γ)} |v(Γ)| ≤ a(Γ0) for all Γ0.
bool kp_condition(const PolymerSystem& sys, const std::vector<cplx>& v, const std::vector<double>& a,
                  const std::vector<double>& b, const std::vector<double>* c)
{
    const int n = sys.size();
    for (int g0 = 0; g0 < n; ++g0) {
        double lhs = 0.0;
        for (int g = 0; g < n; ++g) {
            if (!sys.incompatible(g, g0))
                continue;
            const double term = std::exp(a[static_cast<std::size_t>(g)] + b[static_cast<std::size_t>(g)]) *
                                std::abs(v[static_cast<std::size_t>(g)]);
            lhs += c ? c_times((*c)[static_cast<std::size_t>(g)], term) : term;
        }
        if (!(lhs <= a[static_cast<std::size_t>(g0)]))
            return false;
    }
    return true;
}

// Σ over clusters Δ incompatible with Γ0 of c(Δ) e^{(b-a)(Δ)} |t(Δ)|.
double cluster_sum(const PolymerSystem& sys, const std::vector<cplx>& t, const std::vector<double>& a,
                   const std::vector<double>& b, const std::vector<double>* c, int gamma0, bool subtract_a)
{
    const std::vector<int> all = all_polymers(sys);
    const auto nb = local_neighbourhoods(sys, all);
    const std::uint32_t touch = nb[static_cast<std::size_t>(gamma0)];
    double lhs = 0.0;
    for (std::uint32_t s = 1; s < t.size(); ++s) {
        if (!(s & touch) || !connected(s, nb))
            continue;
        double expo = 0.0;
        double cmin = c_infinity;
        for (std::uint32_t r = s; r; r &= r - 1) {
            const std::size_t g = static_cast<std::size_t>(std::countr_zero(r));
            expo += b[g] - (subtract_a ? a[g] : 0.0);
            if (c)
                cmin = std::min(cmin, (*c)[g]);
        }
        const double term = std::exp(expo) * std::abs(t[s]);
        lhs += c ? c_times(cmin, term) : term;
    }
    return lhs;
}

void require_precondition(bool ok, bool strict, const char* what)
{
    if (!ok && strict)
        throw PreconditionError(std::string(what) + ": convergence precondition fails");
}

} // namespace

cplx partition_fn(const PolymerSystem& sys, const std::vector<int>& subset)
{
    check_subset(sys, subset, partition_fn_cap, "partition_fn");
    const auto nb = local_neighbourhoods(sys, subset);
    const auto w = local_weights(sys, subset);
    const std::uint32_t full = subset.empty() ? 0u : static_cast<std::uint32_t>((1ULL << subset.size()) - 1);
    return partition_rec(full, w, nb);
}

std::vector<cplx> truncated_weight_table(const PolymerSystem& sys, const std::vector<int>& subset)
{
    check_subset(sys, subset, truncated_weight_cap, "truncated_weight");
    auto t = log_table(z_table(local_weights(sys, subset), local_neighbourhoods(sys, subset)));
    mobius(t);
    return t;
}

cplx truncated_weight(const PolymerSystem& sys, const std::vector<int>& delta)
{
    if (delta.empty())
        return 0.0;
    return truncated_weight_table(sys, delta).back();
}

std::vector<cplx> truncated_weight_derivative_table(const PolymerSystem& sys, const std::vector<cplx>& dweights,
                                                    const std::vector<int>& subset)
{
    check_subset(sys, subset, truncated_weight_cap, "truncated_weight_derivative");
    if (static_cast<int>(dweights.size()) != sys.size())
        throw ParamError("derivative weights must have one value per polymer");
    const auto nb = local_neighbourhoods(sys, subset);
    const auto w = local_weights(sys, subset);
    std::vector<cplx> dw;
    for (int i : subset)
        dw.push_back(dweights[static_cast<std::size_t>(i)]);
    const auto z = z_table(w, nb);
    std::vector<cplx> dz(z.size());
    dz[0] = 0.0;
    for (std::uint32_t s = 1; s < z.size(); ++s) {
        const int f = std::countr_zero(s);
        const std::uint32_t rest = s & ~nb[static_cast<std::size_t>(f)];
        dz[s] = dz[s & ~(1u << f)] + dw[static_cast<std::size_t>(f)] * z[rest] + w[static_cast<std::size_t>(f)] * dz[rest];
    }
    std::vector<cplx> t(z.size());
    for (std::size_t s = 0; s < z.size(); ++s) {
        if (std::abs(z[s]) < 1e-12)
            throw SingularityError("partition function of a sub-family vanishes; log undefined");
        t[s] = dz[s] / z[s];
    }
    mobius(t);
    return t;
}

PolymerSystem random_system(int size, double weight_bound, double p_incompatible, std::uint64_t seed)
{
    if (size < 0 || weight_bound < 0.0 || p_incompatible < 0.0 || p_incompatible > 1.0)
        throw ParamError("random_system: invalid parameters");
    std::uint64_t h = seed;
    auto next = [&h] {
        h = splitmix64(h);
        return to_unit(h);
    };
    std::vector<cplx> w(static_cast<std::size_t>(size));
    for (auto& x : w)
        x = std::polar(weight_bound * std::sqrt(next()), 2.0 * M_PI * next());
    PolymerSystem sys(std::move(w));
    for (int i = 0; i < size; ++i)
        for (int j = i + 1; j < size; ++j)
            if (next() < p_incompatible)
                sys.set_incompatible(i, j);
    return sys;
}

bool is_cluster(const PolymerSystem& sys, const std::vector<int>& delta)
{
    check_subset(sys, delta, 32, "is_cluster");
    if (delta.empty())
        return false;
    const auto nb = local_neighbourhoods(sys, delta);
    const std::uint32_t full = delta.size() == 32 ? ~0u : (1u << delta.size()) - 1;
    return connected(full, nb);
}

KpReport kp_check(const PolymerSystem& sys, const std::vector<double>& a, const std::vector<double>& b)
{
    check_functions(sys, a, "a");
    check_functions(sys, b, "b");
    KpReport report;
    const int n = sys.size();
    for (int g0 = 0; g0 < n; ++g0) {
        KpEntry e;
        for (int g = 0; g < n; ++g)
            if (sys.incompatible(g, g0))
                e.lhs += std::exp(a[static_cast<std::size_t>(g)] + b[static_cast<std::size_t>(g)]) * std::abs(sys.weight(g));
        e.rhs = a[static_cast<std::size_t>(g0)];
        e.pass = e.lhs <= e.rhs;
        report.pass = report.pass && e.pass;
        report.entries.push_back(e);
    }
    return report;
}

BoundCheck kp_cluster_bound_check(const PolymerSystem& sys, const std::vector<double>& a,
                                  const std::vector<double>& b, int gamma0, bool strict)
{
    if (sys.size() > cluster_bound_cap)
        throw SizeError("kp_cluster_bound_check: at most " + std::to_string(cluster_bound_cap) + " polymers");
    if (gamma0 < 0 || gamma0 >= sys.size())
        throw ParamError("kp_cluster_bound_check: gamma0 out of range");
    BoundCheck r;
    r.precondition_ok = kp_check(sys, a, b).pass;
    require_precondition(r.precondition_ok, strict, "kp_cluster_bound_check");
    const auto t = truncated_weight_table(sys, all_polymers(sys));
    r.lhs = cluster_sum(sys, t, a, b, nullptr, gamma0, false);
    r.rhs = a[static_cast<std::size_t>(gamma0)];
    r.pass = r.lhs <= r.rhs;
    return r;
}

BoundCheck derivative_bound_check(const WeightFamily& family, const std::vector<double>& a,
                                  const std::vector<double>& b, const std::vector<double>& c, int gamma0, double eta,
                                  double h, bool strict)
{
    const PolymerSystem& base = family.system;
    if (base.size() > cluster_bound_cap)
        throw SizeError("derivative_bound_check: at most " + std::to_string(cluster_bound_cap) + " polymers");
    if (gamma0 < 0 || gamma0 >= base.size())
        throw ParamError("derivative_bound_check: gamma0 out of range");
    if (!family.weights)
        throw ParamError("derivative_bound_check: weight family missing");
    if (!family.derivative && !(h > 0.0))
        throw ParamError("derivative_bound_check: h must be > 0");
    check_functions(base, a, "a");
    check_functions(base, b, "b");
    check_functions(base, c, "c");

    const auto w = family.weights(eta);
    std::vector<cplx> dw;
    if (family.derivative) {
        dw = family.derivative(eta);
    } else {
        const auto up = family.weights(eta + h);
        const auto down = family.weights(eta - h);
        for (std::size_t i = 0; i < w.size(); ++i)
            dw.push_back((up[i] - down[i]) / (2.0 * h));
    }
    const PolymerSystem sys = base.with_weights(w);

    BoundCheck r;
    bool ok = true;
    for (std::size_t i = 0; i < a.size(); ++i)
        ok = ok && a[i] <= b[i];
    for (double e : {eta - h, eta, eta + h})
        ok = ok && kp_condition(base, family.weights(e), a, b, nullptr);
    ok = ok && kp_condition(base, dw, a, b, &c);
    r.precondition_ok = ok;
    require_precondition(ok, strict, "derivative_bound_check");

    const auto dt = truncated_weight_derivative_table(sys, dw, all_polymers(sys));
    r.lhs = cluster_sum(sys, dt, a, b, &c, gamma0, true);
    r.rhs = 2.0 * a[static_cast<std::size_t>(gamma0)];
    r.pass = r.lhs <= r.rhs;
    return r;
}

BoundCheck difference_bound_check(const PolymerSystem& w1, const std::vector<cplx>& w2, const std::vector<double>& a,
                                  const std::vector<double>& b, const std::vector<double>& c, int gamma0, bool strict)
{
    if (w1.size() > cluster_bound_cap)
        throw SizeError("difference_bound_check: at most " + std::to_string(cluster_bound_cap) + " polymers");
    if (gamma0 < 0 || gamma0 >= w1.size())
        throw ParamError("difference_bound_check: gamma0 out of range");
    check_functions(w1, a, "a");
    check_functions(w1, b, "b");
    check_functions(w1, c, "c");
    const PolymerSystem s2 = w1.with_weights(w2);
    std::vector<cplx> diff;
    for (int i = 0; i < w1.size(); ++i)
        diff.push_back(w2[static_cast<std::size_t>(i)] - w1.weight(i));

    BoundCheck r;
    bool ok = true;
    for (std::size_t i = 0; i < a.size(); ++i)
        ok = ok && a[i] <= b[i];
    ok = ok && kp_condition(w1, w1.weights(), a, b, nullptr) && kp_condition(w1, w2, a, b, nullptr) &&
         kp_condition(w1, diff, a, b, &c);
    r.precondition_ok = ok;
    require_precondition(ok, strict, "difference_bound_check");

    const auto all = all_polymers(w1);
    auto t1 = truncated_weight_table(w1, all);
    const auto t2 = truncated_weight_table(s2, all);
    for (std::size_t s = 0; s < t1.size(); ++s)
        t1[s] = t2[s] - t1[s];
    r.lhs = cluster_sum(w1, t1, a, b, &c, gamma0, true);
    r.rhs = 2.0 * a[static_cast<std::size_t>(gamma0)];
    r.pass = r.lhs <= r.rhs;
    return r;
}

namespace {

using Mask = unsigned __int128;

struct MaskHash {
    std::size_t operator()(Mask m) const
    {
        return static_cast<std::size_t>(
            hash_combine(splitmix64(static_cast<std::uint64_t>(m)), static_cast<std::uint64_t>(m >> 64)));
    }
};

int lowest(Mask m)
{
    const auto lo = static_cast<std::uint64_t>(m);
    return lo ? std::countr_zero(lo) : 64 + std::countr_zero(static_cast<std::uint64_t>(m >> 64));
}

struct HardCoreSolver {
    std::vector<std::vector<std::pair<Mask, double>>> starting_at;  // by lowest vertex
    std::unordered_map<Mask, double, MaskHash> memo;

    double z(Mask avail)
    {
        while (avail) {
            const int v = lowest(avail);
            if (!starting_at[static_cast<std::size_t>(v)].empty())
                break;
            avail &= ~(Mask{1} << v);
        }
        if (!avail)
            return 1.0;
        auto it = memo.find(avail);
        if (it != memo.end())
            return it->second;
        const int v = lowest(avail);
        double total = z(avail & ~(Mask{1} << v));
        for (const auto& [m, w] : starting_at[static_cast<std::size_t>(v)])
            if ((m & avail) == m)
                total += w * z(avail & ~m);
        memo.emplace(avail, total);
        return total;
    }
};

} // namespace

double hard_core_log_partition(const std::vector<HardCorePolymer>& polymers)
{
    std::vector<int> verts;
    for (const auto& p : polymers) {
        if (p.vertices.empty())
            throw ParamError("hard-core polymer without vertices");
        verts.insert(verts.end(), p.vertices.begin(), p.vertices.end());
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    if (verts.size() > 128)
        throw SizeError("hard-core partition function supports at most 128 distinct vertices, got " +
                        std::to_string(verts.size()));
    HardCoreSolver solver;
    solver.starting_at.resize(verts.size());
    for (const auto& p : polymers) {
        Mask m = 0;
        int lo = static_cast<int>(verts.size());
        for (int v : p.vertices) {
            const int local = static_cast<int>(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
            m |= Mask{1} << local;
            lo = std::min(lo, local);
        }
        solver.starting_at[static_cast<std::size_t>(lo)].emplace_back(m, std::exp(p.log_weight));
    }
    Mask full = 0;
    for (std::size_t i = 0; i < verts.size(); ++i)
        full |= Mask{1} << i;
    return std::log(solver.z(full));
}

} // namespace rbising
