#include "rbising/ensemble.hpp"

#include "rbising/common.hpp"
#include "rbising/polymer.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>
#include <unordered_map>

namespace rbising {

double e_term(const BoundaryField& field, const ModelParams& params, const std::vector<std::int64_t>& theta, int sign)
{
    if (sign != 1 && sign != -1)
        throw ParamError("e_term: sign must be +1 or -1");
    double s = boundary_sum(field, theta);
    const std::int64_t x0 = params.probe_index(field.lattice());
    if (x0 >= 0 && std::binary_search(theta.begin(), theta.end(), x0))
        s += params.eta;
    return -sign * s;
}

std::shared_ptr<const Catalog> shared_catalog(const LatticeSpec& lattice, int max_size)
{
    const bool complete = lattice.d() == 2 && lattice.n() <= 4;
    if (!complete && max_size <= 0)
        throw SizeError("complete contour catalogs are limited to d=2, n<=4; pass a size cutoff");
    const int key_size = complete ? 0 : max_size;
    static std::mutex mutex;
    static std::map<std::tuple<int, int, int>, std::shared_ptr<const Catalog>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{lattice.d(), lattice.n(), key_size}];
    if (!slot)
        slot = std::make_shared<const Catalog>(complete ? catalog(lattice, 0) : catalog_bounded(lattice, max_size));
    return slot;
}

namespace {

std::vector<int> processing_order(const Catalog& cat)
{
    std::vector<int> order(cat.contours.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return cat.contours[static_cast<std::size_t>(a)].v < cat.contours[static_cast<std::size_t>(b)].v;
    });
    return order;
}

double family_log_sum(const Catalog& cat, const std::vector<int>& members, const std::vector<double>& logK)
{
    if (members.empty())
        return 0.0;
    std::vector<HardCorePolymer> polys;
    polys.reserve(members.size());
    for (int j : members)
        polys.push_back({cat.contours[static_cast<std::size_t>(j)].vertices, logK[static_cast<std::size_t>(j)]});
    return hard_core_log_partition(polys);
}

// Fills the table entries of every contour flagged in `needed` (which must
// be closed under taking inner contours).
void compute_weights(const Catalog& cat, const BoundaryField& field, const ModelParams& params,
                     const std::vector<char>* needed, ContourWeightTable& t)
{
    if (!(field.lattice() == cat.lattice))
        throw ParamError("boundary field belongs to a different lattice");
    params.validate(cat.lattice);
    const std::size_t m = cat.contours.size();
    t.logK_plus.assign(m, 0.0);
    t.logK_minus.assign(m, 0.0);
    t.logZ_plus.assign(m, 0.0);
    t.logZ_minus.assign(m, 0.0);
    t.order = processing_order(cat);
    for (int g : t.order) {
        const std::size_t i = static_cast<std::size_t>(g);
        if (needed && !(*needed)[i])
            continue;
        const Contour& c = cat.contours[i];
        const double e_plus = e_term(field, params, c.interior, +1);
        const double e_minus = e_term(field, params, c.interior, -1);
        t.logZ_plus[i] = -e_plus + family_log_sum(cat, cat.inner[i], t.logK_plus);
        t.logZ_minus[i] = -e_minus + family_log_sum(cat, cat.inner[i], t.logK_minus);
        const double bulk = -2.0 * params.beta * c.size();
        t.logK_plus[i] = bulk + t.logZ_minus[i] - t.logZ_plus[i];
        t.logK_minus[i] = bulk + t.logZ_plus[i] - t.logZ_minus[i];
    }
}

bool share_vertex(const Contour& a, const Contour& b)
{
    auto i = a.vertices.begin();
    auto j = b.vertices.begin();
    while (i != a.vertices.end() && j != b.vertices.end()) {
        if (*i == *j)
            return true;
        if (*i < *j)
            ++i;
        else
            ++j;
    }
    return false;
}

std::pair<double, double> cluster_phi(const Catalog& cat, const ContourWeightTable& t, const ClusterShape& shape)
{
    const std::size_t k = shape.contours.size();
    std::vector<cplx> wp(k), wm(k);
    for (std::size_t i = 0; i < k; ++i) {
        wp[i] = std::exp(t.logK_plus[static_cast<std::size_t>(shape.contours[i])]);
        wm[i] = std::exp(t.logK_minus[static_cast<std::size_t>(shape.contours[i])]);
    }
    if (k == 1)
        return {std::log1p(wp[0].real()), std::log1p(wm[0].real())};
    PolymerSystem sys(wp);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (share_vertex(cat.contours[static_cast<std::size_t>(shape.contours[i])],
                             cat.contours[static_cast<std::size_t>(shape.contours[j])]))
                sys.set_incompatible(static_cast<int>(i), static_cast<int>(j));
    std::vector<int> all(k);
    std::iota(all.begin(), all.end(), 0);
    const double plus = truncated_weight(sys, all).real();
    const double minus = truncated_weight(sys.with_weights(wm), all).real();
    return {plus, minus};
}

double bare_term(const BoundaryField& field, const ModelParams& params)
{
    const LatticeSpec& L = field.lattice();
    double s = boundary_sum(field, L.boundary_indices());
    if (params.probe_index(L) >= 0)
        s += params.eta;
    return 2.0 * s;
}

} // namespace

ContourWeightTable build_weights(const Catalog& cat, const BoundaryField& field, const ModelParams& params)
{
    ContourWeightTable t;
    compute_weights(cat, field, params, nullptr, t);
    return t;
}

ContourWeightTable build_weights(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params)
{
    return build_weights(*shared_catalog(lattice), field, params);
}

ZPm z_pm_contour(const Catalog& cat, const ContourWeightTable& table, const BoundaryField& field,
                 const ModelParams& params)
{
    std::vector<int> all(cat.contours.size());
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::int64_t> sites(static_cast<std::size_t>(cat.lattice.size()));
    std::iota(sites.begin(), sites.end(), 0);
    ZPm r;
    r.logZ_plus = -e_term(field, params, sites, +1) + family_log_sum(cat, all, table.logK_plus);
    r.logZ_minus = -e_term(field, params, sites, -1) + family_log_sum(cat, all, table.logK_minus);
    r.F = r.logZ_plus - r.logZ_minus;
    return r;
}

ZPm z_pm_contour(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params)
{
    auto cat = shared_catalog(lattice);
    return z_pm_contour(*cat, build_weights(*cat, field, params), field, params);
}

std::vector<ClusterShape> enumerate_clusters(const Catalog& cat, int cutoff, std::size_t max_clusters)
{
    std::vector<ClusterShape> out;
    if (cutoff <= 0)
        return out;
    const int m = static_cast<int>(cat.contours.size());
    std::unordered_map<int, std::vector<int>> at_vertex;
    for (int i = 0; i < m; ++i)
        if (cat.contours[static_cast<std::size_t>(i)].size() <= cutoff)
            for (int v : cat.contours[static_cast<std::size_t>(i)].vertices)
                at_vertex[v].push_back(i);
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(m));
    for (auto& [v, list] : at_vertex)
        for (int a : list)
            for (int b : list)
                if (a != b)
                    adj[static_cast<std::size_t>(a)].push_back(b);
    for (auto& l : adj) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
    }

    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    std::vector<int> current;
    int weight = 0;
    int root = 0;
    auto record = [&] {
        if (out.size() >= max_clusters)
            throw SizeError("cluster enumeration exceeds cap of " + std::to_string(max_clusters) + " clusters");
        ClusterShape s;
        s.contours = current;
        std::sort(s.contours.begin(), s.contours.end());
        s.size = weight;
        for (int c : s.contours) {
            const Contour& g = cat.contours[static_cast<std::size_t>(c)];
            s.sites.insert(s.sites.end(), g.interior.begin(), g.interior.end());
            s.boundary_sites.insert(s.boundary_sites.end(), g.boundary_sites.begin(), g.boundary_sites.end());
        }
        for (auto* v : {&s.sites, &s.boundary_sites}) {
            std::sort(v->begin(), v->end());
            v->erase(std::unique(v->begin(), v->end()), v->end());
        }
        out.push_back(std::move(s));
    };
    std::function<void(std::vector<int>)> extend = [&](std::vector<int> untried) {
        while (!untried.empty()) {
            const int v = untried.back();
            untried.pop_back();
            const int sz = cat.contours[static_cast<std::size_t>(v)].size();
            if (weight + sz > cutoff)
                continue;
            current.push_back(v);
            weight += sz;
            record();
            std::vector<int> next = untried;
            std::vector<int> fresh;
            for (int w : adj[static_cast<std::size_t>(v)]) {
                if (w > root && !seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    fresh.push_back(w);
                    next.push_back(w);
                }
            }
            extend(std::move(next));
            for (int w : fresh)
                seen[static_cast<std::size_t>(w)] = 0;
            weight -= sz;
            current.pop_back();
        }
    };
    for (root = 0; root < m; ++root) {
        if (cat.contours[static_cast<std::size_t>(root)].size() > cutoff)
            continue;
        seen[static_cast<std::size_t>(root)] = 1;
        extend({root});
        seen[static_cast<std::size_t>(root)] = 0;
    }
    std::stable_sort(out.begin(), out.end(), [](const ClusterShape& a, const ClusterShape& b) {
        if (a.size != b.size)
            return a.size < b.size;
        return a.contours < b.contours;
    });
    return out;
}

std::vector<ClusterWeight> cluster_weights(const Catalog& cat, const ContourWeightTable& table,
                                           const std::vector<ClusterShape>& clusters)
{
    std::vector<ClusterWeight> out;
    out.reserve(clusters.size());
    for (const ClusterShape& s : clusters) {
        auto [p, m] = cluster_phi(cat, table, s);
        out.push_back({&s, p, m});
    }
    return out;
}

double f_cluster(const BoundaryField& field, const ModelParams& params, const std::vector<ClusterWeight>& weights)
{
    double f = bare_term(field, params);
    for (const ClusterWeight& w : weights)
        if (!w.shape->boundary_sites.empty())
            f += w.delta();
    return f;
}

double f_cluster(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params, int cutoff)
{
    if (cutoff < 0)
        throw ParamError("f_cluster: cutoff must be >= 0");
    if (cutoff == 0)
        return bare_term(field, params);
    ClusterExpansion ce(lattice, cutoff);
    return ce.F(field, params);
}

ClusterExpansion::ClusterExpansion(const LatticeSpec& lattice, int cutoff, std::size_t max_clusters)
    : cutoff_(cutoff)
{
    if (cutoff < 1)
        throw ParamError("ClusterExpansion: cutoff must be >= 1");
    catalog_ = shared_catalog(lattice, cutoff);
    for (auto& s : enumerate_clusters(*catalog_, cutoff, max_clusters))
        if (!s.boundary_sites.empty())
            clusters_.push_back(std::move(s));
    std::vector<char> need(catalog_->contours.size(), 0);
    std::vector<int> stack;
    for (const auto& s : clusters_)
        for (int c : s.contours)
            if (!need[static_cast<std::size_t>(c)]) {
                need[static_cast<std::size_t>(c)] = 1;
                stack.push_back(c);
            }
    while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        for (int j : catalog_->inner[static_cast<std::size_t>(c)])
            if (!need[static_cast<std::size_t>(j)]) {
                need[static_cast<std::size_t>(j)] = 1;
                stack.push_back(j);
            }
    }
    for (std::size_t i = 0; i < need.size(); ++i)
        if (need[i])
            needed_.push_back(static_cast<int>(i));
}

std::vector<double> ClusterExpansion::deltas(const BoundaryField& field, const ModelParams& params) const
{
    std::vector<char> need(catalog_->contours.size(), 0);
    for (int c : needed_)
        need[static_cast<std::size_t>(c)] = 1;
    ContourWeightTable t;
    compute_weights(*catalog_, field, params, &need, t);
    std::vector<double> out;
    out.reserve(clusters_.size());
    for (const ClusterShape& s : clusters_) {
        auto [p, m] = cluster_phi(*catalog_, t, s);
        out.push_back(p - m);
    }
    return out;
}

std::pair<double, double> ClusterExpansion::F_pair(const BoundaryField& field, const ModelParams& params,
                                                   int smaller) const
{
    const auto d = deltas(field, params);
    const double bare = bare_term(field, params);
    double full = bare;
    double small = bare;
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
        full += d[i];
        if (clusters_[i].size <= smaller)
            small += d[i];
    }
    return {full, small};
}

double ClusterExpansion::F(const BoundaryField& field, const ModelParams& params) const
{
    return F_pair(field, params, cutoff_).first;
}

std::pair<double, double> mixture(double F)
{
    auto p = [](double f) {
        if (f > 700.0)
            return 1.0;
        if (f < -700.0)
            return 0.0;
        return f >= 0.0 ? 1.0 / (1.0 + std::exp(-f)) : std::exp(f) / (1.0 + std::exp(f));
    };
    return {p(F), p(-F)};
}

double decay_sum(const std::vector<ClusterWeight>& weights, const LatticeSpec& lattice, const ModelParams& params,
                 double c, const Site& x, int cutoff, int sign)
{
    if (sign != 1 && sign != -1)
        throw ParamError("decay_sum: sign must be +1 or -1");
    const std::int64_t xi = lattice.index(x);
    double s = 0.0;
    for (const ClusterWeight& w : weights) {
        if (w.shape->size > cutoff || !std::binary_search(w.shape->sites.begin(), w.shape->sites.end(), xi))
            continue;
        s += std::exp(2.0 * (params.beta - c) * w.shape->size) * std::abs(sign > 0 ? w.phi_plus : w.phi_minus);
    }
    return s;
}

} // namespace rbising
