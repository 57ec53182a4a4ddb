#include "rbising/contour.hpp"

#include "rbising/common.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_set>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <unordered_map>

namespace rbising {

namespace {

void require_geometry_dim(const LatticeSpec& lattice)
{
    if (lattice.d() != 2 && lattice.d() != 3)
        throw UnsupportedError("contour geometry supports d in {2,3}, got d=" + std::to_string(lattice.d()));
}

int popcount_odd(const std::array<int, 3>& c, int d, int& first_odd)
{
    int k = 0;
    first_odd = -1;
    for (int i = 0; i < d; ++i) {
        if (c[i] & 1) {
            if (first_odd < 0)
                first_odd = i;
            ++k;
        }
    }
    return k;
}

} // namespace

CellComplex::CellComplex(const LatticeSpec& lattice) : lattice_(lattice), d_(lattice.d())
{
    require_geometry_dim(lattice);
    const int n = lattice.n();
    width_ = 2 * n + 1;
    offset_ = -(2 * lattice.lo() - 1);
    grid_size_ = 1;
    for (int i = 0; i < d_; ++i)
        grid_size_ *= width_;
    ridges_per_face_ = 2 * (d_ - 1);
    vertices_per_face_ = 1 << (d_ - 1);
    axis_.assign(static_cast<std::size_t>(grid_size_), -1);
    cube_lo_.assign(static_cast<std::size_t>(grid_size_), -1);
    cube_hi_.assign(static_cast<std::size_t>(grid_size_), -1);
    ridges_.assign(static_cast<std::size_t>(grid_size_) * ridges_per_face_, -1);
    vertices_.assign(static_cast<std::size_t>(grid_size_) * vertices_per_face_, -1);

    auto site_of = [&](std::array<int, 3> cube) -> std::int64_t {
        Site x(d_);
        for (int i = 0; i < d_; ++i) {
            x[i] = cube[i] / 2;
            if (x[i] < lattice.lo() || x[i] > lattice.hi())
                return -1;
        }
        return lattice.index(x);
    };

    for (int id = 0; id < grid_size_; ++id) {
        std::array<int, 3> c = doubled(id);
        int a = -1;
        if (popcount_odd(c, d_, a) != 1)
            continue;
        axis_[static_cast<std::size_t>(id)] = a;
        std::array<int, 3> lo_cube = c, hi_cube = c;
        lo_cube[a] -= 1;
        hi_cube[a] += 1;
        cube_lo_[static_cast<std::size_t>(id)] = site_of(lo_cube);
        cube_hi_[static_cast<std::size_t>(id)] = site_of(hi_cube);
        int r = 0;
        for (int j = 0; j < d_; ++j) {
            if (j == a)
                continue;
            for (int s : {-1, 1}) {
                std::array<int, 3> q = c;
                q[j] += s;
                ridges_[static_cast<std::size_t>(id) * ridges_per_face_ + r++] = grid_id(q);
            }
        }
        std::vector<int> others;
        for (int j = 0; j < d_; ++j)
            if (j != a)
                others.push_back(j);
        for (int mask = 0; mask < vertices_per_face_; ++mask) {
            std::array<int, 3> q = c;
            for (std::size_t k = 0; k < others.size(); ++k)
                q[others[k]] += (mask >> k) & 1 ? 1 : -1;
            vertices_[static_cast<std::size_t>(id) * vertices_per_face_ + mask] = grid_id(q);
        }
        if (cube_lo_[static_cast<std::size_t>(id)] >= 0 && cube_hi_[static_cast<std::size_t>(id)] >= 0)
            interior_faces_.push_back(id);
    }

    const std::int64_t N = lattice.size();
    outer_faces_.assign(static_cast<std::size_t>(N), {});
    links_.assign(static_cast<std::size_t>(N), {});
    sides_.assign(static_cast<std::size_t>(N), 0);
    for (std::int64_t s = 0; s < N; ++s) {
        Site x = lattice.coords(s);
        std::array<int, 3> c{0, 0, 0};
        for (int i = 0; i < d_; ++i)
            c[i] = 2 * x[i];
        for (int j = 0; j < d_; ++j) {
            for (int sgn : {-1, 1}) {
                std::array<int, 3> f = c;
                f[j] += sgn;
                const int fid = grid_id(f);
                const bool outside = (sgn < 0 && x[j] == lattice.lo()) || (sgn > 0 && x[j] == lattice.hi());
                if (outside) {
                    outer_faces_[static_cast<std::size_t>(s)].push_back(fid);
                    sides_[static_cast<std::size_t>(s)] |= 1u << (2 * j + (sgn > 0 ? 1 : 0));
                } else {
                    std::int64_t other = sgn < 0 ? cube_lo(fid) : cube_hi(fid);
                    links_[static_cast<std::size_t>(s)].emplace_back(other, fid);
                }
            }
        }
        std::sort(outer_faces_[static_cast<std::size_t>(s)].begin(), outer_faces_[static_cast<std::size_t>(s)].end());
    }
}

int CellComplex::grid_id(const std::array<int, 3>& c) const
{
    int id = 0;
    for (int i = 0; i < d_; ++i) {
        const int v = c[i] + offset_;
        if (v < 0 || v >= width_)
            throw ParamError("cell outside the complex");
        id = id * width_ + v;
    }
    return id;
}

std::array<int, 3> CellComplex::doubled(int id) const
{
    std::array<int, 3> c{0, 0, 0};
    for (int i = d_ - 1; i >= 0; --i) {
        c[i] = id % width_ - offset_;
        id /= width_;
    }
    return c;
}

bool CellComplex::is_boundary_point(int id) const
{
    std::array<int, 3> c = doubled(id);
    for (int i = 0; i < d_; ++i)
        if (c[i] == 2 * lattice_.lo() - 1 || c[i] == 2 * lattice_.hi() + 1)
            return true;
    return false;
}

int CellComplex::face_between(std::int64_t a, std::int64_t b) const
{
    for (const auto& [other, fid] : links(a))
        if (other == b)
            return fid;
    throw ParamError("face_between: sites are not nearest neighbours");
}

Cell CellComplex::cell(int face_id) const
{
    if (!is_face(face_id))
        throw ParamError("grid id is not a face");
    std::array<int, 3> c = doubled(face_id);
    const int a = face_axis(face_id);
    Cell out;
    out.kind = CellKind::face;
    out.axis = a;
    out.anchor.resize(d_);
    for (int i = 0; i < d_; ++i)
        out.anchor[i] = i == a ? (c[i] - 1) / 2 : c[i] / 2;
    return out;
}

int CellComplex::face_id(const Cell& cell) const
{
    if (cell.kind != CellKind::face || static_cast<int>(cell.anchor.size()) != d_)
        throw ParamError("face_id: not a face of this complex");
    std::array<int, 3> c{0, 0, 0};
    for (int i = 0; i < d_; ++i)
        c[i] = 2 * cell.anchor[i] + (i == cell.axis ? 1 : 0);
    return grid_id(c);
}

ContourEngine::ContourEngine(const LatticeSpec& lattice) : cx_(lattice)
{
    face_stamp_.assign(static_cast<std::size_t>(cx_.grid_size()), 0);
    ridge_owner_.assign(static_cast<std::size_t>(cx_.grid_size()), -1);
    ridge_stamp_.assign(static_cast<std::size_t>(cx_.grid_size()), 0);
    comp_.assign(static_cast<std::size_t>(lattice.size()), -1);
    in_int_.assign(static_cast<std::size_t>(lattice.size()), 0);
}

void ContourEngine::mark(const std::vector<int>& faces)
{
    if (++stamp_ == 0) {
        std::fill(face_stamp_.begin(), face_stamp_.end(), 0);
        std::fill(ridge_stamp_.begin(), ridge_stamp_.end(), 0);
        stamp_ = 1;
    }
    for (int f : faces)
        face_stamp_[static_cast<std::size_t>(f)] = stamp_;
}

std::vector<std::vector<int>> ContourEngine::components(const std::vector<int>& faces)
{
    mark(faces);
    const std::size_t m = faces.size();
    parent_.resize(m);
    std::iota(parent_.begin(), parent_.end(), 0);
    auto find = [&](int i) {
        while (parent_[static_cast<std::size_t>(i)] != i) {
            parent_[static_cast<std::size_t>(i)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(i)])];
            i = parent_[static_cast<std::size_t>(i)];
        }
        return i;
    };
    const int R = cx_.ridges_per_face();
    for (std::size_t i = 0; i < m; ++i) {
        const int* rr = cx_.ridges(faces[i]);
        for (int k = 0; k < R; ++k) {
            const std::size_t r = static_cast<std::size_t>(rr[k]);
            if (ridge_stamp_[r] == stamp_) {
                int a = find(static_cast<int>(i));
                int b = find(ridge_owner_[r]);
                if (a != b)
                    parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
            } else {
                ridge_stamp_[r] = stamp_;
                ridge_owner_[r] = static_cast<int>(i);
            }
        }
    }
    std::vector<std::vector<int>> out;
    std::vector<int> slot(m, -1);
    for (std::size_t i = 0; i < m; ++i) {
        int root = find(static_cast<int>(i));
        if (slot[static_cast<std::size_t>(root)] < 0) {
            slot[static_cast<std::size_t>(root)] = static_cast<int>(out.size());
            out.emplace_back();
        }
        out[static_cast<std::size_t>(slot[static_cast<std::size_t>(root)])].push_back(faces[i]);
    }
    return out;
}

std::vector<std::vector<int>> ContourEngine::interface_components(const std::int8_t* spins)
{
    std::vector<int> faces;
    for (int f : cx_.interior_faces())
        if (spins[cx_.cube_lo(f)] != spins[cx_.cube_hi(f)])
            faces.push_back(f);
    return components(faces);
}

std::vector<std::vector<int>> ContourEngine::closed_components(const std::int8_t* spins, int sign)
{
    std::vector<int> faces;
    for (int f : cx_.interior_faces())
        if (spins[cx_.cube_lo(f)] != spins[cx_.cube_hi(f)])
            faces.push_back(f);
    const std::int64_t N = cx_.lattice().size();
    for (std::int64_t s = 0; s < N; ++s)
        if (spins[s] != sign)
            for (int f : cx_.outer_faces(s))
                faces.push_back(f);
    std::sort(faces.begin(), faces.end());
    return components(faces);
}

IntExt ContourEngine::classify(const std::vector<int>& faces)
{
    const int d = cx_.d();
    const LatticeSpec& L = cx_.lattice();
    std::uint32_t touched = 0;
    for (int f : faces) {
        std::array<int, 3> c = cx_.doubled(f);
        const int a = cx_.face_axis(f);
        for (int j = 0; j < d; ++j) {
            if (j == a)
                continue;
            if (c[j] == 2 * L.lo())
                touched |= 1u << (2 * j);
            if (c[j] == 2 * L.hi())
                touched |= 1u << (2 * j + 1);
        }
    }
    bool octant = true;
    std::uint32_t far_mask = 0;
    for (int j = 0; j < d; ++j) {
        const bool lower = touched & (1u << (2 * j));
        const bool upper = touched & (1u << (2 * j + 1));
        if (lower && upper)
            octant = false;
        // corner side is upper only when just the upper side is touched
        far_mask |= upper && !lower ? 1u << (2 * j) : 1u << (2 * j + 1);
    }

    mark(faces);
    const std::int64_t N = L.size();
    std::fill(comp_.begin(), comp_.end(), -1);
    struct Comp {
        std::int64_t size = 0;
        std::uint32_t sides = 0;
    };
    std::vector<Comp> comps;
    for (std::int64_t s0 = 0; s0 < N; ++s0) {
        if (comp_[static_cast<std::size_t>(s0)] >= 0)
            continue;
        const int cid = static_cast<int>(comps.size());
        comps.emplace_back();
        queue_.clear();
        queue_.push_back(s0);
        comp_[static_cast<std::size_t>(s0)] = cid;
        for (std::size_t q = 0; q < queue_.size(); ++q) {
            const std::int64_t s = queue_[q];
            comps.back().size += 1;
            comps.back().sides |= cx_.sides(s);
            for (const auto& [t, f] : cx_.links(s)) {
                if (face_stamp_[static_cast<std::size_t>(f)] == stamp_ || comp_[static_cast<std::size_t>(t)] >= 0)
                    continue;
                comp_[static_cast<std::size_t>(t)] = cid;
                queue_.push_back(t);
            }
        }
    }

    std::vector<char> interior_comp(comps.size(), 0);
    IntExt out;
    if (octant) {
        out.case_tag = 1;
        for (std::size_t c = 0; c < comps.size(); ++c)
            interior_comp[c] = (comps[c].sides & far_mask) == 0;
    } else {
        out.case_tag = 2;
        std::size_t ext = 0;
        for (std::size_t c = 1; c < comps.size(); ++c)
            if (comps[c].size > comps[ext].size)
                ext = c;
        for (std::size_t c = 0; c < comps.size(); ++c)
            interior_comp[c] = c != ext;
    }
    for (std::int64_t s = 0; s < N; ++s)
        if (interior_comp[static_cast<std::size_t>(comp_[static_cast<std::size_t>(s)])])
            out.interior.push_back(s);
    return out;
}

std::vector<std::int64_t> ContourEngine::closed_interior(const std::vector<int>& faces)
{
    mark(faces);
    const std::int64_t N = cx_.lattice().size();
    std::fill(comp_.begin(), comp_.end(), -1);
    std::vector<char> infinite;
    for (std::int64_t s0 = 0; s0 < N; ++s0) {
        if (comp_[static_cast<std::size_t>(s0)] >= 0)
            continue;
        const int cid = static_cast<int>(infinite.size());
        infinite.push_back(0);
        queue_.clear();
        queue_.push_back(s0);
        comp_[static_cast<std::size_t>(s0)] = cid;
        for (std::size_t q = 0; q < queue_.size(); ++q) {
            const std::int64_t s = queue_[q];
            for (int f : cx_.outer_faces(s))
                if (face_stamp_[static_cast<std::size_t>(f)] != stamp_)
                    infinite.back() = 1;
            for (const auto& [t, f] : cx_.links(s)) {
                if (face_stamp_[static_cast<std::size_t>(f)] == stamp_ || comp_[static_cast<std::size_t>(t)] >= 0)
                    continue;
                comp_[static_cast<std::size_t>(t)] = cid;
                queue_.push_back(t);
            }
        }
    }
    std::vector<std::int64_t> out;
    for (std::int64_t s = 0; s < N; ++s)
        if (!infinite[static_cast<std::size_t>(comp_[static_cast<std::size_t>(s)])])
            out.push_back(s);
    return out;
}

int ContourEngine::exterior_sign(const std::int8_t* spins)
{
    auto comps = interface_components(spins);
    if (comps.empty())
        return spins[0];
    std::fill(in_int_.begin(), in_int_.end(), 0);
    for (const auto& faces : comps)
        for (std::int64_t s : classify(faces).interior)
            in_int_[static_cast<std::size_t>(s)] = 1;
    int sign = 0;
    const std::int64_t N = cx_.lattice().size();
    for (std::int64_t s = 0; s < N; ++s) {
        if (in_int_[static_cast<std::size_t>(s)])
            continue;
        if (sign == 0)
            sign = spins[s];
        else if (sign != spins[s])
            throw ConsistencyError("joint exterior carries both spin values");
    }
    if (sign == 0)
        throw ConsistencyError("joint exterior contains no site");
    return sign;
}

void ContourEngine::populate(Contour& c) const
{
    const LatticeSpec& L = cx_.lattice();
    std::sort(c.interior.begin(), c.interior.end());
    c.boundary_sites.clear();
    c.boundary_plaquettes.clear();
    for (std::int64_t s : c.interior) {
        if (!L.is_boundary(s))
            continue;
        c.boundary_sites.push_back(s);
        for (int f : cx_.outer_faces(s))
            c.boundary_plaquettes.push_back(f);
    }
    std::sort(c.boundary_plaquettes.begin(), c.boundary_plaquettes.end());
    c.vertices.clear();
    for (int f : c.faces) {
        const int* vv = cx_.vertices(f);
        for (int k = 0; k < cx_.vertices_per_face(); ++k)
            c.vertices.push_back(vv[k]);
    }
    std::sort(c.vertices.begin(), c.vertices.end());
    c.vertices.erase(std::unique(c.vertices.begin(), c.vertices.end()), c.vertices.end());
}

ContourSet extract(const SpinConfig& config, const LatticeSpec& lattice)
{
    require_geometry_dim(lattice);
    if (config.size() != lattice.size())
        throw ParamError("extract: configuration size does not match lattice");
    ContourEngine eng(lattice);
    auto spins = config.to_int8();
    ContourSet out;
    for (auto& faces : eng.interface_components(spins.data())) {
        Contour c;
        c.kind = ContourKind::open;
        c.faces = std::move(faces);
        IntExt ie = eng.classify(c.faces);
        c.case_tag = ie.case_tag;
        c.interior = std::move(ie.interior);
        eng.populate(c);
        out.contours.push_back(std::move(c));
    }
    out.exterior_sign = eng.exterior_sign(spins.data());
    return out;
}

ContourSet extract_closed(const SpinConfig& config, const LatticeSpec& lattice, int sign)
{
    require_geometry_dim(lattice);
    if (sign != 1 && sign != -1)
        throw ParamError("extract_closed: sign must be +1 or -1");
    if (config.size() != lattice.size())
        throw ParamError("extract_closed: configuration size does not match lattice");
    ContourEngine eng(lattice);
    auto spins = config.to_int8();
    ContourSet out;
    out.exterior_sign = sign;
    for (auto& faces : eng.closed_components(spins.data(), sign)) {
        Contour c;
        c.kind = ContourKind::closed;
        c.faces = std::move(faces);
        c.case_tag = 0;
        c.interior = eng.closed_interior(c.faces);
        eng.populate(c);
        out.contours.push_back(std::move(c));
    }
    return out;
}

IntExt classify_int_ext(const Contour& contour, const LatticeSpec& lattice)
{
    require_geometry_dim(lattice);
    ContourEngine eng(lattice);
    return eng.classify(contour.faces);
}

int exterior_sign(const SpinConfig& config, const LatticeSpec& lattice)
{
    require_geometry_dim(lattice);
    ContourEngine eng(lattice);
    auto spins = config.to_int8();
    return eng.exterior_sign(spins.data());
}

bool lies_inside(const Contour& inner, const Contour& outer, const CellComplex& cx)
{
    if (inner.faces == outer.faces)
        return false;
    for (int f : inner.faces) {
        if (!std::binary_search(outer.interior.begin(), outer.interior.end(), cx.cube_lo(f)) ||
            !std::binary_search(outer.interior.begin(), outer.interior.end(), cx.cube_hi(f)))
            return false;
    }
    // closed sets must not meet
    auto a = inner.vertices.begin();
    auto b = outer.vertices.begin();
    while (a != inner.vertices.end() && b != outer.vertices.end()) {
        if (*a == *b)
            return false;
        if (*a < *b)
            ++a;
        else
            ++b;
    }
    return true;
}

namespace {

void finish_catalog(Catalog& cat, const std::vector<std::vector<int>>& face_sets)
{
    ContourEngine eng(cat.lattice);
    const CellComplex& cx = eng.complex();
    for (const auto& faces : face_sets) {
        Contour c;
        c.kind = ContourKind::open;
        c.faces = faces;
        IntExt ie = eng.classify(c.faces);
        c.case_tag = ie.case_tag;
        c.interior = std::move(ie.interior);
        eng.populate(c);
        cat.contours.push_back(std::move(c));
    }
    // Any contour inside Int γ has its first face's lower cube in Λ(γ).
    std::unordered_map<std::int64_t, std::vector<int>> by_anchor;
    for (std::size_t i = 0; i < cat.contours.size(); ++i)
        by_anchor[cx.cube_lo(cat.contours[i].faces.front())].push_back(static_cast<int>(i));
    cat.inner.assign(cat.contours.size(), {});
    for (std::size_t i = 0; i < cat.contours.size(); ++i) {
        Contour& g = cat.contours[i];
        int v = 0;
        for (std::int64_t s : g.interior) {
            auto it = by_anchor.find(s);
            if (it == by_anchor.end())
                continue;
            for (int j : it->second) {
                const Contour& h = cat.contours[static_cast<std::size_t>(j)];
                if (h.interior.size() >= g.interior.size() || !lies_inside(h, g, cx))
                    continue;
                cat.inner[i].push_back(j);
                v = std::max(v, static_cast<int>(h.interior.size()));
            }
        }
        std::sort(cat.inner[i].begin(), cat.inner[i].end());
        g.v = v;
    }
}

bool face_set_less(const std::vector<int>& a, const std::vector<int>& b)
{
    if (a.size() != b.size())
        return a.size() < b.size();
    return a < b;
}

struct VecHash {
    std::size_t operator()(const std::vector<int>& v) const
    {
        std::uint64_t h = 0x1234;
        for (int x : v)
            h = hash_combine(h, static_cast<std::uint64_t>(x));
        return static_cast<std::size_t>(h);
    }
};

} // namespace

Catalog catalog(const LatticeSpec& lattice, int max_size, int max_sites)
{
    if (lattice.d() != 2)
        throw UnsupportedError("catalog: config-scan catalog supports d=2 only");
    if (lattice.size() > max_sites || lattice.size() > 30)
        throw SizeError("catalog: lattice has " + std::to_string(lattice.size()) + " sites, cap is " +
                        std::to_string(std::min(max_sites, 30)));
    if (max_size <= 0)
        max_size = std::numeric_limits<int>::max();
    const int N = static_cast<int>(lattice.size());
    // D(σ) = D(-σ): scan configurations with the last spin fixed to -1.
    const std::uint64_t half = N > 0 ? 1ULL << (N - 1) : 1;
    const std::size_t chunks = half >= 64 ? 64 : 1;
    std::vector<std::unordered_set<std::vector<int>, VecHash>> found(chunks);
    parallel_chunks(chunks, [&](std::size_t c) {
        ContourEngine eng(lattice);
        const std::uint64_t begin = half * c / chunks;
        const std::uint64_t end = half * (c + 1) / chunks;
        std::vector<std::int8_t> spins(static_cast<std::size_t>(N));
        for (std::uint64_t bits = begin; bits < end; ++bits) {
            for (int i = 0; i < N; ++i)
                spins[static_cast<std::size_t>(i)] = (bits >> i) & 1ULL ? 1 : -1;
            for (auto& comp : eng.interface_components(spins.data()))
                if (static_cast<int>(comp.size()) <= max_size)
                    found[c].insert(std::move(comp));
        }
    });
    std::set<std::vector<int>, decltype(&face_set_less)> all(&face_set_less);
    for (auto& s : found)
        for (auto& v : s)
            all.insert(v);
    Catalog cat;
    cat.lattice = lattice;
    cat.max_size = max_size;
    cat.complete = true;
    std::vector<std::vector<int>> sets(all.begin(), all.end());
    finish_catalog(cat, sets);
    return cat;
}

Catalog catalog_bounded(const LatticeSpec& lattice, int max_size)
{
    if (lattice.d() != 2)
        throw UnsupportedError("catalog_bounded: d=2 only");
    if (max_size < 1)
        throw ParamError("catalog_bounded: max_size must be >= 1");
    CellComplex cx(lattice);
    const auto& faces = cx.interior_faces();
    const int F = static_cast<int>(faces.size());
    std::unordered_map<int, int> local;
    for (int i = 0; i < F; ++i)
        local[faces[static_cast<std::size_t>(i)]] = i;
    // adjacency through shared vertices
    std::unordered_map<int, std::vector<int>> at_vertex;
    for (int i = 0; i < F; ++i) {
        const int* vv = cx.vertices(faces[static_cast<std::size_t>(i)]);
        for (int k = 0; k < cx.vertices_per_face(); ++k)
            at_vertex[vv[k]].push_back(i);
    }
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(F));
    for (auto& [v, list] : at_vertex)
        for (int a : list)
            for (int b : list)
                if (a != b)
                    adj[static_cast<std::size_t>(a)].push_back(b);
    for (auto& l : adj) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
    }
    std::vector<char> constrained(static_cast<std::size_t>(cx.grid_size()), 0);
    for (auto& [v, list] : at_vertex)
        constrained[static_cast<std::size_t>(v)] = !cx.is_boundary_point(v);

    std::vector<std::vector<int>> results;
    std::vector<int> parity(static_cast<std::size_t>(cx.grid_size()), 0);
    std::vector<char> seen(static_cast<std::size_t>(F), 0);
    std::vector<int> current;
    int odd = 0;

    auto toggle = [&](int fi) {
        const int* vv = cx.vertices(faces[static_cast<std::size_t>(fi)]);
        for (int k = 0; k < cx.vertices_per_face(); ++k) {
            const std::size_t v = static_cast<std::size_t>(vv[k]);
            if (!constrained[v])
                continue;
            parity[v] ^= 1;
            odd += parity[v] ? 1 : -1;
        }
    };

    int root = 0;
    std::function<void(std::vector<int>)> extend = [&](std::vector<int> untried) {
        while (!untried.empty()) {
            const int v = untried.back();
            untried.pop_back();
            current.push_back(v);
            toggle(v);
            if (odd == 0) {
                std::vector<int> ids;
                ids.reserve(current.size());
                for (int fi : current)
                    ids.push_back(faces[static_cast<std::size_t>(fi)]);
                std::sort(ids.begin(), ids.end());
                results.push_back(std::move(ids));
            }
            const int remaining = max_size - static_cast<int>(current.size());
            if (remaining > 0 && odd <= 2 * remaining) {
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
            }
            toggle(v);
            current.pop_back();
        }
    };
    for (root = 0; root < F; ++root) {
        seen[static_cast<std::size_t>(root)] = 1;
        extend({root});
        seen[static_cast<std::size_t>(root)] = 0;
    }
    std::sort(results.begin(), results.end(), face_set_less);
    Catalog cat;
    cat.lattice = lattice;
    cat.max_size = max_size;
    cat.complete = false;
    finish_catalog(cat, results);
    return cat;
}

double theta(int d)
{
    const double r = std::pow(2.0, 1.0 / d);
    return (r + 1.0) / (r - 1.0);
}

bool theta_check(const Contour& contour, int d)
{
    return static_cast<double>(contour.boundary_plaquettes.size()) <= theta(d) * contour.size();
}

std::string dump_json(const ContourSet& set, const CellComplex& cx)
{
    nlohmann::json j;
    j["exterior_sign"] = set.exterior_sign;
    j["contours"] = nlohmann::json::array();
    for (const Contour& c : set.contours) {
        nlohmann::json jc;
        jc["kind"] = c.kind == ContourKind::open ? "open" : "closed";
        jc["size"] = c.size();
        jc["case"] = c.case_tag;
        nlohmann::json faces = nlohmann::json::array();
        for (int f : c.faces) {
            Cell cell = cx.cell(f);
            faces.push_back({{"anchor", cell.anchor}, {"axis", cell.axis}});
        }
        jc["faces"] = faces;
        nlohmann::json interior = nlohmann::json::array();
        for (std::int64_t s : c.interior)
            interior.push_back(cx.lattice().coords(s));
        jc["interior"] = interior;
        j["contours"].push_back(jc);
    }
    return j.dump(2);
}

} // namespace rbising
