#include "rbising/lattice.hpp"

#include "rbising/common.hpp"

#include <cstdlib>
#include <sstream>

namespace rbising {

namespace {

std::int64_t ipow(std::int64_t b, int e)
{
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) {
        if (b != 0 && r > std::numeric_limits<std::int64_t>::max() / b)
            throw SizeError("lattice size overflows 64-bit index");
        r *= b;
    }
    return r;
}

int floor_div2(int v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }

} // namespace

std::int64_t boundary_count(int d, std::int64_t n)
{
    std::int64_t inner = n > 2 ? n - 2 : 0;
    return ipow(n, d) - ipow(inner, d);
}

LatticeSpec::LatticeSpec(int d, int n) : d_(d), n_(n)
{
    if (d < 2)
        throw ParamError("lattice dimension must be >= 2, got " + std::to_string(d));
    if (n < 1)
        throw ParamError("lattice side must be >= 1, got " + std::to_string(n));
    // -n/2 < x <= n/2
    hi_ = floor_div2(n);
    lo_ = floor_div2(-n) + 1;
    size_ = ipow(n, d);
    boundary_size_ = boundary_count(d, n);
    stride_.assign(d, 1);
    for (int i = d - 2; i >= 0; --i)
        stride_[i] = stride_[i + 1] * n;
}

LatticeSpec build(int d, int n) { return LatticeSpec(d, n); }

bool LatticeSpec::contains(const Site& x) const
{
    if (static_cast<int>(x.size()) != d_)
        return false;
    for (int v : x)
        if (v < lo_ || v > hi_)
            return false;
    return true;
}

std::int64_t LatticeSpec::index(const Site& x) const
{
    if (!contains(x))
        throw ParamError("site outside lattice");
    std::int64_t idx = 0;
    for (int i = 0; i < d_; ++i)
        idx += static_cast<std::int64_t>(x[i] - lo_) * stride_[i];
    return idx;
}

Site LatticeSpec::coords(std::int64_t index) const
{
    if (index < 0 || index >= size_)
        throw ParamError("site index out of range");
    Site x(d_);
    for (int i = 0; i < d_; ++i) {
        x[i] = static_cast<int>(index / stride_[i]) + lo_;
        index %= stride_[i];
    }
    return x;
}

int LatticeSpec::coord(std::int64_t index, int axis) const
{
    return static_cast<int>((index / stride_[axis]) % n_) + lo_;
}

bool LatticeSpec::is_boundary(std::int64_t index) const
{
    for (int i = 0; i < d_; ++i) {
        int c = coord(index, i);
        if (c == lo_ || c == hi_)
            return true;
    }
    return false;
}

std::vector<Site> LatticeSpec::neighbors(const Site& x) const
{
    if (!contains(x))
        throw ParamError("neighbors: site outside lattice");
    std::vector<Site> out;
    for (int i = 0; i < d_; ++i) {
        for (int s : {-1, 1}) {
            Site y = x;
            y[i] += s;
            if (y[i] >= lo_ && y[i] <= hi_)
                out.push_back(std::move(y));
        }
    }
    return out;
}

std::vector<std::int64_t> LatticeSpec::neighbor_indices(std::int64_t index) const
{
    std::vector<std::int64_t> out;
    for (int i = 0; i < d_; ++i) {
        int c = coord(index, i);
        if (c > lo_)
            out.push_back(index - stride_[i]);
        if (c < hi_)
            out.push_back(index + stride_[i]);
    }
    return out;
}

int LatticeSpec::degree(std::int64_t index) const
{
    int deg = 0;
    for (int i = 0; i < d_; ++i) {
        int c = coord(index, i);
        deg += (c > lo_) + (c < hi_);
    }
    return deg;
}

std::vector<Site> LatticeSpec::sites() const
{
    std::vector<Site> out;
    out.reserve(static_cast<std::size_t>(size_));
    for (std::int64_t i = 0; i < size_; ++i)
        out.push_back(coords(i));
    return out;
}

std::vector<std::int64_t> LatticeSpec::boundary_indices() const
{
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(boundary_size_));
    for (std::int64_t i = 0; i < size_; ++i)
        if (is_boundary(i))
            out.push_back(i);
    return out;
}

Cell LatticeSpec::faces_between(const Site& x, const Site& y) const
{
    if (!contains(x) || !contains(y))
        throw ParamError("faces_between: site outside lattice");
    int axis = -1;
    int dist = 0;
    for (int i = 0; i < d_; ++i) {
        int diff = std::abs(x[i] - y[i]);
        if (diff != 0) {
            axis = i;
            dist += diff;
        }
    }
    if (dist != 1)
        throw ParamError("faces_between: sites are not nearest neighbours");
    Cell c;
    c.kind = CellKind::face;
    c.axis = axis;
    c.anchor = x[axis] < y[axis] ? x : y;
    return c;
}

std::string LatticeSpec::describe() const
{
    std::ostringstream os;
    os << "d=" << d_ << " n=" << n_ << " coords [" << lo_ << "," << hi_ << "]";
    return os.str();
}

std::vector<Site> neighbors(const LatticeSpec& lattice, const Site& x) { return lattice.neighbors(x); }

Cell faces_between(const LatticeSpec& lattice, const Site& x, const Site& y)
{
    return lattice.faces_between(x, y);
}

} // namespace rbising
