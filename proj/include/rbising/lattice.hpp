#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rbising {

using Site = std::vector<int>;

enum class CellKind { site_cube, face };

// A unit cube or a (d-1)-face. Faces are encoded by the lower of the two
// cubes they separate plus the normal axis; the lower cube may lie outside
// the lattice for faces on the outer boundary.
struct Cell {
    CellKind kind = CellKind::face;
    Site anchor;
    int axis = 0;

    bool operator==(const Cell&) const = default;
    auto operator<=>(const Cell&) const = default;
};

class LatticeSpec {
public:
    LatticeSpec() = default;
    LatticeSpec(int d, int n);

    int d() const { return d_; }
    int n() const { return n_; }
    int lo() const { return lo_; }
    int hi() const { return hi_; }
    std::int64_t size() const { return size_; }
    std::int64_t boundary_size() const { return boundary_size_; }

    bool contains(const Site& x) const;
    std::int64_t index(const Site& x) const;
    Site coords(std::int64_t index) const;
    int coord(std::int64_t index, int axis) const;

    bool is_boundary(std::int64_t index) const;
    bool is_boundary(const Site& x) const { return is_boundary(index(x)); }

    // In-lattice nearest neighbours, ordered by axis then -e before +e.
    std::vector<Site> neighbors(const Site& x) const;
    std::vector<std::int64_t> neighbor_indices(std::int64_t index) const;
    int degree(std::int64_t index) const;

    std::vector<Site> sites() const;
    std::vector<std::int64_t> boundary_indices() const;

    // Face shared by the cubes of two nearest-neighbour sites.
    Cell faces_between(const Site& x, const Site& y) const;

    std::string describe() const;

    bool operator==(const LatticeSpec& o) const { return d_ == o.d_ && n_ == o.n_; }

private:
    int d_ = 2;
    int n_ = 1;
    int lo_ = 0;
    int hi_ = 0;
    std::int64_t size_ = 1;
    std::int64_t boundary_size_ = 1;
    std::vector<std::int64_t> stride_;
};

LatticeSpec build(int d, int n);

std::vector<Site> neighbors(const LatticeSpec& lattice, const Site& x);

Cell faces_between(const LatticeSpec& lattice, const Site& x, const Site& y);

// n^d - max(n-2,0)^d, valid for any d without building the lattice.
std::int64_t boundary_count(int d, std::int64_t n);

} // namespace rbising
