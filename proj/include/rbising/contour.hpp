#pragma once

#include "rbising/lattice.hpp"
#include "rbising/spin_config.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rbising {

// Cubical complex of V_n in doubled coordinates: a cube centred at x sits at
// 2x, a face between x and x+e_a at 2x+e_a, ridges and vertices at points
// with two resp. all coordinates odd. Grid ids index the doubled box.
// Supports d in {2,3}.
class CellComplex {
public:
    explicit CellComplex(const LatticeSpec& lattice);

    const LatticeSpec& lattice() const { return lattice_; }
    int d() const { return d_; }
    int grid_size() const { return grid_size_; }

    int grid_id(const std::array<int, 3>& doubled) const;
    std::array<int, 3> doubled(int id) const;

    bool is_face(int id) const { return axis_[static_cast<std::size_t>(id)] >= 0; }
    int face_axis(int id) const { return axis_[static_cast<std::size_t>(id)]; }
    // Site index of the lower/upper cube, -1 when outside the lattice.
    std::int64_t cube_lo(int id) const { return cube_lo_[static_cast<std::size_t>(id)]; }
    std::int64_t cube_hi(int id) const { return cube_hi_[static_cast<std::size_t>(id)]; }
    bool is_interior_face(int id) const { return is_face(id) && cube_lo(id) >= 0 && cube_hi(id) >= 0; }

    int ridges_per_face() const { return ridges_per_face_; }
    int vertices_per_face() const { return vertices_per_face_; }
    const int* ridges(int id) const { return &ridges_[static_cast<std::size_t>(id) * ridges_per_face_]; }
    const int* vertices(int id) const { return &vertices_[static_cast<std::size_t>(id) * vertices_per_face_]; }
    bool is_boundary_point(int id) const;

    const std::vector<int>& interior_faces() const { return interior_faces_; }
    const std::vector<int>& outer_faces(std::int64_t site) const { return outer_faces_[static_cast<std::size_t>(site)]; }
    // (neighbour site, shared face) pairs.
    const std::vector<std::pair<std::int64_t, int>>& links(std::int64_t site) const
    {
        return links_[static_cast<std::size_t>(site)];
    }
    // Bit 2j set if the site lies on the lower side of axis j, bit 2j+1 upper.
    std::uint32_t sides(std::int64_t site) const { return sides_[static_cast<std::size_t>(site)]; }

    int face_between(std::int64_t a, std::int64_t b) const;
    Cell cell(int face_id) const;
    int face_id(const Cell& cell) const;

private:
    LatticeSpec lattice_;
    int d_ = 2;
    int width_ = 0;
    int offset_ = 0;
    int grid_size_ = 0;
    int ridges_per_face_ = 0;
    int vertices_per_face_ = 0;
    std::vector<int> axis_;
    std::vector<std::int64_t> cube_lo_;
    std::vector<std::int64_t> cube_hi_;
    std::vector<int> ridges_;
    std::vector<int> vertices_;
    std::vector<int> interior_faces_;
    std::vector<std::vector<int>> outer_faces_;
    std::vector<std::vector<std::pair<std::int64_t, int>>> links_;
    std::vector<std::uint32_t> sides_;
};

enum class ContourKind { open, closed };

struct Contour {
    ContourKind kind = ContourKind::open;
    std::vector<int> faces;                    // sorted grid ids
    int case_tag = 0;                          // 1 octant rule, 2 interface rule, 0 closed
    std::vector<std::int64_t> interior;        // Λ(γ)
    std::vector<std::int64_t> boundary_sites;  // ∂_n(γ)
    std::vector<int> boundary_plaquettes;      // 𝒫(γ)
    std::vector<int> vertices;                 // 0-cells of the closed face set
    int v = -1;

    int size() const { return static_cast<int>(faces.size()); }
};

struct ContourSet {
    std::vector<Contour> contours;
    int exterior_sign = 0;
};

struct IntExt {
    std::vector<std::int64_t> interior;
    int case_tag = 0;
};

// Reusable extraction workspace. Not thread safe; use one per thread.
class ContourEngine {
public:
    explicit ContourEngine(const LatticeSpec& lattice);

    const CellComplex& complex() const { return cx_; }

    // Connected components of the interface, each as sorted face ids.
    std::vector<std::vector<int>> interface_components(const std::int8_t* spins);
    // Components of the boundary of the (-sign) region, outer faces included.
    std::vector<std::vector<int>> closed_components(const std::int8_t* spins, int sign);

    IntExt classify(const std::vector<int>& faces);
    std::vector<std::int64_t> closed_interior(const std::vector<int>& faces);

    int exterior_sign(const std::int8_t* spins);

    void populate(Contour& c) const;

private:
    void mark(const std::vector<int>& faces);
    std::vector<std::vector<int>> components(const std::vector<int>& faces);

    CellComplex cx_;
    std::vector<std::uint32_t> face_stamp_;
    std::uint32_t stamp_ = 0;
    std::vector<int> ridge_owner_;
    std::vector<std::uint32_t> ridge_stamp_;
    std::vector<int> parent_;
    std::vector<int> comp_;
    std::vector<std::int64_t> queue_;
    std::vector<std::uint8_t> in_int_;
};

ContourSet extract(const SpinConfig& config, const LatticeSpec& lattice);
ContourSet extract_closed(const SpinConfig& config, const LatticeSpec& lattice, int sign);
IntExt classify_int_ext(const Contour& contour, const LatticeSpec& lattice);
int exterior_sign(const SpinConfig& config, const LatticeSpec& lattice);

// True if every face of inner lies in the open region Int(outer).
bool lies_inside(const Contour& inner, const Contour& outer, const CellComplex& cx);

struct Catalog {
    LatticeSpec lattice;
    int max_size = 0;
    bool complete = false;  // every contour of D_n up to max_size
    std::vector<Contour> contours;
    std::vector<std::vector<int>> inner;  // catalog indices lying inside Int γ
};

// Contours of D_n collected by scanning all configurations (d=2).
Catalog catalog(const LatticeSpec& lattice, int max_size, int max_sites = 25);
// Contours up to max_size plaquettes built directly as connected face sets
// with even degree at every vertex off the outer boundary (d=2, any n).
Catalog catalog_bounded(const LatticeSpec& lattice, int max_size);

double theta(int d);
bool theta_check(const Contour& contour, int d);

std::string dump_json(const ContourSet& set, const CellComplex& cx);

} // namespace rbising
