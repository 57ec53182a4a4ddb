#pragma once

#include "rbising/contour.hpp"
#include "rbising/disorder.hpp"
#include "rbising/gibbs.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace rbising {

// E_Θ^{λ,x,±} = ∓(S_Θ^λ + η 1_{x0 ∈ Θ}).
double e_term(const BoundaryField& field, const ModelParams& params, const std::vector<std::int64_t>& theta, int sign);

// Complete catalog for n <= 4, bounded catalog of contours up to `max_size`
// otherwise. Cached per (d, n, max_size).
std::shared_ptr<const Catalog> shared_catalog(const LatticeSpec& lattice, int max_size = 0);

struct ContourWeightTable {
    std::vector<double> logK_plus;
    std::vector<double> logK_minus;
    std::vector<double> logZ_plus;   // log Z_γ^{λ,+}
    std::vector<double> logZ_minus;  // log Z_γ^{λ,-}
    std::vector<int> order;          // processing order, by (v(γ), index)
};

ContourWeightTable build_weights(const Catalog& cat, const BoundaryField& field, const ModelParams& params);
ContourWeightTable build_weights(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params);

struct ZPm {
    double logZ_plus = 0.0;
    double logZ_minus = 0.0;
    double F = 0.0;
};

// Z_n^± = e^{-E_n^±} Σ over families of mutually disjoint catalogued contours.
ZPm z_pm_contour(const Catalog& cat, const ContourWeightTable& table, const BoundaryField& field,
                 const ModelParams& params);
ZPm z_pm_contour(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params);

struct ClusterShape {
    std::vector<int> contours;               // catalog indices, ascending
    int size = 0;                            // Σ |γ|
    std::vector<std::int64_t> sites;         // Λ(C)
    std::vector<std::int64_t> boundary_sites;  // ∂_n(C)
};

inline constexpr std::size_t default_cluster_cap = 1000000;

// Connected families of contours (incompatible = sharing a vertex) with
// Σ|γ| <= cutoff.
std::vector<ClusterShape> enumerate_clusters(const Catalog& cat, int cutoff,
                                             std::size_t max_clusters = default_cluster_cap);

struct ClusterWeight {
    const ClusterShape* shape = nullptr;
    double phi_plus = 0.0;
    double phi_minus = 0.0;
    double delta() const { return phi_plus - phi_minus; }
};

std::vector<ClusterWeight> cluster_weights(const Catalog& cat, const ContourWeightTable& table,
                                           const std::vector<ClusterShape>& clusters);

// 2(S_n^λ + η 1_{x0}) + Σ_{C: ∂_n(C) ≠ ∅} ΔΦ_C over the given clusters.
double f_cluster(const BoundaryField& field, const ModelParams& params, const std::vector<ClusterWeight>& weights);

// Convenience: catalog, weights, clusters and the sum in one call.
double f_cluster(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params, int cutoff);

// Reusable evaluator for many fields on one lattice at fixed cutoff. Only
// clusters touching ∂Λ_n are kept.
class ClusterExpansion {
public:
    ClusterExpansion(const LatticeSpec& lattice, int cutoff, std::size_t max_clusters = default_cluster_cap);

    const Catalog& catalog() const { return *catalog_; }
    const std::vector<ClusterShape>& clusters() const { return clusters_; }
    int cutoff() const { return cutoff_; }

    double F(const BoundaryField& field, const ModelParams& params) const;
    // F with clusters of size <= cutoff_ and <= smaller, in one pass.
    std::pair<double, double> F_pair(const BoundaryField& field, const ModelParams& params, int smaller) const;
    // ΔΦ_C for every kept cluster, in clusters() order.
    std::vector<double> deltas(const BoundaryField& field, const ModelParams& params) const;

private:
    std::shared_ptr<const Catalog> catalog_;
    std::vector<ClusterShape> clusters_;
    std::vector<int> needed_;  // catalog contours reachable from the kept clusters
    int cutoff_ = 0;
};

// (p_plus, p_minus) = (1/(1+e^{-F}), 1/(1+e^{F})).
std::pair<double, double> mixture(double F);

// Σ_{C: x ∈ Λ(C), |C| <= cutoff} e^{2(β-c)|C|} |Φ_C^{λ,±}|.
double decay_sum(const std::vector<ClusterWeight>& weights, const LatticeSpec& lattice, const ModelParams& params,
                 double c, const Site& x, int cutoff, int sign);

} // namespace rbising
