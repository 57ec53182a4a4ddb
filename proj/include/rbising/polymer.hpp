#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace rbising {

using cplx = std::complex<double>;

// Finite polymer set with a symmetric, reflexive incompatibility relation.
class PolymerSystem {
public:
    PolymerSystem() = default;
    explicit PolymerSystem(std::vector<cplx> weights);

    int size() const { return static_cast<int>(weights_.size()); }
    const std::vector<cplx>& weights() const { return weights_; }
    cplx weight(int i) const { return weights_[static_cast<std::size_t>(i)]; }
    void set_weight(int i, cplx w) { weights_[static_cast<std::size_t>(i)] = w; }
    PolymerSystem with_weights(std::vector<cplx> weights) const;

    void set_incompatible(int i, int j);
    bool incompatible(int i, int j) const
    {
        return incompat_[static_cast<std::size_t>(i) * weights_.size() + static_cast<std::size_t>(j)] != 0;
    }

private:
    std::vector<cplx> weights_;
    std::vector<std::uint8_t> incompat_;
};

inline constexpr int partition_fn_cap = 22;
inline constexpr int truncated_weight_cap = 20;
inline constexpr int cluster_bound_cap = 14;

// Σ over compatible Δ ⊂ Λ of Π w(Γ).
cplx partition_fn(const PolymerSystem& sys, const std::vector<int>& subset);

// w^T(Δ) by Möbius inversion of log Z over subsets of Δ (principal logs).
cplx truncated_weight(const PolymerSystem& sys, const std::vector<int>& delta);

// w^T(Δ) for every Δ ⊂ subset, indexed by the bitmask over subset positions.
std::vector<cplx> truncated_weight_table(const PolymerSystem& sys, const std::vector<int>& subset);

// d w^T / dη for every Δ ⊂ subset given weights and their η-derivatives.
std::vector<cplx> truncated_weight_derivative_table(const PolymerSystem& sys, const std::vector<cplx>& dweights,
                                                    const std::vector<int>& subset);

bool is_cluster(const PolymerSystem& sys, const std::vector<int>& delta);

// Each pair incompatible with probability p_incompatible; complex weights
// uniform in the disc |w| <= weight_bound.
PolymerSystem random_system(int size, double weight_bound, double p_incompatible, std::uint64_t seed);

struct KpEntry {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    double margin() const { return rhs - lhs; }
};

struct KpReport {
    std::vector<KpEntry> entries;  // one per Γ0
    bool pass = true;
};

KpReport kp_check(const PolymerSystem& sys, const std::vector<double>& a, const std::vector<double>& b);

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    bool precondition_ok = false;
};

// Cluster bound Σ_{Δ incompatible with Γ0} e^{b(Δ)} |w^T(Δ)| ≤ a(Γ0) over
// every cluster of the system. Throws PreconditionError when strict and the
// KP condition fails.
BoundCheck kp_cluster_bound_check(const PolymerSystem& sys, const std::vector<double>& a,
                                  const std::vector<double>& b, int gamma0, bool strict = true);

inline constexpr double c_infinity = std::numeric_limits<double>::infinity();

struct WeightFamily {
    PolymerSystem system;  // incompatibility only; weights come from `weights`
    std::function<std::vector<cplx>(double)> weights;
    // Optional exact dw/dη; central differences with step h otherwise.
    std::function<std::vector<cplx>(double)> derivative;
};

BoundCheck derivative_bound_check(const WeightFamily& family, const std::vector<double>& a,
                                  const std::vector<double>& b, const std::vector<double>& c, int gamma0, double eta,
                                  double h, bool strict = true);

BoundCheck difference_bound_check(const PolymerSystem& w1, const std::vector<cplx>& w2, const std::vector<double>& a,
                                  const std::vector<double>& b, const std::vector<double>& c, int gamma0,
                                  bool strict = true);

// Hard-core gas: polymers are vertex sets, compatible iff disjoint, with
// positive weights given as logs. Returns log of Σ over disjoint families.
struct HardCorePolymer {
    std::vector<int> vertices;  // sorted
    double log_weight = 0.0;
};

double hard_core_log_partition(const std::vector<HardCorePolymer>& polymers);

} // namespace rbising
