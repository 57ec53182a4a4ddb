#pragma once

#include "rbising/disorder.hpp"
#include "rbising/lattice.hpp"
#include "rbising/spin_config.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace rbising {

struct ModelParams {
    double beta = 1.0;
    double eta = 0.0;
    std::optional<Site> probe_site;

    void validate(const LatticeSpec& lattice) const;
    // Site index of x0, or -1 when the probe term is absent.
    std::int64_t probe_index(const LatticeSpec& lattice) const;
};

struct ExactResult {
    double logZ = 0.0;
    double logZ_plus = 0.0;
    double logZ_minus = 0.0;
    double F = 0.0;
    std::vector<double> mag;        // <σ_x> under μ_n^λ
    std::vector<double> mag_plus;   // restricted to Ω_n^+
    std::vector<double> mag_minus;  // restricted to Ω_n^-
    std::uint64_t count_plus = 0;
    std::uint64_t count_minus = 0;

    // |Z - (Z+ + Z-)| / Z evaluated in the log domain.
    double split_residual() const;
};

struct PmResult {
    double logZ = 0.0;
    std::vector<double> mag;
};

inline constexpr int default_site_cap = 24;
inline constexpr int hard_site_cap = 26;

double energy(const SpinConfig& config, const BoundaryField& field, const ModelParams& params,
              const LatticeSpec& lattice);
double energy_pm(const SpinConfig& config, int sign, const ModelParams& params, const LatticeSpec& lattice);

// Bit c of word c/64 set iff configuration c (site i = bit i, set = +1)
// lies in Ω_n^+. Computed once per (d, n) and shared.
const std::vector<std::uint64_t>& omega_plus_table(const LatticeSpec& lattice, int cap = default_site_cap);

inline bool in_omega_plus(const std::vector<std::uint64_t>& table, std::uint64_t bits)
{
    return (table[bits >> 6] >> (bits & 63)) & 1ULL;
}

ExactResult enumerate(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params,
                      int cap = default_site_cap);

PmResult pm_reference(const LatticeSpec& lattice, const ModelParams& params, int sign, int cap = default_site_cap);

enum class Restriction { none, plus, minus };

// (<σ_x0> exact, [log Z(η=h) - log Z(η=-h)] / (2h)) for the chosen ensemble.
std::pair<double, double> probe_derivative_check(const LatticeSpec& lattice, const BoundaryField& field,
                                                 const ModelParams& params, const Site& x0, double h,
                                                 Restriction restriction = Restriction::none,
                                                 int cap = default_site_cap);

} // namespace rbising
