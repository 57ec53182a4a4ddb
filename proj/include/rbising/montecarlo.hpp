#pragma once

#include "rbising/disorder.hpp"
#include "rbising/gibbs.hpp"
#include "rbising/lattice.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace rbising {

enum class Algorithm { heat_bath, metropolis, wolff_ghost };

Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm a);

struct McParams {
    std::int64_t sweeps = 10000;
    std::int64_t burn_in = 1000;
    std::int64_t thin = 1;
    std::uint64_t seed = 1;
    Algorithm algorithm = Algorithm::heat_bath;
    int batches = 32;
    // Parallel tempering: geometric β ladder from beta_min up to the model β.
    // 1 disables tempering.
    int temperatures = 1;
    double beta_min = 0.25;

    void validate() const;
};

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    double tau_int = 0.0;
    int batches = 0;
    bool reported = false;  // false when fewer than 16 batches were available
};

struct McResult {
    McEstimate m;                   // volume-averaged magnetization
    McEstimate sign_m;              // sign of m (0 when m = 0)
    std::vector<McEstimate> site;   // per-site magnetization
    std::int64_t samples = 0;
    bool mixing_caveat = false;     // tau_int > sweeps / 100
    bool negated_orientation = false;
};

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Single-site update probabilities and sweeps over a fixed Hamiltonian.
class SpinSystem {
public:
    SpinSystem(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params);

    const LatticeSpec& lattice() const { return lattice_; }
    double local_field(const std::vector<std::int8_t>& spins, std::int64_t i) const;
    // Probability that the chosen site ends up flipped.
    double flip_probability(const std::vector<std::int8_t>& spins, std::int64_t i, Algorithm a) const;
    void sweep(std::vector<std::int8_t>& spins, Rng& rng, Algorithm a) const;
    double energy(const std::vector<std::int8_t>& spins) const;
    // Σ_{<xy>} σ_x σ_y
    double bond_sum(const std::vector<std::int8_t>& spins) const;

private:
    void heat_bath_sweep(std::vector<std::int8_t>& spins, Rng& rng) const;
    void metropolis_sweep(std::vector<std::int8_t>& spins, Rng& rng) const;
    void wolff_ghost_sweep(std::vector<std::int8_t>& spins, Rng& rng) const;

    LatticeSpec lattice_;
    double beta_ = 0.0;
    std::vector<double> h_ext_;  // λ_x + η 1_{x = x0}
    std::vector<std::vector<int>> nbrs_;
};

McResult run(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params, const McParams& mc);

struct DominantSign {
    int sign = 0;
    double confidence = 0.0;
    bool undecided = true;
    double mean_m = 0.0;              // replica-averaged magnetization
    std::vector<int> replica_signs;
};

DominantSign dominant_sign(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params,
                           const McParams& mc, int replicas = 8);

using SweepKernel = std::function<void(std::vector<std::int8_t>& spins, Rng& rng)>;

inline constexpr int stationarity_site_cap = 16;

// Total-variation distance between the state frequencies of one chain
// (recorded after every sweep) and the exact Gibbs distribution.
double stationarity_check(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params,
                          const McParams& mc, std::int64_t samples, const SweepKernel& kernel = {});

} // namespace rbising
