#pragma once

#include "rbising/disorder.hpp"
#include "rbising/gibbs.hpp"
#include "rbising/lattice.hpp"
#include "rbising/montecarlo.hpp"
#include "rbising/polymer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rbising {

double toy_magnetization(const BoundaryField& field);

// Exact law of S = Σ of m i.i.d. copies of a discrete field.
struct SDistribution {
    std::int64_t m = 0;
    std::vector<double> support;    // sorted
    std::vector<double> log_probs;  // natural log, -inf never stored

    double prob(double s) const;
    double total() const;
};

inline constexpr std::int64_t s_distribution_cap = 100000;

SDistribution s_distribution(const FieldDistribution& dist, std::int64_t m);

// P(a < S < b) or P(a <= S <= b) for S a sum of m copies. Rademacher uses
// log-binomials over the atoms inside the window (no cap on m).
double interval_probability(const FieldDistribution& dist, std::int64_t m, double a, double b, bool closed);

// log P(S = 0) when 0 is attainable, else log of the largest atom.
double log_central_probability(const FieldDistribution& dist, std::int64_t m);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct LltFit {
    std::vector<int> n;
    std::vector<double> log_p;
    LinearFit fit;
};

// Fit of log P(S_n = 0) against log n with m = |∂Λ_n|.
LltFit llt_exponent_fit(const FieldDistribution& dist, int d, int n_lo, int n_hi);

struct SequenceSpec {
    bool sparse = false;
    double omega = 0.0;

    // floor(j^{4-d+ω}) for sparse sequences, j otherwise.
    std::int64_t index(std::int64_t j, int d) const;
    std::string describe() const;
};

struct BorelCantelliRow {
    std::int64_t j = 0;
    std::int64_t n = 0;
    std::int64_t m = 0;
    double term = 0.0;        // P(|S_n| < k n^ζ)
    double term_zeta0 = 0.0;  // P(|S_n| < k)
    double partial = 0.0;
};

struct BorelCantelliReport {
    std::vector<BorelCantelliRow> rows;
    double tail_exponent = 0.0;  // slope of log term vs log j over the upper half
    bool convergent = false;     // tail_exponent < -1
    bool zeta_chain_ok = true;   // term_zeta0 <= term on every row
};

BorelCantelliReport borel_cantelli_report(const FieldDistribution& dist, int d, double k, double zeta,
                                          const SequenceSpec& seq, std::int64_t j_max);

// Exact law of F_n^λ over all disorder realizations on ∂Λ_n.
struct FLaw {
    std::vector<double> F;
    std::vector<double> prob;
};

inline constexpr double disorder_enumeration_cap = 4194304.0;  // 2^22

FLaw exact_F_law(const LatticeSpec& lattice, const FieldDistribution& dist, const ModelParams& params);
cplx char_fn_exact(const FLaw& law, double t);
cplx char_fn_exact(const LatticeSpec& lattice, const FieldDistribution& dist, const ModelParams& params, double t);

enum class FMethod { toy, exact, cluster, mc };

FMethod parse_method(const std::string& name);
std::string method_name(FMethod m);

struct FOptions {
    FMethod method = FMethod::exact;
    int cutoff = 6;          // cluster truncation
    int residual_cutoff = 4; // smaller cutoff used for the reported residual
    McParams mc;             // mc sign method
    int replicas = 8;
};

struct FSample {
    std::vector<double> F;
    double residual = 0.0;  // mean |F(cutoff) - F(residual_cutoff)|, cluster method
};

// F_n for `samples` disorder realizations with seeds derive_seed(master, i).
FSample sample_F(const LatticeSpec& lattice, const FieldDistribution& dist, const ModelParams& params,
                 std::int64_t samples, std::uint64_t master_seed, const FOptions& opt);

struct CharFnEstimate {
    std::vector<double> t;
    std::vector<cplx> psi;
    std::vector<double> se;
    double residual = 0.0;
};

CharFnEstimate char_fn_from_samples(const std::vector<double>& F, const std::vector<double>& ts);
CharFnEstimate char_fn_mc(const LatticeSpec& lattice, const FieldDistribution& dist, const ModelParams& params,
                          const std::vector<double>& ts, std::int64_t samples, std::uint64_t master_seed,
                          const FOptions& opt);

struct GaussianBoundRow {
    double t = 0.0;
    double abs_psi = 0.0;
    double se = 0.0;
    double bound = 0.0;  // exp(-σ² t² |∂Λ_n| / 2)
    bool pass = false;
    double margin() const { return bound + 3.0 * se - abs_psi; }
};

std::vector<GaussianBoundRow> gaussian_bound_check(const CharFnEstimate& est, const FieldDistribution& dist,
                                                   const LatticeSpec& lattice);

struct WeakLltFit {
    std::vector<int> n;
    std::vector<double> p;
    LinearFit fit;
    double reference_exponent = 0.0;  // -(d-1)/2 + ζ
    bool lower_bound_only = false;    // some P̂ was zero
};

// P(F_n ∈ n^ζ [a, b]) per n and the log-log slope. Toy mode uses the exact
// law of 2S; other methods sample disorder.
WeakLltFit weak_llt_fit(int d, const FieldDistribution& dist, const ModelParams& params, double a, double b,
                        double zeta, const std::vector<int>& ns, std::int64_t samples, std::uint64_t master_seed,
                        const FOptions& opt);

struct EventSpec {
    double k = 1.0;
    double zeta = 0.0;
};

struct ScanRecord {
    std::int64_t n = 0;
    double S = 0.0;
    double F = 0.0;  // NaN for the mc method
    FMethod method = FMethod::toy;
    int sign = 0;
    double mc_m = 0.0;       // replica-averaged magnetization, mc only
    bool undecided = false;  // mc only
    std::vector<bool> flags; // one per EventSpec
};

struct ScanSummary {
    int sign_flips = 0;
    double plus_fraction = 0.0;  // among nonzero signs
    int longest_run = 0;
    double recurrence = 0.0;     // fraction with |F| < k of the first event spec; NaN for mc
    int zero_count = 0;
};

struct ScanResult {
    std::vector<ScanRecord> records;
    ScanSummary summary;
};

ScanResult limit_point_scan(const FieldDistribution& dist, int d, const ModelParams& params,
                            const std::vector<std::int64_t>& ns, std::uint64_t master_seed, const FOptions& opt,
                            const std::vector<EventSpec>& events, bool negate_field = false);

ScanSummary summarize(const std::vector<ScanRecord>& records, const std::vector<EventSpec>& events);

struct PolymerCharCheck {
    cplx lhs;
    cplx rhs;
    double residual = 0.0;
    std::size_t families = 0;
};

PolymerCharCheck char_fn_polymer_check(const LatticeSpec& lattice, const FieldDistribution& dist,
                                       const ModelParams& params, double t, int cutoff);

} // namespace rbising
