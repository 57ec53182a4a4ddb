#include "rbising/montecarlo.hpp"

#include "rbising/common.hpp"

#include <algorithm>
#include <optional>

namespace rbising {

Algorithm parse_algorithm(const std::string& name)
{
    if (name == "heat-bath")
        return Algorithm::heat_bath;
    if (name == "metropolis")
        return Algorithm::metropolis;
    if (name == "wolff-ghost")
        return Algorithm::wolff_ghost;
    throw ParamError("unknown algorithm '" + name + "' (heat-bath|metropolis|wolff-ghost)");
}

std::string algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::heat_bath:
        return "heat-bath";
    case Algorithm::metropolis:
        return "metropolis";
    case Algorithm::wolff_ghost:
        return "wolff-ghost";
    }
    return "heat-bath";
}

void McParams::validate() const
{
    if (sweeps <= burn_in || burn_in < 0)
        throw ParamError("mc: need sweeps > burn_in >= 0");
    if (thin < 1)
        throw ParamError("mc: thin must be >= 1");
    if (batches < 16)
        throw ParamError("mc: at least 16 batches are required");
    if (temperatures < 1 || temperatures > 256)
        throw ParamError("mc: temperatures must lie in [1, 256]");
    if (!(beta_min > 0.0))
        throw ParamError("mc: beta_min must be positive");
}

SpinSystem::SpinSystem(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params)
    : lattice_(lattice), beta_(params.beta)
{
    if (lattice.d() > 3)
        throw UnsupportedError("mc: only d = 2 and d = 3 are supported");
    if (!(field.lattice() == lattice))
        throw ParamError("boundary field belongs to a different lattice");
    params.validate(lattice);
    const std::int64_t N = lattice.size();
    h_ext_.assign(static_cast<std::size_t>(N), 0.0);
    for (std::int64_t i : lattice.boundary_indices())
        h_ext_[static_cast<std::size_t>(i)] = field.at(i);
    const std::int64_t x0 = params.probe_index(lattice);
    if (x0 >= 0)
        h_ext_[static_cast<std::size_t>(x0)] += params.eta;
    nbrs_.resize(static_cast<std::size_t>(N));
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j : lattice.neighbor_indices(i))
            nbrs_[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));
}

double SpinSystem::local_field(const std::vector<std::int8_t>& spins, std::int64_t i) const
{
    int s = 0;
    for (int j : nbrs_[static_cast<std::size_t>(i)])
        s += spins[static_cast<std::size_t>(j)];
    return beta_ * s + h_ext_[static_cast<std::size_t>(i)];
}

double SpinSystem::flip_probability(const std::vector<std::int8_t>& spins, std::int64_t i, Algorithm a) const
{
    const double h = local_field(spins, i);
    const double dE = 2.0 * spins[static_cast<std::size_t>(i)] * h;
    if (a == Algorithm::metropolis)
        return dE <= 0.0 ? 1.0 : std::exp(-dE);
    // heat-bath: P(new spin = -σ_i) = e^{-dE} / (1 + e^{-dE})
    return 1.0 / (1.0 + std::exp(dE));
}

double SpinSystem::energy(const std::vector<std::int8_t>& spins) const
{
    double e = 0.0;
    for (std::size_t i = 0; i < spins.size(); ++i) {
        for (int j : nbrs_[i])
            if (static_cast<std::size_t>(j) > i)
                e += beta_ * (1.0 - spins[i] * spins[static_cast<std::size_t>(j)]);
        e -= h_ext_[i] * spins[i];
    }
    return e;
}

double SpinSystem::bond_sum(const std::vector<std::int8_t>& spins) const
{
    double c = 0.0;
    for (std::size_t i = 0; i < spins.size(); ++i)
        for (int j : nbrs_[i])
            if (static_cast<std::size_t>(j) > i)
                c += spins[i] * spins[static_cast<std::size_t>(j)];
    return c;
}

void SpinSystem::heat_bath_sweep(std::vector<std::int8_t>& spins, Rng& rng) const
{
    for (std::size_t i = 0; i < spins.size(); ++i) {
        int s = 0;
        for (int j : nbrs_[i])
            s += spins[static_cast<std::size_t>(j)];
        const double h = beta_ * s + h_ext_[i];
        const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * h));
        spins[i] = uniform01(rng) < p_plus ? 1 : -1;
    }
}

void SpinSystem::metropolis_sweep(std::vector<std::int8_t>& spins, Rng& rng) const
{
    for (std::size_t i = 0; i < spins.size(); ++i) {
        int s = 0;
        for (int j : nbrs_[i])
            s += spins[static_cast<std::size_t>(j)];
        const double dE = 2.0 * spins[i] * (beta_ * s + h_ext_[i]);
        if (dE <= 0.0 || uniform01(rng) < std::exp(-dE))
            spins[i] = static_cast<std::int8_t>(-spins[i]);
    }
}

// Swendsen-Wang-Wolff single cluster with a ghost spin fixed at +1 that
// couples to site i with strength h_ext_i.
void SpinSystem::wolff_ghost_sweep(std::vector<std::int8_t>& spins, Rng& rng) const
{
    const std::size_t N = spins.size();
    const double p_bond = -std::expm1(-2.0 * beta_);
    std::vector<char> in(N, 0);
    std::vector<int> stack, cluster;
    // A fixed move count per sweep; stopping on the number of flipped spins biases the chain.
    for (std::size_t move = 0; move < N; ++move) {
        std::fill(in.begin(), in.end(), 0);
        cluster.clear();
        bool ghost = false;
        const int seed = static_cast<int>(rng() % N);
        in[static_cast<std::size_t>(seed)] = 1;
        stack.assign(1, seed);
        auto add_ghost = [&] {
            ghost = true;
            for (std::size_t j = 0; j < N; ++j) {
                const double h = h_ext_[j];
                if (in[j] || h * spins[j] <= 0.0)
                    continue;
                if (uniform01(rng) < -std::expm1(-2.0 * std::abs(h))) {
                    in[j] = 1;
                    stack.push_back(static_cast<int>(j));
                }
            }
        };
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            cluster.push_back(i);
            const std::size_t ui = static_cast<std::size_t>(i);
            for (int j : nbrs_[ui]) {
                const std::size_t uj = static_cast<std::size_t>(j);
                if (!in[uj] && spins[uj] == spins[ui] && uniform01(rng) < p_bond) {
                    in[uj] = 1;
                    stack.push_back(j);
                }
            }
            const double h = h_ext_[ui];
            if (!ghost && h * spins[ui] > 0.0 && uniform01(rng) < -std::expm1(-2.0 * std::abs(h)))
                add_ghost();
        }
        if (ghost) {
            for (std::size_t j = 0; j < N; ++j)
                if (!in[j])
                    spins[j] = static_cast<std::int8_t>(-spins[j]);
        } else {
            for (int i : cluster)
                spins[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(-spins[static_cast<std::size_t>(i)]);
        }
    }
}

void SpinSystem::sweep(std::vector<std::int8_t>& spins, Rng& rng, Algorithm a) const
{
    switch (a) {
    case Algorithm::heat_bath:
        heat_bath_sweep(spins, rng);
        break;
    case Algorithm::metropolis:
        metropolis_sweep(spins, rng);
        break;
    case Algorithm::wolff_ghost:
        wolff_ghost_sweep(spins, rng);
        break;
    }
}

namespace {

// The chain always runs on the orientation whose first nonzero external
// field is positive; results for the other orientation are negated. This
// makes λ -> -λ an exact symmetry of every estimate.
bool needs_negation(const BoundaryField& field, const ModelParams& params)
{
    const LatticeSpec& L = field.lattice();
    std::vector<double> h(static_cast<std::size_t>(L.size()), 0.0);
    for (std::int64_t i : L.boundary_indices())
        h[static_cast<std::size_t>(i)] = field.at(i);
    const std::int64_t x0 = params.probe_index(L);
    if (x0 >= 0)
        h[static_cast<std::size_t>(x0)] += params.eta;
    for (double v : h)
        if (v != 0.0)
            return v < 0.0;
    return false;
}

McEstimate batch_estimate(const std::vector<double>& xs, int batches)
{
    McEstimate e;
    const std::size_t K = xs.size();
    const std::size_t B = std::min<std::size_t>(static_cast<std::size_t>(batches), K);
    if (K == 0)
        return e;
    double mean = 0.0;
    for (double x : xs)
        mean += x;
    mean /= static_cast<double>(K);
    e.mean = mean;
    if (B < 16)
        return e;
    const std::size_t b = K / B;
    double var = 0.0;
    for (double x : xs)
        var += (x - mean) * (x - mean);
    var /= static_cast<double>(K - 1);
    std::vector<double> bm(B, 0.0);
    for (std::size_t k = 0; k < B; ++k) {
        for (std::size_t i = 0; i < b; ++i)
            bm[k] += xs[k * b + i];
        bm[k] /= static_cast<double>(b);
    }
    double bmean = 0.0;
    for (double x : bm)
        bmean += x;
    bmean /= static_cast<double>(B);
    double bvar = 0.0;
    for (double x : bm)
        bvar += (x - bmean) * (x - bmean);
    bvar /= static_cast<double>(B - 1);
    e.se = std::sqrt(bvar / static_cast<double>(B));
    e.tau_int = var > 0.0 ? 0.5 * static_cast<double>(b) * bvar / var : 0.5;
    e.batches = static_cast<int>(B);
    e.reported = true;
    return e;
}

std::vector<std::int8_t> random_config(std::size_t n, Rng& rng)
{
    std::vector<std::int8_t> s(n);
    for (auto& x : s)
        x = (rng() >> 63) ? 1 : -1;
    return s;
}

// One chain at the model β, or a parallel-tempering ladder whose last rung
// is the model β.
class Chain {
public:
    Chain(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params, const McParams& mc,
          std::vector<std::int8_t> init, Rng& rng)
        : algorithm_(mc.algorithm)
    {
        const int K = mc.temperatures;
        if (K > 1 && !(mc.beta_min < params.beta))
            throw ParamError("mc: beta_min must be below beta for tempering");
        for (int k = 0; k < K; ++k) {
            ModelParams p = params;
            if (k + 1 < K)
                p.beta = mc.beta_min * std::pow(params.beta / mc.beta_min, static_cast<double>(k) / (K - 1));
            systems_.emplace_back(lattice, field, p);
            betas_.push_back(p.beta);
            configs_.push_back(k + 1 == K ? std::move(init) : random_config(static_cast<std::size_t>(lattice.size()), rng));
        }
    }

    void step(Rng& rng)
    {
        for (std::size_t k = 0; k < systems_.size(); ++k)
            systems_[k].sweep(configs_[k], rng, algorithm_);
        if (systems_.size() < 2)
            return;
        for (std::size_t k = parity_; k + 1 < systems_.size(); k += 2) {
            const double ca = systems_[k].bond_sum(configs_[k]);
            const double cb = systems_[k + 1].bond_sum(configs_[k + 1]);
            const double log_acc = (betas_[k] - betas_[k + 1]) * (cb - ca);
            if (log_acc >= 0.0 || uniform01(rng) < std::exp(log_acc))
                std::swap(configs_[k], configs_[k + 1]);
        }
        parity_ ^= 1;
    }

    const std::vector<std::int8_t>& target() const { return configs_.back(); }

private:
    Algorithm algorithm_;
    std::vector<SpinSystem> systems_;
    std::vector<double> betas_;
    std::vector<std::vector<std::int8_t>> configs_;
    std::size_t parity_ = 0;
};

} // namespace

McResult run(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params, const McParams& mc)
{
    mc.validate();
    const bool negate = needs_negation(field, params);
    ModelParams p = params;
    if (negate)
        p.eta = -p.eta;
    const std::size_t N = static_cast<std::size_t>(lattice.size());
    Rng rng(derive_seed(mc.seed, 0));
    Chain chain(lattice, negate ? field.negated() : field, p, mc, std::vector<std::int8_t>(N, 1), rng);
    std::vector<double> ms, signs;
    std::vector<std::vector<double>> site(N);
    for (std::int64_t t = 0; t < mc.sweeps; ++t) {
        chain.step(rng);
        if (t < mc.burn_in || (t - mc.burn_in) % mc.thin != 0)
            continue;
        const auto& spins = chain.target();
        int total = 0;
        for (std::size_t i = 0; i < N; ++i) {
            total += spins[i];
            site[i].push_back(negate ? -spins[i] : spins[i]);
        }
        const double m = static_cast<double>(negate ? -total : total) / static_cast<double>(N);
        ms.push_back(m);
        signs.push_back(m > 0.0 ? 1.0 : (m < 0.0 ? -1.0 : 0.0));
    }
    McResult r;
    r.negated_orientation = negate;
    r.samples = static_cast<std::int64_t>(ms.size());
    r.m = batch_estimate(ms, mc.batches);
    r.sign_m = batch_estimate(signs, mc.batches);
    for (auto& s : site)
        r.site.push_back(batch_estimate(s, mc.batches));
    r.mixing_caveat = r.m.tau_int > static_cast<double>(mc.sweeps) / 100.0;
    return r;
}

DominantSign dominant_sign(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params,
                           const McParams& mc, int replicas)
{
    mc.validate();
    if (replicas < 1)
        throw ParamError("dominant_sign: need at least one replica");
    const bool negate = needs_negation(field, params);
    ModelParams p = params;
    if (negate)
        p.eta = -p.eta;
    const BoundaryField oriented = negate ? field.negated() : field;
    const std::size_t N = static_cast<std::size_t>(lattice.size());
    std::vector<double> mean_m(static_cast<std::size_t>(replicas), 0.0);
    parallel_chunks(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        Rng rng(derive_seed(mc.seed, 1000 + r));
        auto init = random_config(N, rng);
        Chain chain(lattice, oriented, p, mc, std::move(init), rng);
        double acc = 0.0;
        std::int64_t count = 0;
        for (std::int64_t t = 0; t < mc.sweeps; ++t) {
            chain.step(rng);
            if (t < mc.burn_in || (t - mc.burn_in) % mc.thin != 0)
                continue;
            int total = 0;
            for (auto s : chain.target())
                total += s;
            acc += static_cast<double>(total) / static_cast<double>(N);
            ++count;
        }
        mean_m[r] = count ? acc / static_cast<double>(count) : 0.0;
    });
    DominantSign d;
    int plus = 0, minus = 0;
    double total = 0.0;
    for (double m : mean_m) {
        const int s = m > 0.0 ? 1 : (m < 0.0 ? -1 : 0);
        d.replica_signs.push_back(negate ? -s : s);
        plus += s > 0;
        minus += s < 0;
        total += m;
    }
    int sign = plus > minus ? 1 : (minus > plus ? -1 : 0);
    d.confidence = static_cast<double>(std::max(plus, minus)) / static_cast<double>(replicas);
    d.undecided = sign == 0 || d.confidence < 7.0 / 8.0;
    d.mean_m = total / static_cast<double>(replicas);
    if (negate) {
        sign = -sign;
        d.mean_m = -d.mean_m;
    }
    d.sign = sign;
    return d;
}

double stationarity_check(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params,
                          const McParams& mc, std::int64_t samples, const SweepKernel& kernel)
{
    if (lattice.size() > stationarity_site_cap)
        throw SizeError("stationarity_check: at most " + std::to_string(stationarity_site_cap) + " sites");
    if (samples < 1)
        throw ParamError("stationarity_check: samples must be >= 1");
    const SpinSystem sys(lattice, field, params);
    const std::size_t N = static_cast<std::size_t>(lattice.size());
    const std::size_t states = std::size_t{1} << N;
    std::vector<double> logw(states);
    LogSumExp z;
    std::vector<std::int8_t> spins(N);
    for (std::size_t c = 0; c < states; ++c) {
        for (std::size_t i = 0; i < N; ++i)
            spins[i] = (c >> i) & 1 ? 1 : -1;
        logw[c] = -sys.energy(spins);
        z.add(logw[c]);
    }
    Rng rng(derive_seed(mc.seed, 7));
    spins = random_config(N, rng);
    std::optional<Chain> chain;
    if (!kernel)
        chain.emplace(lattice, field, params, mc, spins, rng);
    auto advance = [&]() -> const std::vector<std::int8_t>& {
        if (chain) {
            chain->step(rng);
            return chain->target();
        }
        kernel(spins, rng);
        return spins;
    };
    std::vector<std::int64_t> counts(states, 0);
    for (std::int64_t t = 0; t < mc.burn_in; ++t)
        advance();
    for (std::int64_t t = 0; t < samples; ++t) {
        const auto& s = advance();
        std::size_t c = 0;
        for (std::size_t i = 0; i < N; ++i)
            if (s[i] > 0)
                c |= std::size_t{1} << i;
        ++counts[c];
    }
    double tv = 0.0;
    for (std::size_t c = 0; c < states; ++c)
        tv += std::abs(static_cast<double>(counts[c]) / static_cast<double>(samples) - std::exp(logw[c] - z.value()));
    return 0.5 * tv;
}

} // namespace rbising
