#include "rbising/gibbs.hpp"

#include "rbising/common.hpp"
#include "rbising/contour.hpp"

#include <bit>
#include <map>
#include <memory>
#include <mutex>

namespace rbising {

void ModelParams::validate(const LatticeSpec& lattice) const
{
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw ParamError("beta must be finite and >= 0");
    if (!std::isfinite(eta))
        throw ParamError("eta must be finite");
    if (probe_site && !lattice.contains(*probe_site))
        throw ParamError("probe site lies outside the lattice");
}

std::int64_t ModelParams::probe_index(const LatticeSpec& lattice) const
{
    return probe_site ? lattice.index(*probe_site) : -1;
}

double ExactResult::split_residual() const
{
    const double split = log_add_exp(logZ_plus, logZ_minus);
    return std::abs(std::expm1(split - logZ));
}

namespace {

double bulk_term(const SpinConfig& config, const LatticeSpec& lattice, double beta)
{
    double bulk = 0.0;
    for (std::int64_t i = 0; i < lattice.size(); ++i)
        for (std::int64_t j : lattice.neighbor_indices(i))
            if (j > i)
                bulk += beta * (1.0 - config.spin(i) * config.spin(j));
    return bulk;
}

void check_config(const SpinConfig& config, const LatticeSpec& lattice)
{
    if (config.size() != lattice.size())
        throw ParamError("configuration size does not match lattice");
}

void check_cap(const LatticeSpec& lattice, int cap)
{
    if (cap > hard_site_cap)
        throw SizeError("site cap " + std::to_string(cap) + " exceeds hard cap " + std::to_string(hard_site_cap));
    if (lattice.size() > cap)
        throw SizeError("exact enumeration needs n^d <= " + std::to_string(cap) + " sites, lattice has " +
                        std::to_string(lattice.size()));
}

// Weighted sums of one restricted ensemble, kept relative to a running max.
struct Accumulator {
    double max = -std::numeric_limits<double>::infinity();
    double z = 0.0;
    std::vector<double> up;  // Σ w over configurations with σ_x = +1
    std::uint64_t count = 0;

    explicit Accumulator(std::size_t sites = 0) : up(sites, 0.0) {}

    void rescale(double new_max)
    {
        const double s = std::exp(max - new_max);
        z *= s;
        for (double& u : up)
            u *= s;
        max = new_max;
    }

    void add(double logw, std::uint64_t bits)
    {
        ++count;
        if (logw > max)
            rescale(logw);
        const double w = std::exp(logw - max);
        z += w;
        while (bits) {
            up[static_cast<std::size_t>(std::countr_zero(bits))] += w;
            bits &= bits - 1;
        }
    }

    void merge(const Accumulator& o)
    {
        count += o.count;
        if (o.z == 0.0)
            return;
        if (z == 0.0) {
            max = o.max;
            z = o.z;
            up = o.up;
            return;
        }
        if (o.max > max)
            rescale(o.max);
        const double s = std::exp(o.max - max);
        z += o.z * s;
        for (std::size_t i = 0; i < up.size(); ++i)
            up[i] += o.up[i] * s;
    }

    double log_z() const { return z == 0.0 ? -std::numeric_limits<double>::infinity() : max + std::log(z); }

    std::vector<double> magnetization() const
    {
        std::vector<double> m(up.size(), 0.0);
        if (z == 0.0)
            return m;
        for (std::size_t i = 0; i < up.size(); ++i)
            m[i] = std::clamp(2.0 * up[i] / z - 1.0, -1.0, 1.0);
        return m;
    }
};

struct CoreResult {
    LogSumExp all;
    Accumulator plus;
    Accumulator minus;
};

// Sums over all 2^N configurations, taking σ and -σ together. The boundary
// sum G = Σ λ_x σ_x comes from two half-lattice tables so that G(-σ) = -G(σ)
// bit for bit. Configurations go to `plus` unless a classification table is
// given, in which case Ω_n^- members go to `minus`.
CoreResult enumerate_core(const LatticeSpec& lattice, const std::vector<double>& lambda, double beta, double eta,
                          std::int64_t probe, const std::vector<std::uint64_t>* table)
{
    const int N = static_cast<int>(lattice.size());
    const std::uint64_t mask = N == 64 ? ~0ULL : (1ULL << N) - 1;
    const std::uint64_t half = 1ULL << (N - 1);
    const int h = N / 2;
    const int hh = N - h;
    std::vector<double> g_lo(std::size_t{1} << h), g_hi(std::size_t{1} << hh);
    for (std::uint64_t m = 0; m < g_lo.size(); ++m) {
        double s = 0.0;
        for (int i = 0; i < h; ++i)
            s += (m >> i) & 1ULL ? lambda[static_cast<std::size_t>(i)] : -lambda[static_cast<std::size_t>(i)];
        g_lo[m] = s;
    }
    for (std::uint64_t m = 0; m < g_hi.size(); ++m) {
        double s = 0.0;
        for (int i = 0; i < hh; ++i)
            s += (m >> i) & 1ULL ? lambda[static_cast<std::size_t>(h + i)] : -lambda[static_cast<std::size_t>(h + i)];
        g_hi[m] = s;
    }
    const std::uint64_t lo_mask = (1ULL << h) - 1;

    std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i)
        for (std::int64_t j : lattice.neighbor_indices(i))
            nbrs[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));

    const std::size_t chunks = half >= 64 ? 64 : 1;
    std::vector<CoreResult> parts(chunks, CoreResult{LogSumExp{}, Accumulator(static_cast<std::size_t>(N)),
                                                     Accumulator(static_cast<std::size_t>(N))});
    parallel_chunks(chunks, [&](std::size_t c) {
        CoreResult& r = parts[c];
        const std::uint64_t i0 = half * c / chunks;
        const std::uint64_t i1 = half * (c + 1) / chunks;
        std::uint64_t b = i0 ^ (i0 >> 1);
        int broken = 0;
        for (int i = 0; i < N; ++i)
            for (int j : nbrs[static_cast<std::size_t>(i)])
                if (j > i && (((b >> i) ^ (b >> j)) & 1ULL))
                    ++broken;
        for (std::uint64_t i = i0;;) {
            const double G = g_lo[b & lo_mask] + g_hi[b >> h];
            const double P = probe < 0 ? 0.0 : ((b >> probe) & 1ULL ? 1.0 : -1.0);
            const double B = 2.0 * beta * broken;
            const double log_w1 = -(B - G - eta * P);
            const double log_w2 = -(B + G + eta * P);
            const std::uint64_t nb = ~b & mask;
            r.all.add(log_w1);
            r.all.add(log_w2);
            if (table == nullptr) {
                r.plus.add(log_w1, b);
                r.plus.add(log_w2, nb);
            } else if (in_omega_plus(*table, b)) {
                r.plus.add(log_w1, b);
                r.minus.add(log_w2, nb);
            } else {
                r.plus.add(log_w2, nb);
                r.minus.add(log_w1, b);
            }
            if (++i >= i1)
                break;
            const int k = std::countr_zero(i);
            const std::uint64_t sk = (b >> k) & 1ULL;
            for (int j : nbrs[static_cast<std::size_t>(k)])
                broken += ((b >> j) & 1ULL) == sk ? 1 : -1;
            b ^= 1ULL << k;
        }
    });
    CoreResult out{LogSumExp{}, Accumulator(static_cast<std::size_t>(N)), Accumulator(static_cast<std::size_t>(N))};
    for (const CoreResult& p : parts) {
        out.all.merge(p.all);
        out.plus.merge(p.plus);
        out.minus.merge(p.minus);
    }
    return out;
}

std::vector<double> lambda_vector(const LatticeSpec& lattice, const BoundaryField& field)
{
    if (!(field.lattice() == lattice))
        throw ParamError("boundary field belongs to a different lattice");
    std::vector<double> lambda(static_cast<std::size_t>(lattice.size()), 0.0);
    for (std::int64_t i : lattice.boundary_indices())
        lambda[static_cast<std::size_t>(i)] = field.at(i);
    return lambda;
}

} // namespace

double energy(const SpinConfig& config, const BoundaryField& field, const ModelParams& params,
              const LatticeSpec& lattice)
{
    check_config(config, lattice);
    params.validate(lattice);
    double h = bulk_term(config, lattice, params.beta);
    for (std::int64_t i : lattice.boundary_indices())
        h -= field.at(i) * config.spin(i);
    const std::int64_t x0 = params.probe_index(lattice);
    if (x0 >= 0)
        h -= params.eta * config.spin(x0);
    return h;
}

double energy_pm(const SpinConfig& config, int sign, const ModelParams& params, const LatticeSpec& lattice)
{
    check_config(config, lattice);
    params.validate(lattice);
    if (sign != 1 && sign != -1)
        throw ParamError("energy_pm: sign must be +1 or -1");
    double h = bulk_term(config, lattice, params.beta);
    for (std::int64_t i : lattice.boundary_indices())
        h -= sign * params.beta * config.spin(i);
    const std::int64_t x0 = params.probe_index(lattice);
    if (x0 >= 0)
        h -= params.eta * config.spin(x0);
    return h;
}

const std::vector<std::uint64_t>& omega_plus_table(const LatticeSpec& lattice, int cap)
{
    check_cap(lattice, cap);
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<std::vector<std::uint64_t>>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{lattice.d(), lattice.n()}];
    if (slot)
        return *slot;
    const int N = static_cast<int>(lattice.size());
    const std::uint64_t total = 1ULL << N;
    const std::uint64_t half = total / 2;
    const std::uint64_t mask = total - 1;
    const std::size_t chunks = half >= 64 ? 64 : 1;
    std::vector<std::vector<std::uint8_t>> signs(chunks);
    parallel_chunks(chunks, [&](std::size_t c) {
        ContourEngine eng(lattice);
        const std::uint64_t b0 = half * c / chunks;
        const std::uint64_t b1 = half * (c + 1) / chunks;
        std::vector<std::int8_t> spins(static_cast<std::size_t>(N));
        signs[c].reserve(b1 - b0);
        for (std::uint64_t b = b0; b < b1; ++b) {
            for (int i = 0; i < N; ++i)
                spins[static_cast<std::size_t>(i)] = (b >> i) & 1ULL ? 1 : -1;
            signs[c].push_back(eng.exterior_sign(spins.data()) > 0 ? 1 : 0);
        }
    });
    auto table = std::make_unique<std::vector<std::uint64_t>>((total + 63) / 64, 0);
    std::uint64_t b = 0;
    for (const auto& part : signs) {
        for (std::uint8_t plus : part) {
            // Ω^- = -Ω^+ since D(σ) = D(-σ)
            const std::uint64_t member = plus ? b : (~b & mask);
            (*table)[member >> 6] |= 1ULL << (member & 63);
            ++b;
        }
    }
    slot = std::move(table);
    return *slot;
}

ExactResult enumerate(const LatticeSpec& lattice, const BoundaryField& field, const ModelParams& params, int cap)
{
    check_cap(lattice, cap);
    params.validate(lattice);
    const auto lambda = lambda_vector(lattice, field);
    const auto& table = omega_plus_table(lattice, cap);
    CoreResult core = enumerate_core(lattice, lambda, params.beta, params.eta, params.probe_index(lattice), &table);
    ExactResult r;
    r.logZ = core.all.value();
    r.logZ_plus = core.plus.log_z();
    r.logZ_minus = core.minus.log_z();
    r.F = r.logZ_plus - r.logZ_minus;
    r.mag_plus = core.plus.magnetization();
    r.mag_minus = core.minus.magnetization();
    Accumulator both = core.plus;
    both.merge(core.minus);
    r.mag = both.magnetization();
    r.count_plus = core.plus.count;
    r.count_minus = core.minus.count;
    return r;
}

PmResult pm_reference(const LatticeSpec& lattice, const ModelParams& params, int sign, int cap)
{
    check_cap(lattice, cap);
    params.validate(lattice);
    if (sign != 1 && sign != -1)
        throw ParamError("pm_reference: sign must be +1 or -1");
    std::vector<double> lambda(static_cast<std::size_t>(lattice.size()), 0.0);
    for (std::int64_t i : lattice.boundary_indices())
        lambda[static_cast<std::size_t>(i)] = sign * params.beta;
    CoreResult core = enumerate_core(lattice, lambda, params.beta, params.eta, params.probe_index(lattice), nullptr);
    return PmResult{core.plus.log_z(), core.plus.magnetization()};
}

std::pair<double, double> probe_derivative_check(const LatticeSpec& lattice, const BoundaryField& field,
                                                 const ModelParams& params, const Site& x0, double h,
                                                 Restriction restriction, int cap)
{
    if (!(h > 0.0))
        throw ParamError("probe_derivative_check: h must be > 0");
    ModelParams p = params;
    p.probe_site = x0;
    const std::size_t idx = static_cast<std::size_t>(lattice.index(x0));
    auto pick_log = [&](const ExactResult& r) {
        switch (restriction) {
        case Restriction::plus:
            return r.logZ_plus;
        case Restriction::minus:
            return r.logZ_minus;
        default:
            return r.logZ;
        }
    };
    const ExactResult at = enumerate(lattice, field, p, cap);
    double exact = at.mag[idx];
    if (restriction == Restriction::plus)
        exact = at.mag_plus[idx];
    else if (restriction == Restriction::minus)
        exact = at.mag_minus[idx];
    p.eta = params.eta + h;
    const double up = pick_log(enumerate(lattice, field, p, cap));
    p.eta = params.eta - h;
    const double down = pick_log(enumerate(lattice, field, p, cap));
    return {exact, (up - down) / (2.0 * h)};
}

} // namespace rbising
