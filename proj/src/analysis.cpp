#include "rbising/analysis.hpp"

#include "rbising/common.hpp"
#include "rbising/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

namespace rbising {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;

double log_binomial(std::int64_t m, std::int64_t k)
{
    const long double r = std::lgammal(static_cast<long double>(m) + 1.0L) -
                          std::lgammal(static_cast<long double>(k) + 1.0L) -
                          std::lgammal(static_cast<long double>(m - k) + 1.0L);
    return static_cast<double>(r);
}

// log P(Binomial(m, 1/2) = k)
double log_rademacher_atom(std::int64_t m, std::int64_t k)
{
    const std::int64_t kk = std::min(k, m - k);
    return log_binomial(m, kk) - static_cast<double>(m) * kLn2;
}

std::vector<std::pair<double, double>> positive_atoms(const FieldDistribution& dist)
{
    if (!dist.is_discrete())
        throw UnsupportedError("exact sums need a discrete field distribution, got " + dist.name());
    std::vector<std::pair<double, double>> out;
    for (auto [v, p] : dist.atoms())
        if (p > 0.0)
            out.emplace_back(v, p);
    if (out.empty())
        throw ParamError("field distribution has no atoms");
    return out;
}

bool is_binomial(const FieldDistribution& dist)
{
    return dist.kind() == DistKind::rademacher;
}

// Lattice spacing δ with every atom an integer multiple of δ.
double detect_grid(const std::vector<std::pair<double, double>>& atoms, std::vector<int>& steps)
{
    double base = 0.0;
    for (auto [v, p] : atoms)
        if (v != 0.0 && (base == 0.0 || std::fabs(v) < base))
            base = std::fabs(v);
    steps.assign(atoms.size(), 0);
    if (base == 0.0)
        return 1.0;
    for (int q = 1; q <= 64; ++q) {
        const double delta = base / q;
        bool ok = true;
        for (std::size_t i = 0; i < atoms.size() && ok; ++i) {
            const double r = atoms[i].first / delta;
            const double k = std::round(r);
            if (std::fabs(r - k) > 1e-9 * std::max(1.0, std::fabs(r)) || std::fabs(k) > 1e6)
                ok = false;
            else
                steps[i] = static_cast<int>(k);
        }
        if (ok)
            return delta;
    }
    throw UnsupportedError("field atoms do not lie on a common grid");
}

bool in_window(double s, double a, double b, bool closed)
{
    const double tol = 1e-9 * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
    if (closed)
        return s >= a - tol && s <= b + tol;
    return s > a + tol && s < b - tol;
}

double log_sum(const std::vector<double>& logs)
{
    LogSumExp acc;
    for (double x : logs)
        acc.add(x);
    return acc.value();
}

// Boundary sites of Λ_n in lexicographic (= index) order, without building
// the interior.
template <class F>
void for_each_boundary_site(int d, std::int64_t n, F&& f)
{
    const int lo = static_cast<int>(std::floor(-static_cast<double>(n) / 2.0)) + 1;
    const int hi = lo + static_cast<int>(n) - 1;
    Site x(static_cast<std::size_t>(d), lo);
    std::function<void(int, bool)> rec = [&](int axis, bool extreme) {
        if (axis == d - 1) {
            if (extreme) {
                for (int c = lo; c <= hi; ++c) {
                    x[static_cast<std::size_t>(axis)] = c;
                    f(x);
                }
            } else {
                x[static_cast<std::size_t>(axis)] = lo;
                f(x);
                if (hi != lo) {
                    x[static_cast<std::size_t>(axis)] = hi;
                    f(x);
                }
            }
            return;
        }
        for (int c = lo; c <= hi; ++c) {
            x[static_cast<std::size_t>(axis)] = c;
            rec(axis + 1, extreme || c == lo || c == hi);
        }
    };
    rec(0, false);
}

double toy_boundary_sum(const FieldDistribution& dist, std::uint64_t seed, int d, std::int64_t n, bool negate)
{
    double s = 0.0;
    for_each_boundary_site(d, n, [&](const Site& x) {
        const double v = field_value(dist, seed, x);
        s += negate ? -v : v;
    });
    return s;
}

int sign_of(double x)
{
    return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0);
}

} // namespace

double toy_magnetization(const BoundaryField& field)
{
    return std::tanh(field.total());
}

double SDistribution::prob(double s) const
{
    auto it = std::lower_bound(support.begin(), support.end(), s - 1e-9 * (1.0 + std::fabs(s)));
    if (it == support.end() || std::fabs(*it - s) > 1e-9 * (1.0 + std::fabs(s)))
        return 0.0;
    return std::exp(log_probs[static_cast<std::size_t>(it - support.begin())]);
}

double SDistribution::total() const
{
    return std::exp(log_sum(log_probs));
}

SDistribution s_distribution(const FieldDistribution& dist, std::int64_t m)
{
    if (m < 0)
        throw ParamError("m must be non-negative");
    if (m > s_distribution_cap)
        throw SizeError("s_distribution: m = " + std::to_string(m) + " exceeds cap " +
                        std::to_string(s_distribution_cap));
    const auto atoms = positive_atoms(dist);
    SDistribution out;
    out.m = m;

    if (is_binomial(dist)) {
        const double ls = dist.lambda_star();
        if (ls == 0.0 || m == 0) {
            out.support = {0.0};
            out.log_probs = {0.0};
            return out;
        }
        out.support.resize(static_cast<std::size_t>(m + 1));
        out.log_probs.resize(static_cast<std::size_t>(m + 1));
        for (std::int64_t k = 0; k <= m; ++k) {
            out.support[static_cast<std::size_t>(k)] = ls * static_cast<double>(2 * k - m);
            out.log_probs[static_cast<std::size_t>(k)] = log_rademacher_atom(m, k);
        }
        return out;
    }

    std::vector<int> steps;
    const double delta = detect_grid(atoms, steps);
    int reach = 0;
    for (int s : steps)
        reach = std::max(reach, std::abs(s));
    const double width = 2.0 * static_cast<double>(m) * reach + 1.0;
    if (width * static_cast<double>(m) * static_cast<double>(atoms.size()) > 2e9)
        throw SizeError("s_distribution: convolution too large");

    // Scaled linear-domain convolution; `scale` carries the log of the
    // factored-out maximum.
    const std::int64_t R = m * reach;
    std::vector<double> cur(static_cast<std::size_t>(2 * R + 1), 0.0);
    std::vector<double> next(cur.size(), 0.0);
    cur[static_cast<std::size_t>(R)] = 1.0;
    double scale = 0.0;
    std::int64_t span = 0;
    for (std::int64_t step = 0; step < m; ++step) {
        const std::int64_t nspan = span + reach;
        std::fill(next.begin() + (R - nspan), next.begin() + (R + nspan + 1), 0.0);
        for (std::int64_t j = R - span; j <= R + span; ++j) {
            const double c = cur[static_cast<std::size_t>(j)];
            if (c == 0.0)
                continue;
            for (std::size_t a = 0; a < atoms.size(); ++a)
                next[static_cast<std::size_t>(j + steps[a])] += c * atoms[a].second;
        }
        double mx = 0.0;
        for (std::int64_t j = R - nspan; j <= R + nspan; ++j)
            mx = std::max(mx, next[static_cast<std::size_t>(j)]);
        for (std::int64_t j = R - nspan; j <= R + nspan; ++j)
            next[static_cast<std::size_t>(j)] /= mx;
        scale += std::log(mx);
        std::swap(cur, next);
        span = nspan;
    }
    for (std::int64_t j = 0; j < R; ++j) {
        const double avg = 0.5 * (cur[static_cast<std::size_t>(j)] + cur[static_cast<std::size_t>(2 * R - j)]);
        cur[static_cast<std::size_t>(j)] = avg;
        cur[static_cast<std::size_t>(2 * R - j)] = avg;
    }
    for (std::int64_t j = 0; j <= 2 * R; ++j) {
        const double c = cur[static_cast<std::size_t>(j)];
        if (c > 0.0) {
            out.support.push_back(delta * static_cast<double>(j - R));
            out.log_probs.push_back(std::log(c) + scale);
        }
    }
    return out;
}

double interval_probability(const FieldDistribution& dist, std::int64_t m, double a, double b, bool closed)
{
    if (m < 0)
        throw ParamError("m must be non-negative");
    if (is_binomial(dist)) {
        const double ls = dist.lambda_star();
        if (ls == 0.0 || m == 0)
            return in_window(0.0, a, b, closed) ? 1.0 : 0.0;
        const double md = static_cast<double>(m);
        const double x = (a / ls + md) / 2.0;
        const double y = (b / ls + md) / 2.0;
        const double ex = 1e-9 * std::max(1.0, std::fabs(x));
        const double ey = 1e-9 * std::max(1.0, std::fabs(y));
        double klo = closed ? std::ceil(x - ex) : std::floor(x + ex) + 1.0;
        double khi = closed ? std::floor(y + ey) : std::ceil(y - ey) - 1.0;
        klo = std::max(klo, 0.0);
        khi = std::min(khi, md);
        if (klo > khi)
            return 0.0;
        LogSumExp acc;
        for (auto k = static_cast<std::int64_t>(klo); k <= static_cast<std::int64_t>(khi); ++k)
            acc.add(log_rademacher_atom(m, k));
        return std::min(1.0, std::exp(acc.value()));
    }
    const SDistribution sd = s_distribution(dist, m);
    LogSumExp acc;
    for (std::size_t i = 0; i < sd.support.size(); ++i)
        if (in_window(sd.support[i], a, b, closed))
            acc.add(sd.log_probs[i]);
    return std::min(1.0, std::exp(acc.value()));
}

double log_central_probability(const FieldDistribution& dist, std::int64_t m)
{
    if (is_binomial(dist)) {
        if (dist.lambda_star() == 0.0 || m == 0)
            return 0.0;
        return log_rademacher_atom(m, m / 2);
    }
    const SDistribution sd = s_distribution(dist, m);
    if (sd.support.empty())
        throw ParamError("empty attainable set");
    double best = kNegInf;
    for (std::size_t i = 0; i < sd.support.size(); ++i) {
        if (std::fabs(sd.support[i]) < 1e-12)
            return sd.log_probs[i];
        best = std::max(best, sd.log_probs[i]);
    }
    return best;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw ParamError("least_squares needs at least two paired points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw ParamError("least_squares: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ssr += r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    f.slope_se = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
    return f;
}

LltFit llt_exponent_fit(const FieldDistribution& dist, int d, int n_lo, int n_hi)
{
    if (d < 1 || n_lo < 1 || n_hi < n_lo)
        throw ParamError("llt_exponent_fit: invalid n range");
    LltFit out;
    std::vector<double> lx;
    for (int n = n_lo; n <= n_hi; ++n) {
        const double lp = log_central_probability(dist, boundary_count(d, n));
        if (!std::isfinite(lp))
            continue;
        out.n.push_back(n);
        out.log_p.push_back(lp);
        lx.push_back(std::log(static_cast<double>(n)));
    }
    if (out.n.size() < 2)
        throw ParamError("llt_exponent_fit: empty attainable set");
    out.fit = least_squares(lx, out.log_p);
    return out;
}

std::int64_t SequenceSpec::index(std::int64_t j, int d) const
{
    if (!sparse)
        return j;
    const double e = 4.0 - d + omega;
    const double v = std::pow(static_cast<double>(j), e);
    const double r = std::round(v);
    if (std::fabs(v - r) <= 1e-9 * std::max(1.0, v))
        return static_cast<std::int64_t>(r);
    return static_cast<std::int64_t>(std::floor(v));
}

std::string SequenceSpec::describe() const
{
    if (!sparse)
        return "full";
    std::ostringstream os;
    os << "sparse(omega=" << omega << ")";
    return os.str();
}

BorelCantelliReport borel_cantelli_report(const FieldDistribution& dist, int d, double k, double zeta,
                                          const SequenceSpec& seq, std::int64_t j_max)
{
    if (k <= 0.0 || zeta < 0.0 || j_max < 1)
        throw ParamError("borel_cantelli_report: need k > 0, zeta >= 0, j_max >= 1");
    BorelCantelliReport rep;
    double partial = 0.0;
    for (std::int64_t j = 1; j <= j_max; ++j) {
        const std::int64_t n = seq.index(j, d);
        if (n < 1)
            continue;
        BorelCantelliRow row;
        row.j = j;
        row.n = n;
        row.m = boundary_count(d, n);
        const double w = k * std::pow(static_cast<double>(n), zeta);
        row.term = interval_probability(dist, row.m, -w, w, false);
        row.term_zeta0 = interval_probability(dist, row.m, -k, k, false);
        partial += row.term;
        row.partial = partial;
        if (row.term_zeta0 > row.term * (1.0 + 1e-12))
            rep.zeta_chain_ok = false;
        rep.rows.push_back(row);
    }
    std::vector<double> lx, ly;
    for (const auto& r : rep.rows)
        if (2 * r.j >= j_max && r.term > 0.0) {
            lx.push_back(std::log(static_cast<double>(r.j)));
            ly.push_back(std::log(r.term));
        }
    if (lx.size() >= 2) {
        rep.tail_exponent = least_squares(lx, ly).slope;
        rep.convergent = rep.tail_exponent < -1.0;
    } else {
        rep.tail_exponent = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

FLaw exact_F_law(const LatticeSpec& lattice, const FieldDistribution& dist, const ModelParams& params)
{
    params.validate(lattice);
    const auto atoms = positive_atoms(dist);
    const auto bidx = lattice.boundary_indices();
    const double total = std::pow(static_cast<double>(atoms.size()), static_cast<double>(bidx.size()));
    if (total > disorder_enumeration_cap)
        throw SizeError("exact_F_law: " + std::to_string(atoms.size()) + "^" + std::to_string(bidx.size()) +
                        " realizations exceed the cap 2^22");
    if (lattice.size() > default_site_cap)
        throw SizeError("exact_F_law: lattice exceeds the enumeration cap");
    const auto count = static_cast<std::size_t>(total);
    FLaw law;
    law.F.assign(count, 0.0);
    law.prob.assign(count, 0.0);
    omega_plus_table(lattice);

    const std::size_t chunks = std::min<std::size_t>(64, count);
    parallel_chunks(chunks, [&](std::size_t c) {
        const std::size_t begin = count * c / chunks;
        const std::size_t end = count * (c + 1) / chunks;
        std::vector<double> values(static_cast<std::size_t>(lattice.size()), 0.0);
        for (std::size_t r = begin; r < end; ++r) {
            std::size_t code = r;
            double p = 1.0;
            for (std::int64_t i : bidx) {
                const auto& [v, pv] = atoms[code % atoms.size()];
                code /= atoms.size();
                values[static_cast<std::size_t>(i)] = v;
                p *= pv;
            }
            const BoundaryField field(lattice, values, 0, "enumerated:" + dist.name());
            law.F[r] = enumerate(lattice, field, params).F;
            law.prob[r] = p;
        }
    });
    return law;
}

cplx char_fn_exact(const FLaw& law, double t)
{
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < law.F.size(); ++i) {
        re += law.prob[i] * std::cos(t * law.F[i]);
        im += law.prob[i] * std::sin(t * law.F[i]);
    }
    return {re, im};
}

cplx char_fn_exact(const LatticeSpec& lattice, const FieldDistribution& dist, const ModelParams& params, double t)
{
    return char_fn_exact(exact_F_law(lattice, dist, params), t);
}

FMethod parse_method(const std::string& name)
{
    if (name == "toy")
        return FMethod::toy;
    if (name == "exact")
        return FMethod::exact;
    if (name == "cluster")
        return FMethod::cluster;
    if (name == "mc")
        return FMethod::mc;
    throw ParamError("unknown F method '" + name + "' (expected toy, exact, cluster or mc)");
}

std::string method_name(FMethod m)
{
    switch (m) {
    case FMethod::toy:
        return "toy";
    case FMethod::exact:
        return "exact";
    case FMethod::cluster:
        return "cluster";
    case FMethod::mc:
        return "mc";
    }
    return "?";
}

FSample sample_F(const LatticeSpec& lattice, const FieldDistribution& dist, const ModelParams& params,
                 std::int64_t samples, std::uint64_t master_seed, const FOptions& opt)
{
    params.validate(lattice);
    if (samples < 1)
        throw ParamError("samples must be positive");
    if (opt.method == FMethod::mc)
        throw ParamError("the mc method yields phase signs only, not F values");
    if (opt.method == FMethod::exact && lattice.size() > hard_site_cap)
        throw SizeError("exact F method: lattice exceeds the enumeration cap; use cluster");

    std::unique_ptr<ClusterExpansion> ce;
    if (opt.method == FMethod::cluster) {
        if (opt.cutoff < 0 || opt.residual_cutoff < 0)
            throw ParamError("cluster cutoffs must be non-negative");
        ce = std::make_unique<ClusterExpansion>(lattice, opt.cutoff);
    } else if (opt.method == FMethod::exact) {
        omega_plus_table(lattice);
    }

    const auto count = static_cast<std::size_t>(samples);
    FSample out;
    out.F.assign(count, 0.0);
    std::vector<double> resid(count, 0.0);
    const std::size_t chunks = std::min<std::size_t>(64, count);
    parallel_chunks(chunks, [&](std::size_t c) {
        const std::size_t begin = count * c / chunks;
        const std::size_t end = count * (c + 1) / chunks;
        for (std::size_t i = begin; i < end; ++i) {
            const BoundaryField field = sample(dist, lattice, derive_seed(master_seed, i));
            switch (opt.method) {
            case FMethod::toy:
                out.F[i] = 2.0 * field.total();
                break;
            case FMethod::exact:
                out.F[i] = enumerate(lattice, field, params, hard_site_cap).F;
                break;
            case FMethod::cluster: {
                const auto [full, small] = ce->F_pair(field, params, opt.residual_cutoff);
                out.F[i] = full;
                resid[i] = std::fabs(full - small);
                break;
            }
            case FMethod::mc:
                break;
            }
        }
    });
    double r = 0.0;
    for (double x : resid)
        r += x;
    out.residual = r / static_cast<double>(count);
    return out;
}

CharFnEstimate char_fn_from_samples(const std::vector<double>& F, const std::vector<double>& ts)
{
    if (F.empty())
        throw ParamError("char_fn_from_samples: no samples");
    const double n = static_cast<double>(F.size());
    CharFnEstimate est;
    est.t = ts;
    for (double t : ts) {
        double sc = 0.0, ss = 0.0;
        for (double f : F) {
            sc += std::cos(t * f);
            ss += std::sin(t * f);
        }
        const double mc = sc / n;
        const double ms = ss / n;
        double vc = 0.0, vs = 0.0;
        for (double f : F) {
            const double a = std::cos(t * f) - mc;
            const double b = std::sin(t * f) - ms;
            vc += a * a;
            vs += b * b;
        }
        const double denom = F.size() > 1 ? n - 1.0 : 1.0;
        est.psi.emplace_back(mc, ms);
        est.se.push_back(std::sqrt((vc / denom + vs / denom) / n));
    }
    return est;
}

CharFnEstimate char_fn_mc(const LatticeSpec& lattice, const FieldDistribution& dist, const ModelParams& params,
                          const std::vector<double>& ts, std::int64_t samples, std::uint64_t master_seed,
                          const FOptions& opt)
{
    if (opt.method != FMethod::exact && opt.method != FMethod::cluster && opt.method != FMethod::toy)
        throw ParamError("char_fn_mc: method must be exact, cluster or toy");
    const FSample s = sample_F(lattice, dist, params, samples, master_seed, opt);
    CharFnEstimate est = char_fn_from_samples(s.F, ts);
    est.residual = s.residual;
    return est;
}

std::vector<GaussianBoundRow> gaussian_bound_check(const CharFnEstimate& est, const FieldDistribution& dist,
                                                   const LatticeSpec& lattice)
{
    const double var = dist.variance();
    const double m = static_cast<double>(lattice.boundary_size());
    std::vector<GaussianBoundRow> rows;
    for (std::size_t i = 0; i < est.t.size(); ++i) {
        GaussianBoundRow r;
        r.t = est.t[i];
        r.abs_psi = std::abs(est.psi[i]);
        r.se = est.se[i];
        r.bound = std::exp(-0.5 * var * r.t * r.t * m);
        r.pass = r.abs_psi <= r.bound + 3.0 * r.se;
        rows.push_back(r);
    }
    return rows;
}

WeakLltFit weak_llt_fit(int d, const FieldDistribution& dist, const ModelParams& params, double a, double b,
                        double zeta, const std::vector<int>& ns, std::int64_t samples, std::uint64_t master_seed,
                        const FOptions& opt)
{
    if (a > b)
        throw ParamError("weak_llt_fit: need a <= b");
    if (ns.size() < 2)
        throw ParamError("weak_llt_fit: need at least two sizes");
    WeakLltFit out;
    out.reference_exponent = -(d - 1) / 2.0 + zeta;
    std::vector<double> lx, ly;
    for (int n : ns) {
        const double scale = std::pow(static_cast<double>(n), zeta);
        double p = 0.0;
        if (opt.method == FMethod::toy) {
            p = interval_probability(dist, boundary_count(d, n), a * scale / 2.0, b * scale / 2.0, true);
        } else {
            const LatticeSpec lat = build(d, n);
            const FSample s = sample_F(lat, dist, params, samples, derive_seed(master_seed, static_cast<std::uint64_t>(n)), opt);
            std::int64_t hits = 0;
            for (double f : s.F)
                if (f >= a * scale && f <= b * scale)
                    ++hits;
            p = static_cast<double>(hits) / static_cast<double>(samples);
        }
        out.n.push_back(n);
        out.p.push_back(p);
        if (p > 0.0) {
            lx.push_back(std::log(static_cast<double>(n)));
            ly.push_back(std::log(p));
        } else {
            out.lower_bound_only = true;
        }
    }
    if (lx.size() < 2)
        throw ParamError("weak_llt_fit: fewer than two sizes with nonzero counts");
    out.fit = least_squares(lx, ly);
    return out;
}

ScanSummary summarize(const std::vector<ScanRecord>& records, const std::vector<EventSpec>& events)
{
    ScanSummary s;
    int prev = 0, run = 0, plus = 0, nonzero = 0;
    bool any_mc = false;
    int recurrent = 0;
    for (const ScanRecord& r : records) {
        if (r.method == FMethod::mc)
            any_mc = true;
        if (r.sign == 0) {
            ++s.zero_count;
        } else {
            ++nonzero;
            if (r.sign > 0)
                ++plus;
            if (prev != 0 && r.sign != prev) {
                ++s.sign_flips;
                run = 1;
            } else {
                ++run;
            }
            s.longest_run = std::max(s.longest_run, run);
            prev = r.sign;
        }
        if (!events.empty() && std::fabs(r.F) < events.front().k)
            ++recurrent;
    }
    s.plus_fraction = nonzero > 0 ? static_cast<double>(plus) / nonzero : std::numeric_limits<double>::quiet_NaN();
    if (any_mc || events.empty() || records.empty())
        s.recurrence = std::numeric_limits<double>::quiet_NaN();
    else
        s.recurrence = static_cast<double>(recurrent) / static_cast<double>(records.size());
    return s;
}

ScanResult limit_point_scan(const FieldDistribution& dist, int d, const ModelParams& params,
                            const std::vector<std::int64_t>& ns, std::uint64_t master_seed, const FOptions& opt,
                            const std::vector<EventSpec>& events, bool negate_field)
{
    if (d < 1)
        throw ParamError("d must be positive");
    for (std::int64_t n : ns)
        if (n < 1)
            throw ParamError("scan sizes must be positive");
    if (opt.method == FMethod::toy) {
        double work = 0.0;
        for (std::int64_t n : ns)
            work += static_cast<double>(boundary_count(d, n));
        if (work > 4e8)
            throw SizeError("toy scan: total boundary size " + std::to_string(static_cast<long long>(work)) +
                            " exceeds 4e8 site evaluations");
    }
    for (std::int64_t n : ns) {
        if (opt.method != FMethod::toy && std::pow(static_cast<double>(n), d) <= 1e7)
            params.validate(build(d, static_cast<int>(n)));
        if (opt.method == FMethod::exact && std::pow(static_cast<double>(n), d) > hard_site_cap)
            throw SizeError("exact scan method: n = " + std::to_string(n) + " exceeds the enumeration cap");
        if (opt.method != FMethod::toy && std::pow(static_cast<double>(n), d) > 1e7)
            throw SizeError("scan: n = " + std::to_string(n) + " too large for method " + method_name(opt.method));
    }

    ScanResult res;
    res.records.resize(ns.size());
    std::map<std::int64_t, std::shared_ptr<ClusterExpansion>> expansions;
    if (opt.method == FMethod::cluster)
        for (std::int64_t n : ns)
            if (!expansions.count(n))
                expansions[n] = std::make_shared<ClusterExpansion>(build(d, static_cast<int>(n)), opt.cutoff);

    const std::size_t count = ns.size();
    const std::size_t chunks = std::min<std::size_t>(64, std::max<std::size_t>(1, count));
    parallel_chunks(chunks, [&](std::size_t c) {
        const std::size_t begin = count * c / chunks;
        const std::size_t end = count * (c + 1) / chunks;
        for (std::size_t i = begin; i < end; ++i) {
            const std::int64_t n = ns[i];
            ScanRecord r;
            r.n = n;
            r.method = opt.method;
            if (opt.method == FMethod::toy) {
                r.S = toy_boundary_sum(dist, master_seed, d, n, negate_field);
                r.F = 2.0 * r.S;
                r.sign = sign_of(r.F);
            } else {
                const LatticeSpec lat = build(d, static_cast<int>(n));
                BoundaryField field = sample(dist, lat, master_seed);
                if (negate_field)
                    field = field.negated();
                r.S = field.total();
                if (opt.method == FMethod::exact) {
                    r.F = enumerate(lat, field, params, hard_site_cap).F;
                    r.sign = sign_of(r.F);
                } else if (opt.method == FMethod::cluster) {
                    r.F = expansions.at(n)->F(field, params);
                    r.sign = sign_of(r.F);
                } else {
                    McParams mc = opt.mc;
                    mc.seed = derive_seed(derive_seed(master_seed, static_cast<std::uint64_t>(n)), opt.mc.seed);
                    const DominantSign ds = dominant_sign(lat, field, params, mc, opt.replicas);
                    r.F = std::numeric_limits<double>::quiet_NaN();
                    r.sign = ds.sign;
                    r.mc_m = ds.mean_m;
                    r.undecided = ds.undecided;
                }
            }
            for (const EventSpec& e : events) {
                const double w = e.k * std::pow(static_cast<double>(n), e.zeta);
                r.flags.push_back(std::isfinite(r.F) && r.F > -w && r.F < w);
            }
            res.records[i] = std::move(r);
        }
    });
    res.summary = summarize(res.records, events);
    return res;
}

PolymerCharCheck char_fn_polymer_check(const LatticeSpec& lattice, const FieldDistribution& dist,
                                       const ModelParams& params, double t, int cutoff)
{
    params.validate(lattice);
    if (cutoff < 0)
        throw ParamError("cutoff must be non-negative");
    const auto atoms = positive_atoms(dist);
    const double phi2 = dist.char_fn(2.0 * t);
    if (std::abs(phi2) < 1e-12)
        throw SingularityError("phi(2t) = 0: t is excluded");

    PolymerCharCheck out;
    const FLaw law = exact_F_law(lattice, dist, params);
    out.lhs = char_fn_exact(law, t);

    std::unique_ptr<ClusterExpansion> ce;
    std::vector<ClusterShape> no_clusters;
    if (cutoff > 0)
        ce = std::make_unique<ClusterExpansion>(lattice, cutoff);
    const auto& clusters = ce ? ce->clusters() : no_clusters;

    // Families of clusters with total size <= cutoff, by ascending index.
    std::vector<std::vector<int>> families;
    std::vector<int> cur;
    std::function<void(int, int)> grow = [&](int start, int budget) {
        families.push_back(cur);
        for (int i = start; i < static_cast<int>(clusters.size()); ++i) {
            const int sz = clusters[static_cast<std::size_t>(i)].size;
            if (sz <= budget) {
                cur.push_back(i);
                grow(i + 1, budget - sz);
                cur.pop_back();
            }
        }
    };
    grow(0, cutoff);
    out.families = families.size();

    // ∂_n(𝔠) per family, as sorted boundary indices.
    std::vector<std::vector<std::int64_t>> fam_boundary(families.size());
    for (std::size_t f = 0; f < families.size(); ++f) {
        std::vector<std::int64_t> b;
        for (int c : families[f]) {
            const auto& bs = clusters[static_cast<std::size_t>(c)].boundary_sites;
            b.insert(b.end(), bs.begin(), bs.end());
        }
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        fam_boundary[f] = std::move(b);
    }

    // E[e^{2it S_B} Π_C (e^{itΔΦ_C} - 1)] over the full boundary disorder; by
    // locality this equals the expectation over the realizations on B alone.
    const auto bidx = lattice.boundary_indices();
    const std::size_t count = law.F.size();
    std::vector<cplx> expect(families.size(), cplx(0.0, 0.0));
    std::vector<double> values(static_cast<std::size_t>(lattice.size()), 0.0);
    for (std::size_t r = 0; r < count; ++r) {
        std::size_t code = r;
        for (std::int64_t i : bidx) {
            values[static_cast<std::size_t>(i)] = atoms[code % atoms.size()].first;
            code /= atoms.size();
        }
        const BoundaryField field(lattice, values, 0, "enumerated:" + dist.name());
        const auto deltas = ce ? ce->deltas(field, params) : std::vector<double>{};
        std::vector<cplx> factor(deltas.size());
        for (std::size_t c = 0; c < deltas.size(); ++c)
            factor[c] = std::polar(1.0, t * deltas[c]) - 1.0;
        for (std::size_t f = 0; f < families.size(); ++f) {
            double sb = 0.0;
            for (std::int64_t i : fam_boundary[f])
                sb += values[static_cast<std::size_t>(i)];
            cplx term = std::polar(1.0, 2.0 * t * sb);
            for (int c : families[f])
                term *= factor[static_cast<std::size_t>(c)];
            expect[f] += law.prob[r] * term;
        }
    }

    cplx sum(0.0, 0.0);
    for (std::size_t f = 0; f < families.size(); ++f)
        sum += std::pow(phi2, -static_cast<double>(fam_boundary[f].size())) * expect[f];
    out.rhs = std::pow(phi2, static_cast<double>(lattice.boundary_size())) * sum;
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

} // namespace rbising
