#include "rbising/disorder.hpp"

#include "rbising/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rbising {

FieldDistribution FieldDistribution::rademacher(double lambda_star)
{
    if (!(lambda_star >= 0.0) || !std::isfinite(lambda_star))
        throw ParamError("rademacher: lambda_star must be finite and >= 0");
    FieldDistribution d;
    d.kind_ = DistKind::rademacher;
    d.lambda_star_ = lambda_star;
    d.values_ = {-lambda_star, lambda_star};
    d.probs_ = {0.5, 0.5};
    d.cdf_ = {0.5, 1.0};
    return d;
}

FieldDistribution FieldDistribution::uniform(double lambda_star)
{
    if (!(lambda_star > 0.0) || !std::isfinite(lambda_star))
        throw ParamError("uniform: lambda_star must be finite and > 0");
    FieldDistribution d;
    d.kind_ = DistKind::uniform;
    d.lambda_star_ = lambda_star;
    return d;
}

FieldDistribution FieldDistribution::discrete(std::vector<double> values, std::vector<double> probs)
{
    if (values.empty() || values.size() != probs.size())
        throw ParamError("discrete: values and probs must be non-empty and of equal length");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    FieldDistribution d;
    d.kind_ = DistKind::discrete;
    double total = 0.0;
    double mean = 0.0;
    double max_abs = 0.0;
    for (std::size_t i : order) {
        if (!(probs[i] >= 0.0))
            throw ParamError("discrete: probabilities must be >= 0");
        d.values_.push_back(values[i]);
        d.probs_.push_back(probs[i]);
        total += probs[i];
        mean += values[i] * probs[i];
        max_abs = std::max(max_abs, std::abs(values[i]));
    }
    d.lambda_star_ = max_abs;
    if (std::abs(total - 1.0) > 1e-12)
        throw ParamError("discrete: probabilities must sum to 1");
    const std::size_t m = d.values_.size();
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = m - 1 - i;
        if (std::abs(d.values_[i] + d.values_[j]) > 1e-12 || std::abs(d.probs_[i] - d.probs_[j]) > 1e-12)
            throw ParamError("discrete: distribution must be symmetric");
    }
    if (std::abs(mean) > 1e-12)
        throw ParamError("discrete: mean must vanish");
    double acc = 0.0;
    for (double p : d.probs_) {
        acc += p;
        d.cdf_.push_back(acc);
    }
    d.cdf_.back() = 1.0;
    return d;
}

std::vector<std::pair<double, double>> FieldDistribution::atoms() const
{
    if (kind_ == DistKind::uniform)
        throw UnsupportedError("uniform distribution has no atoms");
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < values_.size(); ++i)
        out.emplace_back(values_[i], probs_[i]);
    return out;
}

double FieldDistribution::quantile(double u) const
{
    if (kind_ == DistKind::uniform)
        return -lambda_star_ + 2.0 * lambda_star_ * u;
    if (kind_ == DistKind::rademacher)
        return u < 0.5 ? -lambda_star_ : lambda_star_;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    if (i >= values_.size())
        i = values_.size() - 1;
    return values_[i];
}

double FieldDistribution::char_fn(double t) const
{
    switch (kind_) {
    case DistKind::rademacher:
        return std::cos(lambda_star_ * t);
    case DistKind::uniform: {
        const double x = lambda_star_ * t;
        if (std::abs(x) < 1e-8)
            return 1.0 - x * x / 6.0;
        return std::sin(x) / x;
    }
    case DistKind::discrete: {
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            s += probs_[i] * std::cos(t * values_[i]);
        return s;
    }
    }
    return 0.0;
}

double FieldDistribution::variance() const
{
    switch (kind_) {
    case DistKind::rademacher:
        return lambda_star_ * lambda_star_;
    case DistKind::uniform:
        return lambda_star_ * lambda_star_ / 3.0;
    case DistKind::discrete: {
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            s += probs_[i] * values_[i] * values_[i];
        return s;
    }
    }
    return 0.0;
}

std::string FieldDistribution::name() const
{
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case DistKind::rademacher:
        os << "rademacher(" << lambda_star_ << ")";
        break;
    case DistKind::uniform:
        os << "uniform(" << lambda_star_ << ")";
        break;
    case DistKind::discrete:
        os << "discrete(";
        for (std::size_t i = 0; i < values_.size(); ++i)
            os << (i ? "," : "") << values_[i] << ":" << probs_[i];
        os << ")";
        break;
    }
    return os.str();
}

double char_fn(const FieldDistribution& dist, double t) { return dist.char_fn(t); }
double variance(const FieldDistribution& dist) { return dist.variance(); }

double field_value(const FieldDistribution& dist, std::uint64_t seed, const Site& x)
{
    std::uint64_t h = hash_combine(0xb0a4d1f1e1dULL, seed);
    h = hash_combine(h, x.size());
    for (int c : x)
        h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
    return dist.quantile(to_unit(h));
}

BoundaryField::BoundaryField(LatticeSpec lattice, std::vector<double> values, std::uint64_t seed, std::string rule)
    : lattice_(std::move(lattice)), values_(std::move(values)), seed_(seed), rule_(std::move(rule))
{
    if (static_cast<std::int64_t>(values_.size()) != lattice_.size())
        throw ParamError("boundary field: value vector must have one entry per site");
}

BoundaryField BoundaryField::negated() const
{
    BoundaryField f = *this;
    for (double& v : f.values_)
        v = -v;
    f.rule_ = "negated:" + rule_;
    return f;
}

BoundaryField BoundaryField::with_value(std::int64_t index, double value) const
{
    if (!lattice_.is_boundary(index))
        throw ParamError("with_value: site is not on the boundary");
    BoundaryField f = *this;
    f.values_[static_cast<std::size_t>(index)] = value;
    f.rule_ = "modified:" + rule_;
    return f;
}

double BoundaryField::total() const
{
    double s = 0.0;
    for (double v : values_)
        s += v;
    return s;
}

BoundaryField sample(const FieldDistribution& dist, const LatticeSpec& lattice, std::uint64_t seed)
{
    std::vector<double> values(static_cast<std::size_t>(lattice.size()), 0.0);
    for (std::int64_t i : lattice.boundary_indices())
        values[static_cast<std::size_t>(i)] = field_value(dist, seed, lattice.coords(i));
    return BoundaryField(lattice, std::move(values), seed, "site-hash:" + dist.name());
}

BoundaryField constant_field(const LatticeSpec& lattice, double value)
{
    std::vector<double> values(static_cast<std::size_t>(lattice.size()), 0.0);
    for (std::int64_t i : lattice.boundary_indices())
        values[static_cast<std::size_t>(i)] = value;
    return BoundaryField(lattice, std::move(values), 0, "constant");
}

double boundary_sum(const BoundaryField& field, const std::vector<std::int64_t>& subset)
{
    std::vector<std::int64_t> idx = subset;
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    double s = 0.0;
    for (std::int64_t i : idx)
        if (field.lattice().is_boundary(i))
            s += field.at(i);
    return s;
}

double boundary_sum(const BoundaryField& field, const std::vector<Site>& subset)
{
    std::vector<std::int64_t> idx;
    idx.reserve(subset.size());
    for (const Site& x : subset)
        idx.push_back(field.lattice().index(x));
    return boundary_sum(field, idx);
}

} // namespace rbising
