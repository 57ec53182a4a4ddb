#pragma once

#include "rbising/lattice.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rbising {

enum class DistKind { rademacher, uniform, discrete };

class FieldDistribution {
public:
    static FieldDistribution rademacher(double lambda_star);
    static FieldDistribution uniform(double lambda_star);
    // values/probs must form a symmetric table; zero-probability atoms allowed.
    static FieldDistribution discrete(std::vector<double> values, std::vector<double> probs);

    DistKind kind() const { return kind_; }
    double lambda_star() const { return lambda_star_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probs() const { return probs_; }
    bool is_discrete() const { return kind_ != DistKind::uniform; }

    // Atoms of a discrete law (Rademacher expands to two atoms).
    std::vector<std::pair<double, double>> atoms() const;

    double quantile(double u) const;
    double char_fn(double t) const;
    double variance() const;

    std::string name() const;

private:
    DistKind kind_ = DistKind::rademacher;
    double lambda_star_ = 0.5;
    std::vector<double> values_;
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

double char_fn(const FieldDistribution& dist, double t);
double variance(const FieldDistribution& dist);

// lambda_x for any site of Z^d; depends only on (seed, coords).
double field_value(const FieldDistribution& dist, std::uint64_t seed, const Site& x);

class BoundaryField {
public:
    BoundaryField() = default;
    BoundaryField(LatticeSpec lattice, std::vector<double> values, std::uint64_t seed, std::string rule);

    const LatticeSpec& lattice() const { return lattice_; }
    std::uint64_t seed() const { return seed_; }
    const std::string& rule() const { return rule_; }

    // Indexed by site index; zero on interior sites.
    const std::vector<double>& values() const { return values_; }
    double at(std::int64_t index) const { return values_[static_cast<std::size_t>(index)]; }
    double at(const Site& x) const { return at(lattice_.index(x)); }

    BoundaryField negated() const;
    // Same realization with lambda_x replaced on one boundary site.
    BoundaryField with_value(std::int64_t index, double value) const;

    double total() const;

private:
    LatticeSpec lattice_;
    std::vector<double> values_;
    std::uint64_t seed_ = 0;
    std::string rule_;
};

BoundaryField sample(const FieldDistribution& dist, const LatticeSpec& lattice, std::uint64_t seed);

// Same lambda on every boundary site.
BoundaryField constant_field(const LatticeSpec& lattice, double value);

// Sum of lambda_x over subset ∩ boundary, accumulated in site-index order.
double boundary_sum(const BoundaryField& field, const std::vector<std::int64_t>& subset);
double boundary_sum(const BoundaryField& field, const std::vector<Site>& subset);

} // namespace rbising
