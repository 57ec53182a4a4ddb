#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbising {

struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

// Streaming log-sum-exp accumulator.
class LogSumExp {
public:
    void add(double x)
    {
        if (x == -std::numeric_limits<double>::infinity())
            return;
        if (x <= max_) {
            sum_ += std::exp(x - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - x) + 1.0;
            max_ = x;
        }
    }

    void merge(const LogSumExp& o)
    {
        if (o.sum_ == 0.0)
            return;
        if (sum_ == 0.0) {
            *this = o;
            return;
        }
        if (o.max_ <= max_) {
            sum_ += o.sum_ * std::exp(o.max_ - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - o.max_) + o.sum_;
            max_ = o.max_;
        }
    }

    double value() const
    {
        if (sum_ == 0.0)
            return -std::numeric_limits<double>::infinity();
        return max_ + std::log(sum_);
    }

    double max() const { return max_; }
    double scaled_sum() const { return sum_; }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

inline double log_add_exp(double a, double b)
{
    if (a < b)
        std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity())
        return a;
    return a + std::log1p(std::exp(b - a));
}

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v)
{
    return splitmix64(h ^ splitmix64(v));
}

// Uniform double in [0,1) from a 64-bit hash.
inline double to_unit(std::uint64_t h)
{
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
    return hash_combine(hash_combine(0x5eedULL, master), stream);
}

// Worker count used by parallel loops. 0 means hardware concurrency.
void set_threads(unsigned n);
unsigned threads();

// Runs body(chunk) for chunk in [0, chunks). Work is split into a fixed
// chunk count so results that are merged per chunk in index order do not
// depend on the worker count.
void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body);

} // namespace rbising
