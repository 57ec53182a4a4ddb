#pragma once

#include <cstdint>
#include <vector>

namespace rbising {

// One spin per site, bit-packed in site-index order (bit set = +1).
class SpinConfig {
public:
    SpinConfig() = default;
    explicit SpinConfig(std::int64_t sites, int fill = +1);

    static SpinConfig from_bits(std::int64_t sites, std::uint64_t bits);
    static SpinConfig from_spins(const std::vector<int>& spins);

    std::int64_t size() const { return sites_; }
    int spin(std::int64_t i) const
    {
        return (words_[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1ULL ? +1 : -1;
    }
    void set(std::int64_t i, int s);
    void flip(std::int64_t i) { words_[static_cast<std::size_t>(i >> 6)] ^= 1ULL << (i & 63); }

    // Requires size() <= 64.
    std::uint64_t pack() const;

    std::vector<int> unpack() const;
    std::vector<std::int8_t> to_int8() const;
    SpinConfig negated() const;

    bool operator==(const SpinConfig&) const = default;

private:
    std::int64_t sites_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace rbising
