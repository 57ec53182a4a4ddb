#include "rbising/spin_config.hpp"

#include "rbising/common.hpp"

namespace rbising {

SpinConfig::SpinConfig(std::int64_t sites, int fill) : sites_(sites)
{
    if (sites < 0)
        throw ParamError("spin config: negative size");
    words_.assign(static_cast<std::size_t>((sites + 63) / 64), fill > 0 ? ~0ULL : 0ULL);
    if (sites % 64 != 0 && !words_.empty())
        words_.back() &= (1ULL << (sites % 64)) - 1;
}

SpinConfig SpinConfig::from_bits(std::int64_t sites, std::uint64_t bits)
{
    if (sites > 64)
        throw ParamError("from_bits: more than 64 sites");
    SpinConfig c(sites, -1);
    if (sites > 0)
        c.words_[0] = sites == 64 ? bits : bits & ((1ULL << sites) - 1);
    return c;
}

SpinConfig SpinConfig::from_spins(const std::vector<int>& spins)
{
    SpinConfig c(static_cast<std::int64_t>(spins.size()), -1);
    for (std::size_t i = 0; i < spins.size(); ++i) {
        if (spins[i] != 1 && spins[i] != -1)
            throw ParamError("spin values must be +1 or -1");
        c.set(static_cast<std::int64_t>(i), spins[i]);
    }
    return c;
}

void SpinConfig::set(std::int64_t i, int s)
{
    const std::uint64_t bit = 1ULL << (i & 63);
    auto& w = words_[static_cast<std::size_t>(i >> 6)];
    if (s > 0)
        w |= bit;
    else
        w &= ~bit;
}

std::uint64_t SpinConfig::pack() const
{
    if (sites_ > 64)
        throw ParamError("pack: more than 64 sites");
    return words_.empty() ? 0 : words_[0];
}

std::vector<int> SpinConfig::unpack() const
{
    std::vector<int> out(static_cast<std::size_t>(sites_));
    for (std::int64_t i = 0; i < sites_; ++i)
        out[static_cast<std::size_t>(i)] = spin(i);
    return out;
}

std::vector<std::int8_t> SpinConfig::to_int8() const
{
    std::vector<std::int8_t> out(static_cast<std::size_t>(sites_));
    for (std::int64_t i = 0; i < sites_; ++i)
        out[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(spin(i));
    return out;
}

SpinConfig SpinConfig::negated() const
{
    SpinConfig c = *this;
    for (auto& w : c.words_)
        w = ~w;
    if (sites_ % 64 != 0 && !c.words_.empty())
        c.words_.back() &= (1ULL << (sites_ % 64)) - 1;
    return c;
}

} // namespace rbising
