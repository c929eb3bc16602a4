#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hetprobe {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Seed of the substream addressed by (seed, i0, i1, ...). A pure function
/// of its arguments, so draws never depend on scheduling order.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
{
    std::uint64_t h = detail::splitmix64(seed);
    for (auto index : path) h = detail::splitmix64(h ^ detail::splitmix64(index + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
{
    return Rng{substream_seed(seed, path)};
}

// Stream tags used inside one pulse.
namespace stream {
inline constexpr std::uint64_t kPhotons = 1;
inline constexpr std::uint64_t kElectronic = 2;
inline constexpr std::uint64_t kPathNoise = 3;
} // namespace stream

} // namespace hetprobe
