// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rmv
{
//! SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept
{
    return mix64(a ^ (mix64(b) + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2)));
}

/*!
 * Counter-based random source.
 *
 * Every variate is a pure function of (seed, stream, particle, step, slot), so
 * results do not depend on evaluation order or thread scheduling.
 */
class CounterRng
{
  public:
    constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(hash_combine(mix64(seed), stream))
    {
    }

    //! Uniform in the open interval (0, 1).
    double uniform(std::uint64_t particle, std::uint64_t step, std::uint64_t slot) const noexcept
    {
        std::uint64_t h = hash_combine(hash_combine(hash_combine(key_, particle), step), slot);
        return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
    }

    //! Standard normal via Box-Muller on two consecutive uniform slots.
    double normal(std::uint64_t particle, std::uint64_t step, std::uint64_t slot) const noexcept
    {
        double u1 = uniform(particle, step, 2 * slot);
        double u2 = uniform(particle, step, 2 * slot + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t key() const noexcept { return key_; }

  private:
    std::uint64_t key_;
};
}  // namespace rmv
