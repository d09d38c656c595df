//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string_view>

namespace edgecnn
{

/// SplitMix64. Chosen over the standard engines because its output (and the float mapping below)
/// is fully specified here, so model files and splits reproduce across compilers and platforms.
class SplitMix64
{
public:
    explicit SplitMix64(std::uint64_t seed)
        : state_(seed)
    {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z               = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z               = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform()
    {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi)
    {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound)
    {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound));
    }

private:
    std::uint64_t state_;
};

/// FNV-1a over the bytes of `text`.
constexpr std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : text)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Order-sensitive combination of two 64-bit values, finished with one SplitMix64 step.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    SplitMix64 g(a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2)));
    return g.next();
}

}    // namespace edgecnn
