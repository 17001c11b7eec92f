#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rcfo/types.hpp"

namespace rcfo {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; mixes (seed, stream) into an independent child seed.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Zero-mean circular complex Gaussian with E{|z|^2} = variance.
template <typename Scalar>
Complex<Scalar> complex_gaussian(Rng& rng, Scalar variance) {
    std::normal_distribution<Scalar> dist(Scalar(0), std::sqrt(variance / Scalar(2)));
    const Scalar re = dist(rng);
    const Scalar im = dist(rng);
    return {re, im};
}

}  // namespace rcfo
