#pragma once
#include <cstdint>
#include <random>

#include "cvqkd/math.hpp"

namespace cvqkd {

using Rng = std::mt19937_64;

/// Uniform double strictly inside (0,1), built from the top 53 bits of the
/// generator so the sequence is identical on every platform (the standard
/// distributions are implementation-defined).
inline double uniform_unit(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Normal sample via the inverse CDF, deterministic and platform-independent.
inline double normal_sample(Rng& rng, double mean, double stddev) {
    return mean + stddev * inverse_normal_cdf(uniform_unit(rng));
}

}  // namespace cvqkd
