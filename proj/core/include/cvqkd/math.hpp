#pragma once

#include <stdexcept>

namespace cvqkd {

// Quadrature convention: [x,p] = i, so the vacuum (and any coherent state)
// has variance 1/2 in each quadrature. Everything downstream assumes this
// value; it is a compile-time constant, not a tunable.
inline constexpr double vacuum_variance = 0.5;

struct GaussianDist {
    double mean = 0.0;
    double variance = vacuum_variance;

    GaussianDist() = default;
    GaussianDist(double m, double v) : mean(m), variance(v) {
        if (!(variance > 0.0)) throw std::invalid_argument("GaussianDist: variance must be > 0");
    }
};

/// Shannon entropy of a {e, 1-e} coin, in bits. h(0) = h(1) = 0.
double binary_entropy(double e);

/// Pr[|X - center| > halfwidth] for X ~ d. Evaluated with erfc so both the
/// deep-tail and near-total cases keep full relative accuracy.
double gaussian_outside_prob(const GaussianDist& d, double center, double halfwidth);

/// Quantile of the standard normal, |error| below ~1e-13 on (1e-300, 1-1e-16).
double inverse_normal_cdf(double q);

/// Standard normal CDF via erfc (stable in both tails).
double normal_cdf(double z);

/// Intensity transmittance of an attenuation channel specified in dB.
double loss_db_to_transmittance(double db);

/// Squeezing in dB of a state whose position density has variance
/// sigma_tilde_sq / 2, i.e. 10*log10(1/sigma_tilde_sq). Vacuum -> 0 dB.
double squeezing_db(double sigma_tilde_sq);

}  // namespace cvqkd
