#include "cvqkd/math.hpp"

#include <cmath>

namespace cvqkd {

double binary_entropy(double e) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("binary_entropy: argument outside [0,1]");
    if (e == 0.0 || e == 1.0) return 0.0;
    return -e * std::log2(e) - (1.0 - e) * std::log2(1.0 - e);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double gaussian_outside_prob(const GaussianDist& d, double center, double halfwidth) {
    if (halfwidth < 0.0) throw std::domain_error("gaussian_outside_prob: negative halfwidth");
    const double s = std::sqrt(2.0 * d.variance);
    const double upper = 0.5 * std::erfc((center + halfwidth - d.mean) / s);
    const double lower = 0.5 * std::erfc((d.mean - (center - halfwidth)) / s);
    const double p = upper + lower;
    return p < 1.0 ? p : 1.0;
}

namespace {

// Acklam's rational approximation to the normal quantile, then one Halley
// refinement against the erfc-based CDF to reach near machine precision.
double acklam(double q) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (q < p_low) {
        const double u = std::sqrt(-2.0 * std::log(q));
        return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
               ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    if (q > 1.0 - p_low) {
        const double u = std::sqrt(-2.0 * std::log(1.0 - q));
        return -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
               ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    const double u = q - 0.5;
    const double t = u * u;
    return (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
           (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
}

}  // namespace

double inverse_normal_cdf(double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("inverse_normal_cdf: argument outside (0,1)");
    double z = acklam(q);
    // Halley step: e = Phi(z) - q, correction u = e / phi(z).
    const double e = normal_cdf(z) - q;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * z * z);
    z -= u / (1.0 + 0.5 * z * u);
    return z;
}

double loss_db_to_transmittance(double db) {
    if (db < 0.0) throw std::domain_error("loss_db_to_transmittance: negative loss");
    return std::pow(10.0, -db / 10.0);
}

double squeezing_db(double sigma_tilde_sq) {
    if (!(sigma_tilde_sq > 0.0)) throw std::domain_error("squeezing_db: sigma_tilde_sq must be > 0");
    return 10.0 * std::log10(1.0 / sigma_tilde_sq);
}

}  // namespace cvqkd
