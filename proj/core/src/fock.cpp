#include "cvqkd/fock.hpp"

#include <cmath>
#include <stdexcept>

namespace cvqkd {

namespace {

double norm_deficit(const std::vector<std::complex<double>>& amps) {
    double total = 0.0;
    for (const auto& a : amps) total += std::norm(a);
    return total < 1.0 ? 1.0 - total : 0.0;
}

}  // namespace

FockVector coherent_fock(std::complex<double> alpha, int cutoff) {
    if (std::norm(alpha) > 100.0) throw std::domain_error("coherent_fock: |alpha|^2 > 100");
    if (cutoff < 0 || cutoff > 200) throw std::domain_error("coherent_fock: cutoff outside [0,200]");
    FockVector v;
    v.cutoff = cutoff;
    v.amps.resize(static_cast<size_t>(cutoff) + 1);
    v.amps[0] = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n <= cutoff; ++n)
        v.amps[n] = v.amps[n - 1] * alpha / std::sqrt(static_cast<double>(n));
    v.deficit = norm_deficit(v.amps);
    v.truncation_warning = v.deficit > 0.5;
    return v;
}

FockVector squeezed_fock(double x0, double p0, double var_x, double var_p, int cutoff) {
    if (!(var_x > 0.0 && var_p > 0.0)) throw std::domain_error("squeezed_fock: variances must be > 0");
    if (std::abs(var_x * var_p - 0.25) > 1e-9)
        throw std::domain_error("squeezed_fock: state is not minimum-uncertainty (var_x*var_p != 1/4)");
    if (cutoff < 0 || cutoff > 200) throw std::domain_error("squeezed_fock: cutoff outside [0,200]");

    // D(alpha) S(xi) |0> with xi = r real: the transformed annihilation
    // operator A = mu a + nu a* - beta kills the state, where mu = cosh r,
    // nu = sinh r, beta = mu alpha + nu conj(alpha). var_x = e^{-2r}/2 fixes
    // r = -log(2 var_x)/2 (r > 0 squeezes x, r < 0 squeezes p).
    const double r = -0.5 * std::log(2.0 * var_x);
    const double mu = std::cosh(r);
    const double nu = std::sinh(r);
    const std::complex<double> alpha(x0 / std::sqrt(2.0), p0 / std::sqrt(2.0));
    const std::complex<double> beta = mu * alpha + nu * std::conj(alpha);

    FockVector v;
    v.cutoff = cutoff;
    v.amps.resize(static_cast<size_t>(cutoff) + 1);
    // c_0 from the normalization of the squeezed-coherent wavefunction;
    // the recurrence c_{n+1} = (beta c_n - nu sqrt(n) c_{n-1}) / (mu sqrt(n+1))
    // follows from <n| A |psi> = 0.
    v.amps[0] = std::exp(-0.5 * std::norm(alpha) - (nu / (2.0 * mu)) * std::conj(alpha) * std::conj(alpha)) /
                std::sqrt(mu);
    if (cutoff >= 1) v.amps[1] = beta * v.amps[0] / mu;
    for (int n = 1; n < cutoff; ++n)
        v.amps[n + 1] = (beta * v.amps[n] - nu * std::sqrt(static_cast<double>(n)) * v.amps[n - 1]) /
                        (mu * std::sqrt(static_cast<double>(n) + 1.0));
    v.deficit = norm_deficit(v.amps);
    v.truncation_warning = v.deficit > 0.5;
    return v;
}

}  // namespace cvqkd
