#pragma once
#include <complex>
#include <vector>

namespace cvqkd {

/// Number-basis expansion of a pure single-mode state, truncated at `cutoff`
/// (amps.size() == cutoff + 1). `deficit` is the probability mass lost to
/// truncation; `truncation_warning` flags a deficit so large the vector no
/// longer represents the intended state.
struct FockVector {
    std::vector<std::complex<double>> amps;
    int cutoff = 0;
    double deficit = 0.0;
    bool truncation_warning = false;
};

/// Number-basis amplitudes of the coherent state with complex amplitude
/// alpha: a_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!). Requires |alpha|^2 <= 100
/// and cutoff <= 200 so the envelope stays representable in doubles.
FockVector coherent_fock(std::complex<double> alpha, int cutoff);

/// Number-basis amplitudes of a displaced squeezed state specified by its
/// quadrature means (x0, p0) and variances (var_x, var_p). The state must be
/// minimum-uncertainty: var_x * var_p == 1/4 (within 1e-9), with the squeezing
/// axis along x or p. Conventions: x = (a + a*)/sqrt(2), vacuum variance 1/2.
FockVector squeezed_fock(double x0, double p0, double var_x, double var_p, int cutoff);

}  // namespace cvqkd
