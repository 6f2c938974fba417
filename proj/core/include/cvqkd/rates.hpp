#pragma once
#include <functional>
#include <utility>
#include <vector>

#include "cvqkd/encoding.hpp"

namespace cvqkd {

/// Net rate 1 - h(e_b) - h(e_p). May be negative; callers gate on > 0.
double css_rate(double e_b, double e_p);

struct PeriodicErrorProb {
    double exact;     // parity-aware alternating lattice sum
    double gp_bound;  // Pr[|noise| > spacing/2], the standard tail bound
};

/// Bit error of the periodic (integer-lattice) encoding under additive
/// N(0, noise_sigma^2) displacement: a bit flips when the displacement lands
/// in an odd lattice cell. exact <= gp_bound always.
PeriodicErrorProb periodic_bit_error(double noise_sigma, double spacing);

/// Per-slice bit error probabilities for Gaussian modulation v_mod (in units
/// of the vacuum variance) through an attenuation channel of the given
/// transmittance, where the receiver sees gain sqrt(T) and conditional noise
/// one vacuum unit. Sequential decoding: slice i is decoded with the lower
/// slices already corrected. Evaluated by adaptive quadrature to absolute
/// error <= 1e-7. The slice map must have been built for the same modulation
/// (signal_sigma = sqrt(v_mod/2)).
std::vector<double> slice_error_rates(double transmittance, double v_mod, const SliceMap& s,
                                      DecodeRule rule);

struct SliceRates {
    std::vector<double> per_slice;  // each clamped at 0 when negative
    double total;
};

/// R_i = max(0, css_rate(e_b[i], e_p[i])); a slice with negative rate
/// contributes nothing but is kept in the list.
SliceRates slice_rates(const std::vector<double>& e_b, const std::vector<double>& e_p);

/// sigma_tilde -> (e_b, e_p) for the squeezing threshold solver.
using ErrorModel = std::function<std::pair<double, double>(double)>;

/// Bisection root of css_rate(model(sigma_tilde)) = 0 on the bracket,
/// sigma accuracy 1e-8, returned as squeezing in dB. Throws when the rate
/// has the same sign at both bracket ends.
double threshold_squeezing(const ErrorModel& model, double sigma_lo = 1e-3, double sigma_hi = 1.0);

/// The error rate solving 1 - 2h(e) = 0 (symmetric channel break-even).
double critical_symmetric_error();

/// Shannon capacity of one Gaussian channel use: 0.5*log2(1 + snr) bits.
double gaussian_mutual_info(double snr);

}  // namespace cvqkd
