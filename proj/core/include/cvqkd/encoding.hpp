#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cvqkd/math.hpp"

namespace cvqkd {

/// Integer-lattice quantization of a quadrature value: x = (S + sbar)*spacing.
/// The two conjugate quadratures of one asymmetric scheme use reciprocal
/// pitches, sqrt(pi)*a and sqrt(pi)/a for a shape parameter a.
struct PeriodicBinning {
    double spacing;
    explicit PeriodicBinning(double spacing_) : spacing(spacing_) {
        if (!(spacing > 0.0)) throw std::invalid_argument("PeriodicBinning: spacing must be > 0");
    }
    static PeriodicBinning for_x(double a);  // pitch sqrt(pi)/a
    static PeriodicBinning for_p(double a);  // pitch sqrt(pi)*a
};

struct PeriodicSplit {
    long long integer_part = 0;  // S = floor(x / spacing)
    double remainder = 0.0;      // sbar = frac(x / spacing), in [0,1) for all signs
};

PeriodicSplit split_periodic(double x, const PeriodicBinning& b);

/// Parity of S: 0 for even, 1 for odd (negatives included).
int bit_from_integer(long long s);

/// Round (x_received - sbar*spacing)/spacing to the nearest integer (ties to
/// even) and return its parity.
int decode_periodic(double x_received, double sbar, const PeriodicBinning& b);

enum class SliceLabeling { binary, gray };
enum class DecodeRule { map, nearest_boundary };

SliceLabeling labeling_from_string(const std::string& s);
DecodeRule decode_rule_from_string(const std::string& s);
std::string to_string(SliceLabeling l);
std::string to_string(DecodeRule r);

/// Partition of the real line into 2^m intervals with m-bit labels. Slice i
/// is bit i of the label, with slice 1 the least significant bit. A point on
/// a boundary belongs to the interval on its right.
struct SliceMap {
    int m = 1;
    std::vector<double> boundaries;  // 2^m - 1, strictly increasing
    std::vector<unsigned> labels;    // 2^m, distinct, each < 2^m
    double signal_sigma = 1.0;       // std dev used to place equiprobable boundaries

    int interval_count() const { return static_cast<int>(labels.size()); }
    int interval_of(double x) const;
    unsigned label_of(double x) const { return labels[static_cast<size_t>(interval_of(x))]; }
};

void to_json(nlohmann::json& j, const SliceMap& s);
void from_json(const nlohmann::json& j, SliceMap& s);

/// Boundaries at the k/2^m quantiles of N(0, signal_sigma^2), so every
/// interval carries equal prior mass. Requires 1 <= m <= 8.
SliceMap build_equiprobable_slices(double signal_sigma, int m, SliceLabeling labeling);

/// Bit i of label, i in 1..m.
inline int slice_bit(unsigned label, int i) { return static_cast<int>((label >> (i - 1)) & 1u); }

/// The label bits of x's interval, index 0 = slice 1 (least significant).
std::vector<int> slice_bits(double x, const SliceMap& s);

/// Within-interval quantile of x: with q = Phi(x/sigma), the fractional part
/// of q*2^m, in [0,1). Assumes the map's boundaries sit at the quantiles the
/// default builder places (the remainder is disclosed, so the definition must
/// be shared by both ends).
double slice_remainder(double x, const SliceMap& s);

/// Intervals whose labels agree with known_lower_bits on slices 1..i-1.
std::vector<int> consistent_intervals(const SliceMap& s, int i,
                                      const std::vector<int>& known_lower_bits);

/// Posterior-mass argmax for slice i: integrates the product of the prior
/// N(x; 0, signal_sigma^2) and the likelihood N(x_received; gain*x,
/// noise.variance) over every interval consistent with the already corrected
/// lower slices, by adaptive quadrature (relative error <= 1e-9). Ties give
/// bit 0. Throws std::domain_error when no interval matches the known bits.
int map_decode_slice(double x_received, int i, const std::vector<int>& known_lower_bits,
                     const SliceMap& s, const GaussianDist& noise, double gain);

/// Cheaper comparison rule: rescale the measured value to a quantile at the
/// receiver's marginal scale (bob_sigma) and pick the consistent interval k
/// minimizing |Phi(x_received/bob_sigma)*2^m - (k + remainder)|, i.e. round
/// to the disclosed within-interval position. Ties go to the lower interval.
int nearest_decode_slice(double x_received, int i, const std::vector<int>& known_lower_bits,
                         const SliceMap& s, double remainder, double bob_sigma);

}  // namespace cvqkd
