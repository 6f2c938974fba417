#include "cvqkd/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "cvqkd/integrate.hpp"

namespace cvqkd {

PeriodicBinning PeriodicBinning::for_x(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("PeriodicBinning: shape parameter must be > 0");
    return PeriodicBinning(std::sqrt(M_PI) / a);
}

PeriodicBinning PeriodicBinning::for_p(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("PeriodicBinning: shape parameter must be > 0");
    return PeriodicBinning(std::sqrt(M_PI) * a);
}

PeriodicSplit split_periodic(double x, const PeriodicBinning& b) {
    const double t = x / b.spacing;
    double ipart = std::floor(t);
    double frac = t - ipart;
    if (frac >= 1.0) {  // guard against rounding at the bin edge
        frac -= 1.0;
        ipart += 1.0;
    }
    return PeriodicSplit{static_cast<long long>(ipart), frac};
}

int bit_from_integer(long long s) {
    return static_cast<int>(((s % 2) + 2) % 2);
}

int decode_periodic(double x_received, double sbar, const PeriodicBinning& b) {
    if (!(sbar >= 0.0 && sbar < 1.0)) throw std::invalid_argument("decode_periodic: sbar outside [0,1)");
    // nearbyint rounds half to even under the default rounding mode; fmod of
    // an integer-valued double is exact, so the parity never overflows.
    const double n = std::nearbyint((x_received - sbar * b.spacing) / b.spacing);
    return std::fabs(std::fmod(n, 2.0)) > 0.5 ? 1 : 0;
}

SliceLabeling labeling_from_string(const std::string& s) {
    if (s == "binary") return SliceLabeling::binary;
    if (s == "gray") return SliceLabeling::gray;
    throw std::invalid_argument("unknown slice labeling: " + s);
}

DecodeRule decode_rule_from_string(const std::string& s) {
    if (s == "map") return DecodeRule::map;
    if (s == "nearest" || s == "nearest-boundary") return DecodeRule::nearest_boundary;
    throw std::invalid_argument("unknown decode rule: " + s);
}

std::string to_string(SliceLabeling l) {
    return l == SliceLabeling::binary ? "binary" : "gray";
}

std::string to_string(DecodeRule r) {
    return r == DecodeRule::map ? "map" : "nearest-boundary";
}

int SliceMap::interval_of(double x) const {
    // boundary points belong to the right-hand interval, so the index is the
    // count of boundaries <= x
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), x);
    return static_cast<int>(it - boundaries.begin());
}

void to_json(nlohmann::json& j, const SliceMap& s) {
    j = nlohmann::json{{"m", s.m},
                       {"boundaries", s.boundaries},
                       {"labels", s.labels},
                       {"signal_sigma", s.signal_sigma}};
}

void from_json(const nlohmann::json& j, SliceMap& s) {
    j.at("m").get_to(s.m);
    j.at("boundaries").get_to(s.boundaries);
    j.at("labels").get_to(s.labels);
    j.at("signal_sigma").get_to(s.signal_sigma);
    const size_t n = size_t{1} << s.m;
    if (s.labels.size() != n || s.boundaries.size() != n - 1)
        throw std::invalid_argument("SliceMap: inconsistent sizes in JSON");
}

SliceMap build_equiprobable_slices(double signal_sigma, int m, SliceLabeling labeling) {
    if (!(signal_sigma > 0.0)) throw std::invalid_argument("build_equiprobable_slices: sigma must be > 0");
    if (m < 1 || m > 8) throw std::invalid_argument("build_equiprobable_slices: m outside 1..8");
    SliceMap s;
    s.m = m;
    s.signal_sigma = signal_sigma;
    const unsigned n = 1u << m;
    s.boundaries.reserve(n - 1);
    for (unsigned k = 1; k < n; ++k)
        s.boundaries.push_back(signal_sigma *
                               inverse_normal_cdf(static_cast<double>(k) / static_cast<double>(n)));
    s.labels.reserve(n);
    for (unsigned j = 0; j < n; ++j)
        s.labels.push_back(labeling == SliceLabeling::binary ? j : (j ^ (j >> 1)));
    return s;
}

std::vector<int> slice_bits(double x, const SliceMap& s) {
    const unsigned label = s.label_of(x);
    std::vector<int> bits(static_cast<size_t>(s.m));
    for (int i = 1; i <= s.m; ++i) bits[static_cast<size_t>(i - 1)] = slice_bit(label, i);
    return bits;
}

double slice_remainder(double x, const SliceMap& s) {
    const double scale = static_cast<double>(s.interval_count());
    const double position = scale * normal_cdf(x / s.signal_sigma);
    double u = position - static_cast<double>(s.interval_of(x));
    if (u < 0.0) u = 0.0;
    if (u >= 1.0) u = std::nextafter(1.0, 0.0);
    return u;
}

std::vector<int> consistent_intervals(const SliceMap& s, int i,
                                      const std::vector<int>& known_lower_bits) {
    if (i < 1 || i > s.m) throw std::invalid_argument("slice index outside 1..m");
    if (known_lower_bits.size() != static_cast<size_t>(i - 1))
        throw std::invalid_argument("known_lower_bits must have length i-1");
    std::vector<int> out;
    for (int k = 0; k < s.interval_count(); ++k) {
        const unsigned label = s.labels[static_cast<size_t>(k)];
        bool ok = true;
        for (int j = 1; j < i; ++j)
            if (slice_bit(label, j) != known_lower_bits[static_cast<size_t>(j - 1)]) {
                ok = false;
                break;
            }
        if (ok) out.push_back(k);
    }
    return out;
}

namespace {

// Mass of the prior-times-likelihood product over one interval, by adaptive
// quadrature. The product is proportional to a Gaussian centered at mu with
// std sigma_c, so integration is clipped to mu +- 40 sigma_c, beyond which
// the integrand underflows to zero anyway.
double interval_mass(double lo, double hi, double x_received, double gain, double noise_var,
                     double sigma_a) {
    const double sigma_b_sq = gain * gain * sigma_a * sigma_a + noise_var;
    const double mu = gain * sigma_a * sigma_a * x_received / sigma_b_sq;
    const double sigma_c = sigma_a * std::sqrt(noise_var / sigma_b_sq);
    const double a = std::max(lo, mu - 40.0 * sigma_c);
    const double b = std::min(hi, mu + 40.0 * sigma_c);
    if (!(b > a)) return 0.0;
    const auto f = [&](double x) {
        const double za = x / sigma_a;
        const double r = x_received - gain * x;
        return std::exp(-0.5 * za * za - 0.5 * r * r / noise_var);
    };
    return integrate(f, a, b, 0.0, 1e-9, 40000).value;
}

}  // namespace

int map_decode_slice(double x_received, int i, const std::vector<int>& known_lower_bits,
                     const SliceMap& s, const GaussianDist& noise, double gain) {
    if (!(gain > 0.0)) throw std::invalid_argument("map_decode_slice: gain must be > 0");
    const std::vector<int> candidates = consistent_intervals(s, i, known_lower_bits);
    if (candidates.empty()) throw std::domain_error("map_decode_slice: no interval matches the known bits");

    const double inf = std::numeric_limits<double>::infinity();
    double mass[2] = {0.0, 0.0};
    for (int k : candidates) {
        const double lo = k == 0 ? -inf : s.boundaries[static_cast<size_t>(k - 1)];
        const double hi = k == s.interval_count() - 1 ? inf : s.boundaries[static_cast<size_t>(k)];
        const int b = slice_bit(s.labels[static_cast<size_t>(k)], i);
        mass[b] += interval_mass(lo, hi, x_received, gain, noise.variance, s.signal_sigma);
    }
    return mass[1] > mass[0] ? 1 : 0;
}

int nearest_decode_slice(double x_received, int i, const std::vector<int>& known_lower_bits,
                         const SliceMap& s, double remainder, double bob_sigma) {
    if (!(bob_sigma > 0.0)) throw std::invalid_argument("nearest_decode_slice: bob_sigma must be > 0");
    if (!(remainder >= 0.0 && remainder < 1.0))
        throw std::invalid_argument("nearest_decode_slice: remainder outside [0,1)");
    const std::vector<int> candidates = consistent_intervals(s, i, known_lower_bits);
    if (candidates.empty())
        throw std::domain_error("nearest_decode_slice: no interval matches the known bits");

    const double position = static_cast<double>(s.interval_count()) * normal_cdf(x_received / bob_sigma);
    int best = candidates.front();
    double best_dist = std::abs(position - (static_cast<double>(best) + remainder));
    for (int k : candidates) {
        const double d = std::abs(position - (static_cast<double>(k) + remainder));
        if (d < best_dist) {
            best = k;
            best_dist = d;
        }
    }
    return slice_bit(s.labels[static_cast<size_t>(best)], i);
}

}  // namespace cvqkd
