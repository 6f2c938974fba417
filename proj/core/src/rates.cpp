#include "cvqkd/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cvqkd/integrate.hpp"

namespace cvqkd {

double css_rate(double e_b, double e_p) {
    return 1.0 - binary_entropy(e_b) - binary_entropy(e_p);
}

PeriodicErrorProb periodic_bit_error(double noise_sigma, double spacing) {
    if (noise_sigma < 0.0) throw std::domain_error("periodic_bit_error: negative noise_sigma");
    if (!(spacing > 0.0)) throw std::domain_error("periodic_bit_error: spacing must be > 0");
    if (noise_sigma == 0.0) return PeriodicErrorProb{0.0, 0.0};

    const auto upper_tail = [&](double t) { return 0.5 * std::erfc(t / (noise_sigma * std::sqrt(2.0))); };
    const double half = 0.5 * spacing;
    double exact = 0.0;
    for (int k = 1; k < 2000; k += 2) {
        const double term = upper_tail(k * spacing - half) - upper_tail(k * spacing + half);
        exact += 2.0 * term;  // the displacement is symmetric, so count both signs
        if (term < 1e-18) break;
    }
    return PeriodicErrorProb{exact, gaussian_outside_prob(GaussianDist(0.0, noise_sigma * noise_sigma),
                                                          0.0, half)};
}

namespace {

// Decision geometry shared by both decode rules: sorted thresholds in the
// receiver's coordinate cut the line into regions, each deciding one bit.
struct DecisionRegions {
    std::vector<double> thresholds;
    std::vector<int> bits;  // thresholds.size() + 1 entries
};

// Pr[outcome lands in a region deciding != true_bit], outcome ~ N(mean, sigma^2).
// Each region mass is taken as a difference of same-side erfc values so the
// deep tails keep relative accuracy.
double region_error_mass(const DecisionRegions& r, double mean, double sigma, int true_bit) {
    const double inv = 1.0 / (sigma * std::sqrt(2.0));
    double total = 0.0;
    const size_t nregions = r.bits.size();
    for (size_t j = 0; j < nregions; ++j) {
        if (r.bits[j] == true_bit) continue;
        const double lo = j == 0 ? -std::numeric_limits<double>::infinity() : r.thresholds[j - 1];
        const double hi = j == nregions - 1 ? std::numeric_limits<double>::infinity() : r.thresholds[j];
        double mass;
        if (lo + hi > 2.0 * mean) {  // region sits to the right of the mean
            const double a = lo == -std::numeric_limits<double>::infinity() ? 2.0 : std::erfc((lo - mean) * inv);
            const double b = hi == std::numeric_limits<double>::infinity() ? 0.0 : std::erfc((hi - mean) * inv);
            mass = 0.5 * (a - b);
        } else {
            const double a = hi == std::numeric_limits<double>::infinity() ? 2.0 : std::erfc((mean - hi) * inv);
            const double b = lo == -std::numeric_limits<double>::infinity() ? 0.0 : std::erfc((mean - lo) * inv);
            mass = 0.5 * (a - b);
        }
        total += mass;
    }
    return std::min(total, 1.0);
}

// Quantile-rounding thresholds for the readjusted rule: candidate k targets
// position k + u, so the cut between consecutive candidates sits at the
// midpoint position, mapped back through the receiver's marginal.
DecisionRegions nearest_regions(const SliceMap& s, int i, const std::vector<int>& candidates,
                                double u, double bob_sigma) {
    DecisionRegions r;
    const double n = static_cast<double>(s.interval_count());
    for (size_t j = 0; j + 1 < candidates.size(); ++j) {
        const double mid = 0.5 * (candidates[j] + candidates[j + 1]) + u;
        r.thresholds.push_back(bob_sigma * inverse_normal_cdf(mid / n));
    }
    for (int k : candidates) r.bits.push_back(slice_bit(s.labels[static_cast<size_t>(k)], i));
    return r;
}

// Posterior mass of interval k given a received value, up to a factor common
// to all intervals: the conditional law of x given x_received is
// N(shrink * x_received, sigma_c^2).
struct Posterior {
    double shrink;
    double sigma_c;
    const SliceMap* map;
    double interval_mass(int k, double x_received) const {
        const double mu = shrink * x_received;
        const double inv = 1.0 / (sigma_c * std::sqrt(2.0));
        const int last = map->interval_count() - 1;
        const double a = k == 0 ? 2.0 : std::erfc((map->boundaries[static_cast<size_t>(k - 1)] - mu) * inv);
        const double b = k == last ? 0.0 : std::erfc((map->boundaries[static_cast<size_t>(k)] - mu) * inv);
        return 0.5 * (a - b);
    }
};

// Posterior-mass difference (bit 1 minus bit 0) whose sign gives the MAP
// decision for slice i among the candidate intervals.
double map_difference(const Posterior& post, const std::vector<int>& candidates, int i,
                      double x_received) {
    double d = 0.0;
    for (int k : candidates) {
        const double mass = post.interval_mass(k, x_received);
        d += slice_bit(post.map->labels[static_cast<size_t>(k)], i) == 1 ? mass : -mass;
    }
    return d;
}

// MAP decision thresholds located by a sign-change scan plus bisection.
DecisionRegions map_regions(const SliceMap& s, int i, const std::vector<int>& candidates,
                            const Posterior& post, double bob_sigma) {
    const double max_b = std::max(std::abs(s.boundaries.front()), std::abs(s.boundaries.back()));
    const double reach = std::max(10.0 * bob_sigma, (max_b + 45.0 * post.sigma_c) / post.shrink);
    const int grid = 6000;

    DecisionRegions r;
    double prev_x = -reach;
    double prev_d = map_difference(post, candidates, i, prev_x);
    std::vector<double> region_sides{prev_d};
    for (int g = 1; g <= grid; ++g) {
        const double x = -reach + 2.0 * reach * g / grid;
        const double d = map_difference(post, candidates, i, x);
        if ((prev_d < 0.0) != (d < 0.0) && (prev_d != 0.0 || d != 0.0)) {
            double lo = prev_x, hi = x, flo = prev_d;
            for (int it = 0; it < 90; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = map_difference(post, candidates, i, mid);
                if ((flo < 0.0) == (fm < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            r.thresholds.push_back(0.5 * (lo + hi));
            region_sides.push_back(d);
        }
        prev_x = x;
        prev_d = d;
    }
    for (double side : region_sides) r.bits.push_back(side > 0.0 ? 1 : 0);
    return r;
}

}  // namespace

std::vector<double> slice_error_rates(double transmittance, double v_mod, const SliceMap& s,
                                      DecodeRule rule) {
    if (!(transmittance > 0.0 && transmittance <= 1.0))
        throw std::invalid_argument("slice_error_rates: transmittance outside (0,1]");
    if (!(v_mod > 0.0)) throw std::invalid_argument("slice_error_rates: v_mod must be > 0");
    const double sigma_a = std::sqrt(v_mod * vacuum_variance);
    if (std::abs(sigma_a - s.signal_sigma) > 1e-9 * sigma_a)
        throw std::invalid_argument("slice_error_rates: slice map was built for a different modulation");

    const double gain = std::sqrt(transmittance);
    const double sigma_n = std::sqrt(vacuum_variance);
    const double sigma_b = std::sqrt(gain * gain * sigma_a * sigma_a + vacuum_variance);
    const int n = s.interval_count();
    const double nd = static_cast<double>(n);

    std::vector<double> rates;
    for (int i = 1; i <= s.m; ++i) {
        double e_i = 0.0;
        if (rule == DecodeRule::nearest_boundary) {
            for (int k = 0; k < n; ++k) {
                const unsigned label = s.labels[static_cast<size_t>(k)];
                std::vector<int> lower(static_cast<size_t>(i - 1));
                for (int j = 1; j < i; ++j) lower[static_cast<size_t>(j - 1)] = slice_bit(label, j);
                const auto candidates = consistent_intervals(s, i, lower);
                const int true_bit = slice_bit(label, i);
                const auto integrand = [&](double u) {
                    const double x_a = sigma_a * inverse_normal_cdf((k + u) / nd);
                    const auto regions = nearest_regions(s, i, candidates, u, sigma_b);
                    return region_error_mass(regions, gain * x_a, sigma_n, true_bit);
                };
                e_i += integrate(integrand, 0.0, 1.0, 1e-9, 1e-9, 60000).value / nd;
            }
        } else {
            const Posterior post{gain * sigma_a * sigma_a / (sigma_b * sigma_b),
                                 sigma_a * sigma_n / sigma_b, &s};
            // one threshold set per lower-bit pattern, shared by its intervals
            for (unsigned pattern = 0; pattern < (1u << (i - 1)); ++pattern) {
                std::vector<int> lower(static_cast<size_t>(i - 1));
                for (int j = 1; j < i; ++j) lower[static_cast<size_t>(j - 1)] = (pattern >> (j - 1)) & 1u;
                const auto candidates = consistent_intervals(s, i, lower);
                if (candidates.empty()) continue;
                const auto regions = map_regions(s, i, candidates, post, sigma_b);
                const double norm = 1.0 / (sigma_a * std::sqrt(2.0 * M_PI));
                for (int k : candidates) {
                    const int true_bit = slice_bit(s.labels[static_cast<size_t>(k)], i);
                    const double lo = k == 0 ? -9.5 * sigma_a : s.boundaries[static_cast<size_t>(k - 1)];
                    const double hi = k == n - 1 ? 9.5 * sigma_a : s.boundaries[static_cast<size_t>(k)];
                    const auto integrand = [&](double x) {
                        const double z = x / sigma_a;
                        return norm * std::exp(-0.5 * z * z) *
                               region_error_mass(regions, gain * x, sigma_n, true_bit);
                    };
                    e_i += integrate(integrand, lo, hi, 1e-9, 1e-9, 60000).value;
                }
            }
        }
        rates.push_back(std::min(std::max(e_i, 0.0), 1.0));
    }
    return rates;
}

SliceRates slice_rates(const std::vector<double>& e_b, const std::vector<double>& e_p) {
    if (e_b.size() != e_p.size()) throw std::invalid_argument("slice_rates: length mismatch");
    SliceRates out;
    out.total = 0.0;
    for (size_t i = 0; i < e_b.size(); ++i) {
        const double r = std::max(css_rate(e_b[i], e_p[i]), 0.0);
        out.per_slice.push_back(r);
        out.total += r;
    }
    return out;
}

double threshold_squeezing(const ErrorModel& model, double sigma_lo, double sigma_hi) {
    const auto rate = [&](double sigma) {
        const auto [e_b, e_p] = model(sigma);
        return css_rate(e_b, e_p);
    };
    double lo = sigma_lo, hi = sigma_hi;
    double f_lo = rate(lo);
    const double f_hi = rate(hi);
    if ((f_lo < 0.0) == (f_hi < 0.0))
        throw std::runtime_error("threshold_squeezing: rate does not change sign on the bracket");
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = rate(mid);
        if ((f_lo < 0.0) == (f_mid < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    const double sigma = 0.5 * (lo + hi);
    return squeezing_db(sigma * sigma);
}

double critical_symmetric_error() {
    double lo = 1e-12, hi = 0.5;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (1.0 - 2.0 * binary_entropy(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double gaussian_mutual_info(double snr) {
    if (snr < 0.0) throw std::domain_error("gaussian_mutual_info: negative snr");
    return 0.5 * std::log2(1.0 + snr);
}

}  // namespace cvqkd
