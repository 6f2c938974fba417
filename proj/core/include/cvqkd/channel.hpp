#pragma once
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "cvqkd/math.hpp"
#include "cvqkd/rng.hpp"

namespace cvqkd {

enum class Quadrature { x, p };

/// Gaussian single-mode state: quadrature means and variances (absolute
/// units, vacuum = 0.5 each).
struct GaussianModState {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = vacuum_variance;
    double var_p = vacuum_variance;
};

struct HomodyneOutcome {
    Quadrature quadrature = Quadrature::x;
    double value = 0.0;
};

struct ChannelModel {
    enum class Kind { lossless, beam_splitter, noisy_gaussian, intercept_resend };
    enum class InterceptBasis { random_xp, x_only, p_only };

    Kind kind = Kind::lossless;
    double transmittance = 1.0;  // beam_splitter and noisy_gaussian
    double excess_x = 0.0;       // noisy_gaussian only, added to var_x
    double excess_p = 0.0;
    InterceptBasis basis = InterceptBasis::random_xp;

    static ChannelModel lossless();
    static ChannelModel beam_splitter(double transmittance);
    static ChannelModel noisy_gaussian(double transmittance, double excess_x, double excess_p);
    static ChannelModel intercept_resend(InterceptBasis basis = InterceptBasis::random_xp);

    /// What the receiver assumes about the line when decoding: the published
    /// transmittance for attenuation channels, 1 otherwise (an interceptor is
    /// by definition not part of the public channel model).
    double assumed_transmittance() const;
    double assumed_excess(Quadrature q) const;
};

void to_json(nlohmann::json& j, const ChannelModel& c);
void from_json(const nlohmann::json& j, ChannelModel& c);

/// Push a state through a channel. Deterministic for the Gaussian channels;
/// intercept-resend draws Eve's measurement outcome from rng and re-prepares
/// a coherent state centered on it (unmeasured quadrature reset to 0).
GaussianModState propagate(const GaussianModState& s, const ChannelModel& c, Rng& rng);

/// One homodyne measurement of quadrature q: value ~ N(mean_q, var_q).
HomodyneOutcome homodyne_sample(const GaussianModState& s, Quadrature q, Rng& rng);

/// Exact probability that a homodyne outcome on q falls outside
/// [center - halfwidth, center + halfwidth].
double effect_outside_prob(const GaussianModState& s, Quadrature q, double center, double halfwidth);

}  // namespace cvqkd
