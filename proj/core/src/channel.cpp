#include "cvqkd/channel.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cvqkd {

ChannelModel ChannelModel::lossless() { return ChannelModel{}; }

ChannelModel ChannelModel::beam_splitter(double transmittance) {
    if (!(transmittance > 0.0 && transmittance <= 1.0))
        throw std::invalid_argument("ChannelModel: transmittance outside (0,1]");
    ChannelModel c;
    c.kind = Kind::beam_splitter;
    c.transmittance = transmittance;
    return c;
}

ChannelModel ChannelModel::noisy_gaussian(double transmittance, double excess_x, double excess_p) {
    if (!(transmittance > 0.0 && transmittance <= 1.0))
        throw std::invalid_argument("ChannelModel: transmittance outside (0,1]");
    if (excess_x < 0.0 || excess_p < 0.0)
        throw std::invalid_argument("ChannelModel: excess noise must be >= 0");
    ChannelModel c;
    c.kind = Kind::noisy_gaussian;
    c.transmittance = transmittance;
    c.excess_x = excess_x;
    c.excess_p = excess_p;
    return c;
}

ChannelModel ChannelModel::intercept_resend(InterceptBasis basis) {
    ChannelModel c;
    c.kind = Kind::intercept_resend;
    c.basis = basis;
    return c;
}

double ChannelModel::assumed_transmittance() const {
    switch (kind) {
        case Kind::beam_splitter:
        case Kind::noisy_gaussian:
            return transmittance;
        default:
            return 1.0;
    }
}

double ChannelModel::assumed_excess(Quadrature q) const {
    if (kind != Kind::noisy_gaussian) return 0.0;
    return q == Quadrature::x ? excess_x : excess_p;
}

void to_json(nlohmann::json& j, const ChannelModel& c) {
    switch (c.kind) {
        case ChannelModel::Kind::lossless:
            j = nlohmann::json{{"type", "lossless"}};
            break;
        case ChannelModel::Kind::beam_splitter:
            j = nlohmann::json{{"type", "beamsplitter"}, {"transmittance", c.transmittance}};
            break;
        case ChannelModel::Kind::noisy_gaussian:
            j = nlohmann::json{{"type", "noisy"},
                               {"transmittance", c.transmittance},
                               {"excess_x", c.excess_x},
                               {"excess_p", c.excess_p}};
            break;
        case ChannelModel::Kind::intercept_resend:
            j = nlohmann::json{{"type", "intercept-resend"},
                               {"basis", c.basis == ChannelModel::InterceptBasis::random_xp
                                             ? "random"
                                             : (c.basis == ChannelModel::InterceptBasis::x_only ? "x" : "p")}};
            break;
    }
}

void from_json(const nlohmann::json& j, ChannelModel& c) {
    const std::string type = j.at("type").get<std::string>();
    auto transmittance_of = [&j] {
        const bool has_t = j.contains("transmittance");
        const bool has_db = j.contains("loss_db");
        if (has_t == has_db)
            throw std::invalid_argument("channel: give exactly one of transmittance or loss_db");
        return has_t ? j.at("transmittance").get<double>()
                     : loss_db_to_transmittance(j.at("loss_db").get<double>());
    };
    if (type == "lossless") {
        c = ChannelModel::lossless();
    } else if (type == "beamsplitter") {
        c = ChannelModel::beam_splitter(transmittance_of());
    } else if (type == "noisy") {
        c = ChannelModel::noisy_gaussian(transmittance_of(), j.value("excess_x", 0.0),
                                         j.value("excess_p", 0.0));
    } else if (type == "intercept-resend") {
        const std::string basis = j.value("basis", "random");
        ChannelModel::InterceptBasis b;
        if (basis == "random")
            b = ChannelModel::InterceptBasis::random_xp;
        else if (basis == "x")
            b = ChannelModel::InterceptBasis::x_only;
        else if (basis == "p")
            b = ChannelModel::InterceptBasis::p_only;
        else
            throw std::invalid_argument("channel: unknown intercept basis " + basis);
        c = ChannelModel::intercept_resend(b);
    } else {
        throw std::invalid_argument("channel: unknown type " + type);
    }
}

GaussianModState propagate(const GaussianModState& s, const ChannelModel& c, Rng& rng) {
    switch (c.kind) {
        case ChannelModel::Kind::lossless:
            return s;
        case ChannelModel::Kind::beam_splitter: {
            const double t = c.transmittance;
            const double root_t = std::sqrt(t);
            return GaussianModState{s.mean_x * root_t, s.mean_p * root_t,
                                    t * s.var_x + (1.0 - t) * vacuum_variance,
                                    t * s.var_p + (1.0 - t) * vacuum_variance};
        }
        case ChannelModel::Kind::noisy_gaussian: {
            const double t = c.transmittance;
            const double root_t = std::sqrt(t);
            return GaussianModState{s.mean_x * root_t, s.mean_p * root_t,
                                    t * s.var_x + (1.0 - t) * vacuum_variance + c.excess_x,
                                    t * s.var_p + (1.0 - t) * vacuum_variance + c.excess_p};
        }
        case ChannelModel::Kind::intercept_resend: {
            Quadrature q;
            switch (c.basis) {
                case ChannelModel::InterceptBasis::x_only: q = Quadrature::x; break;
                case ChannelModel::InterceptBasis::p_only: q = Quadrature::p; break;
                default: q = uniform_unit(rng) < 0.5 ? Quadrature::x : Quadrature::p; break;
            }
            const double outcome = homodyne_sample(s, q, rng).value;
            GaussianModState out;  // fresh coherent state at Eve's outcome
            if (q == Quadrature::x)
                out.mean_x = outcome;
            else
                out.mean_p = outcome;
            return out;
        }
    }
    throw std::logic_error("propagate: unreachable");
}

HomodyneOutcome homodyne_sample(const GaussianModState& s, Quadrature q, Rng& rng) {
    const double mean = q == Quadrature::x ? s.mean_x : s.mean_p;
    const double var = q == Quadrature::x ? s.var_x : s.var_p;
    if (!(var > 0.0)) throw std::invalid_argument("homodyne_sample: variance must be > 0");
    return HomodyneOutcome{q, normal_sample(rng, mean, std::sqrt(var))};
}

double effect_outside_prob(const GaussianModState& s, Quadrature q, double center, double halfwidth) {
    const double mean = q == Quadrature::x ? s.mean_x : s.mean_p;
    const double var = q == Quadrature::x ? s.var_x : s.var_p;
    return gaussian_outside_prob(GaussianDist(mean, var), center, halfwidth);
}

}  // namespace cvqkd
