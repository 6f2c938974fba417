#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cvqkd/channel.hpp"
#include "cvqkd/codes.hpp"
#include "cvqkd/encoding.hpp"
#include "cvqkd/phase_estimator.hpp"

namespace cvqkd {

struct SliceConfig {
    int m = 2;
    SliceLabeling labeling = SliceLabeling::binary;
    DecodeRule rule = DecodeRule::nearest_boundary;
};

/// Everything a session needs; counts are per session. v_mod is the Gaussian
/// modulation variance in vacuum units. spacing_x / spacing_p set the yes/no
/// effect windows (half a pitch each side). target_squeezing_db fixes the
/// virtual squeezed check ensemble whose phase error the probes estimate.
struct SessionConfig {
    int n_key = 2000;
    int n_bitcheck = 1000;
    int probe_copies = 100000;
    double v_mod = 150.0;
    double spacing_x = 3.6;
    double spacing_p = 2.4;
    SliceConfig slices;
    ChannelModel channel;
    std::string code = "hamming74";
    int cutoff = 2;
    double eps_max = 0.05;
    double design_cond_max = 100.0;  // probe-design retry cap on cond(Gamma)
    double cond_ratio = 5e-4;        // least acceptable signal/band ratio at the gate
    double verify_fraction = 0.5;
    double target_squeezing_db = 6.0;
    // Disclosed window centers for the probe statistics. Empty means the
    // default set: the distinct probe p-means plus +-(spacing_p / 2).
    std::vector<double> test_centers;
    std::uint64_t seed = 1;

    int probe_count() const { return (cutoff + 1) * (cutoff + 1); }
    long long total_oscillators() const {
        return static_cast<long long>(n_key) + n_bitcheck +
               static_cast<long long>(probe_count()) * probe_copies;
    }
    void validate() const;
};

void to_json(nlohmann::json& j, const SessionConfig& c);
void from_json(const nlohmann::json& j, SessionConfig& c);

enum class Role { key, bitcheck, probe };

struct OscillatorRecord {
    Role role = Role::key;
    int probe_index = -1;  // k for probe roles
    double alice_x = 0.0;  // Alice's drawn / prepared means
    double alice_p = 0.0;
    std::optional<double> disclosed;  // x_j for bit-checks; never set for keys
};

/// Ordered public messages plus explicit leak bookkeeping. Key-quadrature
/// values never appear; run_session scans for them on every run.
struct Transcript {
    struct Message {
        std::string kind;
        nlohmann::json payload;
    };
    std::vector<Message> messages;
    long long syndrome_bits = 0;
    long long disclosed_values = 0;

    void add(std::string kind, nlohmann::json payload);
    void add_disclosure(std::string kind, nlohmann::json payload, long long value_count);
    void add_syndrome(std::string kind, nlohmann::json payload, long long bit_count);
    std::string to_ndjson() const;
};

enum class Verdict { key_ok, gate_abort, conditioning_abort };
int verdict_exit_code(Verdict v);
std::string to_string(Verdict v);

struct SliceOutcome {
    double e_b = 0.0;  // verification-subset estimate
    double e_p = 0.0;  // the session phase-error estimate, shared by slices
    double rate = 0.0;
    bool in_key = false;
};

struct SessionReport {
    Verdict verdict = Verdict::gate_abort;
    double e_b = 0.0;
    double e_b_halfwidth = 0.0;
    double phi = 0.0;
    double phi_band = 0.0;
    double gate_rate = 0.0;
    bool conditioning_passed = false;
    bool source_indistinguishable = false;
    std::vector<SliceOutcome> slices;
    BitVec alice_key, bob_key;
    bool key_agreement = false;
    std::string diagnostic;
    std::uint64_t seed = 0;
    nlohmann::json config_echo;
};

nlohmann::json report_to_json(const SessionReport& r);

struct Preparation {
    std::vector<GaussianModState> states;  // one per oscillator, pre-permutation order
    std::vector<OscillatorRecord> records;
    ProbeSet probes;
};

/// Draw key and bit-check states with (x, p) ~ N(0, v_mod/2 each, absolute)
/// and append M copies of each probe amplitude.
Preparation alice_prepare(const SessionConfig& cfg, Rng& rng);

std::vector<int> random_permutation(int g, Rng& rng);
std::vector<GaussianModState> permute(const std::vector<GaussianModState>& batch,
                                      const std::vector<int>& pi);
std::vector<GaussianModState> unpermute(const std::vector<GaussianModState>& batch,
                                        const std::vector<int>& pi);

/// Key and bit-check oscillators are measured in x, probes in p.
std::vector<HomodyneOutcome> bob_measure(const std::vector<GaussianModState>& arrived,
                                         const std::vector<OscillatorRecord>& records, Rng& rng);

/// Yes/no indicators for the bit-check oscillators: 1 when the outcome falls
/// outside the window around the disclosed center.
std::vector<int> bitcheck_indicators(const std::vector<HomodyneOutcome>& outcomes,
                                     const std::vector<OscillatorRecord>& records,
                                     double halfwidth);

struct BitErrorEstimate {
    double value = 0.0;
    double halfwidth = 0.0;  // 1.96 * binomial sigma
};
BitErrorEstimate estimate_bit_error(const std::vector<int>& indicators);

/// Outcome means per (test center, probe): every probe outcome yields one
/// yes/no per disclosed center. Throws unless every probe has exactly
/// copies_per_probe outcomes.
Eigen::MatrixXd collect_F_statistics(const std::vector<HomodyneOutcome>& outcomes,
                                     const std::vector<OscillatorRecord>& records,
                                     const std::vector<double>& test_centers, double halfwidth,
                                     const ProbeSet& probes);

/// Gaussian ensemble of displaced states: displacement modulation variances
/// plus the per-state quadrature variances.
struct GaussianEnsemble {
    double mean_x = 0.0, mean_p = 0.0;
    double mod_var_x = 0.0, mod_var_p = 0.0;
    double state_var_x = vacuum_variance, state_var_p = vacuum_variance;
};

/// Two Gaussian mixtures of Gaussians coincide iff their first two moments
/// do; checked within 1e-9.
bool check_source_indistinguishability(const GaussianEnsemble& a, const GaussianEnsemble& b);

SessionReport run_session(const SessionConfig& cfg, Transcript* transcript_out = nullptr);

}  // namespace cvqkd
