#include "cvqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "cvqkd/rates.hpp"

namespace cvqkd {

void SessionConfig::validate() const {
    if (n_key < 1) throw std::invalid_argument("config: n_key must be >= 1");
    if (n_bitcheck < 1)
        throw std::invalid_argument("config: n_bitcheck must be >= 1, the bit-error gate needs samples");
    if (probe_copies < 1) throw std::invalid_argument("config: probe_copies must be >= 1");
    if (!(v_mod > 0.0)) throw std::invalid_argument("config: v_mod must be > 0");
    if (!(spacing_x > 0.0) || !(spacing_p > 0.0))
        throw std::invalid_argument("config: spacings must be > 0");
    if (slices.m < 1 || slices.m > 16) throw std::invalid_argument("config: slices.m outside 1..16");
    if (cutoff < 0) throw std::invalid_argument("config: cutoff must be >= 0");
    if (!(eps_max > 0.0 && eps_max < 0.1))
        throw std::invalid_argument("config: eps_max outside (0, 0.1)");
    if (!(design_cond_max > 1.0)) throw std::invalid_argument("config: design_cond_max must be > 1");
    if (!(cond_ratio > 0.0)) throw std::invalid_argument("config: cond_ratio must be > 0");
    if (!(verify_fraction >= 0.0 && verify_fraction <= 1.0))
        throw std::invalid_argument("config: verify_fraction outside [0, 1]");
    if (!(target_squeezing_db > 0.0))
        throw std::invalid_argument("config: target_squeezing_db must be > 0");
    // The virtual squeezed ensemble must fit inside the coherent modulation:
    // its x-displacement variance v_mod/2 + 1/2 - var_x(target) cannot go
    // negative, or the two sources would be distinguishable.
    const double var_p_t = vacuum_variance * std::pow(10.0, -target_squeezing_db / 10.0);
    const double var_x_t = 0.25 / var_p_t;
    if ((v_mod + 1.0) * vacuum_variance - var_x_t < -1e-12)
        throw std::invalid_argument("config: v_mod too small to host the squeezing target");
    if (total_oscillators() > 100'000'000LL)
        throw std::invalid_argument("config: session larger than 1e8 oscillators");
    code_pair_by_name(code);  // throws for unknown names
}

static void to_json(nlohmann::json& j, const SliceConfig& c) {
    j = nlohmann::json{{"m", c.m}, {"labeling", to_string(c.labeling)}, {"rule", to_string(c.rule)}};
}

static void from_json(const nlohmann::json& j, SliceConfig& c) {
    c.m = j.value("m", c.m);
    if (j.contains("labeling")) c.labeling = labeling_from_string(j.at("labeling").get<std::string>());
    if (j.contains("rule")) c.rule = decode_rule_from_string(j.at("rule").get<std::string>());
}

void to_json(nlohmann::json& j, const SessionConfig& c) {
    j = nlohmann::json{{"n_key", c.n_key},
                       {"n_bitcheck", c.n_bitcheck},
                       {"probe_copies", c.probe_copies},
                       {"v_mod", c.v_mod},
                       {"spacing_x", c.spacing_x},
                       {"spacing_p", c.spacing_p},
                       {"code", c.code},
                       {"cutoff", c.cutoff},
                       {"eps_max", c.eps_max},
                       {"design_cond_max", c.design_cond_max},
                       {"cond_ratio", c.cond_ratio},
                       {"verify_fraction", c.verify_fraction},
                       {"target_squeezing_db", c.target_squeezing_db},
                       {"test_centers", c.test_centers},
                       {"seed", c.seed}};
    to_json(j["slices"], c.slices);
    nlohmann::json ch;
    to_json(ch, c.channel);
    j["channel"] = ch;
}

void from_json(const nlohmann::json& j, SessionConfig& c) {
    c.n_key = j.value("n_key", c.n_key);
    c.n_bitcheck = j.value("n_bitcheck", c.n_bitcheck);
    c.probe_copies = j.value("probe_copies", c.probe_copies);
    c.v_mod = j.value("v_mod", c.v_mod);
    c.spacing_x = j.value("spacing_x", c.spacing_x);
    c.spacing_p = j.value("spacing_p", c.spacing_p);
    c.code = j.value("code", c.code);
    c.cutoff = j.value("cutoff", c.cutoff);
    c.eps_max = j.value("eps_max", c.eps_max);
    c.design_cond_max = j.value("design_cond_max", c.design_cond_max);
    c.cond_ratio = j.value("cond_ratio", c.cond_ratio);
    c.verify_fraction = j.value("verify_fraction", c.verify_fraction);
    c.target_squeezing_db = j.value("target_squeezing_db", c.target_squeezing_db);
    if (j.contains("test_centers")) c.test_centers = j.at("test_centers").get<std::vector<double>>();
    c.seed = j.value("seed", c.seed);
    if (j.contains("slices")) from_json(j.at("slices"), c.slices);
    if (j.contains("channel")) from_json(j.at("channel"), c.channel);
    if (j.contains("probe_count")) {
        const int k = j.at("probe_count").get<int>();
        if (k != c.probe_count())
            throw std::invalid_argument("config: probe_count inconsistent with (cutoff+1)^2");
    }
}

void Transcript::add(std::string kind, nlohmann::json payload) {
    messages.push_back(Message{std::move(kind), std::move(payload)});
}

void Transcript::add_disclosure(std::string kind, nlohmann::json payload, long long value_count) {
    disclosed_values += value_count;
    add(std::move(kind), std::move(payload));
}

void Transcript::add_syndrome(std::string kind, nlohmann::json payload, long long bit_count) {
    syndrome_bits += bit_count;
    add(std::move(kind), std::move(payload));
}

std::string Transcript::to_ndjson() const {
    std::string out;
    for (const auto& m : messages) {
        nlohmann::json line{{"kind", m.kind}, {"payload", m.payload}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

int verdict_exit_code(Verdict v) {
    switch (v) {
        case Verdict::key_ok: return 0;
        case Verdict::gate_abort: return 2;
        case Verdict::conditioning_abort: return 3;
    }
    return 1;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::key_ok: return "key_ok";
        case Verdict::gate_abort: return "gate_abort";
        case Verdict::conditioning_abort: return "conditioning_abort";
    }
    return "unknown";
}

Preparation alice_prepare(const SessionConfig& cfg, Rng& rng) {
    cfg.validate();
    Preparation prep;
    prep.probes = design_probes(cfg.cutoff, cfg.eps_max, cfg.design_cond_max, rng, cfg.probe_copies);
    const auto g = static_cast<size_t>(cfg.total_oscillators());
    prep.states.reserve(g);
    prep.records.reserve(g);
    const double mod_sigma = std::sqrt(cfg.v_mod * vacuum_variance);
    for (int j = 0; j < cfg.n_key + cfg.n_bitcheck; ++j) {
        OscillatorRecord rec;
        rec.role = j < cfg.n_key ? Role::key : Role::bitcheck;
        rec.alice_x = normal_sample(rng, 0.0, mod_sigma);
        rec.alice_p = normal_sample(rng, 0.0, mod_sigma);
        prep.states.push_back(GaussianModState{rec.alice_x, rec.alice_p, vacuum_variance, vacuum_variance});
        prep.records.push_back(rec);
    }
    for (int k = 0; k < prep.probes.probe_count(); ++k) {
        const std::complex<double> a = prep.probes.alphas[static_cast<size_t>(k)];
        OscillatorRecord rec;
        rec.role = Role::probe;
        rec.probe_index = k;
        rec.alice_x = std::sqrt(2.0) * a.real();
        rec.alice_p = std::sqrt(2.0) * a.imag();
        const GaussianModState st{rec.alice_x, rec.alice_p, vacuum_variance, vacuum_variance};
        for (int c = 0; c < cfg.probe_copies; ++c) {
            prep.states.push_back(st);
            prep.records.push_back(rec);
        }
    }
    return prep;
}

std::vector<int> random_permutation(int g, Rng& rng) {
    if (g < 0) throw std::invalid_argument("random_permutation: negative size");
    std::vector<int> pi(static_cast<size_t>(g));
    std::iota(pi.begin(), pi.end(), 0);
    // Fisher-Yates with an explicit unbiased bounded draw, so the permutation
    // is the same on every platform (std::shuffle is implementation-defined).
    for (int i = g - 1; i > 0; --i) {
        const std::uint64_t bound = static_cast<std::uint64_t>(i) + 1;
        const std::uint64_t reject_below = (0 - bound) % bound;  // 2^64 mod bound
        std::uint64_t r = rng();
        while (r < reject_below) r = rng();
        std::swap(pi[static_cast<size_t>(i)], pi[static_cast<size_t>(r % bound)]);
    }
    return pi;
}

std::vector<GaussianModState> permute(const std::vector<GaussianModState>& batch,
                                      const std::vector<int>& pi) {
    if (batch.size() != pi.size()) throw std::invalid_argument("permute: size mismatch");
    std::vector<GaussianModState> out(batch.size());
    for (size_t i = 0; i < pi.size(); ++i) out[i] = batch[static_cast<size_t>(pi[i])];
    return out;
}

std::vector<GaussianModState> unpermute(const std::vector<GaussianModState>& batch,
                                        const std::vector<int>& pi) {
    if (batch.size() != pi.size()) throw std::invalid_argument("unpermute: size mismatch");
    std::vector<GaussianModState> out(batch.size());
    for (size_t i = 0; i < pi.size(); ++i) out[static_cast<size_t>(pi[i])] = batch[i];
    return out;
}

std::vector<HomodyneOutcome> bob_measure(const std::vector<GaussianModState>& arrived,
                                         const std::vector<OscillatorRecord>& records, Rng& rng) {
    if (arrived.size() != records.size()) throw std::invalid_argument("bob_measure: size mismatch");
    std::vector<HomodyneOutcome> out(arrived.size());
    for (size_t i = 0; i < arrived.size(); ++i) {
        const Quadrature q = records[i].role == Role::probe ? Quadrature::p : Quadrature::x;
        out[i] = homodyne_sample(arrived[i], q, rng);
    }
    return out;
}

std::vector<int> bitcheck_indicators(const std::vector<HomodyneOutcome>& outcomes,
                                     const std::vector<OscillatorRecord>& records,
                                     double halfwidth) {
    if (outcomes.size() != records.size())
        throw std::invalid_argument("bitcheck_indicators: size mismatch");
    if (!(halfwidth > 0.0)) throw std::invalid_argument("bitcheck_indicators: halfwidth must be > 0");
    std::vector<int> ind;
    for (size_t i = 0; i < records.size(); ++i) {
        if (records[i].role != Role::bitcheck) continue;
        if (!records[i].disclosed)
            throw std::invalid_argument("bitcheck_indicators: center not disclosed");
        ind.push_back(std::abs(outcomes[i].value - *records[i].disclosed) > halfwidth ? 1 : 0);
    }
    return ind;
}

BitErrorEstimate estimate_bit_error(const std::vector<int>& indicators) {
    if (indicators.empty()) throw std::invalid_argument("estimate_bit_error: no samples");
    const double n = static_cast<double>(indicators.size());
    const double v = std::accumulate(indicators.begin(), indicators.end(), 0.0) / n;
    return BitErrorEstimate{v, 1.96 * std::sqrt(v * (1.0 - v) / n)};
}

Eigen::MatrixXd collect_F_statistics(const std::vector<HomodyneOutcome>& outcomes,
                                     const std::vector<OscillatorRecord>& records,
                                     const std::vector<double>& test_centers, double halfwidth,
                                     const ProbeSet& probes) {
    if (outcomes.size() != records.size())
        throw std::invalid_argument("collect_F_statistics: size mismatch");
    if (test_centers.empty()) throw std::invalid_argument("collect_F_statistics: no test centers");
    const int k_count = probes.probe_count();
    const auto nu = static_cast<Eigen::Index>(test_centers.size());
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(nu, k_count);
    std::vector<long long> counts(static_cast<size_t>(k_count), 0);
    for (size_t i = 0; i < records.size(); ++i) {
        if (records[i].role != Role::probe) continue;
        const int k = records[i].probe_index;
        if (k < 0 || k >= k_count) throw std::invalid_argument("collect_F_statistics: bad probe index");
        ++counts[static_cast<size_t>(k)];
        const double y = outcomes[i].value;
        for (Eigen::Index c = 0; c < nu; ++c)
            if (std::abs(y - test_centers[static_cast<size_t>(c)]) > halfwidth) sums(c, k) += 1.0;
    }
    for (int k = 0; k < k_count; ++k)
        if (counts[static_cast<size_t>(k)] != probes.copies_per_probe)
            throw std::runtime_error("collect_F_statistics: probe " + std::to_string(k) +
                                     " has an incomplete outcome set");
    return sums / static_cast<double>(probes.copies_per_probe);
}

bool check_source_indistinguishability(const GaussianEnsemble& a, const GaussianEnsemble& b) {
    const double tol = 1e-9;
    return std::abs(a.mean_x - b.mean_x) <= tol && std::abs(a.mean_p - b.mean_p) <= tol &&
           std::abs((a.mod_var_x + a.state_var_x) - (b.mod_var_x + b.state_var_x)) <= tol &&
           std::abs((a.mod_var_p + a.state_var_p) - (b.mod_var_p + b.state_var_p)) <= tol;
}

namespace {

// Distinct probe p-means plus one window pitch around the origin.
std::vector<double> default_test_centers(const ProbeSet& probes, double halfwidth_p) {
    std::vector<double> centers;
    for (const auto& a : probes.alphas) centers.push_back(std::sqrt(2.0) * a.imag());
    centers.push_back(halfwidth_p);
    centers.push_back(-halfwidth_p);
    std::sort(centers.begin(), centers.end());
    centers.erase(std::unique(centers.begin(), centers.end(),
                              [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                  centers.end());
    return centers;
}

void collect_numbers(const nlohmann::json& j, std::vector<double>& out) {
    if (j.is_number()) {
        out.push_back(j.get<double>());
    } else if (j.is_array() || j.is_object()) {
        for (const auto& e : j) collect_numbers(e, out);
    }
}

// A key-role x value showing up verbatim in any public message is a logic
// error in the orchestration, never something to report and continue from.
void assert_no_key_leak(const Transcript& tr, const std::vector<OscillatorRecord>& records) {
    std::unordered_set<double> key_values;
    for (const auto& r : records)
        if (r.role == Role::key) key_values.insert(r.alice_x);
    std::vector<double> numbers;
    for (const auto& m : tr.messages) collect_numbers(m.payload, numbers);
    for (double v : numbers)
        if (key_values.count(v) != 0)
            throw std::logic_error("transcript leaks a key-quadrature value");
}

std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

}  // namespace

nlohmann::json report_to_json(const SessionReport& r) {
    auto bits_to_string = [](const BitVec& v) {
        std::string s;
        s.reserve(v.size());
        for (auto b : v) s.push_back(b ? '1' : '0');
        return s;
    };
    nlohmann::json slices = nlohmann::json::array();
    for (const auto& s : r.slices)
        slices.push_back({{"e_b", s.e_b}, {"e_p", s.e_p}, {"rate", s.rate}, {"in_key", s.in_key}});
    return nlohmann::json{{"verdict", to_string(r.verdict)},
                          {"exit_code", verdict_exit_code(r.verdict)},
                          {"e_b", r.e_b},
                          {"e_b_halfwidth", r.e_b_halfwidth},
                          {"phi", r.phi},
                          {"phi_band", r.phi_band},
                          {"gate_rate", r.gate_rate},
                          {"conditioning_passed", r.conditioning_passed},
                          {"source_indistinguishable", r.source_indistinguishable},
                          {"slices", slices},
                          {"key_bits", r.alice_key.size()},
                          {"alice_key", bits_to_string(r.alice_key)},
                          {"bob_key", bits_to_string(r.bob_key)},
                          {"key_agreement", r.key_agreement},
                          {"diagnostic", r.diagnostic},
                          {"seed", r.seed},
                          {"config", r.config_echo}};
}

SessionReport run_session(const SessionConfig& cfg, Transcript* transcript_out) {
    cfg.validate();
    SessionReport rep;
    rep.seed = cfg.seed;
    to_json(rep.config_echo, cfg);
    Transcript local;
    if (transcript_out) *transcript_out = Transcript{};
    Transcript& tr = transcript_out ? *transcript_out : local;

    Rng rng(cfg.seed);
    Preparation prep = alice_prepare(cfg, rng);
    const int g = static_cast<int>(cfg.total_oscillators());

    const std::vector<int> pi = random_permutation(g, rng);
    tr.add("batch_sent", {{"oscillators", g}});

    std::vector<GaussianModState> line = permute(prep.states, pi);
    for (auto& s : line) s = propagate(s, cfg.channel, rng);
    const std::vector<GaussianModState> at_bob = unpermute(line, pi);
    line.clear();
    line.shrink_to_fit();

    // Bob confirms reception, then Alice announces the ordering and roles.
    const int k_count = prep.probes.probe_count();
    tr.add("roles", {{"n_key", cfg.n_key},
                     {"n_bitcheck", cfg.n_bitcheck},
                     {"probe_count", k_count},
                     {"probe_copies", cfg.probe_copies}});

    // Bit-check centers: Alice reveals the prepared x means.
    {
        nlohmann::json centers = nlohmann::json::array();
        for (int j = cfg.n_key; j < cfg.n_key + cfg.n_bitcheck; ++j) {
            prep.records[static_cast<size_t>(j)].disclosed = prep.records[static_cast<size_t>(j)].alice_x;
            centers.push_back(prep.records[static_cast<size_t>(j)].alice_x);
        }
        tr.add_disclosure("bit_check_centers", {{"values", std::move(centers)}}, cfg.n_bitcheck);
    }

    // Probe amplitudes, one complex value per probe.
    {
        nlohmann::json amps = nlohmann::json::array();
        for (const auto& a : prep.probes.alphas) amps.push_back({a.real(), a.imag()});
        tr.add_disclosure("probe_amplitudes", {{"alphas", std::move(amps)}}, k_count);
    }

    const double hw_x = cfg.spacing_x / 2.0;
    const double hw_p = cfg.spacing_p / 2.0;
    const std::vector<double> centers =
        cfg.test_centers.empty() ? default_test_centers(prep.probes, hw_p) : cfg.test_centers;
    tr.add_disclosure("test_centers", {{"values", centers}}, static_cast<long long>(centers.size()));

    const std::vector<HomodyneOutcome> outcomes = bob_measure(at_bob, prep.records, rng);

    const BitErrorEstimate eb = estimate_bit_error(bitcheck_indicators(outcomes, prep.records, hw_x));
    rep.e_b = eb.value;
    rep.e_b_halfwidth = eb.halfwidth;

    const Eigen::MatrixXd f_stats =
        collect_F_statistics(outcomes, prep.records, centers, hw_p, prep.probes);
    const GammaMatrix gamma = build_gamma(prep.probes);

    // Source check: the coherent modulation and the virtual squeezed ensemble
    // it stands in for must be moment-identical.
    const double var_p_t = vacuum_variance * std::pow(10.0, -cfg.target_squeezing_db / 10.0);
    const double var_x_t = 0.25 / var_p_t;
    {
        const GaussianEnsemble coherent{0.0, 0.0, cfg.v_mod * vacuum_variance,
                                        cfg.v_mod * vacuum_variance, vacuum_variance,
                                        vacuum_variance};
        const GaussianEnsemble squeezed{0.0,
                                        0.0,
                                        (cfg.v_mod + 1.0) * vacuum_variance - var_x_t,
                                        (cfg.v_mod + 1.0) * vacuum_variance - var_p_t,
                                        var_x_t,
                                        var_p_t};
        rep.source_indistinguishable = check_source_indistinguishability(coherent, squeezed);
    }

    rep.conditioning_passed = true;
    for (Eigen::Index c = 0; c < f_stats.rows(); ++c) {
        const Eigen::VectorXd row = f_stats.row(c).transpose();
        if (!conditioning_ok(gamma, gamma.max_probe_deficit, row, cfg.cond_ratio)) {
            rep.conditioning_passed = false;
            rep.verdict = Verdict::conditioning_abort;
            rep.diagnostic = "probe statistics too weak against the truncation band at test center " +
                             format_double(centers[static_cast<size_t>(c)]) +
                             " (condition number " + format_double(gamma.condition_number) +
                             ", deficit " + format_double(gamma.max_probe_deficit) +
                             ", required signal ratio " + format_double(cfg.cond_ratio) + ")";
            assert_no_key_leak(tr, prep.records);
            return rep;
        }
    }

    std::vector<double> phis;
    double band_sum = 0.0, var_sum = 0.0;
    for (Eigen::Index c = 0; c < f_stats.rows(); ++c) {
        const FockVector target =
            squeezed_fock(0.0, centers[static_cast<size_t>(c)], var_x_t, var_p_t, cfg.cutoff);
        const PhiWithStats pw = phi_from_statistics(f_stats.row(c).transpose(), gamma, target,
                                                    cfg.probe_copies);
        phis.push_back(std::clamp(pw.value, 0.0, 1.0));
        band_sum += pw.truncation_band;
        var_sum += pw.stat_sigma * pw.stat_sigma;
    }
    rep.phi = aggregate_phase_error(phis);
    rep.phi_band = band_sum / static_cast<double>(phis.size()) +
                   1.96 * std::sqrt(var_sum) / static_cast<double>(phis.size());

    rep.gate_rate = css_rate(rep.e_b, rep.phi);
    if (!(rep.gate_rate > 0.0)) {
        rep.verdict = Verdict::gate_abort;
        rep.diagnostic = "no positive key rate at e_b " + format_double(rep.e_b) + ", phase error " +
                         format_double(rep.phi);
        assert_no_key_leak(tr, prep.records);
        return rep;
    }

    // Reconciliation. Alice discloses the in-cell remainders for every key
    // oscillator, slice bits on a seeded verification subset, and per-block
    // syndromes on the rest; both sides then compress block-wise.
    const double sigma_a = std::sqrt(cfg.v_mod * vacuum_variance);
    const double gain = std::sqrt(cfg.channel.assumed_transmittance());
    const double noise_var = vacuum_variance + cfg.channel.assumed_excess(Quadrature::x);
    const double sigma_b = std::sqrt(gain * gain * sigma_a * sigma_a + noise_var);
    const SliceMap smap = build_equiprobable_slices(sigma_a, cfg.slices.m, cfg.slices.labeling);
    const int m = cfg.slices.m;

    std::vector<int> key_idx;
    for (int i = 0; i < g; ++i)
        if (prep.records[static_cast<size_t>(i)].role == Role::key) key_idx.push_back(i);
    const int n_key = static_cast<int>(key_idx.size());

    std::vector<double> remainders(static_cast<size_t>(n_key));
    std::vector<std::vector<int>> alice_bits(static_cast<size_t>(n_key));
    for (int j = 0; j < n_key; ++j) {
        const double xa = prep.records[static_cast<size_t>(key_idx[static_cast<size_t>(j)])].alice_x;
        remainders[static_cast<size_t>(j)] = slice_remainder(xa, smap);
        alice_bits[static_cast<size_t>(j)] = slice_bits(xa, smap);
    }
    tr.add_disclosure("slice_remainders", {{"values", remainders}}, n_key);

    // Seeded uniform verification subset.
    const int n_verify = static_cast<int>(std::floor(cfg.verify_fraction * n_key));
    std::vector<int> order = random_permutation(n_key, rng);
    std::vector<int> verify(order.begin(), order.begin() + n_verify);
    std::vector<int> remaining(order.begin() + n_verify, order.end());
    std::sort(verify.begin(), verify.end());
    std::sort(remaining.begin(), remaining.end());

    auto bob_decode = [&](int j, int slice_i, const std::vector<int>& lower) {
        const double xr = outcomes[static_cast<size_t>(key_idx[static_cast<size_t>(j)])].value;
        if (cfg.slices.rule == DecodeRule::nearest_boundary)
            return nearest_decode_slice(xr, slice_i, lower, smap, remainders[static_cast<size_t>(j)],
                                        sigma_b);
        return map_decode_slice(xr, slice_i, lower, smap, GaussianDist(0.0, noise_var), gain);
    };

    // Verification: Alice's bits are public there, so Bob measures his raw
    // per-slice error rate against them.
    std::vector<double> slice_eb(static_cast<size_t>(m), 0.0);
    {
        nlohmann::json vb = nlohmann::json::array();
        for (int j : verify) {
            const auto& bits = alice_bits[static_cast<size_t>(j)];
            vb.push_back({{"index", j}, {"bits", bits}});
        }
        tr.add_disclosure("verification_bits", {{"values", std::move(vb)}},
                          static_cast<long long>(n_verify) * m);
        for (int j : verify) {
            const auto& bits = alice_bits[static_cast<size_t>(j)];
            std::vector<int> lower;
            for (int i = 1; i <= m; ++i) {
                if (bob_decode(j, i, lower) != bits[static_cast<size_t>(i - 1)])
                    slice_eb[static_cast<size_t>(i - 1)] += 1.0;
                lower.push_back(bits[static_cast<size_t>(i - 1)]);
            }
        }
        if (n_verify > 0)
            for (double& e : slice_eb) e /= static_cast<double>(n_verify);
    }

    const NestedCodePair pair = code_pair_by_name(cfg.code);
    const int block = pair.h1.cols;
    const int n_rec = static_cast<int>(remaining.size());
    const int n_blocks = n_rec / block;

    std::vector<std::vector<int>> bob_lower(static_cast<size_t>(n_rec));
    BitVec alice_key, bob_key;
    rep.slices.assign(static_cast<size_t>(m), SliceOutcome{});
    for (int i = 1; i <= m; ++i) {
        BitVec alice_slice(static_cast<size_t>(n_rec)), bob_slice(static_cast<size_t>(n_rec));
        for (int j = 0; j < n_rec; ++j) {
            const int oj = remaining[static_cast<size_t>(j)];
            alice_slice[static_cast<size_t>(j)] =
                static_cast<std::uint8_t>(alice_bits[static_cast<size_t>(oj)][static_cast<size_t>(i - 1)]);
            bob_slice[static_cast<size_t>(j)] =
                static_cast<std::uint8_t>(bob_decode(oj, i, bob_lower[static_cast<size_t>(j)]));
        }

        SliceOutcome& sl = rep.slices[static_cast<size_t>(i - 1)];
        sl.e_b = slice_eb[static_cast<size_t>(i - 1)];
        sl.e_p = rep.phi;
        sl.rate = css_rate(sl.e_b, sl.e_p);
        sl.in_key = sl.rate > 0.0;

        nlohmann::json syndromes = nlohmann::json::array();
        for (int b = 0; b < n_blocks; ++b) {
            const auto base = static_cast<size_t>(b) * static_cast<size_t>(block);
            const BitVec a_block(alice_slice.begin() + static_cast<long>(base),
                                 alice_slice.begin() + static_cast<long>(base + block));
            const BitVec v_block(bob_slice.begin() + static_cast<long>(base),
                                 bob_slice.begin() + static_cast<long>(base + block));
            const BitVec xi = syndrome(pair.h1, a_block);
            syndromes.push_back(xi);
            const BitVec corrected = syndrome_decode(v_block, xi, pair.h1);
            std::copy(corrected.begin(), corrected.end(), bob_slice.begin() + static_cast<long>(base));
            if (sl.in_key) {
                const BitVec ka = privacy_amplify(pair.h2, a_block);
                const BitVec kb = privacy_amplify(pair.h2, corrected);
                alice_key.insert(alice_key.end(), ka.begin(), ka.end());
                bob_key.insert(bob_key.end(), kb.begin(), kb.end());
            }
        }
        tr.add_syndrome("slice_syndromes", {{"slice", i}, {"blocks", std::move(syndromes)}},
                        static_cast<long long>(n_blocks) * pair.h1.rows);

        // Corrected bits feed the next slice; the tail past the full blocks
        // keeps its raw decode and never enters the key.
        for (int j = 0; j < n_rec; ++j)
            bob_lower[static_cast<size_t>(j)].push_back(static_cast<int>(bob_slice[static_cast<size_t>(j)]));
    }

    rep.alice_key = std::move(alice_key);
    rep.bob_key = std::move(bob_key);
    rep.key_agreement = !rep.alice_key.empty() && rep.alice_key == rep.bob_key;
    rep.verdict = Verdict::key_ok;
    assert_no_key_leak(tr, prep.records);
    return rep;
}

}  // namespace cvqkd
