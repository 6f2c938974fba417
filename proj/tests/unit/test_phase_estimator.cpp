#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "cvqkd/phase_estimator.hpp"

using namespace cvqkd;

namespace {

// Random Hermitian matrix with spectrum inside [0, 1].
Eigen::MatrixXcd random_effect(int dim, Rng& rng) {
    Eigen::MatrixXcd a(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c)
            a(r, c) = std::complex<double>(uniform_unit(rng) - 0.5, uniform_unit(rng) - 0.5);
    Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    return (h - lo * Eigen::MatrixXcd::Identity(dim, dim)) / (hi - lo);
}

// Exact outcome means for an effect: F_k = <psi_k| E |psi_k> on the
// truncated (sub-normalized) probe expansions.
Eigen::VectorXd exact_f(const ProbeSet& probes, const Eigen::MatrixXcd& e) {
    const int dim = probes.cutoff + 1;
    Eigen::VectorXd f(probes.probe_count());
    for (int k = 0; k < probes.probe_count(); ++k) {
        auto amps = coherent_fock(probes.alphas[static_cast<size_t>(k)], probes.cutoff).amps;
        Eigen::VectorXcd psi(dim);
        for (int n = 0; n < dim; ++n) psi(n) = amps[static_cast<size_t>(n)];
        f(k) = (psi.adjoint() * e * psi)(0, 0).real();
    }
    return f;
}

double target_expectation(const FockVector& t, const Eigen::MatrixXcd& e) {
    const auto dim = static_cast<int>(t.amps.size());
    Eigen::VectorXcd psi(dim);
    for (int n = 0; n < dim; ++n) psi(n) = t.amps[static_cast<size_t>(n)];
    return (psi.adjoint() * e * psi)(0, 0).real();
}

FockVector test_target(int cutoff) {
    const double var_p = 0.5 * std::pow(10.0, -0.6);  // 6 dB below vacuum
    return squeezed_fock(0.0, 0.3, 0.25 / var_p, var_p, cutoff);
}

}  // namespace

TEST_CASE("probe design delivers a well-conditioned square system") {
    Rng rng(5);
    for (int cutoff : {0, 1, 2, 3}) {
        // larger truncated spaces need a looser conditioning target: random
        // coherent designs on 16 basis operators rarely fall under ~500
        const double cond_limit = cutoff >= 3 ? 2000.0 : 150.0;
        auto p = design_probes(cutoff, 0.05, cond_limit, rng);
        CHECK(p.probe_count() == (cutoff + 1) * (cutoff + 1));
        CHECK(p.cutoff == cutoff);
        CHECK(p.max_deficit <= 0.05);
        CHECK(p.max_deficit >= 0.0);
        auto g = build_gamma(p);
        CHECK(g.condition_number <= cond_limit);
        CHECK(g.condition_number >= 1.0);
        CHECK(g.entries.rows() == p.probe_count());
        CHECK(g.entries.cols() == p.probe_count());
    }
    CHECK_THROWS_AS(design_probes(-1, 0.05, 100.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(design_probes(1, 0.5, 100.0, rng), std::invalid_argument);
}

TEST_CASE("unreachable condition target reports the best attempt") {
    Rng rng(7);
    try {
        design_probes(2, 0.05, 1.01, rng);
        FAIL("expected ProbeDesignError");
    } catch (const ProbeDesignError& e) {
        CHECK(e.best_condition > 1.01);
        CHECK(std::string(e.what()).find("condition") != std::string::npos);
    }
}

TEST_CASE("coefficient matrix rows are conjugate products of probe amplitudes") {
    Rng rng(13);
    auto p = design_probes(1, 0.05, 150.0, rng);
    auto g = build_gamma(p);
    const int dim = 2;
    for (int k = 0; k < p.probe_count(); ++k) {
        auto amps = coherent_fock(p.alphas[static_cast<size_t>(k)], 1).amps;
        for (int l = 0; l < dim; ++l) {
            for (int n = 0; n < dim; ++n) {
                auto expect = std::conj(amps[static_cast<size_t>(l)]) * amps[static_cast<size_t>(n)];
                CHECK(std::abs(g.entries(k, l * dim + n) - expect) < 1e-14);
            }
        }
    }
    CHECK(g.max_probe_deficit == doctest::Approx(p.max_deficit).epsilon(1e-15));
}

TEST_CASE("noiseless statistics invert back to the effect") {
    Rng rng(21);
    for (int cutoff : {1, 2, 3}) {
        auto p = design_probes(cutoff, 0.05, cutoff >= 3 ? 2000.0 : 150.0, rng);
        auto g = build_gamma(p);
        const int dim = cutoff + 1;
        for (int trial = 0; trial < 15; ++trial) {
            auto e = random_effect(dim, rng);
            auto f = exact_f(p, e);
            auto rec = invert_for_effect(f, g);
            CHECK((rec.matrix - e).norm() < 1e-8 * std::max(1.0, e.norm()));
            CHECK(rec.hermiticity_residual < 1e-9);
            CHECK(rec.spectrum_min > -1e-8);
            CHECK(rec.spectrum_max < 1.0 + 1e-8);

            auto t = test_target(cutoff);
            auto phi = phi_estimate(rec, t);
            CHECK(phi.value == doctest::Approx(std::clamp(target_expectation(t, e), 0.0, 1.0))
                                   .epsilon(1e-8));
        }
    }
}

TEST_CASE("input validation on the inversion") {
    Rng rng(3);
    auto p = design_probes(1, 0.05, 150.0, rng);
    auto g = build_gamma(p);
    CHECK_THROWS_AS(invert_for_effect(Eigen::VectorXd::Zero(3), g), std::invalid_argument);
    Eigen::VectorXd bad = Eigen::VectorXd::Constant(4, 1.5);
    CHECK_THROWS_AS(invert_for_effect(bad, g), std::invalid_argument);
}

TEST_CASE("statistical sigma scales as one over root copies") {
    Rng rng(31);
    auto p = design_probes(2, 0.05, 150.0, rng);
    auto g = build_gamma(p);
    auto e = random_effect(3, rng);
    auto f = exact_f(p, e);
    auto t = test_target(2);
    auto small = phi_from_statistics(f, g, t, 1000);
    auto large = phi_from_statistics(f, g, t, 100000);
    CHECK(small.value == doctest::Approx(large.value).epsilon(1e-14));
    CHECK(small.stat_sigma / large.stat_sigma == doctest::Approx(10.0).epsilon(1e-12));
    // the truncation band comes from the worse of target and probe deficits
    const double eps = std::max(t.deficit, p.max_deficit);
    CHECK(small.truncation_band ==
          doctest::Approx(eps + 2.0 * std::sqrt(eps)).epsilon(1e-12));
    CHECK_THROWS_AS(phi_from_statistics(f, g, t, 0), std::invalid_argument);
}

TEST_CASE("sampled statistics converge to the noiseless value") {
    Rng rng(41);
    auto p = design_probes(2, 0.05, 150.0, rng);
    auto g = build_gamma(p);
    auto e = random_effect(3, rng);
    auto f = exact_f(p, e);
    auto t = test_target(2);
    const double truth = phi_from_statistics(f, g, t, 1).value;

    auto sample_f = [&](int copies, Rng& r) {
        Eigen::VectorXd fh(f.size());
        for (Eigen::Index k = 0; k < f.size(); ++k) {
            int hits = 0;
            for (int i = 0; i < copies; ++i)
                if (uniform_unit(r) < f(k)) ++hits;
            fh(k) = static_cast<double>(hits) / copies;
        }
        return fh;
    };

    int improved = 0, within_band = 0;
    for (int seed = 1; seed <= 10; ++seed) {
        Rng r(static_cast<std::uint64_t>(seed) * 7919u);
        auto coarse = phi_from_statistics(sample_f(400, r), g, t, 400);
        auto fine = phi_from_statistics(sample_f(40000, r), g, t, 40000);
        if (std::abs(fine.value - truth) <= std::abs(coarse.value - truth)) ++improved;
        if (std::abs(fine.value - truth) <= 6.0 * fine.stat_sigma) ++within_band;
    }
    CHECK(improved >= 7);
    CHECK(within_band == 10);
}

TEST_CASE("conditioning gate compares worst-case contamination to the signal") {
    Rng rng(51);
    auto p = design_probes(2, 0.02, 150.0, rng);
    auto g = build_gamma(p);
    auto e = random_effect(3, rng);
    auto f = exact_f(p, e);

    CHECK(conditioning_ok(g, 1e-12, f, 1e-6));
    CHECK_FALSE(conditioning_ok(g, 0.02, Eigen::VectorXd::Zero(9), 1e-6));
    CHECK_FALSE(conditioning_ok(g, 0.02, f, 1e12));
    CHECK_THROWS_AS(conditioning_ok(g, -0.1, f, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(conditioning_ok(g, 0.02, Eigen::VectorXd::Zero(4), 10.0),
                    std::invalid_argument);
}

TEST_CASE("aggregation is the arithmetic mean") {
    CHECK(aggregate_phase_error({0.1, 0.2, 0.6}) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(aggregate_phase_error({0.42}) == doctest::Approx(0.42).epsilon(1e-15));
    CHECK_THROWS_AS(aggregate_phase_error({}), std::invalid_argument);
    CHECK_THROWS_AS(aggregate_phase_error({0.2, 1.4}), std::domain_error);
}
