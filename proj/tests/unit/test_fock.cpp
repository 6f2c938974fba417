#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "cvqkd/fock.hpp"

using namespace cvqkd;
using cplx = std::complex<double>;

namespace {

struct Moments {
    double mean_x, mean_p, var_x, var_p, norm;
};

// Reconstruct quadrature moments from number-basis amplitudes with the
// ladder-operator identities; an oracle independent of the builders.
Moments moments_of(const FockVector& v) {
    const auto& c = v.amps;
    const size_t d = c.size();
    cplx a{0, 0}, a2{0, 0};
    double n_mean = 0.0, norm = 0.0;
    for (size_t n = 0; n < d; ++n) {
        norm += std::norm(c[n]);
        n_mean += static_cast<double>(n) * std::norm(c[n]);
        if (n + 1 < d) a += std::conj(c[n]) * c[n + 1] * std::sqrt(n + 1.0);
        if (n + 2 < d) a2 += std::conj(c[n]) * c[n + 2] * std::sqrt((n + 1.0) * (n + 2.0));
    }
    Moments m{};
    m.norm = norm;
    m.mean_x = std::sqrt(2.0) * a.real();
    m.mean_p = std::sqrt(2.0) * a.imag();
    const double x2 = a2.real() + n_mean + 0.5;
    const double p2 = -a2.real() + n_mean + 0.5;
    m.var_x = x2 - m.mean_x * m.mean_x;
    m.var_p = p2 - m.mean_p * m.mean_p;
    return m;
}

}  // namespace

TEST_CASE("coherent amplitudes follow the Poisson recursion") {
    const cplx alpha{0.8, 0.3};
    auto v = coherent_fock(alpha, 50);
    REQUIRE(v.amps.size() == 51);
    CHECK(std::abs(v.amps[0] - std::exp(-0.5 * std::norm(alpha))) < 1e-14);
    for (int n = 1; n <= 20; ++n) {
        cplx ratio = v.amps[n] / v.amps[n - 1];
        CHECK(std::abs(ratio - alpha / std::sqrt(static_cast<double>(n))) < 1e-12);
    }
    CHECK(v.deficit < 1e-12);
    CHECK_FALSE(v.truncation_warning);

    auto m = moments_of(v);
    CHECK(m.mean_x == doctest::Approx(std::sqrt(2.0) * 0.8).epsilon(1e-10));
    CHECK(m.mean_p == doctest::Approx(std::sqrt(2.0) * 0.3).epsilon(1e-10));
    CHECK(m.var_x == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(m.var_p == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("coherent truncation deficit equals the Poisson tail") {
    auto v = coherent_fock(cplx{2.0, 0.0}, 5);
    CHECK(v.deficit == doctest::Approx(0.21486961296959484).epsilon(1e-12));
    CHECK_FALSE(v.truncation_warning);  // below the half-mass warning line
    auto w = coherent_fock(cplx{3.0, 0.0}, 1);
    CHECK(w.truncation_warning);
    CHECK(w.deficit > 0.99);
}

TEST_CASE("coherent domain limits") {
    CHECK_THROWS_AS(coherent_fock(cplx{10.1, 0.0}, 10), std::domain_error);
    CHECK_THROWS_AS(coherent_fock(cplx{1.0, 0.0}, -1), std::domain_error);
    CHECK_THROWS_AS(coherent_fock(cplx{1.0, 0.0}, 201), std::domain_error);
}

TEST_CASE("squeezed builder with vacuum variances reduces to a coherent state") {
    const double x0 = std::sqrt(2.0) * 0.8, p0 = std::sqrt(2.0) * 0.3;
    auto s = squeezed_fock(x0, p0, 0.5, 0.5, 40);
    auto c = coherent_fock(cplx{0.8, 0.3}, 40);
    for (int n = 0; n <= 40; ++n) {
        CHECK(std::abs(s.amps[n]) == doctest::Approx(std::abs(c.amps[n])).epsilon(1e-9));
    }
    CHECK(s.deficit < 1e-10);
}

TEST_CASE("squeezed vacuum has only even amplitudes with the tanh ladder") {
    // var_p = 0.2 vacuum-halved units, var_x = 0.25/0.2: e^{-2r} = 0.4, tanh r = 3/7
    auto v = squeezed_fock(0.0, 0.0, 1.25, 0.2, 40);
    CHECK(std::abs(v.amps[1]) < 1e-14);
    CHECK(std::abs(v.amps[3]) < 1e-14);
    CHECK(std::abs(v.amps[2] / v.amps[0]) == doctest::Approx(0.30304576336566325).epsilon(1e-10));
    CHECK(std::abs(v.amps[4] / v.amps[0]) == doctest::Approx(0.11247656982167656).epsilon(1e-10));
    CHECK(v.deficit < 1e-10);
}

TEST_CASE("displaced squeezed moments reconstruct the requested gaussian") {
    auto v = squeezed_fock(0.3, -0.4, 1.0, 0.25, 60);
    CHECK(v.deficit < 1e-8);
    auto m = moments_of(v);
    CHECK(m.norm == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(m.mean_x == doctest::Approx(0.3).epsilon(1e-7));
    CHECK(m.mean_p == doctest::Approx(-0.4).epsilon(1e-7));
    CHECK(m.var_x == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.var_p == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("squeezed builder rejects non-minimum-uncertainty requests") {
    CHECK_THROWS_AS(squeezed_fock(0.0, 0.0, 1.0, 0.5, 10), std::domain_error);
    CHECK_THROWS_AS(squeezed_fock(0.0, 0.0, -0.5, -0.5, 10), std::domain_error);
    CHECK_THROWS_AS(squeezed_fock(0.0, 0.0, 0.5, 0.5, 201), std::domain_error);
}
