#include "cvqkd/phase_estimator.hpp"

#include <cmath>
#include <limits>

namespace cvqkd {

namespace {

double coherent_deficit(double r_sq, int cutoff) {
    // 1 - exp(-r^2) * sum_{n<=cutoff} r^(2n)/n!
    double term = std::exp(-r_sq);
    double sum = term;
    for (int n = 1; n <= cutoff; ++n) {
        term *= r_sq / n;
        sum += term;
    }
    return sum < 1.0 ? 1.0 - sum : 0.0;
}

// Largest |alpha| whose truncated expansion stays within the deficit budget.
double radius_for_deficit(double eps, int cutoff) {
    double lo = 0.0, hi = 10.0;
    while (coherent_deficit(hi * hi, cutoff) < eps) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (coherent_deficit(mid * mid, cutoff) < eps ? lo : hi) = mid;
    }
    return lo;
}

double condition_of(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

ProbeSet design_probes(int cutoff, double eps_max, double cond_max, Rng& rng,
                       int copies_per_probe) {
    if (cutoff < 0) throw std::invalid_argument("design_probes: cutoff must be >= 0");
    if (!(eps_max > 0.0 && eps_max < 0.1))
        throw std::invalid_argument("design_probes: eps_max outside (0, 0.1)");
    if (copies_per_probe < 1) throw std::invalid_argument("design_probes: copies_per_probe must be >= 1");

    const int d = cutoff + 1;
    const double r_max = radius_for_deficit(eps_max * 0.98, cutoff);
    double best_cond = std::numeric_limits<double>::infinity();
    ProbeSet best;

    for (int round = 0; round < 60; ++round) {
        ProbeSet p;
        p.cutoff = cutoff;
        p.eps_max = eps_max;
        p.copies_per_probe = copies_per_probe;
        for (int i = 0; i < d; ++i) {
            // radii spread toward r_max; phases staggered per ring with jitter
            const double r = r_max * std::sqrt((i + 1.0) / d);
            for (int l = 0; l < d; ++l) {
                const double jitter = 0.2 * (uniform_unit(rng) - 0.5) * 2.0 * M_PI / d;
                const double theta = 2.0 * M_PI * l / d + M_PI * (i + 0.5) / (d * d) + jitter;
                p.alphas.push_back(std::polar(r, theta));
            }
        }
        for (const auto& a : p.alphas)
            p.max_deficit = std::max(p.max_deficit, coherent_deficit(std::norm(a), cutoff));
        if (p.max_deficit >= eps_max) continue;
        const double cond = condition_of(build_gamma(p).entries);
        if (cond < best_cond) {
            best_cond = cond;
            best = p;
        }
        if (cond < cond_max) return p;
    }
    throw ProbeDesignError("design_probes: condition target not reached (best " +
                               std::to_string(best_cond) + ")",
                           best_cond);
}

GammaMatrix build_gamma(const ProbeSet& p) {
    const int d = p.cutoff + 1;
    const int k_count = p.probe_count();
    if (k_count != d * d) throw std::invalid_argument("build_gamma: probe count must be (cutoff+1)^2");
    GammaMatrix g;
    g.cutoff = p.cutoff;
    g.entries.resize(k_count, d * d);
    for (int k = 0; k < k_count; ++k) {
        const FockVector ck = coherent_fock(p.alphas[static_cast<size_t>(k)], p.cutoff);
        g.max_probe_deficit = std::max(g.max_probe_deficit, ck.deficit);
        for (int l = 0; l < d; ++l)
            for (int n = 0; n < d; ++n)
                g.entries(k, l * d + n) = std::conj(ck.amps[static_cast<size_t>(l)]) *
                                          ck.amps[static_cast<size_t>(n)];
    }
    g.condition_number = condition_of(g.entries);
    return g;
}

EffectEstimate invert_for_effect(const Eigen::VectorXd& f_row, const GammaMatrix& g) {
    const int k_count = static_cast<int>(g.entries.rows());
    if (f_row.size() != k_count) throw std::invalid_argument("invert_for_effect: F row size mismatch");
    for (int i = 0; i < k_count; ++i)
        if (!(f_row(i) >= 0.0 && f_row(i) <= 1.0))
            throw std::invalid_argument("invert_for_effect: F entries must lie in [0,1]");

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(g.entries);
    if (!lu.isInvertible()) throw std::runtime_error("invert_for_effect: coefficient matrix is singular");
    const Eigen::VectorXcd x = lu.solve(f_row.cast<std::complex<double>>());

    const int d = g.cutoff + 1;
    EffectEstimate e;
    e.matrix.resize(d, d);
    for (int l = 0; l < d; ++l)
        for (int n = 0; n < d; ++n) e.matrix(l, n) = x(l * d + n);
    e.hermiticity_residual = (e.matrix - e.matrix.adjoint()).norm();
    const Eigen::MatrixXcd herm = 0.5 * (e.matrix + e.matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(herm);
    e.spectrum_min = eig.eigenvalues().minCoeff();
    e.spectrum_max = eig.eigenvalues().maxCoeff();
    return e;
}

bool conditioning_ok(const GammaMatrix& g, double eps, const Eigen::VectorXd& f_row,
                     double ratio_min) {
    if (eps < 0.0) throw std::invalid_argument("conditioning_ok: eps must be >= 0");
    if (f_row.size() != g.entries.rows())
        throw std::invalid_argument("conditioning_ok: F row size mismatch");
    if (f_row.norm() == 0.0) return false;

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 0.0)) return false;
    const double inv_norm = 1.0 / smin;
    const double signal = svd.solve(f_row.cast<std::complex<double>>()).norm();
    const double k_count = static_cast<double>(g.entries.rows());
    const double bound = inv_norm * (eps + 2.0 * std::sqrt(eps)) * std::sqrt(k_count);
    return bound <= signal / ratio_min;
}

PhiEstimate phi_estimate(const EffectEstimate& e, const FockVector& target) {
    const int d = static_cast<int>(e.matrix.rows());
    if (target.cutoff != d - 1)
        throw std::invalid_argument("phi_estimate: target cutoff does not match the effect dimension");
    Eigen::VectorXcd psi(d);
    for (int n = 0; n < d; ++n) psi(n) = target.amps[static_cast<size_t>(n)];
    const double raw = std::real(std::complex<double>(psi.adjoint() * e.matrix * psi));
    const double eps = std::max(target.deficit, 0.0);
    return PhiEstimate{std::min(std::max(raw, 0.0), 1.0), eps + 2.0 * std::sqrt(eps)};
}

PhiWithStats phi_from_statistics(const Eigen::VectorXd& f_row, const GammaMatrix& g,
                                 const FockVector& target, int copies) {
    if (copies < 1) throw std::invalid_argument("phi_from_statistics: copies must be >= 1");
    const EffectEstimate e = invert_for_effect(f_row, g);
    const PhiEstimate base = phi_estimate(e, target);

    // phi = Re(w . F) with w = t^T Gamma^-1 and t the target coefficient
    // pattern, so the binomial noise of each F entry propagates linearly.
    const int d = g.cutoff + 1;
    Eigen::VectorXcd t(d * d);
    for (int l = 0; l < d; ++l)
        for (int n = 0; n < d; ++n)
            t(l * d + n) = std::conj(target.amps[static_cast<size_t>(l)]) *
                           target.amps[static_cast<size_t>(n)];
    const Eigen::MatrixXcd gamma_t = g.entries.transpose();
    const Eigen::VectorXcd w = Eigen::FullPivLU<Eigen::MatrixXcd>(gamma_t).solve(t);

    double var = 0.0;
    for (int k = 0; k < f_row.size(); ++k) {
        const double f = f_row(k);
        var += std::pow(std::real(w(k)), 2) * f * (1.0 - f) / copies;
    }

    const double eps = std::max({target.deficit, g.max_probe_deficit, 0.0});
    return PhiWithStats{base.value, eps + 2.0 * std::sqrt(eps), std::sqrt(var)};
}

double aggregate_phase_error(const std::vector<double>& phis) {
    if (phis.empty()) throw std::invalid_argument("aggregate_phase_error: empty list");
    double sum = 0.0;
    for (double p : phis) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("aggregate_phase_error: estimate outside [0,1]");
        sum += p;
    }
    return sum / static_cast<double>(phis.size());
}

}  // namespace cvqkd
