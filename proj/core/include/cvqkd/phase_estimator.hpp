#pragma once
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvqkd/fock.hpp"
#include "cvqkd/rng.hpp"

namespace cvqkd {

/// K = (cutoff+1)^2 coherent probe amplitudes, each to be sent M times. The
/// amplitudes are small enough that every probe's truncated expansion keeps
/// all but eps_max of its mass.
struct ProbeSet {
    std::vector<std::complex<double>> alphas;
    int copies_per_probe = 1;
    int cutoff = 0;
    double eps_max = 0.0;
    double max_deficit = 0.0;  // achieved worst per-probe deficit

    int probe_count() const { return static_cast<int>(alphas.size()); }
};

struct ProbeDesignError : std::runtime_error {
    double best_condition;
    ProbeDesignError(const std::string& what, double best)
        : std::runtime_error(what), best_condition(best) {}
};

/// Places K amplitudes on a low-radius polar grid with random jitter, and
/// retries until the resulting coefficient matrix has condition number below
/// cond_max. Throws ProbeDesignError (carrying the best condition number
/// seen) after the retry budget.
ProbeSet design_probes(int cutoff, double eps_max, double cond_max, Rng& rng,
                       int copies_per_probe = 1);

/// K x (cutoff+1)^2 matrix with entries conj(c_k^l) * c_k^n; the column index
/// linearizes (l, n) row-major. Square, since K = (cutoff+1)^2.
struct GammaMatrix {
    Eigen::MatrixXcd entries;
    double condition_number = 0.0;
    int cutoff = 0;
    double max_probe_deficit = 0.0;
};

GammaMatrix build_gamma(const ProbeSet& p);

/// Reconstructed truncated effect: the (cutoff+1)^2 matrix elements solved
/// from one row of outcome frequencies. The reconstruction is not forced
/// Hermitian; the residual and the Hermitian-part spectrum are diagnostics.
struct EffectEstimate {
    Eigen::MatrixXcd matrix;
    double hermiticity_residual = 0.0;
    double spectrum_min = 0.0;
    double spectrum_max = 0.0;
};

EffectEstimate invert_for_effect(const Eigen::VectorXd& f_row, const GammaMatrix& g);

/// Worst-case contamination vs signal test: true iff
/// ||Gamma^-1|| * (eps + 2*sqrt(eps)) * sqrt(K) <= ||Gamma^-1 F|| / ratio_min.
/// A zero F row never passes.
bool conditioning_ok(const GammaMatrix& g, double eps, const Eigen::VectorXd& f_row,
                     double ratio_min = 10.0);

struct PhiEstimate {
    double value = 0.0;        // Re <target|E|target>, clamped to [0,1]
    double uncertainty = 0.0;  // eps + 2*sqrt(eps) from the target's deficit
};

PhiEstimate phi_estimate(const EffectEstimate& e, const FockVector& target);

struct PhiWithStats {
    double value = 0.0;
    double truncation_band = 0.0;  // eps + 2*sqrt(eps), eps = max(target, probes)
    double stat_sigma = 0.0;       // exact linear propagation of the F sampling noise
};

/// One-shot pipeline: invert the row, evaluate the target expectation, and
/// propagate the binomial noise of the F entries (copies samples each)
/// through the linear solve.
PhiWithStats phi_from_statistics(const Eigen::VectorXd& f_row, const GammaMatrix& g,
                                 const FockVector& target, int copies);

/// Arithmetic mean of the per-center estimates.
double aggregate_phase_error(const std::vector<double>& phis);

}  // namespace cvqkd
