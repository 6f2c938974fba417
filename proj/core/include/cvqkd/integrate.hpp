#pragma once
#include <functional>

namespace cvqkd {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
    int evaluations = 0;
    bool converged = false;
};

/// Adaptive Gauss-Kronrod (7-15) integration of f over [a, b]. Subdivides the
/// interval with the largest error estimate until both tolerances are met or
/// the evaluation budget runs out. `converged` reports whether the tolerance
/// was reached; the partial result is returned either way.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-12, double rel_tol = 1e-10,
                           int max_evaluations = 200000);

}  // namespace cvqkd
