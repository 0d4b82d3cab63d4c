#pragma once

#include <cmath>
#include <span>
#include <string>

#include "tsoft/errors.hpp"
#include "tsoft/text.hpp"

namespace tsoft {

// Batch maximum-likelihood location of a one-dimensional student-t
// distribution with fixed scale and degrees of freedom, by fixed-point
// iteration on the reweighted mean:
//
//   mu <- sum_n w_n x_n / sum_n w_n,   w_n = (nu + 1) / (nu + (x_n - mu)^2 / sigma^2)
//
// Deliberately independent of the streaming update rule; serves as its
// reference estimator in tests.
inline double student_t_location_mle(std::span<const double> samples, double nu,
                                     double sigma, double mu_init, double tol,
                                     int max_iters) {
    if (samples.empty()) throw ParameterError("student_t_location_mle: no samples");
    if (!(nu > 0.0) || std::isinf(nu))
        throw ParameterError("student_t_location_mle: nu must be positive and finite");
    if (!(sigma > 0.0)) throw ParameterError("student_t_location_mle: sigma must be > 0");
    if (!(tol > 0.0)) throw ParameterError("student_t_location_mle: tol must be > 0");
    if (max_iters < 1) throw ParameterError("student_t_location_mle: max_iters must be >= 1");

    const double sigma_sq = sigma * sigma;
    double mu = mu_init;
    for (int it = 0; it < max_iters; ++it) {
        double weight_sum = 0.0;
        double weighted_x_sum = 0.0;
        for (const double x : samples) {
            const double d = x - mu;
            const double w = (nu + 1.0) / (nu + d * d / sigma_sq);
            weight_sum += w;
            weighted_x_sum += w * x;
        }
        const double next = weighted_x_sum / weight_sum;
        if (std::abs(next - mu) < tol) return next;
        mu = next;
    }
    throw ConvergenceError("student_t_location_mle: no convergence within " +
                               std::to_string(max_iters) + " iterations (last " +
                               format_double(mu) + ")",
                           mu);
}

} // namespace tsoft
