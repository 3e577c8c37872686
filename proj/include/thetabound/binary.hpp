#pragma once

// Closed forms for binary-input channels.
//
// The optimal degree-rho representation is the symmetric pair at half-angle
// alpha with cos(2 alpha) = exp(-Z/rho); the handle sits at angle beta with
// sin(2 beta) = (Q0 - Q1) sin(2 alpha). As rho grows, rho * theta(rho, Q)
// tends to 2 Q0 Q1 Z, which with Q = (1 - lambda, lambda) is the classical
// Elias distance 2 lambda (1 - lambda) Z at rate ln 2 - h(lambda).

#include <cmath>

#include "channel.hpp"
#include "error.hpp"

namespace thetabound::binary {

struct Geometry {
    double z;
    double rho;
    double alpha;
    double beta;
    double q0;
    double q1;
};

/// Bhattacharyya distance between the two inputs; +infinity when orthogonal.
inline double z_from_gram(double b01) {
    if (!(b01 >= 0.0 && b01 <= 1.0)) throw ValidationError("Gram entry must lie in [0,1]");
    return b01 == 0.0 ? kInf : -std::log(b01);
}

inline Geometry geometry(double z, double rho, const Composition& q) {
    if (!std::isfinite(z)) throw ValidationError("binary closed form needs a finite Bhattacharyya distance");
    if (!(z >= 0.0)) throw ValidationError("Bhattacharyya distance must be nonnegative");
    if (!(rho >= 1.0)) throw ValidationError("rho must be >= 1");
    if (q.size() != 2) throw ValidationError("binary closed form needs a binary composition");
    const double t = z / rho;
    // cos(2a) = e^-t, sin(2a) = sqrt(1 - e^-2t), kept accurate for tiny t
    const double two_alpha = std::atan2(std::sqrt(-std::expm1(-2.0 * t)), std::exp(-t));
    const double two_beta = std::asin((q[0] - q[1]) * std::sin(two_alpha));
    return {z, rho, 0.5 * two_alpha, 0.5 * two_beta, q[0], q[1]};
}

/// -2 Q0 ln cos(alpha - beta) - 2 Q1 ln cos(alpha + beta) at an arbitrary beta.
inline double objective_at(double alpha, double beta, double q0, double q1) {
    auto neg_log_cos_sq = [](double a) {
        const double s = std::sin(a);
        return -std::log1p(-s * s);
    };
    double v = 0.0;
    if (q0 > 0.0) v += q0 * neg_log_cos_sq(alpha - beta);
    if (q1 > 0.0) v += q1 * neg_log_cos_sq(alpha + beta);
    return v;
}

inline double theta(double z, double rho, const Composition& q) {
    const Geometry g = geometry(z, rho, q);
    return objective_at(g.alpha, g.beta, g.q0, g.q1);
}

inline double entropy(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0,1]");
    if (lambda == 0.0 || lambda == 1.0) return 0.0;
    return -lambda * std::log(lambda) - (1.0 - lambda) * std::log1p(-lambda);
}

struct EliasPoint {
    double rate_threshold;
    double distance_bound;
};

/// Classical Elias pair: rates above ln 2 - h(lambda) have distance at most 2 lambda (1 - lambda) Z.
inline EliasPoint elias_limit(double lambda, double z) {
    if (!(lambda >= 0.0 && lambda <= 0.5)) throw ValidationError("lambda must lie in [0, 1/2]");
    if (!std::isfinite(z)) throw ValidationError("Elias limit needs a finite Bhattacharyya distance");
    return {std::log(2.0) - entropy(lambda), 2.0 * lambda * (1.0 - lambda) * z};
}

/// Limit of rho * theta(rho, Q) as rho grows: 2 Q0 Q1 Z.
inline double rho_theta_limit(const Composition& q, double z) {
    if (q.size() != 2) throw ValidationError("binary closed form needs a binary composition");
    if (!std::isfinite(z)) throw ValidationError("limit needs a finite Bhattacharyya distance");
    return 2.0 * q[0] * q[1] * z;
}

/// Inverse of lambda -> ln 2 - h(lambda) on [0, 1/2]; rate must lie in [0, ln 2].
inline double lambda_for_rate(double rate) {
    if (!(rate >= 0.0 && rate <= std::log(2.0))) throw ValidationError("rate must lie in [0, ln 2]");
    double lo = 0.0, hi = 0.5;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (std::log(2.0) - entropy(mid) > rate ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace thetabound::binary
