#pragma once

// Rate-distance bounds for constant-composition codes.
//
// For a stationary conditional type V (PV = P) and any rho >= 1, rates above
// I(P,V) + theta(rho,P,V) have normalized Bhattacharyya distance at most
// rho * theta(rho,P,V). V(x'|x) = P(x') gives the composition-only bound with
// threshold theta(rho,P).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "error.hpp"
#include "theta.hpp"

namespace thetabound {

/// Lower bound on the largest pairwise Bhattacharyya coefficient of any M-word
/// code of length n: ((M e^{-n theta} - 1) / (M - 1))^rho, or 0 when vacuous.
inline double finite_plotkin_rhs(long long m, long long n, double theta_value, double rho) {
    if (m < 2) throw ValidationError("need at least 2 codewords");
    if (n < 1) throw ValidationError("block length must be positive");
    if (!(theta_value >= 0.0)) throw ValidationError("theta value must be nonnegative");
    if (!(rho >= 1.0)) throw ValidationError("rho must be >= 1");
    const double md = static_cast<double>(m);
    const double lead = md * std::exp(-static_cast<double>(n) * theta_value);
    if (lead <= 1.0) return 0.0;
    return std::pow((lead - 1.0) / (md - 1.0), rho);
}

struct BoundPoint {
    double rho;
    Composition p;
    ConditionalType v;
    double theta_pv;
    double mutual_info;
    double rate_threshold;
    double distance_bound;
    /// P is a point mass: rate 0 and a vacuous bound.
    bool degenerate;
    std::vector<std::optional<ThetaCertificate>> certificates;
};

inline constexpr double kStationaryTol = 1e-9;

inline BoundPoint make_bound_point(double rho, const Composition& p, const ConditionalType& v, ThetaPVResult pv) {
    const double info = mutual_information(p, v);
    return BoundPoint{rho,
                      p,
                      v,
                      pv.value,
                      info,
                      info + pv.value,
                      rho * pv.value,
                      p.is_point_mass(),
                      std::move(pv.per_input)};
}

inline BoundPoint bound_point(const GramMatrix& b, double rho, const Composition& p, const ConditionalType& v,
                              const ThetaOptions& opt = {}) {
    const double stat = stationarity_residual(p, v);
    if (stat > kStationaryTol)
        throw ValidationError("conditional type is not stationary (max |PV - P| = " + std::to_string(stat) + ")");
    return make_bound_point(rho, p, v, theta_PV(b, rho, p, v, opt));
}

inline BoundPoint bound_point(const Channel& channel, double rho, const Composition& p, const ConditionalType& v,
                              const ThetaOptions& opt = {}) {
    return bound_point(gram(channel), rho, p, v, opt);
}

/// Composition-only bound: threshold theta(rho,P), distance rho theta(rho,P).
inline BoundPoint bound_point_marton(const GramMatrix& b, double rho, const Composition& p,
                                     const ThetaOptions& opt = {}) {
    ThetaCertificate cert = optimize_theta_weighted(b, rho, p, opt);
    const double value = cert.value;
    std::vector<std::optional<ThetaCertificate>> per(p.size());
    for (std::size_t x = 0; x < p.size(); ++x)
        if (p[x] > 0.0) per[x] = cert;
    return BoundPoint{rho,   p, ConditionalType::independent(p), value, 0.0, 0.0 + value, rho * value,
                      p.is_point_mass(), std::move(per)};
}

inline BoundPoint bound_point_marton(const Channel& channel, double rho, const Composition& p,
                                     const ThetaOptions& opt = {}) {
    return bound_point_marton(gram(channel), rho, p, opt);
}

struct SearchOptions {
    ThetaOptions theta = [] {
        ThetaOptions t;
        t.restarts = 2;
        return t;
    }();
    int line_points = 11;
    int max_sweeps = 6;
    int max_evaluations = 600;
    double initial_step = 0.1;
    double min_step = 1e-7;
};

namespace detail {

/// Conditional type of a joint distribution J with both marginals P.
inline ConditionalType conditional_from_joint(const MatrixXd& joint, const Composition& p) {
    const Eigen::Index n = joint.rows();
    MatrixXd v(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        if (p.vector()[x] == 0.0) {
            v.row(x) = p.vector().transpose();
            continue;
        }
        v.row(x) = joint.row(x).cwiseMax(0.0) / joint.row(x).cwiseMax(0.0).sum();
    }
    return ConditionalType(std::move(v));
}

/// Directions e_ab - e_ab' - e_a'b + e_a'b' that keep both marginals of J fixed.
struct CycleMove {
    Eigen::Index a, a2, b, b2;
};

inline std::vector<CycleMove> cycle_moves(const Composition& p) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index x = 0; x < p.vector().size(); ++x)
        if (p.vector()[x] > 0.0) support.push_back(x);
    std::vector<CycleMove> moves;
    for (std::size_t i = 0; i < support.size(); ++i)
        for (std::size_t i2 = i + 1; i2 < support.size(); ++i2)
            for (std::size_t j = 0; j < support.size(); ++j)
                for (std::size_t j2 = j + 1; j2 < support.size(); ++j2)
                    moves.push_back({support[i], support[i2], support[j], support[j2]});
    return moves;
}

}  // namespace detail

/// Minimizes distance_bound over stationary V subject to rate_threshold < R.
///
/// V is parameterized by the joint J(x,x') = P(x) V(x'|x) on the transportation
/// polytope, so PV = P holds by construction. A line search over the mixtures
/// (1-s) P P^T + s diag(P) (V from P-rows to the identity) is followed by
/// pattern search along the 2x2 cycle directions. Not guaranteed optimal.
inline std::optional<BoundPoint> search_V(const GramMatrix& b, double rho, const Composition& p, double rate,
                                          const SearchOptions& opt = {}) {
    if (!(rate > 0.0)) throw ValidationError("rate must be positive");
    if (p.size() != b.size()) throw ValidationError("composition and channel sizes differ");
    const MatrixXd outer = p.vector() * p.vector().transpose();
    const MatrixXd diag = p.vector().asDiagonal();

    int evaluations = 0;
    std::optional<BoundPoint> best;
    MatrixXd best_joint;
    auto evaluate_joint = [&](const MatrixXd& joint) -> bool {
        if (evaluations >= opt.max_evaluations) return false;
        ++evaluations;
        const ConditionalType v = detail::conditional_from_joint(joint, p);
        ThetaOptions topt = opt.theta;
        BoundPoint bp = make_bound_point(rho, p, v, theta_PV(b, rho, p, v, topt));
        if (!(bp.rate_threshold < rate)) return false;
        if (best && !(bp.distance_bound < best->distance_bound)) return false;
        best = std::move(bp);
        best_joint = joint;
        return true;
    };

    // mixture line, coarse then refined in s
    double best_s = -1.0;
    for (int k = 0; k < opt.line_points; ++k) {
        const double s = opt.line_points == 1 ? 0.0 : static_cast<double>(k) / (opt.line_points - 1);
        if (evaluate_joint((1.0 - s) * outer + s * diag)) best_s = s;
    }
    if (best_s >= 0.0) {
        double step = opt.line_points > 1 ? 1.0 / (opt.line_points - 1) : 0.5;
        while (step > opt.min_step && evaluations < opt.max_evaluations) {
            bool moved = false;
            for (double dir : {-1.0, 1.0}) {
                const double s = best_s + dir * step;
                if (s < 0.0 || s > 1.0) continue;
                if (evaluate_joint((1.0 - s) * outer + s * diag)) {
                    best_s = s;
                    moved = true;
                    break;
                }
            }
            if (!moved) step *= 0.5;
        }
    }
    if (!best) return std::nullopt;

    const auto moves = detail::cycle_moves(p);
    if (moves.size() <= 1) return best;  // the mixture line already spans the polytope
    double step = opt.initial_step;
    for (int sweep = 0; sweep < opt.max_sweeps && step > opt.min_step && evaluations < opt.max_evaluations;) {
        bool improved = false;
        for (const auto& mv : moves) {
            for (double dir : {1.0, -1.0}) {
                MatrixXd joint = best_joint;
                // largest admissible move in this direction, capped at step
                const double room = dir > 0.0 ? std::min(joint(mv.a, mv.b2), joint(mv.a2, mv.b))
                                              : std::min(joint(mv.a, mv.b), joint(mv.a2, mv.b2));
                const double t = std::min(step, room);
                if (t <= 0.0) continue;
                joint(mv.a, mv.b) += dir * t;
                joint(mv.a2, mv.b2) += dir * t;
                joint(mv.a, mv.b2) -= dir * t;
                joint(mv.a2, mv.b) -= dir * t;
                if (evaluate_joint(joint)) {
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            step *= 0.5;
            ++sweep;
        }
    }
    return best;
}

struct CurvePoint {
    double rate;
    /// +infinity when no evaluated (rho, V) meets the rate condition.
    double distance_bound;
    std::optional<BoundPoint> provenance;
};

struct DistanceBoundCurve {
    std::vector<CurvePoint> points;  // ascending in rate
};

inline std::vector<double> default_rho_grid() { return {1.0, 2.0, 5.0, 10.0, 1e2, 1e3, 1e4}; }

/// Lower envelope over rho_grid of search_V at each rate, made nonincreasing in
/// the rate: a bound valid at rate R' also holds at every R >= R'.
inline DistanceBoundCurve bound_curve(const GramMatrix& b, const Composition& p, const std::vector<double>& rho_grid,
                                      std::vector<double> rate_grid, const SearchOptions& opt = {}) {
    if (rho_grid.empty() || rate_grid.empty()) throw ValidationError("rho and rate grids must be nonempty");
    for (double rho : rho_grid)
        if (!(rho >= 1.0)) throw ValidationError("rho grid entries must be >= 1");
    if (p.is_point_mass()) throw ValidationError("point-mass composition gives a degenerate (vacuous) curve");
    std::sort(rate_grid.begin(), rate_grid.end());

    DistanceBoundCurve curve;
    for (double rate : rate_grid) {
        CurvePoint cp{rate, kInf, std::nullopt};
        for (double rho : rho_grid) {
            auto bp = search_V(b, rho, p, rate, opt);
            if (bp && bp->distance_bound < cp.distance_bound) {
                cp.distance_bound = bp->distance_bound;
                cp.provenance = std::move(bp);
            }
        }
        if (!curve.points.empty() && curve.points.back().distance_bound < cp.distance_bound) {
            cp.distance_bound = curve.points.back().distance_bound;
            cp.provenance = curve.points.back().provenance;
        }
        curve.points.push_back(std::move(cp));
    }
    return curve;
}

}  // namespace thetabound
