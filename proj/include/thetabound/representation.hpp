#pragma once

// Degree-rho orthonormal representations, handles, and the two value
// functionals (minimax and weighted) evaluated at a fixed representation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "channel.hpp"
#include "error.hpp"

namespace thetabound {

/// Unit vectors {psi~_x}, stored as the columns of a |X| x |X| matrix.
class Representation {
  public:
    Representation(MatrixXd vectors, double rho) : u_(std::move(vectors)), rho_(rho) {
        if (!(rho_ >= 1.0)) throw ValidationError("representation degree rho must be >= 1");
        for (Eigen::Index x = 0; x < u_.cols(); ++x)
            if (std::abs(u_.col(x).norm() - 1.0) > 1e-10)
                throw ValidationError("representation vector " + std::to_string(x) + " is not unit norm");
    }

    const MatrixXd& vectors() const noexcept { return u_; }
    Eigen::Index dimension() const noexcept { return u_.rows(); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(u_.cols()); }
    double rho() const noexcept { return rho_; }

    /// Same vectors read as a representation of a higher degree; feasibility is
    /// preserved because B^(1/rho) grows with rho for B in [0,1].
    Representation with_rho(double rho) const { return Representation(u_, rho); }

  private:
    MatrixXd u_;
    double rho_;
};

class Handle {
  public:
    explicit Handle(VectorXd f) : f_(std::move(f)) {
        if (std::abs(f_.norm() - 1.0) > 1e-10) throw ValidationError("handle is not unit norm");
    }
    const VectorXd& vector() const noexcept { return f_; }

  private:
    VectorXd f_;
};

/// Which functional a value refers to: max_x (minimax) or sum_x Q(x) (weighted).
struct Objective {
    std::optional<Composition> weights;

    static Objective minimax() { return {}; }
    static Objective weighted(Composition q) { return {std::move(q)}; }
    bool is_minimax() const noexcept { return !weights.has_value(); }
};

/// -ln cos^2 of the angle between u and f, accurate when the angle is tiny.
inline double neg_log_cos2(const VectorXd& u, const VectorXd& f) {
    const double ip = u.dot(f);
    if (ip == 0.0) return kInf;
    const double uu = u.squaredNorm();
    const double ff = f.squaredNorm();
    const double sin2 = (u - (ip / ff) * f).squaredNorm() / uu;
    if (sin2 < 0.5) return -std::log1p(-sin2);
    return -std::log(ip * ip / (uu * ff));
}

inline double feasibility_residual(const Representation& rep, const GramMatrix& b) {
    if (rep.size() != b.size()) throw ValidationError("representation and Gram matrix sizes differ");
    const MatrixXd caps = b.power(rep.rho());
    const MatrixXd g = rep.vectors().transpose() * rep.vectors();
    double r = 0.0;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = i + 1; j < g.cols(); ++j) r = std::max(r, std::abs(g(i, j)) - caps(i, j));
    return r;
}

/// Objective value of (rep, f); +infinity when a relevant inner product vanishes.
inline double evaluate(const Representation& rep, const VectorXd& f, const Objective& obj) {
    const MatrixXd& u = rep.vectors();
    if (obj.is_minimax()) {
        double v = 0.0;
        for (Eigen::Index x = 0; x < u.cols(); ++x) v = std::max(v, neg_log_cos2(u.col(x), f));
        return v;
    }
    const VectorXd& q = obj.weights->vector();
    if (q.size() != u.cols()) throw ValidationError("weights and representation sizes differ");
    double v = 0.0;
    for (Eigen::Index x = 0; x < u.cols(); ++x)
        if (q[x] > 0.0) v += q[x] * neg_log_cos2(u.col(x), f);
    return v;
}

namespace detail {

/// Minimum-norm point of the convex hull of the columns of `pts` (Wolfe's algorithm).
inline VectorXd min_norm_point(const MatrixXd& pts) {
    const double scale = pts.colwise().squaredNorm().maxCoeff();
    const double tol = 1e-15 * scale;

    Eigen::Index start = 0;
    pts.colwise().squaredNorm().minCoeff(&start);
    std::vector<Eigen::Index> s{start};
    std::vector<double> lam{1.0};
    VectorXd x = pts.col(start);

    for (int major = 0; major < 1000; ++major) {
        Eigen::Index j = 0;
        const VectorXd dots = pts.transpose() * x;
        dots.minCoeff(&j);
        if (dots[j] >= x.squaredNorm() - tol) break;
        if (std::find(s.begin(), s.end(), j) != s.end()) break;
        s.push_back(j);
        lam.push_back(0.0);

        for (int minor = 0; minor < 1000; ++minor) {
            const auto k = static_cast<Eigen::Index>(s.size());
            MatrixXd kkt = MatrixXd::Zero(k + 1, k + 1);
            for (Eigen::Index a = 0; a < k; ++a) {
                for (Eigen::Index c = 0; c < k; ++c) kkt(a, c) = pts.col(s[a]).dot(pts.col(s[c]));
                kkt(a, k) = 1.0;
                kkt(k, a) = 1.0;
            }
            VectorXd rhs = VectorXd::Zero(k + 1);
            rhs[k] = 1.0;
            const VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
            const VectorXd alpha = sol.head(k);

            if ((alpha.array() > 1e-14).all()) {
                for (Eigen::Index a = 0; a < k; ++a) lam[a] = alpha[a];
                break;
            }
            double theta = 1.0;
            for (Eigen::Index a = 0; a < k; ++a)
                if (alpha[a] <= 1e-14) theta = std::min(theta, lam[a] / (lam[a] - alpha[a]));
            std::vector<Eigen::Index> s2;
            std::vector<double> lam2;
            for (Eigen::Index a = 0; a < k; ++a) {
                const double l = lam[a] + theta * (alpha[a] - lam[a]);
                if (l > 1e-14) {
                    s2.push_back(s[a]);
                    lam2.push_back(l);
                }
            }
            s = std::move(s2);
            lam = std::move(lam2);
            double total = 0.0;
            for (double l : lam) total += l;
            for (double& l : lam) l /= total;
        }
        x.setZero();
        for (std::size_t a = 0; a < s.size(); ++a) x += lam[a] * pts.col(s[a]);
    }
    return x;
}

/// Maximizer of sum_x q_x ln<u_x, f> - |f|^2/2; its stationary point is the unit
/// handle f = sum_x q_x u_x / <u_x, f> of the weighted objective.
inline std::optional<VectorXd> weighted_handle(const MatrixXd& u, const VectorXd& q, VectorXd f) {
    const Eigen::Index d = u.rows();
    auto gradient = [&](const VectorXd& g_f, bool& ok) {
        VectorXd g = -g_f;
        ok = true;
        for (Eigen::Index x = 0; x < u.cols(); ++x) {
            if (q[x] == 0.0) continue;
            const double t = u.col(x).dot(g_f);
            if (!(t > 0.0)) {
                ok = false;
                return g;
            }
            g += (q[x] / t) * u.col(x);
        }
        return g;
    };
    bool ok = false;
    VectorXd g = gradient(f, ok);
    if (!ok) return std::nullopt;
    for (int it = 0; it < 200 && g.norm() > 1e-16; ++it) {
        MatrixXd h = MatrixXd::Identity(d, d);
        for (Eigen::Index x = 0; x < u.cols(); ++x) {
            if (q[x] == 0.0) continue;
            const double t = u.col(x).dot(f);
            h += (q[x] / (t * t)) * u.col(x) * u.col(x).transpose();
        }
        const VectorXd step = h.ldlt().solve(g);
        double a = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt, a *= 0.5) {
            const VectorXd trial = f + a * step;
            bool trial_ok = false;
            const VectorXd gt = gradient(trial, trial_ok);
            if (trial_ok && gt.norm() < g.norm()) {
                f = trial;
                g = gt;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    return VectorXd(f / f.norm());
}

}  // namespace detail

/// Optimal handle for max_x -ln <u_x, f>^2: the normalized min-norm point of the
/// convex hull of the vectors, and value -2 ln |p*|.
inline std::pair<Handle, double> value_minimax(const Representation& rep) {
    if (rep.size() == 0) throw ValidationError("empty representation");
    const VectorXd p = detail::min_norm_point(rep.vectors());
    const double norm = p.norm();
    if (!(norm > 1e-12)) throw NumericError("no handle has positive inner product with every vector");
    Handle h(p / norm);
    const double v = evaluate(rep, h.vector(), Objective::minimax());
    if (!std::isfinite(v)) throw NumericError("no handle has positive inner product with every vector");
    return {std::move(h), v};
}

/// Optimal handle for sum_x Q(x) ln 1/<u_x, f>^2 over the support of Q.
inline std::pair<Handle, double> value_weighted(const Representation& rep, const Composition& q) {
    if (q.size() != rep.size()) throw ValidationError("weights and representation sizes differ");
    MatrixXd support(rep.dimension(), 0);
    for (std::size_t x = 0; x < rep.size(); ++x) {
        if (q[x] == 0.0) continue;
        support.conservativeResize(Eigen::NoChange, support.cols() + 1);
        support.col(support.cols() - 1) = rep.vectors().col(static_cast<Eigen::Index>(x));
    }
    const VectorXd p = detail::min_norm_point(support);
    if (!(p.norm() > 1e-12)) throw NumericError("no handle has positive inner product with the supported vectors");
    const auto f = detail::weighted_handle(rep.vectors(), q.vector(), p / p.norm());
    if (!f) throw NumericError("weighted handle iteration left the admissible region");
    Handle h(*f);
    const double v = evaluate(rep, h.vector(), Objective::weighted(q));
    return {std::move(h), v};
}

/// Residual of the fixed point f = normalize(sum_x Q(x) u_x / <u_x, f>).
inline double handle_stationarity(const Representation& rep, const Handle& h, const Composition& q) {
    VectorXd s = VectorXd::Zero(rep.dimension());
    for (std::size_t x = 0; x < rep.size(); ++x) {
        if (q[x] == 0.0) continue;
        const auto col = rep.vectors().col(static_cast<Eigen::Index>(x));
        s += (q[x] / col.dot(h.vector())) * col;
    }
    return (s.normalized() - h.vector()).norm();
}

inline std::pair<Handle, double> best_handle(const Representation& rep, const Objective& obj) {
    return obj.is_minimax() ? value_minimax(rep) : value_weighted(rep, *obj.weights);
}

/// Unit vectors whose Gram matrix is exactly B^(1/rho), by eigen-factorization.
/// Only available when that power matrix is PSD.
inline Representation exact_representation(const GramMatrix& b, double rho) {
    if (!is_nonneg_definite_at(b, rho))
        throw NumericError("Gram matrix is not nonnegative definite at rho = " + std::to_string(rho) +
                           "; no exact representation exists, use the optimizer instead");
    const MatrixXd caps = b.power(rho);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(caps);
    const VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    MatrixXd u = root.asDiagonal() * es.eigenvectors().transpose();
    for (Eigen::Index x = 0; x < u.cols(); ++x) u.col(x).normalize();
    return Representation(std::move(u), rho);
}

}  // namespace thetabound
