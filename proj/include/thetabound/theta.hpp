#pragma once

// Certified upper bounds on theta(rho), theta(rho, Q) and theta(rho, P, V).
//
// Any feasible (representation, handle) pair certifies an upper bound, so the
// optimizer only has to be sound about feasibility; optimality is best effort.
//
// Each run fixes the working handle at e1 (the problem is rotation invariant)
// and minimizes over unnormalized columns v_x, u_x = v_x / |v_x|, with an
// augmented Lagrangian on the pair constraints |<u_x, u_x'>| <= B^(1/rho).
// The minimax objective is smoothed by a temperature-annealed soft-max. After
// the run, violated pairs are rotated back into their caps and the exact best
// handle is computed for the final vectors.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "error.hpp"
#include "lbfgs.hpp"
#include "representation.hpp"

namespace thetabound {

/// A previous representation (and optionally its handle, used to fix vector signs).
struct WarmStart {
    Representation representation;
    std::optional<Handle> handle;
};

struct ThetaOptions {
    std::uint64_t seed = 1;
    int restarts = 16;
    double feas_tol = 1e-8;
    double obj_tol = 1e-10;
    int patience = 50;
    int max_iterations = 20000;
    int threads = 1;
    /// Extra starting point; also kept as a candidate if it is feasible at the requested rho.
    std::optional<WarmStart> warm_start;
};

struct ThetaCertificate {
    Representation representation;
    Handle handle;
    double value;
    double feasibility_residual;
    Objective objective;
    int restarts_used;
    bool converged;
    std::uint64_t seed;
    double feas_tol;

    double rho() const noexcept { return representation.rho(); }
    bool valid() const noexcept { return feasibility_residual <= feas_tol; }
};

struct AuditReport {
    double recomputed_value;
    double recomputed_residual;
    bool value_matches;
    bool feasible;
    bool ok() const noexcept { return value_matches && feasible; }
};

/// Re-derives value and residual from the stored vectors and handle.
inline AuditReport audit(const ThetaCertificate& cert, const GramMatrix& b) {
    AuditReport r{};
    r.recomputed_value = evaluate(cert.representation, cert.handle.vector(), cert.objective);
    r.recomputed_residual = feasibility_residual(cert.representation, b);
    r.value_matches = std::abs(r.recomputed_value - cert.value) <= 1e-10;
    r.feasible = r.recomputed_residual <= cert.feas_tol;
    return r;
}

namespace detail {

struct PairConstraint {
    Eigen::Index i;
    Eigen::Index j;
    double cap;
    double lam_pos = 0.0;  // ip - cap <= 0, or ip = 0 when cap == 0
    double lam_neg = 0.0;  // -ip - cap <= 0
};

class RepresentationProblem {
  public:
    RepresentationProblem(const MatrixXd& caps, const Objective& obj) : n_(caps.rows()) {
        if (!obj.is_minimax()) weights_ = obj.weights->vector();
        for (Eigen::Index i = 0; i < n_; ++i)
            for (Eigen::Index j = i + 1; j < n_; ++j)
                if (caps(i, j) < 1.0) pairs_.push_back({i, j, caps(i, j)});
    }

    bool minimax() const noexcept { return weights_.size() == 0; }
    bool relevant(Eigen::Index x) const { return minimax() || weights_[x] > 0.0; }

    /// Per-input -ln cos^2 to e1; +inf when v_x0 = 0.
    VectorXd objective_terms(const MatrixXd& v) const {
        VectorXd g = VectorXd::Zero(n_);
        for (Eigen::Index x = 0; x < n_; ++x) {
            if (!relevant(x)) continue;
            const double v0 = v(0, x);
            if (v0 == 0.0) {
                g[x] = kInf;
                continue;
            }
            g[x] = std::log1p(v.col(x).tail(n_ - 1).squaredNorm() / (v0 * v0));
        }
        return g;
    }

    double operator()(const VectorXd& z, VectorXd& grad) const {
        const Eigen::Map<const MatrixXd> v(z.data(), n_, n_);
        Eigen::Map<MatrixXd> gv(grad.data(), n_, n_);
        gv.setZero();
        const VectorXd g = objective_terms(v);
        if (!g.allFinite()) return kInf;
        const VectorXd norms2 = v.colwise().squaredNorm().transpose();

        // d g_x / d v_x = 2 v_x / |v_x|^2 - (2 / v_x0) e1
        auto add_term_grad = [&](Eigen::Index x, double w) {
            gv.col(x) += (2.0 * w / norms2[x]) * v.col(x);
            gv(0, x) -= 2.0 * w / v(0, x);
        };

        double f = 0.0;
        if (minimax()) {
            const double m = g.maxCoeff();
            const VectorXd w = ((g.array() - m) / tau_).exp().matrix();
            const double s = w.sum();
            f = m + tau_ * std::log(s);
            for (Eigen::Index x = 0; x < n_; ++x) add_term_grad(x, w[x] / s);
        } else {
            for (Eigen::Index x = 0; x < n_; ++x) {
                if (weights_[x] == 0.0) continue;
                f += weights_[x] * g[x];
                add_term_grad(x, weights_[x]);
            }
        }

        for (const auto& p : pairs_) {
            const double ni = std::sqrt(norms2[p.i]);
            const double nj = std::sqrt(norms2[p.j]);
            const double ip = v.col(p.i).dot(v.col(p.j)) / (ni * nj);
            double coef = 0.0;
            if (p.cap == 0.0) {
                f += p.lam_pos * ip + 0.5 * mu_ * ip * ip;
                coef = p.lam_pos + mu_ * ip;
            } else {
                const double ap = std::max(0.0, p.lam_pos + mu_ * (ip - p.cap));
                const double an = std::max(0.0, p.lam_neg + mu_ * (-ip - p.cap));
                f += (ap * ap - p.lam_pos * p.lam_pos + an * an - p.lam_neg * p.lam_neg) / (2.0 * mu_);
                coef = ap - an;
            }
            if (coef == 0.0) continue;
            gv.col(p.i) += coef * (v.col(p.j) / (ni * nj) - (ip / norms2[p.i]) * v.col(p.i));
            gv.col(p.j) += coef * (v.col(p.i) / (ni * nj) - (ip / norms2[p.j]) * v.col(p.j));
        }
        return f;
    }

    double violation(const MatrixXd& u) const {
        double r = 0.0;
        for (const auto& p : pairs_) r = std::max(r, std::abs(u.col(p.i).dot(u.col(p.j))) - p.cap);
        return r;
    }

    void update_multipliers(const MatrixXd& u) {
        for (auto& p : pairs_) {
            const double ip = u.col(p.i).dot(u.col(p.j));
            if (p.cap == 0.0) {
                p.lam_pos += mu_ * ip;
            } else {
                p.lam_pos = std::max(0.0, p.lam_pos + mu_ * (ip - p.cap));
                p.lam_neg = std::max(0.0, p.lam_neg + mu_ * (-ip - p.cap));
            }
        }
    }

    void set_mu(double mu) noexcept { mu_ = mu; }
    double mu() const noexcept { return mu_; }
    void set_tau(double tau) noexcept { tau_ = tau; }

  private:
    Eigen::Index n_;
    VectorXd weights_;
    std::vector<PairConstraint> pairs_;
    double mu_ = 10.0;
    double tau_ = 1.0;
};

/// Rotates each violating pair apart inside its own plane until every
/// |<u_i, u_j>| sits at or below its cap. Cyclic sweeps; true on success.
inline bool repair_feasibility(MatrixXd& u, const MatrixXd& caps, double tol, int max_sweeps = 2000) {
    const Eigen::Index n = u.cols();
    for (Eigen::Index x = 0; x < n; ++x) u.col(x).normalize();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double cap = caps(i, j);
                if (cap >= 1.0) continue;
                const double ip = u.col(i).dot(u.col(j));
                worst = std::max(worst, std::abs(ip) - cap);
                if (std::abs(ip) <= cap) continue;
                const double target = cap == 0.0 ? 0.0 : std::max(0.0, cap - 1e-13);
                const double sign = ip < 0.0 ? -1.0 : 1.0;
                const VectorXd w = sign * u.col(j);
                VectorXd m = u.col(i) + w;
                VectorXd d = u.col(i) - w;
                m.normalize();
                d -= d.dot(m) * m;
                if (d.norm() < 1e-300) {
                    // identical vectors: split along the axis least aligned with them
                    Eigen::Index axis = 0;
                    m.cwiseAbs().minCoeff(&axis);
                    d = VectorXd::Unit(m.size(), axis);
                    d -= d.dot(m) * m;
                }
                d.normalize();
                const double half = 0.5 * std::acos(target);
                u.col(i) = std::cos(half) * m + std::sin(half) * d;
                u.col(j) = sign * (std::cos(half) * m - std::sin(half) * d);
            }
        }
        if (worst <= 0.01 * tol) return true;
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) worst = std::max(worst, std::abs(u.col(i).dot(u.col(j))) - caps(i, j));
    return worst <= tol;
}

/// Householder reflection mapping the unit vector f onto e1.
inline MatrixXd reflect_to_e1(const VectorXd& f) {
    const Eigen::Index n = f.size();
    VectorXd w = f - VectorXd::Unit(n, 0);
    const double ww = w.squaredNorm();
    if (ww < 1e-30) return MatrixXd::Identity(n, n);
    return MatrixXd::Identity(n, n) - (2.0 / ww) * w * w.transpose();
}

struct Candidate {
    Representation rep;
    Handle handle;
    double value;
    double residual;
    bool converged;
};

/// Polishes a finished set of vectors: sign-aligns to the working handle,
/// computes the exact best handle, and checks feasibility.
inline std::optional<Candidate> finalize(MatrixXd u, const VectorXd& working_handle, const GramMatrix& b, double rho,
                                         const Objective& obj, double feas_tol, bool converged) {
    for (Eigen::Index x = 0; x < u.cols(); ++x) {
        u.col(x).normalize();
        if (u.col(x).dot(working_handle) < 0.0) u.col(x) = -u.col(x);
    }
    try {
        Representation rep(std::move(u), rho);
        const double residual = feasibility_residual(rep, b);
        if (!(residual <= feas_tol)) return std::nullopt;
        auto [h, value] = best_handle(rep, obj);
        if (!std::isfinite(value)) return std::nullopt;
        return Candidate{std::move(rep), std::move(h), value, residual, converged};
    } catch (const NumericError&) {
        return std::nullopt;
    } catch (const ValidationError&) {
        return std::nullopt;
    }
}

inline MatrixXd random_start(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd v(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index k = 0; k < n; ++k) v(k, x) = normal(rng);
        v(0, x) = std::abs(v(0, x)) + 0.3 * v.col(x).norm();
        v.col(x).normalize();
    }
    return v;
}

/// One optimization run from `start` (columns), handle fixed at e1.
inline std::optional<Candidate> run_from(MatrixXd start, const GramMatrix& b, const MatrixXd& caps, double rho,
                                         const Objective& obj, const ThetaOptions& opt) {
    const Eigen::Index n = start.cols();
    RepresentationProblem problem(caps, obj);
    for (Eigen::Index x = 0; x < n; ++x) {
        start.col(x).normalize();
        if (problem.relevant(x) && start(0, x) <= 0.0) {
            if (start(0, x) < 0.0) start.col(x) = -start.col(x);
            if (start(0, x) == 0.0) {
                start(0, x) = 1e-3;
                start.col(x).normalize();
            }
        }
    }
    VectorXd z = Eigen::Map<VectorXd>(start.data(), n * n);

    double tau_rel = 0.1;
    const double tau_floor = 1e-9;
    auto set_tau = [&](const MatrixXd& u) {
        const VectorXd g = problem.objective_terms(u);
        problem.set_tau(tau_rel * std::max(g.maxCoeff(), 1e-12));
    };
    if (problem.minimax()) set_tau(start);

    int budget = opt.max_iterations;
    double prev_viol = kInf;
    bool converged = false;
    for (int outer = 0; outer < 80 && budget > 0; ++outer) {
        LbfgsOptions lo;
        lo.max_iterations = budget;
        lo.obj_tol = opt.obj_tol;
        lo.patience = opt.patience;
        const LbfgsResult r = lbfgs_minimize(problem, z, lo);
        budget -= r.iterations;
        Eigen::Map<MatrixXd> v(z.data(), n, n);
        for (Eigen::Index x = 0; x < n; ++x) v.col(x).normalize();
        const MatrixXd u = v;
        const double viol = problem.violation(u);
        problem.update_multipliers(u);
        const bool tau_done = !problem.minimax() || tau_rel <= tau_floor;
        if (r.converged && tau_done && viol <= 1e-3 * opt.feas_tol) {
            converged = true;
            break;
        }
        if (problem.minimax() && tau_rel > tau_floor) {
            tau_rel = std::max(tau_floor, tau_rel * 0.1);
            set_tau(u);
        }
        if (viol > 0.25 * prev_viol) problem.set_mu(std::min(problem.mu() * 10.0, 1e12));
        prev_viol = viol;
    }
    MatrixXd u = Eigen::Map<MatrixXd>(z.data(), n, n);
    if (!repair_feasibility(u, caps, opt.feas_tol)) return std::nullopt;
    return finalize(std::move(u), VectorXd::Unit(n, 0), b, rho, obj, opt.feas_tol, converged);
}

inline ThetaCertificate optimize(const GramMatrix& b, double rho, const Objective& obj, const ThetaOptions& opt) {
    if (!(rho >= 1.0)) throw ValidationError("rho must be >= 1");
    if (!obj.is_minimax() && obj.weights->size() != b.size())
        throw ValidationError("composition size does not match the channel input alphabet");
    const auto n = static_cast<Eigen::Index>(b.size());
    const MatrixXd caps = b.power(rho);

    // Directly feasible candidates, in priority order for ties.
    std::vector<std::optional<Candidate>> direct;
    std::vector<MatrixXd> structured_starts;
    auto add_structured = [&](const Representation& rep, const VectorXd& align) {
        auto c = finalize(rep.vectors(), align, b, rho, obj, opt.feas_tol, true);
        if (c) structured_starts.push_back(reflect_to_e1(c->handle.vector()) * c->rep.vectors());
        direct.push_back(std::move(c));
    };
    if (opt.warm_start) {
        const Representation& w = opt.warm_start->representation;
        if (w.size() != b.size()) throw ValidationError("warm start has the wrong size");
        add_structured(w.with_rho(rho), opt.warm_start->handle ? opt.warm_start->handle->vector()
                                                               : VectorXd(w.vectors().rowwise().sum().normalized()));
    }
    if (is_nonneg_definite_at(b, rho)) {
        const Representation exact = exact_representation(b, rho);
        add_structured(exact, exact.vectors().rowwise().sum().normalized());
    }
    direct.push_back(finalize(MatrixXd::Identity(n, n), VectorXd::Ones(n).normalized(), b, rho, obj, opt.feas_tol, true));

    const int runs = static_cast<int>(structured_starts.size()) + std::max(0, opt.restarts);
    std::vector<std::optional<Candidate>> results(static_cast<std::size_t>(runs));
    auto do_run = [&](int k) {
        MatrixXd start = k < static_cast<int>(structured_starts.size())
                             ? structured_starts[static_cast<std::size_t>(k)]
                             : random_start(n, opt.seed + static_cast<std::uint64_t>(k - structured_starts.size()));
        results[static_cast<std::size_t>(k)] = run_from(std::move(start), b, caps, rho, obj, opt);
    };
    const int threads = std::max(1, std::min(opt.threads, runs));
    if (threads == 1) {
        for (int k = 0; k < runs; ++k) do_run(k);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (int k = t; k < runs; k += threads) do_run(k);
            });
        for (auto& th : pool) th.join();
    }

    const Candidate* best = nullptr;
    auto consider = [&](const std::optional<Candidate>& c) {
        if (c && (best == nullptr || c->value < best->value)) best = &*c;
    };
    for (const auto& c : direct) consider(c);
    for (const auto& c : results) consider(c);
    if (best == nullptr) throw NumericError("internal error: no feasible representation found");

    return ThetaCertificate{best->rep, best->handle, best->value, best->residual, obj,
                            runs,      best->converged, opt.seed, opt.feas_tol};
}

}  // namespace detail

/// Upper bound on theta(rho) = min over representations of min_f max_x ln 1/<u_x, f>^2.
inline WarmStart warm_start_from(const ThetaCertificate& cert) { return {cert.representation, cert.handle}; }

inline ThetaCertificate optimize_theta(const GramMatrix& b, double rho, const ThetaOptions& opt = {}) {
    return detail::optimize(b, rho, Objective::minimax(), opt);
}

/// Upper bound on theta(rho, Q) = min over representations and handles of sum_x Q(x) ln 1/<u_x, f>^2.
inline ThetaCertificate optimize_theta_weighted(const GramMatrix& b, double rho, const Composition& q,
                                                const ThetaOptions& opt = {}) {
    return detail::optimize(b, rho, Objective::weighted(q), opt);
}

struct ThetaPVResult {
    double value;
    /// Indexed by input x; empty where P(x) = 0.
    std::vector<std::optional<ThetaCertificate>> per_input;
};

/// theta(rho, P, V) = sum_x P(x) theta(rho, V(.|x)), one representation and
/// handle per conditioning input. Inputs with identical rows of V share one
/// subproblem.
inline ThetaPVResult theta_PV(const GramMatrix& b, double rho, const Composition& p, const ConditionalType& v,
                              const ThetaOptions& opt = {}) {
    if (p.size() != b.size() || v.size() != b.size())
        throw ValidationError("composition, conditional type and channel sizes differ");
    const auto n = static_cast<Eigen::Index>(b.size());
    std::vector<Eigen::Index> reps;
    std::vector<double> weight;
    std::vector<std::size_t> group_of(static_cast<std::size_t>(n), 0);
    for (Eigen::Index x = 0; x < n; ++x) {
        if (p.vector()[x] == 0.0) continue;
        std::size_t g = 0;
        while (g < reps.size() && v.matrix().row(reps[g]) != v.matrix().row(x)) ++g;
        if (g == reps.size()) {
            reps.push_back(x);
            weight.push_back(0.0);
        }
        weight[g] += p.vector()[x];
        group_of[static_cast<std::size_t>(x)] = g;
    }
    double total = 0.0;
    for (double w : weight) total += w;

    std::vector<ThetaCertificate> certs;
    certs.reserve(reps.size());
    double value = 0.0;
    for (std::size_t g = 0; g < reps.size(); ++g) {
        certs.push_back(optimize_theta_weighted(b, rho, v.row(static_cast<std::size_t>(reps[g])), opt));
        value += (weight[g] / total) * certs.back().value;
    }
    ThetaPVResult out{value, std::vector<std::optional<ThetaCertificate>>(static_cast<std::size_t>(n))};
    for (Eigen::Index x = 0; x < n; ++x)
        if (p.vector()[x] > 0.0) out.per_input[static_cast<std::size_t>(x)] = certs[group_of[static_cast<std::size_t>(x)]];
    return out;
}

}  // namespace thetabound
