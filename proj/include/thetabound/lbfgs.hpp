#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <algorithm>
#include <deque>
#include <limits>
#include <vector>

namespace thetabound::detail {

struct LbfgsOptions {
    int max_iterations = 20000;
    int memory = 10;
    /// Stop when the objective improved by less than obj_tol (relative) over `patience` iterations.
    double obj_tol = 1e-10;
    int patience = 50;
    double grad_tol = 1e-15;
};

struct LbfgsResult {
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Limited-memory BFGS with Armijo backtracking. `fg(x, grad)` returns the
/// objective (+inf outside the domain) and fills the gradient.
template <class Fn>
LbfgsResult lbfgs_minimize(Fn&& fg, Eigen::VectorXd& x, const LbfgsOptions& opt) {
    using Eigen::VectorXd;
    LbfgsResult res;
    VectorXd g(x.size());
    double f = fg(x, g);
    if (!std::isfinite(f)) return res;

    std::deque<VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::deque<double> f_hist{f};
    VectorXd g_new(x.size());

    for (int it = 0; it < opt.max_iterations; ++it) {
        res.iterations = it + 1;
        if (g.lpNorm<Eigen::Infinity>() <= opt.grad_tol) {
            res.converged = true;
            break;
        }
        // two-loop recursion
        VectorXd d = -g;
        std::vector<double> alpha(s_hist.size());
        for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
            alpha[k] = rho_hist[k] * s_hist[k].dot(d);
            d -= alpha[k] * y_hist[k];
        }
        if (!s_hist.empty()) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = rho_hist[k] * y_hist[k].dot(d);
            d += (alpha[k] - beta) * s_hist[k];
        }
        double slope = d.dot(g);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = -g;
            slope = -g.squaredNorm();
        }

        double step = s_hist.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;
        bool accepted = false;
        VectorXd x_new;
        double f_new = f;
        for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
            x_new = x + step * d;
            f_new = fg(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.converged = true;  // no further decrease representable
            break;
        }
        VectorXd s = x_new - x;
        VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-300 && sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opt.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x = x_new;
        g = g_new;
        f = f_new;
        f_hist.push_back(f);
        if (static_cast<int>(f_hist.size()) > opt.patience) {
            const double old = f_hist.front();
            f_hist.pop_front();
            if (old - f <= opt.obj_tol * std::max(std::abs(f), 1e-300)) {
                res.converged = true;
                break;
            }
        }
    }
    res.value = f;
    return res;
}

}  // namespace thetabound::detail
