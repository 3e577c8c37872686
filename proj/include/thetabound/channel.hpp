#pragma once

// Channel geometry: state vectors, the Bhattacharyya Gram matrix, distances,
// compositions and conditional types.
//
// All logarithms are natural; rates and distances are in nats.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace thetabound {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kZeroSnap = 1e-14;
inline constexpr double kPsdTol = -1e-9;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

inline double min_eigenvalue(const MatrixXd& symmetric) {
    if (symmetric.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline void check_distribution(const VectorXd& p, const std::string& what) {
    if (p.size() == 0) throw ValidationError(what + ": empty distribution");
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p[i]) || p[i] < 0.0) {
            std::ostringstream os;
            os << what << ": entry " << i << " is " << p[i] << " (must be a finite nonnegative number)";
            throw ValidationError(os.str());
        }
    }
    if (std::abs(p.sum() - 1.0) > kRowSumTol) {
        std::ostringstream os;
        os.precision(17);
        os << what << ": entries sum to " << p.sum() << ", not 1";
        throw ValidationError(os.str());
    }
}

}  // namespace detail

/// Discrete memoryless channel W(y|x); row x holds the output distribution of input x.
class Channel {
  public:
    explicit Channel(MatrixXd w, std::vector<std::string> input_labels = {},
                     std::vector<std::string> output_labels = {})
        : w_(std::move(w)), input_labels_(std::move(input_labels)), output_labels_(std::move(output_labels)) {
        if (w_.rows() < 2) throw ValidationError("channel needs at least 2 inputs");
        if (w_.cols() < 1) throw ValidationError("channel needs at least 1 output");
        for (Eigen::Index x = 0; x < w_.rows(); ++x) {
            detail::check_distribution(w_.row(x).transpose(), "channel row " + std::to_string(x));
        }
        if (!input_labels_.empty() && input_labels_.size() != static_cast<std::size_t>(w_.rows()))
            throw ValidationError("input_labels has the wrong length");
        if (!output_labels_.empty() && output_labels_.size() != static_cast<std::size_t>(w_.cols()))
            throw ValidationError("output_labels has the wrong length");
    }

    const MatrixXd& matrix() const noexcept { return w_; }
    std::size_t num_inputs() const noexcept { return static_cast<std::size_t>(w_.rows()); }
    std::size_t num_outputs() const noexcept { return static_cast<std::size_t>(w_.cols()); }
    const std::vector<std::string>& input_labels() const noexcept { return input_labels_; }
    const std::vector<std::string>& output_labels() const noexcept { return output_labels_; }

    static Channel bsc(double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("bsc crossover must lie in [0,1]");
        MatrixXd w(2, 2);
        w << 1.0 - p, p, p, 1.0 - p;
        return Channel(std::move(w));
    }

    static Channel identity(std::size_t k) {
        return Channel(MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
    }

    /// Noisy typewriter on 5 letters: x goes to x or x+1 (mod 5) with probability 1/2.
    static Channel pentagon() {
        MatrixXd w = MatrixXd::Zero(5, 5);
        for (int x = 0; x < 5; ++x) {
            w(x, x) = 0.5;
            w(x, (x + 1) % 5) = 0.5;
        }
        return Channel(std::move(w));
    }

  private:
    MatrixXd w_;
    std::vector<std::string> input_labels_;
    std::vector<std::string> output_labels_;
};

/// Column x is psi_x with psi_x(y) = sqrt(W(y|x)).
class StateVectorSet {
  public:
    explicit StateVectorSet(MatrixXd psi) : psi_(std::move(psi)) {
        for (Eigen::Index x = 0; x < psi_.cols(); ++x) {
            if (std::abs(psi_.col(x).norm() - 1.0) > 1e-12)
                throw ValidationError("state vector " + std::to_string(x) + " is not unit norm");
            if ((psi_.col(x).array() < 0.0).any())
                throw ValidationError("state vector " + std::to_string(x) + " has a negative component");
        }
    }
    const MatrixXd& vectors() const noexcept { return psi_; }
    VectorXd operator[](std::size_t x) const { return psi_.col(static_cast<Eigen::Index>(x)); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(psi_.cols()); }

  private:
    MatrixXd psi_;
};

/// Symmetric matrix of Bhattacharyya coefficients <psi_x, psi_x'>, unit diagonal.
class GramMatrix {
  public:
    explicit GramMatrix(MatrixXd b) : b_(std::move(b)) {
        if (b_.rows() != b_.cols() || b_.rows() < 1) throw ValidationError("Gram matrix must be square and nonempty");
        for (Eigen::Index i = 0; i < b_.rows(); ++i) {
            if (b_(i, i) != 1.0) throw ValidationError("Gram matrix diagonal must be exactly 1");
            for (Eigen::Index j = 0; j < b_.cols(); ++j) {
                if (!(b_(i, j) >= 0.0 && b_(i, j) <= 1.0))
                    throw ValidationError("Gram entries must lie in [0,1]");
                if (b_(i, j) != b_(j, i)) throw ValidationError("Gram matrix must be symmetric");
            }
        }
        if (detail::min_eigenvalue(b_) < kPsdTol) throw ValidationError("Gram matrix is not positive semidefinite");
    }

    const MatrixXd& matrix() const noexcept { return b_; }
    double operator()(std::size_t i, std::size_t j) const {
        return b_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    std::size_t size() const noexcept { return static_cast<std::size_t>(b_.rows()); }

    /// Entrywise power B^(1/rho) with 0^(1/rho) = 0: the caps of a degree-rho representation.
    MatrixXd power(double rho) const {
        MatrixXd c(b_.rows(), b_.cols());
        for (Eigen::Index i = 0; i < b_.rows(); ++i)
            for (Eigen::Index j = 0; j < b_.cols(); ++j)
                c(i, j) = b_(i, j) == 0.0 ? 0.0 : (i == j ? 1.0 : std::exp(std::log(b_(i, j)) / rho));
        return c;
    }

    static GramMatrix binary(double b01) {
        MatrixXd b(2, 2);
        b << 1.0, b01, b01, 1.0;
        return GramMatrix(std::move(b));
    }

  private:
    MatrixXd b_;
};

/// Probability vector P over the input alphabet.
class Composition {
  public:
    explicit Composition(VectorXd p) : p_(std::move(p)) { detail::check_distribution(p_, "composition"); }
    Composition(std::initializer_list<double> p) : Composition(to_vector(p)) {}

    const VectorXd& vector() const noexcept { return p_; }
    double operator[](std::size_t x) const { return p_[static_cast<Eigen::Index>(x)]; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(p_.size()); }

    bool is_point_mass() const { return (p_.array() > 0.0).count() == 1; }

    static Composition uniform(std::size_t n) {
        return Composition(VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
    }
    static Composition point_mass(std::size_t n, std::size_t x) {
        VectorXd p = VectorXd::Zero(static_cast<Eigen::Index>(n));
        p[static_cast<Eigen::Index>(x)] = 1.0;
        return Composition(std::move(p));
    }

  private:
    static VectorXd to_vector(std::initializer_list<double> p) {
        VectorXd v(static_cast<Eigen::Index>(p.size()));
        Eigen::Index i = 0;
        for (double e : p) v[i++] = e;
        return v;
    }
    VectorXd p_;
};

/// Row-stochastic |X|x|X| matrix, entry (x, x') = V(x'|x).
class ConditionalType {
  public:
    explicit ConditionalType(MatrixXd v) : v_(std::move(v)) {
        if (v_.rows() != v_.cols() || v_.rows() < 1) throw ValidationError("conditional type must be square");
        for (Eigen::Index x = 0; x < v_.rows(); ++x)
            detail::check_distribution(v_.row(x).transpose(), "conditional type row " + std::to_string(x));
    }

    const MatrixXd& matrix() const noexcept { return v_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(v_.rows()); }
    Composition row(std::size_t x) const { return Composition(v_.row(static_cast<Eigen::Index>(x)).transpose()); }

    /// V(x'|x) = P(x') for every x.
    static ConditionalType independent(const Composition& p) {
        MatrixXd v(p.vector().size(), p.vector().size());
        for (Eigen::Index x = 0; x < v.rows(); ++x) v.row(x) = p.vector().transpose();
        return ConditionalType(std::move(v));
    }
    static ConditionalType identity(std::size_t n) {
        return ConditionalType(MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
    }
    /// Binary V(1|0) = V(0|1) = lambda.
    static ConditionalType symmetric_flip(double lambda) {
        MatrixXd v(2, 2);
        v << 1.0 - lambda, lambda, lambda, 1.0 - lambda;
        return ConditionalType(std::move(v));
    }

  private:
    MatrixXd v_;
};

inline StateVectorSet state_vectors(const Channel& channel) {
    return StateVectorSet(channel.matrix().transpose().array().sqrt().matrix());
}

inline GramMatrix gram(const StateVectorSet& sv) {
    MatrixXd b = sv.vectors().transpose() * sv.vectors();
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            if (b(i, j) < kZeroSnap) b(i, j) = 0.0;
            if (b(i, j) > 1.0) b(i, j) = 1.0;
        }
        b(i, i) = 1.0;
    }
    b = (0.5 * (b + b.transpose())).eval();
    return GramMatrix(std::move(b));
}

inline GramMatrix gram(const Channel& channel) { return gram(state_vectors(channel)); }

/// d[x][x'] = -ln B[x][x'] in nats, +infinity where the states are orthogonal.
inline MatrixXd bhattacharyya_matrix(const GramMatrix& b) {
    MatrixXd d(b.matrix().rows(), b.matrix().cols());
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j)
            d(i, j) = i == j ? 0.0 : (b.matrix()(i, j) == 0.0 ? kInf : -std::log(b.matrix()(i, j)));
    return d;
}

inline std::vector<std::pair<std::size_t, std::size_t>> zero_error_pairs(const GramMatrix& b) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = i + 1; j < b.size(); ++j)
            if (b(i, j) == 0.0) pairs.emplace_back(i, j);
    return pairs;
}

/// Output distribution PV(x') = sum_x P(x) V(x'|x).
///
/// Rows are grouped by exact equality first so that identical rows reproduce
/// themselves bit for bit (PV = row when every supported row is the same).
inline VectorXd output_composition(const Composition& p, const ConditionalType& v) {
    const Eigen::Index n = p.vector().size();
    std::vector<Eigen::Index> reps;
    std::vector<double> weight;
    for (Eigen::Index x = 0; x < n; ++x) {
        if (p.vector()[x] == 0.0) continue;
        std::size_t g = 0;
        while (g < reps.size() && v.matrix().row(reps[g]) != v.matrix().row(x)) ++g;
        if (g == reps.size()) {
            reps.push_back(x);
            weight.push_back(0.0);
        }
        weight[g] += p.vector()[x];
    }
    double total = 0.0;
    for (double w : weight) total += w;
    VectorXd pv = VectorXd::Zero(n);
    for (std::size_t g = 0; g < reps.size(); ++g) pv += (weight[g] / total) * v.matrix().row(reps[g]).transpose();
    return pv;
}

inline double mutual_information(const Composition& p, const ConditionalType& v) {
    if (p.size() != v.size()) throw ValidationError("composition and conditional type sizes differ");
    const VectorXd pv = output_composition(p, v);
    double info = 0.0;
    for (Eigen::Index x = 0; x < v.matrix().rows(); ++x) {
        const double px = p.vector()[x];
        if (px == 0.0) continue;
        for (Eigen::Index y = 0; y < v.matrix().cols(); ++y) {
            const double vxy = v.matrix()(x, y);
            if (vxy == 0.0) continue;
            if (pv[y] <= 0.0) throw NumericError("internal inconsistency: PV vanishes on a supported pair");
            info += px * vxy * std::log(vxy / pv[y]);
        }
    }
    return info < 0.0 ? 0.0 : info;
}

inline double stationarity_residual(const Composition& p, const ConditionalType& v) {
    if (p.size() != v.size()) throw ValidationError("composition and conditional type sizes differ");
    const VectorXd pv = v.matrix().transpose() * p.vector();
    return (pv - p.vector()).cwiseAbs().maxCoeff();
}

inline bool is_stationary(const Composition& p, const ConditionalType& v, double tol) {
    return stationarity_residual(p, v) <= tol;
}

inline bool is_nonneg_definite_at(const GramMatrix& b, double rho) {
    if (!(rho >= 1.0)) throw ValidationError("rho must be >= 1");
    return detail::min_eigenvalue(b.power(rho)) >= kPsdTol;
}

}  // namespace thetabound
