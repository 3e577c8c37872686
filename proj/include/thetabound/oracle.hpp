#pragma once

// Brute-force and randomized checks of the bounds: exhaustive small-code
// enumeration, random instances of the spherical-code lemma, and the
// eigenvalue row-sum inequality.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "elias.hpp"
#include "error.hpp"

namespace thetabound::oracle {

using Word = std::vector<int>;

class Code {
  public:
    Code(std::size_t alphabet, std::vector<Word> words) : alphabet_(alphabet), words_(std::move(words)) {
        if (words_.size() < 2) throw ValidationError("a code needs at least 2 codewords");
        n_ = words_.front().size();
        if (n_ == 0) throw ValidationError("block length must be positive");
        for (const auto& w : words_) {
            if (w.size() != n_) throw ValidationError("codewords must all have the same length");
            for (int s : w)
                if (s < 0 || static_cast<std::size_t>(s) >= alphabet_)
                    throw ValidationError("codeword symbol outside the channel alphabet");
        }
        std::set<Word> distinct(words_.begin(), words_.end());
        if (distinct.size() != words_.size()) throw ValidationError("codewords must be distinct");
    }

    std::size_t block_length() const noexcept { return n_; }
    std::size_t size() const noexcept { return words_.size(); }
    std::size_t alphabet() const noexcept { return alphabet_; }
    const std::vector<Word>& words() const noexcept { return words_; }

    /// Symbol counts of codeword m.
    std::vector<int> composition(std::size_t m) const {
        std::vector<int> counts(alphabet_, 0);
        for (int s : words_.at(m)) ++counts[static_cast<std::size_t>(s)];
        return counts;
    }

  private:
    std::size_t alphabet_;
    std::size_t n_ = 0;
    std::vector<Word> words_;
};

/// <psi_w, psi_w'> for product states: the product of per-position Gram entries.
inline double word_inner(const Word& a, const Word& b, const GramMatrix& g) {
    double prod = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        prod *= g(static_cast<std::size_t>(a[i]), static_cast<std::size_t>(b[i]));
        if (prod == 0.0) return 0.0;
    }
    return prod;
}

inline double code_max_inner(const Code& code, const GramMatrix& g) {
    if (code.alphabet() != g.size()) throw ValidationError("code alphabet does not match the channel");
    double best = 0.0;
    for (std::size_t m = 0; m < code.size(); ++m)
        for (std::size_t k = m + 1; k < code.size(); ++k)
            best = std::max(best, word_inner(code.words()[m], code.words()[k], g));
    return best;
}

namespace detail {

inline double binomial(double n, double k) {
    if (k < 0 || k > n) return 0.0;
    return std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1));
}

/// All words of length n over the alphabet, lexicographic; optionally only those of composition P.
inline std::vector<Word> words(std::size_t alphabet, std::size_t n, const std::optional<Composition>& filter) {
    std::optional<std::vector<int>> target;
    if (filter) {
        if (filter->size() != alphabet) throw ValidationError("composition filter has the wrong size");
        std::vector<int> counts(alphabet);
        for (std::size_t x = 0; x < alphabet; ++x) {
            const double c = (*filter)[x] * static_cast<double>(n);
            if (std::abs(c - std::round(c)) > 1e-9) return {};
            counts[x] = static_cast<int>(std::round(c));
        }
        target = counts;
    }
    std::vector<Word> out;
    Word w(n, 0);
    while (true) {
        if (target) {
            std::vector<int> counts(alphabet, 0);
            for (int s : w) ++counts[static_cast<std::size_t>(s)];
            if (counts == *target) out.push_back(w);
        } else {
            out.push_back(w);
        }
        std::size_t pos = n;
        while (pos > 0 && static_cast<std::size_t>(w[pos - 1]) + 1 == alphabet) w[--pos] = 0;
        if (pos == 0) break;
        ++w[pos - 1];
    }
    return out;
}

inline constexpr double kEnumerationGuard = 1e7;

/// Calls visit(indices, max_inner) for every M-subset of `pool` in lexicographic order.
template <class Visit>
void for_each_code(const std::vector<Word>& pool, std::size_t m, const GramMatrix& g, Visit&& visit) {
    const std::size_t n = pool.size();
    const double count = binomial(static_cast<double>(n), static_cast<double>(m));
    if (count > kEnumerationGuard) {
        std::ostringstream os;
        os << "enumeration refused: " << count << " codes exceed the guard of " << kEnumerationGuard;
        throw GuardExceeded(os.str(), count);
    }
    if (m > n) return;
    MatrixXd inner(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            inner(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = word_inner(pool[i], pool[j], g);

    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    while (true) {
        double mx = 0.0;
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t c = a + 1; c < m; ++c)
                mx = std::max(mx, inner(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(idx[c])));
        visit(idx, mx);
        std::size_t i = m;
        while (i > 0 && idx[i - 1] == n - m + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t k = i; k < m; ++k) idx[k] = idx[k - 1] + 1;
    }
}

inline Code make_code(const std::vector<Word>& pool, const std::vector<std::size_t>& idx, std::size_t alphabet) {
    std::vector<Word> ws;
    for (std::size_t i : idx) ws.push_back(pool[i]);
    return Code(alphabet, std::move(ws));
}

}  // namespace detail

struct Theorem1Report {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double bound = 0.0;
    /// Code whose max inner product comes closest to the bound.
    std::optional<Code> tightest;
    double tightest_max_inner = kInf;
    std::vector<Code> violating;  // first few, for the instance dump
};

/// Checks max_{m != m'} <psi_m, psi_m'> >= ((M e^{-n theta} - 1)/(M - 1))^rho
/// over every code of M distinct words (optionally of fixed composition).
inline Theorem1Report check_theorem1_exhaustive(const GramMatrix& g, std::size_t n, std::size_t m, double rho,
                                                double theta_value,
                                                const std::optional<Composition>& filter = std::nullopt) {
    Theorem1Report rep;
    rep.bound = finite_plotkin_rhs(static_cast<long long>(m), static_cast<long long>(n), theta_value, rho);
    const auto pool = detail::words(g.size(), n, filter);
    detail::for_each_code(pool, m, g, [&](const std::vector<std::size_t>& idx, double mx) {
        ++rep.checked;
        if (mx < rep.bound - 1e-12) {
            ++rep.violations;
            if (rep.violating.size() < 5) rep.violating.push_back(detail::make_code(pool, idx, g.size()));
        }
        if (mx < rep.tightest_max_inner) {
            rep.tightest_max_inner = mx;
            rep.tightest = detail::make_code(pool, idx, g.size());
        }
    });
    return rep;
}

/// Code with the smallest max inner product (largest min Bhattacharyya distance);
/// the lexicographically first one among ties.
inline std::optional<std::pair<Code, double>> best_min_distance(const GramMatrix& g, std::size_t n, std::size_t m,
                                                                const std::optional<Composition>& filter = std::nullopt) {
    const auto pool = detail::words(g.size(), n, filter);
    std::optional<std::vector<std::size_t>> best_idx;
    double best = kInf;
    detail::for_each_code(pool, m, g, [&](const std::vector<std::size_t>& idx, double mx) {
        if (mx < best) {
            best = mx;
            best_idx = idx;
        }
    });
    if (!best_idx) return std::nullopt;
    return std::make_pair(detail::make_code(pool, *best_idx, g.size()), best);
}

struct RandomReport {
    std::size_t checked = 0;
    std::size_t violations = 0;
    /// Smallest (lhs - rhs) seen and a description of that instance.
    double tightest_slack = kInf;
    std::string tightest_instance;
    std::vector<std::string> violating;
};

namespace detail {

inline VectorXd random_unit(std::mt19937_64& rng, Eigen::Index dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd v(dim);
    do {
        for (Eigen::Index k = 0; k < dim; ++k) v[k] = normal(rng);
    } while (v.norm() < 1e-12);
    return v.normalized();
}

inline std::string describe(const MatrixXd& cols, const VectorXd& f) {
    std::ostringstream os;
    os.precision(17);
    if (f.size() > 0) os << "f = [" << f.transpose() << "]; ";
    os << "vectors (columns) =\n" << cols;
    return os.str();
}

}  // namespace detail

/// Random instances of: unit v_1..v_M, f with |<v_i, f>|^2 >= c imply
/// max_{i != j} |<v_i, v_j>| >= (M c - 1)/(M - 1). Vectors are drawn inside a
/// cap around f whose angular radius is log-uniform, so the premise holds.
inline RandomReport check_lemma1(std::size_t m, std::size_t dim, std::size_t trials, std::uint64_t seed) {
    if (m < 2 || dim < 2) throw ValidationError("lemma check needs M >= 2 and dim >= 2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(dim);
    RandomReport rep;
    for (std::size_t t = 0; t < trials; ++t) {
        const VectorXd f = detail::random_unit(rng, d);
        const double radius = std::exp(std::log(1e-4) + unif(rng) * (std::log(std::numbers::pi / 2) - std::log(1e-4)));
        MatrixXd v(d, static_cast<Eigen::Index>(m));
        for (Eigen::Index i = 0; i < v.cols(); ++i) {
            VectorXd w = detail::random_unit(rng, d);
            w -= w.dot(f) * f;
            if (w.norm() < 1e-12) {
                Eigen::Index k = 0;
                f.cwiseAbs().minCoeff(&k);
                w = VectorXd::Unit(d, k);
                w -= w.dot(f) * f;
            }
            w.normalize();
            const double angle = radius * unif(rng);
            v.col(i) = std::cos(angle) * f + std::sin(angle) * w;
            if (unif(rng) < 0.5) v.col(i) = -v.col(i);
            v.col(i).normalize();
        }
        double c = kInf;
        for (Eigen::Index i = 0; i < v.cols(); ++i) c = std::min(c, std::pow(v.col(i).dot(f), 2));
        double lhs = 0.0;
        for (Eigen::Index i = 0; i < v.cols(); ++i)
            for (Eigen::Index j = i + 1; j < v.cols(); ++j) lhs = std::max(lhs, std::abs(v.col(i).dot(v.col(j))));
        const double md = static_cast<double>(m);
        const double rhs = (md * c - 1.0) / (md - 1.0);
        ++rep.checked;
        const double slack = lhs - rhs;
        if (slack < rep.tightest_slack) {
            rep.tightest_slack = slack;
            rep.tightest_instance = detail::describe(v, f);
        }
        if (slack < -1e-9) {
            ++rep.violations;
            if (rep.violating.size() < 5) rep.violating.push_back(detail::describe(v, f));
        }
    }
    return rep;
}

/// lambda_max(A) <= max_i sum_j |A_ij| on random Gram matrices A = Phi^T Phi with unit columns.
inline RandomReport check_rowsum_eigenvalue(std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size(1, 8);
    RandomReport rep;
    for (std::size_t t = 0; t < trials; ++t) {
        const Eigen::Index dim = size(rng);
        const Eigen::Index cols = size(rng);
        MatrixXd phi(dim, cols);
        for (Eigen::Index i = 0; i < cols; ++i) phi.col(i) = detail::random_unit(rng, dim);
        const MatrixXd a = phi.transpose() * phi;
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(a, Eigen::EigenvaluesOnly);
        const double lmax = es.eigenvalues().maxCoeff();
        const double rowsum = a.cwiseAbs().rowwise().sum().maxCoeff();
        ++rep.checked;
        const double slack = rowsum - lmax;
        if (slack < rep.tightest_slack) {
            rep.tightest_slack = slack;
            rep.tightest_instance = detail::describe(phi, VectorXd());
        }
        if (slack < -1e-9) {
            ++rep.violations;
            if (rep.violating.size() < 5) rep.violating.push_back(detail::describe(phi, VectorXd()));
        }
    }
    return rep;
}

}  // namespace thetabound::oracle
