#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle_values.hpp"
#include "thetabound/binary.hpp"
#include "thetabound/channel.hpp"
#include "thetabound/theta.hpp"

using namespace thetabound;

namespace {

GramMatrix w3_gram() {
    Eigen::MatrixXd w(3, 3);
    w << 0.7, 0.3, 0.0, 0.0, 0.6, 0.4, 0.5, 0.0, 0.5;
    return gram(Channel(w));
}

void expect_zero_error_orthogonal(const ThetaCertificate& c, const GramMatrix& b) {
    const Eigen::MatrixXd g = c.representation.vectors().transpose() * c.representation.vectors();
    for (auto [i, j] : zero_error_pairs(b))
        EXPECT_LE(std::abs(g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))), c.feas_tol);
}

}  // namespace

TEST(OptimizeTheta, IdentityGivesLogAlphabet) {
    for (std::size_t k : {2u, 3u, 4u}) {
        const GramMatrix b = gram(Channel::identity(k));
        const auto c = optimize_theta(b, 5.0);
        EXPECT_LE(c.value, std::log(static_cast<double>(k)) + 1e-6);
        EXPECT_NEAR(c.value, std::log(static_cast<double>(k)), 1e-9);
        EXPECT_TRUE(audit(c, b).ok());
    }
}

TEST(OptimizeTheta, BinaryRhoOne) {
    const auto c = optimize_theta(GramMatrix::binary(0.6), 1.0);
    EXPECT_NEAR(c.value, -std::log(0.8), 1e-9);
    EXPECT_TRUE(c.valid());
}

TEST(OptimizeTheta, PentagonMatchesSdpOracle) {
    const GramMatrix b = gram(Channel::pentagon());
    EXPECT_NEAR(optimize_theta(b, 1.0).value, oracle_values::kPentagonMinimaxRho1, 1e-6);
    EXPECT_NEAR(optimize_theta(b, 2.0).value, oracle_values::kPentagonMinimaxRho2, 1e-6);
    EXPECT_NEAR(optimize_theta(b, 5.0).value, oracle_values::kPentagonMinimaxRho5, 1e-6);
}

TEST(OptimizeTheta, PentagonLargeRhoApproachesLovasz) {
    const GramMatrix b = gram(Channel::pentagon());
    const auto c = optimize_theta(b, 1e6);
    EXPECT_NEAR(c.value, oracle_values::kLnSqrt5, 1e-2);
    EXPECT_NEAR(c.value, oracle_values::kPentagonLovaszScan, 1e-6);
    expect_zero_error_orthogonal(c, b);
}

TEST(OptimizeTheta, ThreeInputMatchesSdpOracle) {
    const GramMatrix b = w3_gram();
    EXPECT_NEAR(optimize_theta(b, 1.0).value, oracle_values::kW3MinimaxRho1, 1e-6);
    EXPECT_NEAR(optimize_theta(b, 3.0).value, oracle_values::kW3MinimaxRho3, 1e-6);
}

TEST(OptimizeThetaWeighted, Examples) {
    const GramMatrix b = GramMatrix::binary(0.6);
    EXPECT_LE(optimize_theta_weighted(b, 3.0, Composition{1.0, 0.0}).value, 1e-10);
    EXPECT_NEAR(optimize_theta_weighted(b, 1.0, Composition::uniform(2)).value, 0.2231435513142097, 1e-4);
    const Composition q{0.7, 0.3};
    EXPECT_NEAR(optimize_theta_weighted(b, 2.0, q).value, binary::theta(binary::z_from_gram(0.6), 2.0, q), 1e-4);
}

TEST(OptimizeThetaWeighted, BinaryGridAgainstBruteForce) {
    for (const auto& c : oracle_values::kBinaryGrid) {
        const double got = optimize_theta_weighted(GramMatrix::binary(c.b01), c.rho, Composition{c.q0, 1.0 - c.q0}).value;
        EXPECT_NEAR(got, c.value, 1e-8) << "b01=" << c.b01 << " rho=" << c.rho << " q0=" << c.q0;
    }
}

TEST(OptimizeThetaWeighted, PentagonAndThreeInputAgainstSdp) {
    const GramMatrix p = gram(Channel::pentagon());
    EXPECT_NEAR(optimize_theta_weighted(p, 2.0, Composition{0.4, 0.3, 0.1, 0.1, 0.1}).value,
                oracle_values::kPentagonWeightedRho2, 1e-6);
    const GramMatrix b = w3_gram();
    const Composition q{0.5, 0.3, 0.2};
    EXPECT_NEAR(optimize_theta_weighted(b, 1.0, q).value, oracle_values::kW3WeightedRho1, 1e-6);
    EXPECT_NEAR(optimize_theta_weighted(b, 3.0, q).value, oracle_values::kW3WeightedRho3, 1e-6);
}

TEST(OptimizeTheta, InvalidArguments) {
    EXPECT_THROW(optimize_theta(GramMatrix::binary(0.5), 0.5), ValidationError);
    EXPECT_THROW(optimize_theta_weighted(GramMatrix::binary(0.5), 1.0, Composition::uniform(3)), ValidationError);
}

TEST(Certificate, AuditDetectsTampering) {
    const GramMatrix b = w3_gram();
    auto c = optimize_theta(b, 2.0);
    EXPECT_TRUE(audit(c, b).ok());
    c.value -= 1e-6;
    EXPECT_FALSE(audit(c, b).value_matches);
    auto d = optimize_theta(b, 2.0);
    EXPECT_FALSE(audit(d, gram(Channel::identity(3))).feasible);
}

TEST(Certificate, ZeroErrorPairsAreOrthogonal) {
    const GramMatrix b = gram(Channel::pentagon());
    for (double rho : {1.0, 3.0, 20.0}) expect_zero_error_orthogonal(optimize_theta(b, rho), b);
    Eigen::MatrixXd w(3, 3);
    w << 0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 1.0;
    const GramMatrix b3 = gram(Channel(w));
    expect_zero_error_orthogonal(optimize_theta_weighted(b3, 2.0, Composition{0.2, 0.5, 0.3}), b3);
}

TEST(Monotonicity, NonincreasingInRhoWithWarmStart) {
    for (const GramMatrix& b : {w3_gram(), gram(Channel::pentagon()), GramMatrix::binary(0.2)}) {
        std::optional<ThetaCertificate> prev;
        for (double rho : {1.0, 1.5, 2.0, 4.0, 10.0, 50.0}) {
            ThetaOptions opt;
            if (prev) opt.warm_start = warm_start_from(*prev);
            const auto c = optimize_theta(b, rho, opt);
            if (prev) {
                EXPECT_LE(c.value, prev->value + 1e-12);
            }
            prev = c;
        }
    }
}

TEST(Chaining, WeightedNeverExceedsMinimax) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    const GramMatrix b = w3_gram();
    for (double rho : {1.0, 2.0, 5.0}) {
        const auto m = optimize_theta(b, rho);
        for (int k = 0; k < 5; ++k) {
            Eigen::Vector3d q(unif(rng), unif(rng), unif(rng));
            ThetaOptions opt;
            opt.warm_start = warm_start_from(m);
            EXPECT_LE(optimize_theta_weighted(b, rho, Composition(q / q.sum()), opt).value, m.value + 1e-12);
        }
    }
}

TEST(Determinism, SameSeedSameCertificate) {
    const GramMatrix b = w3_gram();
    ThetaOptions opt;
    opt.seed = 42;
    const auto a = optimize_theta(b, 2.0, opt);
    const auto c = optimize_theta(b, 2.0, opt);
    EXPECT_EQ(a.value, c.value);
    EXPECT_EQ(a.representation.vectors(), c.representation.vectors());
    opt.threads = 3;
    const auto t = optimize_theta(b, 2.0, opt);
    EXPECT_EQ(a.value, t.value);
    EXPECT_EQ(a.representation.vectors(), t.representation.vectors());
}

TEST(ThetaPV, IndependentRowsEqualWeighted) {
    const GramMatrix b = w3_gram();
    const Composition p{0.5, 0.3, 0.2};
    const auto pv = theta_PV(b, 2.0, p, ConditionalType::independent(p));
    EXPECT_EQ(pv.value, optimize_theta_weighted(b, 2.0, p).value);
}

TEST(ThetaPV, IdentityIsZero) {
    const GramMatrix b = w3_gram();
    EXPECT_LE(theta_PV(b, 2.0, Composition{0.5, 0.3, 0.2}, ConditionalType::identity(3)).value, 1e-10);
}

TEST(ThetaPV, BinaryFlipMatchesClosedForm) {
    const double z = binary::z_from_gram(0.6);
    for (double lambda : {0.05, 0.11, 0.3})
        for (double rho : {1.0, 10.0}) {
            const double got =
                theta_PV(GramMatrix::binary(0.6), rho, Composition::uniform(2), ConditionalType::symmetric_flip(lambda))
                    .value;
            EXPECT_NEAR(got, binary::theta(z, rho, Composition{1.0 - lambda, lambda}), 1e-4);
        }
}

TEST(ThetaPV, UnsupportedInputsHaveNoCertificate) {
    const auto r = theta_PV(w3_gram(), 1.0, Composition{0.5, 0.5, 0.0}, ConditionalType::identity(3));
    EXPECT_TRUE(r.per_input[0].has_value());
    EXPECT_FALSE(r.per_input[2].has_value());
}
