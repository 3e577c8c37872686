#include <gtest/gtest.h>

#include <cmath>

#include "oracle_values.hpp"
#include "thetabound/binary.hpp"
#include "thetabound/oracle.hpp"

using namespace thetabound;
using namespace thetabound::oracle;

TEST(Code, Validation) {
    EXPECT_THROW(Code(2, {{0, 1}}), ValidationError);
    EXPECT_THROW(Code(2, {{0, 1}, {0, 1}}), ValidationError);
    EXPECT_THROW(Code(2, {{0, 1}, {0}}), ValidationError);
    EXPECT_THROW(Code(2, {{0, 2}, {0, 1}}), ValidationError);
    const Code c(3, {{0, 1, 2, 2}, {1, 1, 1, 0}});
    EXPECT_EQ(c.composition(0), (std::vector<int>{1, 1, 2}));
}

TEST(CodeMaxInner, Examples) {
    EXPECT_EQ(code_max_inner(Code(2, {{0, 1}, {1, 0}}), gram(Channel::identity(2))), 0.0);
    EXPECT_NEAR(code_max_inner(Code(2, {{0, 0, 0}, {1, 1, 1}}), gram(Channel::bsc(0.1))), 0.216, 1e-14);
    EXPECT_THROW(code_max_inner(Code(3, {{0}, {2}}), gram(Channel::bsc(0.1))), ValidationError);
}

TEST(ExhaustiveCodes, SmallExhaustiveRuns) {
    const GramMatrix g = gram(Channel::bsc(0.1));
    const auto r = check_theorem1_exhaustive(g, 3, 2, 1.0, -std::log(0.8));
    EXPECT_EQ(r.checked, 28u);
    EXPECT_EQ(r.violations, 0u);
    ASSERT_TRUE(r.tightest.has_value());
    EXPECT_NEAR(r.tightest_max_inner, 0.216, 1e-14);
    for (double rho : {1.0, 2.0}) {
        const double th = binary::theta(binary::z_from_gram(0.6), rho, Composition::uniform(2));
        const auto r4 = check_theorem1_exhaustive(g, 4, 4, rho, th);
        EXPECT_EQ(r4.checked, 1820u);
        EXPECT_EQ(r4.violations, 0u);
    }
}

TEST(ExhaustiveCodes, VacuousBoundHasNoViolations) {
    const auto r = check_theorem1_exhaustive(gram(Channel::bsc(0.1)), 2, 2, 1.0, 5.0);
    EXPECT_EQ(r.bound, 0.0);
    EXPECT_EQ(r.violations, 0u);
}

TEST(ExhaustiveCodes, TooSmallThetaIsCaught) {
    // theta = 0 demands every pair collide; any code of distinct words violates that
    const auto r = check_theorem1_exhaustive(gram(Channel::bsc(0.1)), 2, 2, 1.0, 0.0);
    EXPECT_EQ(r.violations, r.checked);
    EXPECT_FALSE(r.violating.empty());
}

TEST(ExhaustiveCodes, GuardRefusesWithCount) {
    try {
        check_theorem1_exhaustive(gram(Channel::bsc(0.1)), 10, 4, 1.0, 0.2);
        FAIL();
    } catch (const GuardExceeded& e) {
        EXPECT_GT(e.count(), 1e7);
    }
}

TEST(BestMinDistance, Examples) {
    const auto id = best_min_distance(gram(Channel::identity(2)), 1, 2);
    ASSERT_TRUE(id.has_value());
    EXPECT_EQ(id->second, 0.0);
    const auto rep = best_min_distance(gram(Channel::bsc(0.1)), 3, 2);
    ASSERT_TRUE(rep.has_value());
    EXPECT_NEAR(rep->second, 0.216, 1e-14);
    EXPECT_EQ(rep->first.words()[0], (Word{0, 0, 0}));
    EXPECT_EQ(rep->first.words()[1], (Word{1, 1, 1}));
    const auto cc = best_min_distance(gram(Channel::bsc(0.1)), 4, 2, Composition::uniform(2));
    ASSERT_TRUE(cc.has_value());
    EXPECT_NEAR(cc->second, oracle_values::kBestCodeBsc01n4M2, 1e-14);
    EXPECT_FALSE(best_min_distance(gram(Channel::bsc(0.1)), 3, 2, Composition::uniform(2)).has_value());
}

TEST(SphericalCodeLemma, RandomInstancesHold) {
    const auto r = check_lemma1(3, 4, 10000, 7);
    EXPECT_EQ(r.checked, 10000u);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_FALSE(r.tightest_instance.empty());
    EXPECT_THROW(check_lemma1(1, 4, 1, 7), ValidationError);
}

TEST(RowSum, RandomInstancesHold) {
    const auto r = check_rowsum_eigenvalue(10000, 3);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_GE(r.tightest_slack, -1e-9);
}

TEST(RowSum, Extremes) {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
    EXPECT_NEAR(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(id).eigenvalues().maxCoeff(),
                id.cwiseAbs().rowwise().sum().maxCoeff(), 1e-15);
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 4);
    EXPECT_NEAR(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ones).eigenvalues().maxCoeff(),
                ones.cwiseAbs().rowwise().sum().maxCoeff(), 1e-12);
}
