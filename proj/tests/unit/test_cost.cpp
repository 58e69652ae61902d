#include <gtest/gtest.h>

#include "genprof/cost.hpp"
#include "test_support.hpp"

using namespace genprof;
using genprof::testing::random_matrix;

namespace {

std::vector<EmpiricalMarginal> random_marginals(std::size_t ns, Eigen::Index n, std::uint64_t seed) {
    std::vector<EmpiricalMarginal> out;
    for (std::size_t s = 0; s < ns; ++s) {
        EmpiricalMarginal m;
        m.points = random_matrix(n, 3, seed + s, 0.0, 0.1);
        m.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
        out.push_back(m);
    }
    return out;
}

}  // namespace

TEST(PairwiseCost, UnitDiagonalPoint) {
    Eigen::MatrixXd a(1, 2), b(1, 2);
    a << 0, 0;
    b << 1, 1;
    EXPECT_DOUBLE_EQ(pairwise_cost(a, b)(0, 0), 2.0);
}

TEST(PairwiseCost, IdenticalSetsHaveZeroDiagonal) {
    const Eigen::MatrixXd a = random_matrix(6, 4, 3, 0.0, 0.1);
    const Eigen::MatrixXd c = pairwise_cost(a, a);
    for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(c(i, i), 0.0, 1e-18);
}

TEST(PairwiseCost, MatchesPerEntrySummation) {
    const Eigen::MatrixXd a = random_matrix(3, 5, 11, 0.0, 0.1);
    const Eigen::MatrixXd b = random_matrix(4, 5, 12, 0.0, 0.1);
    const Eigen::MatrixXd c = pairwise_cost(a, b);
    ASSERT_EQ(c.rows(), 3);
    ASSERT_EQ(c.cols(), 4);
    for (Eigen::Index p = 0; p < 3; ++p) {
        for (Eigen::Index q = 0; q < 4; ++q) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < 5; ++k) s += (a(p, k) - b(q, k)) * (a(p, k) - b(q, k));
            EXPECT_NEAR(c(p, q), s, 1e-16);
        }
    }
}

TEST(PairwiseCost, SymmetricUnderSwapAndNonNegative) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Eigen::MatrixXd a = random_matrix(7, 3, seed, 0.0, 0.1);
        const Eigen::MatrixXd b = random_matrix(5, 3, seed + 50, 0.0, 0.1);
        const Eigen::MatrixXd ab = pairwise_cost(a, b);
        const Eigen::MatrixXd ba = pairwise_cost(b, a);
        EXPECT_LE((ab - ba.transpose()).cwiseAbs().maxCoeff(), 1e-18);
        EXPECT_GE(ab.minCoeff(), 0.0);
    }
}

TEST(PairwiseCost, DimensionMismatchThrows) {
    EXPECT_THROW(pairwise_cost(Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(2, 4)), InputError);
}

TEST(PathCostTest, TwoSnapshotsGiveOneMatrix) {
    const auto pc = build_path_cost(random_marginals(2, 4, 1));
    EXPECT_EQ(pc.matrices.size(), 1u);
    EXPECT_EQ(pc.snapshots(), 2u);
}

TEST(PathCostTest, FullScaleShapes) {
    const auto pc = build_path_cost(random_marginals(5, 1250, 2));
    ASSERT_EQ(pc.matrices.size(), 4u);
    for (const auto& m : pc.matrices) {
        EXPECT_EQ(m.rows(), 1250);
        EXPECT_EQ(m.cols(), 1250);
    }
}

TEST(PathCostTest, FewerThanTwoMarginalsThrows) {
    EXPECT_THROW(build_path_cost(random_marginals(1, 3, 0)), InputError);
}

TEST(DenseCost, TwoSnapshotsEqualsTheMatrix) {
    const auto pc = build_path_cost(random_marginals(2, 3, 4));
    const auto d = materialize_dense(pc);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            const std::size_t idx[] = {i, j};
            EXPECT_EQ(d.at(idx), pc.matrices[0](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
    }
}

TEST(DenseCost, ThreeSnapshotsTwoPointsByHand) {
    PathCost pc;
    Eigen::MatrixXd c1(2, 2), c2(2, 2);
    c1 << 1, 2, 3, 4;
    c2 << 10, 20, 30, 40;
    pc.matrices = {c1, c2};
    const auto d = materialize_dense(pc);
    ASSERT_EQ(d.size(), 8u);
    // Row-major, last index fastest.
    const double expected[] = {11, 21, 32, 42, 13, 23, 34, 44};
    for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(d[k], expected[k]);
}

TEST(DenseCost, FourSnapshotsMatchesNestedLoops) {
    const auto pc = build_path_cost(random_marginals(4, 3, 7));
    const auto d = materialize_dense(pc);
    for (Eigen::Index a = 0; a < 3; ++a)
        for (Eigen::Index b = 0; b < 3; ++b)
            for (Eigen::Index c = 0; c < 3; ++c)
                for (Eigen::Index e = 0; e < 3; ++e) {
                    const double want = pc.matrices[0](a, b) + pc.matrices[1](b, c) + pc.matrices[2](c, e);
                    const std::size_t idx[] = {static_cast<std::size_t>(a), static_cast<std::size_t>(b),
                                               static_cast<std::size_t>(c), static_cast<std::size_t>(e)};
                    EXPECT_NEAR(d.at(idx), want, 1e-12);
                }
}

TEST(DenseCost, ThreeSnapshotsFourPointsMatchesPathSum) {
    const auto pc = build_path_cost(random_marginals(3, 4, 21));
    const auto d = materialize_dense(pc);
    std::vector<std::size_t> idx(3);
    for (std::size_t flat = 0; flat < d.size(); ++flat) {
        d.unravel(flat, idx);
        double want = 0.0;
        for (std::size_t j = 0; j + 1 < 3; ++j) {
            want += pc.matrices[j](static_cast<Eigen::Index>(idx[j]), static_cast<Eigen::Index>(idx[j + 1]));
        }
        EXPECT_NEAR(d[flat], want, 1e-12);
    }
}

TEST(DenseCost, CapExceededThrows) {
    const auto pc = build_path_cost(random_marginals(3, 5, 0));
    EXPECT_THROW(materialize_dense(pc, 100), std::length_error);
    EXPECT_NO_THROW(materialize_dense(pc, 125));
}

TEST(DenseTensorTest, FlatIndexAndUnravelAreInverse) {
    DenseTensor t({2, 3, 4});
    std::vector<std::size_t> idx(3);
    for (std::size_t f = 0; f < t.size(); ++f) {
        t.unravel(f, idx);
        EXPECT_EQ(t.flat_index(idx), f);
    }
    const std::size_t shape[] = {10, 10, 10, 10, 10, 10, 10};
    EXPECT_THROW(checked_entry_count(shape, kDenseEntryCap), std::length_error);
}
