#include <cmath>

#include <gtest/gtest.h>

#include "genprof/cost.hpp"
#include "genprof/dense_oracle.hpp"
#include "genprof/solver.hpp"

using namespace genprof;

namespace {

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    return worst;
}

}  // namespace

TEST(DenseSinkhorn, AgreesWithPathSolver) {
    for (auto [ns, n] : {std::pair<std::size_t, std::size_t>{3, 4}, {4, 3}, {2, 5}}) {
        const auto inst = random_instance(ns, n, 10 * ns + n);
        const SolverConfig cfg{0.1, 1e-12, 200000, 0};
        const auto dense = dense_sinkhorn_solve(materialize_dense(inst.cost), inst.weights, cfg);
        const auto path = assemble_dense_plan(sinkhorn_solve(inst.cost, inst.weights, cfg));
        EXPECT_LE(max_abs_diff(dense, path), 1e-9) << ns << "x" << n;
    }
}

TEST(DenseSinkhorn, SingletonIsOne) {
    PathCost pc;
    pc.matrices = {Eigen::MatrixXd::Constant(1, 1, 0.4)};
    const std::vector<Eigen::VectorXd> w(2, Eigen::VectorXd::Ones(1));
    const auto plan = dense_sinkhorn_solve(materialize_dense(pc), w, SolverConfig{});
    EXPECT_NEAR(plan[0], 1.0, 1e-15);
}

TEST(DenseSinkhorn, NonConvergenceThrows) {
    const auto inst = random_instance(3, 3, 1);
    EXPECT_THROW(dense_sinkhorn_solve(materialize_dense(inst.cost), inst.weights, SolverConfig{0.1, 1e-300, 2, 0}),
                 ConvergenceError);
}

TEST(DenseProjections, MatchPathProjections) {
    const auto inst = random_instance(4, 3, 55);
    std::vector<Eigen::VectorXd> u;
    for (std::size_t s = 0; s < 4; ++s) u.push_back(Eigen::VectorXd::LinSpaced(3, 0.5 + s, 1.5 + s));
    const auto kernels = gibbs_kernels(inst.cost, 0.1);
    const auto scaled = dense_scaled_kernel(materialize_dense(inst.cost), 0.1, u);
    for (std::size_t s = 0; s < 4; ++s) {
        const Eigen::VectorXd a = dense_unimarginal(scaled, s);
        const Eigen::VectorXd b = unimarginal_projection(u, kernels, s);
        EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10);
        for (std::size_t t = s + 1; t < 4; ++t) {
            EXPECT_LE((dense_bimarginal(scaled, s, t) - bimarginal_projection(u, kernels, s, t)).cwiseAbs().maxCoeff(),
                      1e-10);
        }
    }
}

TEST(KlToGibbs, ZeroAtGibbs) {
    const auto inst = random_instance(3, 3, 4);
    const auto cost = materialize_dense(inst.cost);
    DenseTensor gibbs(std::vector<std::size_t>(cost.shape().begin(), cost.shape().end()));
    double z = 0.0;
    for (std::size_t k = 0; k < cost.size(); ++k) z += std::exp(-cost[k] / 0.1);
    for (std::size_t k = 0; k < cost.size(); ++k) gibbs[k] = std::exp(-cost[k] / 0.1) / z;
    EXPECT_NEAR(kl_to_gibbs(gibbs, cost, 0.1), 0.0, 1e-13);
}

TEST(KlToGibbs, NonNegativeOnValidPlans) {
    const auto inst = random_instance(3, 3, 8);
    const auto cost = materialize_dense(inst.cost);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        DenseTensor plan(std::vector<std::size_t>{3, 3, 3});
        for (std::size_t k = 0; k < plan.size(); ++k) plan[k] = trial % 2 ? u(rng) : (u(rng) < 0.3 ? 0.0 : u(rng));
        const double s = plan.sum();
        for (std::size_t k = 0; k < plan.size(); ++k) plan[k] /= s;
        EXPECT_GE(kl_to_gibbs(plan, cost, 0.1), -1e-14);
    }
}

TEST(FeasiblePerturbation, PreservesMarginalsAndPositivity) {
    const auto inst = random_instance(3, 3, 12);
    const auto sol = sinkhorn_solve(inst.cost, inst.weights, SolverConfig{});
    const auto plan = assemble_dense_plan(sol);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k) {
        const auto p = feasible_perturbation(plan, rng);
        bool changed = false;
        for (std::size_t f = 0; f < p.size(); ++f) {
            EXPECT_GE(p[f], 0.0);
            changed |= p[f] != plan[f];
        }
        EXPECT_TRUE(changed);
        for (std::size_t s = 0; s < 3; ++s) {
            EXPECT_LE((dense_unimarginal(p, s) - dense_unimarginal(plan, s)).lpNorm<1>(), 1e-14);
        }
    }
}

TEST(FeasiblePerturbation, OptimalPlanHasSmallestKl) {
    const auto inst = random_instance(3, 3, 21);
    const auto cost = materialize_dense(inst.cost);
    const auto plan = assemble_dense_plan(sinkhorn_solve(inst.cost, inst.weights, SolverConfig{}));
    const double best = kl_to_gibbs(plan, cost, 0.1);
    std::mt19937_64 rng(9);
    for (int k = 0; k < 100; ++k) {
        EXPECT_LE(best, kl_to_gibbs(feasible_perturbation(plan, rng), cost, 0.1) + 1e-12);
    }
}

TEST(OracleSuite, SmallSuitePasses) {
    OracleSuiteConfig cfg;
    cfg.seeds = 2;
    cfg.perturbations = 20;
    const auto report = run_oracle_suite(cfg);
    EXPECT_EQ(report.instances.size(), 3u * 4u * 2u);
    EXPECT_TRUE(report.all_passed());
    for (const auto& r : report.instances) {
        EXPECT_TRUE(r.passed) << r.snapshots << "x" << r.points << " seed " << r.seed << ": " << r.failure;
        EXPECT_LE(r.plan_max_abs_deviation, 1e-9);
    }
}

TEST(OracleSuite, FlippedCostSignFails) {
    OracleSuiteConfig cfg;
    cfg.snapshot_counts = {3};
    cfg.point_counts = {3};
    cfg.seeds = 2;
    cfg.perturbations = 5;
    cfg.flip_dense_cost_sign = true;
    const auto report = run_oracle_suite(cfg);
    EXPECT_FALSE(report.all_passed());
    for (const auto& r : report.instances) {
        EXPECT_FALSE(r.passed);
        EXPECT_FALSE(r.failure.empty());
    }
}

TEST(RandomInstanceTest, ShapesAndRanges) {
    const auto inst = random_instance(4, 5, 3);
    ASSERT_EQ(inst.cost.matrices.size(), 3u);
    ASSERT_EQ(inst.weights.size(), 4u);
    for (const auto& c : inst.cost.matrices) {
        EXPECT_GE(c.minCoeff(), 0.0);
        EXPECT_LT(c.maxCoeff(), 1.0);
    }
    for (const auto& w : inst.weights) EXPECT_NEAR(w.sum(), 1.0, 1e-14);
}
