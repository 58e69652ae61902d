#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genprof/solver.hpp"
#include "genprof/tensor.hpp"

// Brute-force counterparts of the path-structured solver. Everything here is
// exponential in the number of snapshots and exists to cross-check the fast
// path on small instances.

namespace genprof {

/// Thrown by the dense solver when it does not reach tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exhaustive sum of `plan` over every axis except `sigma`.
Eigen::VectorXd dense_unimarginal(const DenseTensor& plan, std::size_t sigma);

/// Exhaustive sum of `plan` over every axis except `first` and `second`.
Eigen::MatrixXd dense_bimarginal(const DenseTensor& plan, std::size_t first, std::size_t second);

/// Dense K (.) U for arbitrary potentials and a dense cost.
DenseTensor dense_scaled_kernel(const DenseTensor& cost, double epsilon,
                                std::span<const Eigen::VectorXd> potentials);

/// Multimarginal Sinkhorn on a dense cost tensor, projections by exhaustive
/// summation. Same update order and stopping rule as sinkhorn_solve.
DenseTensor dense_sinkhorn_solve(const DenseTensor& cost, std::span<const Eigen::VectorXd> weights,
                                 const SolverConfig& config, std::size_t cap = kDenseEntryCap);

/// KL(plan || K / Z) with K = exp(-cost / epsilon), using 0 log 0 = 0.
double kl_to_gibbs(const DenseTensor& plan, const DenseTensor& cost, double epsilon);

/// Moves mass along one random "index swap": for tuples a, b and a random
/// subset S of axes, a' and b' exchange their S coordinates, and the plan
/// changes by t (e_a + e_b - e_a' - e_b'). Every unimarginal sum is unchanged
/// and entries stay non-negative. Applies `swaps` such moves.
DenseTensor feasible_perturbation(const DenseTensor& plan, std::mt19937_64& rng, int swaps = 3);

struct OracleSuiteConfig {
    std::vector<std::size_t> snapshot_counts{2, 3, 4};
    std::vector<std::size_t> point_counts{2, 3, 4, 5};
    std::size_t seeds = 10;
    std::size_t perturbations = 100;
    std::uint64_t base_seed = 1;
    SolverConfig solver{0.1, 1e-12, 200000, 0};
    double plan_tolerance = 1e-9;
    double projection_tolerance = 1e-10;
    double feasibility_tolerance = 1e-8;
    double kl_slack = 1e-12;
    std::size_t cap = kDenseEntryCap;
    /// Negative control: the dense side solves with the negated cost.
    bool flip_dense_cost_sign = false;
};

struct OracleInstanceResult {
    std::size_t snapshots = 0;
    std::size_t points = 0;
    std::uint64_t seed = 0;
    double plan_max_abs_deviation = 0.0;
    double unimarginal_max_abs_deviation = 0.0;
    double bimarginal_max_abs_deviation = 0.0;
    double feasibility_l1 = 0.0;
    double kl_optimal = 0.0;
    double kl_min_perturbed = 0.0;
    bool passed = false;
    std::string failure;
};

struct OracleReport {
    std::vector<OracleInstanceResult> instances;
    bool all_passed() const;
};

/// Random instance: path cost matrices uniform in [0, 1), marginal weights
/// uniform in [0.5, 1.5) then normalized.
struct RandomInstance {
    PathCost cost;
    std::vector<Eigen::VectorXd> weights;
};
RandomInstance random_instance(std::size_t snapshots, std::size_t points, std::uint64_t seed);

/// Runs the dense-versus-path comparison, projection comparison, feasibility
/// and KL-optimality checks over every (snapshots, points, seed) combination.
OracleReport run_oracle_suite(const OracleSuiteConfig& config);

}  // namespace genprof
