#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genprof/cost.hpp"
#include "genprof/marginals.hpp"
#include "genprof/tensor.hpp"

namespace genprof {

struct SolverConfig {
    double epsilon = 0.1;       // entropic regularization
    double tol = 1e-12;         // Hilbert-metric stopping tolerance
    std::size_t maxiter = 10000;
    std::uint64_t seed = 0;     // potential initialization

    void validate() const;
};

/// A projection entry underflowed (or overflowed) while rescaling snapshot
/// `snapshot()`. Usually means epsilon is too small for the cost magnitudes.
class UnderflowError : public std::runtime_error {
public:
    UnderflowError(std::size_t snapshot, double epsilon);

    std::size_t snapshot() const { return snapshot_; }
    double suggested_epsilon() const { return suggested_epsilon_; }

private:
    std::size_t snapshot_;
    double suggested_epsilon_;
};

/// Hilbert's projective metric log(max p/q) - log(min p/q) on the positive orthant.
double hilbert_metric(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// K^j = exp(-C^j / epsilon) for every path matrix.
std::vector<Eigen::MatrixXd> gibbs_kernels(const PathCost& cost, double epsilon);

/// Sum of K (.) U over every index except `sigma` (0-based), evaluated with
/// one left-to-right and one right-to-left chain of matrix-vector products.
Eigen::VectorXd unimarginal_projection(std::span<const Eigen::VectorXd> potentials,
                                       std::span<const Eigen::MatrixXd> kernels,
                                       std::size_t sigma);

/// Sum of K (.) U over every index except `first` < `second` (0-based).
Eigen::MatrixXd bimarginal_projection(std::span<const Eigen::VectorXd> potentials,
                                      std::span<const Eigen::MatrixXd> kernels,
                                      std::size_t first, std::size_t second);

/// Converged dual potentials together with the kernels they scale. The
/// optimal plan is K (.) (u_1 x ... x u_ns); it is never materialized except
/// at oracle scale.
struct SolverSolution {
    std::vector<Eigen::VectorXd> potentials;
    std::vector<Eigen::MatrixXd> kernels;
    double epsilon = 0.0;
    std::size_t iterations = 0;
    double final_error = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::vector<double> residuals;  // max Hilbert change per sweep

    std::size_t snapshots() const { return potentials.size(); }
    std::size_t points() const { return potentials.empty() ? 0 : static_cast<std::size_t>(potentials.front().size()); }

    Eigen::VectorXd unimarginal(std::size_t sigma) const {
        return unimarginal_projection(potentials, kernels, sigma);
    }
    Eigen::MatrixXd bimarginal(std::size_t first, std::size_t second) const {
        return bimarginal_projection(potentials, kernels, first, second);
    }
};

/// Multimarginal Sinkhorn state for a path-structured kernel.
///
/// One sweep rescales u_1, ..., u_ns in ascending order, each against the
/// already-updated earlier potentials. Left messages are carried forward
/// through the sweep and right messages are rebuilt once at its start, so a
/// sweep costs 2 (n_s - 1) matrix-vector products.
class SinkhornIteration {
public:
    SinkhornIteration(const PathCost& cost, std::span<const Eigen::VectorXd> weights,
                      const SolverConfig& config);

    /// Runs one sweep and returns the largest Hilbert-metric change of any
    /// potential. Throws UnderflowError if a projection entry is not
    /// positive and finite.
    double sweep();

    const std::vector<Eigen::VectorXd>& potentials() const { return potentials_; }
    const std::vector<Eigen::MatrixXd>& kernels() const { return kernels_; }
    std::vector<Eigen::MatrixXd> release_kernels() { return std::move(kernels_); }
    std::vector<Eigen::VectorXd> release_potentials() { return std::move(potentials_); }

private:
    double epsilon_;
    std::vector<Eigen::MatrixXd> kernels_;
    std::vector<Eigen::VectorXd> weights_;
    std::vector<Eigen::VectorXd> potentials_;
    std::vector<Eigen::VectorXd> right_;
};

/// Checks marginal weights: positive, and summing to one within 1e-9 (then
/// renormalized exactly). Throws InputError otherwise.
std::vector<Eigen::VectorXd> normalized_weights(std::span<const Eigen::VectorXd> weights);

/// Solves the multimarginal Schroedinger bridge for path cost `cost`.
/// Non-convergence within maxiter is not an error: the last iterate is
/// returned with converged = false.
SolverSolution sinkhorn_solve(const PathCost& cost, std::span<const Eigen::VectorXd> weights,
                              const SolverConfig& config);
SolverSolution sinkhorn_solve(const PathCost& cost, std::span<const EmpiricalMarginal> marginals,
                              const SolverConfig& config);

/// Fixes the dual scaling freedom: every potential but the last is scaled to
/// unit maximum entry and the last absorbs the product, leaving the plan unchanged.
void normalize_potentials(std::vector<Eigen::VectorXd>& potentials);

/// Dense K (.) U at oracle scale.
DenseTensor assemble_dense_plan(const SolverSolution& solution, std::size_t cap = kDenseEntryCap);

}  // namespace genprof
