#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genprof/dataset.hpp"
#include "genprof/types.hpp"

namespace genprof {

/// Augmented states eta = (xi, beta) for every (run, context) pair at every
/// snapshot. Row p of each snapshot matrix belongs to run `run_ids[p]`.
struct AugmentedSamples {
    std::size_t state_dim = 0;
    std::size_t context_dim = 0;
    std::vector<std::string> run_ids;
    std::vector<Eigen::MatrixXd> snapshots;  // n_s matrices, each N x (m + b)

    std::size_t points() const { return run_ids.size(); }
    std::size_t dim() const { return state_dim + context_dim; }
    AugmentedState at(std::size_t point, std::size_t snapshot) const;
};

/// A weighted point cloud observed at one snapshot. Rows of `points` are
/// augmented states.
struct EmpiricalMarginal {
    Eigen::MatrixXd points;
    Eigen::VectorXd weights;

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    /// Weights positive and summing to one within 1e-12.
    void validate() const;
};

/// Samples every record at the grid times (zero-order hold, zero padding past
/// a record's end). Deterministic: output order is record order.
AugmentedSamples build_augmented_samples(const Dataset& dataset, const SnapshotGrid& grid);

/// One uniformly weighted marginal per snapshot.
std::vector<EmpiricalMarginal> build_empirical_marginals(const AugmentedSamples& samples);

}  // namespace genprof
