#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "genprof/marginals.hpp"
#include "genprof/tensor.hpp"

namespace genprof {

/// Path-structured cost: the full tensor entry for (i_1, ..., i_ns) is
/// sum_j matrices[j](i_j, i_{j+1}).
struct PathCost {
    std::vector<Eigen::MatrixXd> matrices;  // n_s - 1 matrices, N x N

    std::size_t snapshots() const { return matrices.size() + 1; }
    std::size_t points() const { return matrices.empty() ? 0 : static_cast<std::size_t>(matrices.front().rows()); }
};

/// Squared Euclidean distance between every row of `a` and every row of `b`.
Eigen::MatrixXd pairwise_cost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Costs between consecutive (scaled) marginals.
PathCost build_path_cost(std::span<const EmpiricalMarginal> scaled_marginals);

/// Entry-for-entry dense realization of a path cost.
DenseTensor materialize_dense(const PathCost& cost, std::size_t cap = kDenseEntryCap);

}  // namespace genprof
