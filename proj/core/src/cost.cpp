#include "genprof/cost.hpp"

#include <stdexcept>

namespace genprof {

Eigen::MatrixXd pairwise_cost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) {
        throw InputError("pairwise_cost: point dimensions differ");
    }
    Eigen::MatrixXd c(a.rows(), b.rows());
    // Explicit differences rather than |a|^2 + |b|^2 - 2ab: no cancellation,
    // so entries are exactly symmetric and never negative.
    for (Eigen::Index q = 0; q < b.rows(); ++q) {
        for (Eigen::Index p = 0; p < a.rows(); ++p) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < a.cols(); ++k) {
                const double d = a(p, k) - b(q, k);
                s += d * d;
            }
            c(p, q) = s;
        }
    }
    return c;
}

PathCost build_path_cost(std::span<const EmpiricalMarginal> scaled_marginals) {
    if (scaled_marginals.size() < 2) {
        throw InputError("path cost needs at least two marginals");
    }
    const auto n = scaled_marginals.front().points.rows();
    PathCost out;
    out.matrices.reserve(scaled_marginals.size() - 1);
    for (std::size_t j = 0; j + 1 < scaled_marginals.size(); ++j) {
        if (scaled_marginals[j + 1].points.rows() != n) {
            throw InputError("path cost needs equal point counts across snapshots");
        }
        out.matrices.push_back(pairwise_cost(scaled_marginals[j].points, scaled_marginals[j + 1].points));
    }
    return out;
}

DenseTensor materialize_dense(const PathCost& cost, std::size_t cap) {
    if (cost.matrices.empty()) {
        throw InputError("empty path cost");
    }
    const std::vector<std::size_t> shape(cost.snapshots(), cost.points());
    checked_entry_count(shape, cap);
    DenseTensor dense(shape);
    std::vector<std::size_t> idx(shape.size());
    for (std::size_t flat = 0; flat < dense.size(); ++flat) {
        dense.unravel(flat, idx);
        double s = 0.0;
        for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
            s += cost.matrices[j](static_cast<Eigen::Index>(idx[j]), static_cast<Eigen::Index>(idx[j + 1]));
        }
        dense[flat] = s;
    }
    return dense;
}

}  // namespace genprof
