#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "genprof/marginals.hpp"

namespace genprof {

/// Upper end of the scaled coordinate range. Keeping costs small keeps the
/// Gibbs kernel exp(-C/eps) away from underflow.
inline constexpr double kScaledRange = 0.1;

/// Affine map x -> (x - offset) * factor. A degenerate component (constant
/// over the snapshot) has factor 0 and maps back to `offset`.
struct ComponentMap {
    double offset = 0.0;
    double factor = 0.0;
    bool degenerate = false;

    double forward(double x) const { return (x - offset) * factor; }
    double inverse(double y) const { return degenerate ? offset : offset + y / factor; }
};

/// Per-snapshot, per-component maps into [0, kScaledRange].
struct ScalingRecord {
    std::vector<std::vector<ComponentMap>> maps;  // [snapshot][component]

    Eigen::MatrixXd forward(const Eigen::MatrixXd& raw, std::size_t snapshot) const;
    Eigen::MatrixXd inverse(const Eigen::MatrixXd& scaled, std::size_t snapshot) const;
};

/// Scales each snapshot componentwise so its min maps to 0 and max to 0.1.
/// Weights are passed through unchanged. Throws InputError on non-finite input.
std::pair<std::vector<EmpiricalMarginal>, ScalingRecord>
scale_marginals(std::span<const EmpiricalMarginal> marginals);

}  // namespace genprof
