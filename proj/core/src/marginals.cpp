#include "genprof/marginals.hpp"

#include <algorithm>
#include <cmath>

namespace genprof {

AugmentedState AugmentedSamples::at(std::size_t point, std::size_t snapshot) const {
    const auto& row = snapshots.at(snapshot).row(static_cast<Eigen::Index>(point));
    AugmentedState s;
    s.xi.values.resize(state_dim);
    s.beta.values.resize(context_dim);
    for (std::size_t c = 0; c < state_dim; ++c) {
        s.xi.values[c] = row(static_cast<Eigen::Index>(c));
    }
    for (std::size_t c = 0; c < context_dim; ++c) {
        s.beta.values[c] = row(static_cast<Eigen::Index>(state_dim + c));
    }
    return s;
}

void EmpiricalMarginal::validate() const {
    if (points.rows() == 0 || weights.size() != points.rows()) {
        throw InputError("marginal needs one positive weight per point");
    }
    if ((weights.array() <= 0.0).any() || !weights.allFinite()) {
        throw InputError("marginal weights must be positive and finite");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-12) {
        throw InputError("marginal weights must sum to one");
    }
}

AugmentedSamples build_augmented_samples(const Dataset& dataset, const SnapshotGrid& grid) {
    if (dataset.records.empty()) {
        throw InputError("cannot build augmented samples from an empty dataset");
    }
    const std::size_t m = dataset.state_dim();
    const std::size_t b = dataset.context_dim();
    double horizon = 0.0;
    for (const auto& r : dataset.records) {
        if (r.samples.empty() || r.samples.front().state.size() != m) {
            throw InputError("profile '" + r.run_id + "' does not match the dataset state dimension");
        }
        if (r.context.size() != b) {
            throw InputError("profile '" + r.run_id + "' does not match the dataset context dimension");
        }
        horizon = std::max(horizon, covered_until(r));
    }
    if (grid.back() > horizon * (1.0 + 1e-9)) {
        throw InputError("snapshot grid extends past every profile");
    }

    AugmentedSamples out;
    out.state_dim = m;
    out.context_dim = b;
    const auto n = static_cast<Eigen::Index>(dataset.records.size());
    const auto d = static_cast<Eigen::Index>(m + b);
    out.snapshots.assign(grid.size(), Eigen::MatrixXd(n, d));
    for (Eigen::Index p = 0; p < n; ++p) {
        const auto& rec = dataset.records[static_cast<std::size_t>(p)];
        out.run_ids.push_back(rec.run_id);
        for (std::size_t s = 0; s < grid.size(); ++s) {
            const auto xi = state_at(rec, grid[s]);
            auto& mat = out.snapshots[s];
            for (std::size_t c = 0; c < m; ++c) {
                mat(p, static_cast<Eigen::Index>(c)) = xi.values[c];
            }
            for (std::size_t c = 0; c < b; ++c) {
                mat(p, static_cast<Eigen::Index>(m + c)) = rec.context.values[c];
            }
        }
    }
    return out;
}

std::vector<EmpiricalMarginal> build_empirical_marginals(const AugmentedSamples& samples) {
    if (samples.points() == 0) {
        throw InputError("no augmented samples");
    }
    const auto n = static_cast<Eigen::Index>(samples.points());
    std::vector<EmpiricalMarginal> out;
    out.reserve(samples.snapshots.size());
    for (const auto& snap : samples.snapshots) {
        out.push_back({snap, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n))});
    }
    return out;
}

}  // namespace genprof
