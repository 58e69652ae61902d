#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genprof/cost.hpp"
#include "genprof/dataset.hpp"
#include "genprof/marginals.hpp"
#include "genprof/scaling.hpp"
#include "genprof/solver.hpp"

namespace genprof {

/// Everything needed to synthesize profiles: the training snapshots in raw
/// and scaled coordinates, the solved potentials, and the context catalog.
struct GenerativeModel {
    SnapshotGrid grid;
    std::vector<std::string> state_names;
    std::vector<std::string> context_names;
    std::vector<CatalogEntry> catalog;            // every context profiles may be requested for
    std::vector<std::string> training_contexts;   // ids the solver saw
    AugmentedSamples samples;                     // raw augmented points
    ScalingRecord scaling;
    std::vector<EmpiricalMarginal> scaled_marginals;
    SolverConfig config;
    SolverSolution solution;
    std::string dataset_hash;

    std::size_t state_dim() const { return samples.state_dim; }
    std::size_t context_dim() const { return samples.context_dim; }
    std::size_t points() const { return samples.points(); }

    /// Distinct training contexts, in catalog order.
    std::vector<ResourceContext> training_context_values() const;
    const ResourceContext& context(const std::string& id) const;
};

/// Builds marginals from the records of `training_ids`, scales them, and
/// solves. The full catalog of `dataset` is kept for later generation.
GenerativeModel train_model(const Dataset& dataset, const SnapshotGrid& grid,
                            std::span<const std::string> training_ids, const SolverConfig& config,
                            std::string dataset_hash = {});

/// Same preprocessing as train_model but installs the given potentials
/// instead of solving (used when loading a saved solution).
GenerativeModel restore_model(const Dataset& training_data, std::vector<CatalogEntry> catalog,
                              const SnapshotGrid& grid, const SolverConfig& config,
                              std::vector<Eigen::VectorXd> potentials, std::size_t iterations,
                              double final_error, bool converged, std::vector<double> residuals,
                              std::string dataset_hash);

/// Picks round(fraction * |catalog|) contexts (at least two when the catalog
/// allows). The componentwise-minimum and -maximum contexts are always
/// included when they exist, so every catalog entry has a bracketing pair.
/// The rest are drawn by a seeded shuffle. Result is in catalog order.
std::vector<std::string> select_training_contexts(std::span<const CatalogEntry> catalog, double fraction,
                                                  std::uint64_t seed);

}  // namespace genprof
