#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "genprof/dataset.hpp"
#include "genprof/types.hpp"

namespace genprof::sim {

/// One affine piece w . beta + offset.
struct AffinePiece {
    std::vector<double> weights;
    double offset = 0.0;
};

/// Rate as a function of context: the minimum over affine pieces, clamped at
/// zero. One piece gives a flat or linear response; several give a
/// saturating (kinked) one, e.g. min(a f, c bw).
struct RateLaw {
    std::vector<AffinePiece> pieces;

    double evaluate(const ResourceContext& beta) const;
};

struct Phase {
    double duration = 0.0;        // seconds
    std::vector<RateLaw> rates;   // one per execution-state component
    double noise = 0.0;           // relative std dev of multiplicative noise
};

struct PhaseModel {
    std::vector<std::string> state_names;
    std::vector<std::string> context_names;
    std::vector<std::string> state_units;
    std::vector<std::string> context_units;
    std::vector<CatalogEntry> catalog;
    std::vector<Phase> phases;

    std::size_t state_dim() const { return state_names.size(); }
    std::size_t context_dim() const { return context_names.size(); }
    double total_duration() const;

    /// Durations positive, noise non-negative, every law finite and
    /// non-negative on every catalog context.
    void validate() const;
};

/// Parses the JSON model format. The catalog is either an explicit
/// "catalog": [{"id", "values"}] list or a "context_grid": [[...], ...]
/// Cartesian product (ids c000, c001, ... in row-major order).
PhaseModel parse_phase_model(const std::string& json_text);
PhaseModel load_phase_model(const std::filesystem::path& path);

/// splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);
/// Per-run seed: splitmix64(splitmix64(splitmix64(seed) ^ context_index) ^ run_index),
/// with the xors applied to the already mixed values.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t context_index, std::uint64_t run_index);

/// Noise-free rate-law state at time t (zero once the task has finished).
ExecutionState expected_state(const PhaseModel& model, const ResourceContext& beta, double t);
std::vector<ExecutionState> expected_profile(const PhaseModel& model, const ResourceContext& beta,
                                             std::span<const double> times);

/// Samples at 0, dt, 2 dt, ... while before the end of the last phase. Each
/// value is rate * (1 + noise * z), z ~ N(0, 1), clamped at zero.
ProfileRecord simulate_profile(const PhaseModel& model, const CatalogEntry& context, double sample_dt,
                               std::uint64_t seed, const std::string& run_id = "run");

struct SimulationOptions {
    std::size_t runs_per_context = 10;
    double sample_dt = 0.01;
    double snapshot_dt = 0.05;
    std::uint64_t seed = 0;
};

/// n_d runs for each of `context_ids` (all of the catalog when empty). The
/// snapshot grid spans the task duration at `snapshot_dt`.
DatasetFiles simulate_dataset(const PhaseModel& model, std::span<const std::string> context_ids,
                              const SimulationOptions& options);

}  // namespace genprof::sim
