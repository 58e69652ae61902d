#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genprof/types.hpp"

namespace genprof {

struct CatalogEntry {
    std::string id;
    ResourceContext context;
};

/// A set of profile records together with the context catalog they refer to.
///
/// Records keep their ingestion order; every derived structure (augmented
/// samples, marginals) follows that order, which keeps the pipeline
/// deterministic.
struct Dataset {
    std::vector<std::string> state_names;    // m columns
    std::vector<std::string> context_names;  // b columns
    std::vector<CatalogEntry> catalog;
    std::vector<ProfileRecord> records;

    std::size_t state_dim() const { return state_names.size(); }
    std::size_t context_dim() const { return context_names.size(); }

    /// Index into `catalog`, or nullopt when unknown.
    std::optional<std::size_t> find_context(const std::string& id) const;
    const ResourceContext& context(const std::string& id) const;

    /// Records whose context_id matches, in ingestion order.
    std::vector<const ProfileRecord*> runs_for(const std::string& context_id) const;

    /// Copy keeping only the listed contexts (catalog order preserved) and
    /// their records. Unknown ids throw InputError.
    Dataset restricted_to(std::span<const std::string> context_ids) const;

    /// Checks dimensions, catalog uniqueness, record validity and that every
    /// record's context matches its catalog entry.
    void validate() const;
};

/// Execution state of `record` at time t under the ingestion policy: zero-order
/// hold on the recorded samples, then zeros once t is past the record's
/// covered span (last sample time plus its sampling interval).
ExecutionState state_at(const ProfileRecord& record, double t);

/// End of the span a record covers before zero padding applies.
double covered_until(const ProfileRecord& record);

/// Pointwise mean over all runs of `context_id`, evaluated at `times`.
std::vector<ExecutionState> mean_profile(const Dataset& dataset, const std::string& context_id,
                                         std::span<const double> times);

/// On-disk dataset: two CSV files plus a JSON manifest.
struct DatasetFiles {
    Dataset dataset;
    SnapshotGrid grid;
    std::vector<std::string> state_units;
    std::vector<std::string> context_units;
    std::string time_unit = "s";
    double sample_dt = 0.0;  // informational; 0 when unknown
    std::string content_hash;  // sha256 over both CSV files
};

/// Reads a manifest and the two CSV files it names (paths relative to the
/// manifest's directory). Throws InputError on any schema violation.
DatasetFiles load_dataset(const std::filesystem::path& manifest_path);

/// Writes contexts.csv, profiles.csv and manifest.json into `dir`.
/// Returns the manifest path.
std::filesystem::path write_dataset(const DatasetFiles& files, const std::filesystem::path& dir);

}  // namespace genprof
