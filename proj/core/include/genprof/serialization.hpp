#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "genprof/generator.hpp"
#include "genprof/model.hpp"

namespace genprof {

inline constexpr const char* kSolutionFormat = "genprof-solution/1";

/// Writes the solver configuration, grid, catalog, the raw training
/// snapshots, and the potentials. Kernels are not stored; they are rebuilt
/// from the training snapshots on load.
std::string model_to_json(const GenerativeModel& model);
void save_model(const GenerativeModel& model, const std::filesystem::path& path);

GenerativeModel model_from_json(const std::string& text);
GenerativeModel load_model(const std::filesystem::path& path);

/// CSV with a t_seconds column followed by one column per state component.
void write_profile_csv(const SyntheticProfile& profile, const std::vector<std::string>& state_names,
                       const std::filesystem::path& path);

/// Parameters that produced a profile, next to its CSV. No timestamps, so
/// identical inputs give identical bytes.
void write_profile_sidecar(const SyntheticProfile& profile, const GenerativeModel& model,
                           const std::string& context_id, const std::filesystem::path& path);

struct ProfileTable {
    std::vector<std::string> state_names;
    std::vector<double> times;
    std::vector<ExecutionState> states;
};
ProfileTable read_profile_csv(const std::filesystem::path& path);

}  // namespace genprof
