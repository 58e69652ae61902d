#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "genprof/dataset.hpp"
#include "genprof/types.hpp"

namespace genprof::eval {

struct DtwResult {
    double distance = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> path;  // (index in a, index in b), start to end
};

/// Exact dynamic time warping with Euclidean local cost and steps
/// (1,0), (0,1), (1,1). Ties prefer the diagonal step.
DtwResult dtw_distance(std::span<const ExecutionState> a, std::span<const ExecutionState> b);

/// DTW distance divided by (number of reference samples x largest Euclidean
/// norm of any reference state). Throws InputError when the reference is all zero.
double normalized_dtw(std::span<const ExecutionState> generated, std::span<const ExecutionState> reference);

/// Same distance divided by (warping path length x largest reference norm),
/// the other reading of "reference path length". Reported alongside.
double normalized_dtw_by_path(std::span<const ExecutionState> generated, std::span<const ExecutionState> reference);

/// Componentwise-bracketing contexts beta' <= beta <= beta'' from `known`:
/// the lower one maximizes its coordinate sum, the upper one minimizes it;
/// remaining ties go to the lexicographically larger lower / smaller upper.
struct Bracket {
    std::string lower_id;
    std::string upper_id;
};
Bracket find_bracket(std::span<const CatalogEntry> known, const ResourceContext& beta);

/// Pointwise average of the two bracketing contexts' mean profiles at `times`.
/// `known` is the training dataset; catalog entries without runs are ignored.
std::vector<ExecutionState> baseline_profile(const Dataset& known, const ResourceContext& beta,
                                             std::span<const double> times);

/// 100 (baseline - generative) / baseline; NaN when baseline is not positive.
double improvement_percent(double baseline_dtw, double generative_dtw);

struct AccuracyRow {
    std::string context_id;
    ResourceContext context;
    double dtw_generative = 0.0;
    double dtw_baseline = 0.0;
    double improvement_pct = 0.0;
};

struct AccuracyReport {
    std::vector<std::string> context_names;
    std::vector<AccuracyRow> rows;
    double mean_generative = 0.0;
    double mean_baseline = 0.0;
    double mean_improvement_pct = 0.0;  // improvement of the means
    double mean_generative_path_normalized = 0.0;
    double mean_baseline_path_normalized = 0.0;
    std::string normalization = "reference_sample_count";

    void write_csv(const std::filesystem::path& path) const;
};

/// A generated profile to score, keyed by catalog id.
struct ScoredProfile {
    std::string context_id;
    std::vector<double> times;
    std::vector<ExecutionState> states;
};

/// Scores each generated profile against the mean ground-truth profile of
/// the same context (sampled at the generated times) and against the
/// bracketing baseline built from `training`. Missing ground truth throws
/// InputError naming the context.
AccuracyReport accuracy_report(const Dataset& ground_truth, const Dataset& training,
                               std::span<const ScoredProfile> generated);

struct PlotPoint {
    double training_fraction = 0.0;
    double mean_dtw = 0.0;
    double relative_measurement_time = 0.0;
};

/// training_fraction,mean_dtw,relative_measurement_time
void write_plot_data(const std::filesystem::path& path, std::span<const PlotPoint> points);

/// Total duration of the training runs over the total duration of all runs.
double relative_measurement_time(const Dataset& ground_truth, const Dataset& training);

}  // namespace genprof::eval
