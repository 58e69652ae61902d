#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genprof/model.hpp"
#include "genprof/types.hpp"

namespace genprof {

/// Weighted scattered distribution. Rows of `points` are augmented states
/// (before conditioning) or execution states (after).
struct WeightedCloud {
    Eigen::MatrixXd points;
    Eigen::VectorXd weights;

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    /// Non-negative weights summing to one within 1e-10.
    void validate() const;
};

/// Conditioning found no kernel mass: the requested context is too far from
/// every support point for the bandwidth in use.
class OutOfHullError : public std::runtime_error {
public:
    explicit OutOfHullError(double nearest_distance);
    double nearest_distance() const { return nearest_distance_; }

private:
    double nearest_distance_;
};

/// Refusal to generate from a solution that did not converge.
class NotConvergedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Joint distribution at t = (1 - lambda) t_sigma + lambda t_{sigma+1}:
/// point (i, j), stored at row i * N + j, is the convex combination of the
/// raw training points eta_i(t_sigma) and eta_j(t_{sigma+1}); its weight is
/// the (renormalized) bimarginal coupling entry. `sigma` is 0-based and must
/// be below n_s - 1.
WeightedCloud interpolate_joint(const GenerativeModel& model, std::size_t sigma, double lambda);

/// Same, from an already computed bimarginal (avoids recomputing it per time step).
WeightedCloud interpolate_joint(const GenerativeModel& model, const Eigen::MatrixXd& bimarginal,
                                std::size_t sigma, double lambda);

/// Uniform distribution over the known contexts (points are beta vectors).
/// Duplicates are rejected.
WeightedCloud context_marginal(std::span<const ResourceContext> known_contexts);

/// Reweights each joint point by a product Gaussian kernel on its context
/// components and keeps only the execution-state columns. Throws
/// OutOfHullError if every kernel weight underflows; generate_profiles
/// catches that, warns, and falls back to the nearest support points.
WeightedCloud condition_on_context(const WeightedCloud& joint, const ResourceContext& beta,
                                   std::span<const double> bandwidth, std::size_t state_dim);

/// Highest-weight point; ties go to the lowest index.
ExecutionState max_likelihood_state(const WeightedCloud& cloud);
ExecutionState mean_state(const WeightedCloud& cloud);
/// I.i.d. categorical draws by weight.
std::vector<ExecutionState> sample_states(const WeightedCloud& cloud, std::size_t count, std::uint64_t seed);
/// The k highest-weight points in descending weight order (ties by index).
std::vector<ExecutionState> top_states(const WeightedCloud& cloud, std::size_t k);

/// Per-component Silverman bandwidth 0.9 min(sd, IQR/1.34) n^(-1/5) over the
/// distinct training contexts.
std::vector<double> silverman_bandwidth(std::span<const ResourceContext> contexts);

enum class ProfileMode { MaxLikelihood, Mean, Sample };

std::string to_string(ProfileMode mode);
ProfileMode parse_profile_mode(const std::string& text);

struct GenerationOptions {
    double delta_t = 0.01;
    ProfileMode mode = ProfileMode::MaxLikelihood;
    std::vector<double> bandwidth;  // empty: Silverman over the training contexts
    std::uint64_t seed = 0;
    bool allow_unconverged = false;
};

struct SyntheticProfile {
    ResourceContext context;
    ProfileMode mode = ProfileMode::MaxLikelihood;
    double delta_t = 0.0;
    std::vector<double> bandwidth;
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<ExecutionState> states;  // raw units
    std::vector<std::string> warnings;
};

/// t_1, t_1 + dt, ... and finally t_ns (the last step may be shorter).
std::vector<double> generation_times(const SnapshotGrid& grid, double delta_t);

/// Bracketing interval for time t: t in [t_sigma, t_{sigma+1}] with lambda
/// the fractional position. Times that coincide with a snapshot (within
/// 1e-9 of the spacing) snap to lambda = 0, except the final snapshot,
/// which is lambda = 1 of the last interval.
struct IntervalPosition {
    std::size_t sigma = 0;
    double lambda = 0.0;
};
IntervalPosition locate(const SnapshotGrid& grid, double t);

/// Synthesizes one profile per requested context. Loops time-major so each
/// interpolated joint is built once and shared by every context.
std::vector<SyntheticProfile> generate_profiles(const GenerativeModel& model,
                                                std::span<const ResourceContext> contexts,
                                                const GenerationOptions& options);

SyntheticProfile generate_profile(const GenerativeModel& model, const ResourceContext& beta,
                                  const GenerationOptions& options);

}  // namespace genprof
