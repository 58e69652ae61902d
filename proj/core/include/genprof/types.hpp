#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace genprof {

/// Raised for malformed inputs: bad dimensions, non-finite values, unknown ids.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A vector of resource allocations (cache partitions, bandwidth partitions,
/// frequency, ...). Equality is exact componentwise equality.
struct ResourceContext {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }

    friend bool operator==(const ResourceContext&, const ResourceContext&) = default;
    friend auto operator<=>(const ResourceContext&, const ResourceContext&) = default;

    /// Throws InputError unless b >= 1 and every component is finite.
    void validate() const;
};

/// Per-interval microarchitectural rates (instructions retired, cache
/// requests, cache misses, ...).
struct ExecutionState {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }

    friend bool operator==(const ExecutionState&, const ExecutionState&) = default;
};

/// Concatenation (xi, beta). Execution-state components always come first.
struct AugmentedState {
    ExecutionState xi;
    ResourceContext beta;

    std::size_t size() const { return xi.size() + beta.size(); }
    std::vector<double> flatten() const;
};

struct ProfileSample {
    double time = 0.0;
    ExecutionState state;
};

/// One measured (or simulated) run of a task under a fixed context.
struct ProfileRecord {
    std::string run_id;
    std::string context_id;
    ResourceContext context;
    std::vector<ProfileSample> samples;

    /// Times start at 0, strictly increase, and all states share one
    /// finite non-negative dimension.
    void validate() const;
    double duration() const { return samples.empty() ? 0.0 : samples.back().time; }
};

/// Snapshot times 0 = t_1 < t_2 < ... < t_ns, with ns >= 2.
class SnapshotGrid {
public:
    SnapshotGrid() = default;
    explicit SnapshotGrid(std::vector<double> times);

    /// Grid 0, spacing, 2*spacing, ... up to and including end (within 1e-9).
    static SnapshotGrid uniform(double spacing, double end);

    std::span<const double> times() const { return times_; }
    std::size_t size() const { return times_.size(); }
    double operator[](std::size_t i) const { return times_[i]; }
    double front() const { return times_.front(); }
    double back() const { return times_.back(); }

    friend bool operator==(const SnapshotGrid&, const SnapshotGrid&) = default;

private:
    std::vector<double> times_;
};

}  // namespace genprof
