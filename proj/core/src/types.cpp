#include "genprof/types.hpp"

#include <cmath>
#include <sstream>

namespace genprof {

void ResourceContext::validate() const {
    if (values.empty()) {
        throw InputError("resource context must have at least one component");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw InputError("resource context has a non-finite component");
        }
    }
}

std::vector<double> AugmentedState::flatten() const {
    std::vector<double> out;
    out.reserve(size());
    out.insert(out.end(), xi.values.begin(), xi.values.end());
    out.insert(out.end(), beta.values.begin(), beta.values.end());
    return out;
}

void ProfileRecord::validate() const {
    if (samples.empty()) {
        throw InputError("profile '" + run_id + "' has no samples");
    }
    context.validate();
    const std::size_t m = samples.front().state.size();
    if (m == 0) {
        throw InputError("profile '" + run_id + "' has zero-dimensional states");
    }
    if (samples.front().time != 0.0) {
        throw InputError("profile '" + run_id + "' does not start at t = 0");
    }
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        if (s.state.size() != m) {
            throw InputError("profile '" + run_id + "' mixes state dimensions");
        }
        if (k > 0 && !(s.time > samples[k - 1].time)) {
            std::ostringstream msg;
            msg << "profile '" << run_id << "' times not strictly increasing at sample " << k;
            throw InputError(msg.str());
        }
        for (double v : s.state.values) {
            if (!std::isfinite(v) || v < 0.0) {
                throw InputError("profile '" + run_id + "' has a negative or non-finite rate");
            }
        }
    }
}

SnapshotGrid::SnapshotGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) {
        throw InputError("snapshot grid needs at least two times");
    }
    if (times_.front() != 0.0) {
        throw InputError("snapshot grid must start at t = 0");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i]) || !(times_[i] > times_[i - 1])) {
            throw InputError("snapshot grid times must be finite and strictly increasing");
        }
    }
}

SnapshotGrid SnapshotGrid::uniform(double spacing, double end) {
    if (!(spacing > 0.0) || !(end > 0.0)) {
        throw InputError("uniform grid needs positive spacing and end");
    }
    std::vector<double> t;
    for (std::size_t k = 0;; ++k) {
        const double v = static_cast<double>(k) * spacing;
        if (v > end + 1e-9 * spacing) {
            break;
        }
        t.push_back(v);
    }
    return SnapshotGrid(std::move(t));
}

}  // namespace genprof
