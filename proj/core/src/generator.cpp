#include "genprof/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace genprof {

namespace {

ExecutionState row_state(const WeightedCloud& cloud, Eigen::Index row) {
    ExecutionState s;
    s.values.resize(static_cast<std::size_t>(cloud.points.cols()));
    for (Eigen::Index c = 0; c < cloud.points.cols(); ++c) {
        s.values[static_cast<std::size_t>(c)] = cloud.points(row, c);
    }
    return s;
}

void require_nonempty(const WeightedCloud& cloud) {
    if (cloud.points.rows() == 0 || cloud.weights.size() != cloud.points.rows()) {
        throw InputError("weighted cloud is empty or malformed");
    }
}

// Log-domain conditioning used when the plain kernel weights all underflow:
// the weights are rescaled by the largest kernel factor before
// exponentiating, which leaves the normalized result unchanged.
WeightedCloud condition_in_log_domain(const WeightedCloud& joint, const ResourceContext& beta,
                                      std::span<const double> bandwidth, std::size_t state_dim) {
    const auto m = static_cast<Eigen::Index>(state_dim);
    const auto b = static_cast<Eigen::Index>(beta.size());
    Eigen::VectorXd logw(joint.points.rows());
    for (Eigen::Index k = 0; k < joint.points.rows(); ++k) {
        double exponent = 0.0;
        for (Eigen::Index c = 0; c < b; ++c) {
            const double d = beta[static_cast<std::size_t>(c)] - joint.points(k, m + c);
            const double h = bandwidth[static_cast<std::size_t>(c)];
            exponent += d * d / (2.0 * h * h);
        }
        logw(k) = joint.weights(k) > 0.0 ? std::log(joint.weights(k)) - exponent
                                         : -std::numeric_limits<double>::infinity();
    }
    const double top = logw.maxCoeff();
    Eigen::VectorXd w = (logw.array() - top).exp().matrix();
    return WeightedCloud{joint.points.leftCols(m), w / w.sum()};
}

double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

void WeightedCloud::validate() const {
    require_nonempty(*this);
    if ((weights.array() < 0.0).any() || !weights.allFinite()) {
        throw InputError("cloud weights must be non-negative and finite");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-10) {
        throw InputError("cloud weights must sum to one");
    }
}

OutOfHullError::OutOfHullError(double nearest_distance)
    : std::runtime_error([&] {
          std::ostringstream msg;
          msg << "context lies outside the support of the learned joint (nearest support point at "
              << nearest_distance << "); increase the bandwidth";
          return msg.str();
      }()),
      nearest_distance_(nearest_distance) {}

WeightedCloud interpolate_joint(const GenerativeModel& model, std::size_t sigma, double lambda) {
    if (sigma + 1 >= model.grid.size()) {
        throw std::out_of_range("interpolate_joint: sigma must be below n_s - 1");
    }
    return interpolate_joint(model, model.solution.bimarginal(sigma, sigma + 1), sigma, lambda);
}

WeightedCloud interpolate_joint(const GenerativeModel& model, const Eigen::MatrixXd& bimarginal,
                                std::size_t sigma, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw InputError("interpolate_joint: lambda must lie in [0, 1]");
    }
    if (sigma + 1 >= model.grid.size()) {
        throw std::out_of_range("interpolate_joint: sigma must be below n_s - 1");
    }
    const Eigen::MatrixXd& from = model.samples.snapshots[sigma];
    const Eigen::MatrixXd& to = model.samples.snapshots[sigma + 1];
    const Eigen::Index n = from.rows();
    if (bimarginal.rows() != n || bimarginal.cols() != n) {
        throw InputError("interpolate_joint: bimarginal size does not match the model");
    }
    const double total = bimarginal.sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw InputError("interpolate_joint: bimarginal has no mass");
    }
    WeightedCloud out;
    out.points.resize(n * n, from.cols());
    out.weights.resize(n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index row = i * n + j;
            out.points.row(row) = (1.0 - lambda) * from.row(i) + lambda * to.row(j);
            out.weights(row) = bimarginal(i, j) / total;
        }
    }
    return out;
}

WeightedCloud context_marginal(std::span<const ResourceContext> known_contexts) {
    if (known_contexts.empty()) {
        throw InputError("context_marginal: need at least one context");
    }
    std::set<ResourceContext> seen;
    const auto b = static_cast<Eigen::Index>(known_contexts.front().size());
    WeightedCloud out;
    out.points.resize(static_cast<Eigen::Index>(known_contexts.size()), b);
    for (std::size_t k = 0; k < known_contexts.size(); ++k) {
        const auto& beta = known_contexts[k];
        beta.validate();
        if (static_cast<Eigen::Index>(beta.size()) != b) {
            throw InputError("context_marginal: contexts differ in dimension");
        }
        if (!seen.insert(beta).second) {
            throw InputError("context_marginal: duplicate context");
        }
        for (Eigen::Index c = 0; c < b; ++c) {
            out.points(static_cast<Eigen::Index>(k), c) = beta[static_cast<std::size_t>(c)];
        }
    }
    out.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(known_contexts.size()),
                                            1.0 / static_cast<double>(known_contexts.size()));
    return out;
}

WeightedCloud condition_on_context(const WeightedCloud& joint, const ResourceContext& beta,
                                   std::span<const double> bandwidth, std::size_t state_dim) {
    require_nonempty(joint);
    const auto m = static_cast<Eigen::Index>(state_dim);
    const auto b = static_cast<Eigen::Index>(beta.size());
    if (joint.points.cols() != m + b || static_cast<Eigen::Index>(bandwidth.size()) != b) {
        throw InputError("condition_on_context: dimension mismatch");
    }
    for (double h : bandwidth) {
        if (!(h > 0.0) || !std::isfinite(h)) {
            throw InputError("condition_on_context: bandwidths must be positive");
        }
    }
    Eigen::VectorXd w(joint.points.rows());
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < joint.points.rows(); ++k) {
        double exponent = 0.0;
        double dist2 = 0.0;
        for (Eigen::Index c = 0; c < b; ++c) {
            const double d = beta[static_cast<std::size_t>(c)] - joint.points(k, m + c);
            const double h = bandwidth[static_cast<std::size_t>(c)];
            exponent += d * d / (2.0 * h * h);
            dist2 += d * d;
        }
        nearest = std::min(nearest, std::sqrt(dist2));
        w(k) = joint.weights(k) * std::exp(-exponent);
    }
    const double total = w.sum();
    if (!(total > 0.0)) {
        throw OutOfHullError(nearest);
    }
    return WeightedCloud{joint.points.leftCols(m), w / total};
}

ExecutionState max_likelihood_state(const WeightedCloud& cloud) {
    require_nonempty(cloud);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < cloud.weights.size(); ++k) {
        if (cloud.weights(k) > cloud.weights(best)) {
            best = k;
        }
    }
    return row_state(cloud, best);
}

ExecutionState mean_state(const WeightedCloud& cloud) {
    require_nonempty(cloud);
    const Eigen::VectorXd mean = cloud.points.transpose() * cloud.weights / cloud.weights.sum();
    return ExecutionState{std::vector<double>(mean.data(), mean.data() + mean.size())};
}

std::vector<ExecutionState> sample_states(const WeightedCloud& cloud, std::size_t count, std::uint64_t seed) {
    require_nonempty(cloud);
    if (count < 1) {
        throw InputError("sample_states: count must be at least 1");
    }
    std::mt19937_64 rng(seed);
    std::discrete_distribution<Eigen::Index> pick(cloud.weights.data(),
                                                  cloud.weights.data() + cloud.weights.size());
    std::vector<ExecutionState> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(row_state(cloud, pick(rng)));
    }
    return out;
}

std::vector<ExecutionState> top_states(const WeightedCloud& cloud, std::size_t k) {
    require_nonempty(cloud);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(cloud.weights.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return cloud.weights(a) > cloud.weights(b); });
    order.resize(std::min(k, order.size()));
    std::vector<ExecutionState> out;
    for (auto row : order) {
        out.push_back(row_state(cloud, row));
    }
    return out;
}

std::vector<double> silverman_bandwidth(std::span<const ResourceContext> contexts) {
    if (contexts.empty()) {
        throw InputError("silverman_bandwidth: no contexts");
    }
    const std::size_t b = contexts.front().size();
    const double n = static_cast<double>(contexts.size());
    std::vector<double> h(b);
    for (std::size_t c = 0; c < b; ++c) {
        std::vector<double> v;
        for (const auto& beta : contexts) {
            v.push_back(beta[c]);
        }
        std::sort(v.begin(), v.end());
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double var = 0.0;
        for (double x : v) {
            var += (x - mean) * (x - mean);
        }
        const double sd = contexts.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
        const double iqr = quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
        double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
        // A constant component carries no information; any positive width works.
        if (!(spread > 0.0)) {
            spread = std::max(1.0, std::abs(v.front()));
        }
        h[c] = 0.9 * spread * std::pow(n, -0.2);
    }
    return h;
}

std::string to_string(ProfileMode mode) {
    switch (mode) {
        case ProfileMode::MaxLikelihood:
            return "maxlik";
        case ProfileMode::Mean:
            return "mean";
        case ProfileMode::Sample:
            return "sample";
    }
    return "maxlik";
}

ProfileMode parse_profile_mode(const std::string& text) {
    if (text == "maxlik" || text == "max-likelihood") {
        return ProfileMode::MaxLikelihood;
    }
    if (text == "mean") {
        return ProfileMode::Mean;
    }
    if (text == "sample") {
        return ProfileMode::Sample;
    }
    throw InputError("unknown profile mode '" + text + "' (expected maxlik, mean or sample)");
}

std::vector<double> generation_times(const SnapshotGrid& grid, double delta_t) {
    if (!(delta_t > 0.0) || !std::isfinite(delta_t)) {
        throw InputError("delta_t must be positive");
    }
    const double start = grid.front();
    const double end = grid.back();
    std::vector<double> times;
    for (std::size_t k = 0;; ++k) {
        const double t = start + static_cast<double>(k) * delta_t;
        if (t >= end - 1e-9 * delta_t) {
            break;
        }
        times.push_back(t);
    }
    times.push_back(end);
    return times;
}

IntervalPosition locate(const SnapshotGrid& grid, double t) {
    const auto times = grid.times();
    const std::size_t last = times.size() - 1;
    if (t < times.front() - 1e-12 || t > times.back() + 1e-9 * (times.back() - times[last - 1])) {
        throw InputError("time lies outside the snapshot grid");
    }
    std::size_t sigma = 0;
    for (std::size_t s = 0; s < last; ++s) {
        const double spacing = times[s + 1] - times[s];
        if (t >= times[s] - 1e-9 * spacing) {
            sigma = s;
        }
    }
    const double spacing = times[sigma + 1] - times[sigma];
    // Snap to the right endpoint too, so a time that lands on t_{sigma+1}
    // up to rounding moves into the next interval at lambda = 0.
    if (sigma + 1 < last && std::abs(t - times[sigma + 1]) <= 1e-9 * spacing) {
        return {sigma + 1, 0.0};
    }
    double lambda = (t - times[sigma]) / spacing;
    if (std::abs(lambda) <= 1e-9) {
        lambda = 0.0;
    }
    if (std::abs(lambda - 1.0) <= 1e-9) {
        lambda = 1.0;
    }
    return {sigma, std::clamp(lambda, 0.0, 1.0)};
}

std::vector<SyntheticProfile> generate_profiles(const GenerativeModel& model,
                                                std::span<const ResourceContext> contexts,
                                                const GenerationOptions& options) {
    if (!model.solution.converged && !options.allow_unconverged) {
        throw NotConvergedError("solver did not converge; pass the override flag to generate anyway");
    }
    const auto training = model.training_context_values();
    std::vector<double> bandwidth = options.bandwidth;
    if (bandwidth.empty()) {
        bandwidth = silverman_bandwidth(training);
    }
    if (bandwidth.size() == 1 && model.context_dim() > 1) {
        bandwidth.assign(model.context_dim(), bandwidth.front());
    }
    if (bandwidth.size() != model.context_dim()) {
        throw InputError("bandwidth needs one value per context component");
    }

    const auto times = generation_times(model.grid, options.delta_t);
    std::vector<double> lo(model.context_dim(), INFINITY), hi(model.context_dim(), -INFINITY);
    for (const auto& beta : training) {
        for (std::size_t c = 0; c < beta.size(); ++c) {
            lo[c] = std::min(lo[c], beta[c]);
            hi[c] = std::max(hi[c], beta[c]);
        }
    }

    std::vector<SyntheticProfile> out(contexts.size());
    std::vector<std::mt19937_64> rngs;
    for (std::size_t k = 0; k < contexts.size(); ++k) {
        const auto& beta = contexts[k];
        beta.validate();
        if (beta.size() != model.context_dim()) {
            throw InputError("requested context has the wrong dimension");
        }
        auto& p = out[k];
        p.context = beta;
        p.mode = options.mode;
        p.delta_t = options.delta_t;
        p.bandwidth = bandwidth;
        p.seed = options.seed;
        p.times = times;
        p.states.reserve(times.size());
        for (std::size_t c = 0; c < beta.size(); ++c) {
            if (beta[c] < lo[c] || beta[c] > hi[c]) {
                p.warnings.push_back("context component " + std::to_string(c) +
                                     " lies outside the training range; extrapolating");
                break;
            }
        }
        rngs.emplace_back(options.seed + k);
    }

    std::vector<bool> hull_warned(contexts.size(), false);
    std::vector<Eigen::MatrixXd> bimarginals(model.grid.size() - 1);
    for (double t : times) {
        const auto pos = locate(model.grid, t);
        auto& bm = bimarginals[pos.sigma];
        if (bm.size() == 0) {
            bm = model.solution.bimarginal(pos.sigma, pos.sigma + 1);
        }
        const WeightedCloud joint = interpolate_joint(model, bm, pos.sigma, pos.lambda);
        for (std::size_t k = 0; k < contexts.size(); ++k) {
            WeightedCloud cond;
            try {
                cond = condition_on_context(joint, contexts[k], bandwidth, model.state_dim());
            } catch (const OutOfHullError& e) {
                if (!hull_warned[k]) {
                    std::ostringstream msg;
                    msg << "no kernel mass near the requested context (nearest support point at "
                        << e.nearest_distance() << "); falling back to the nearest support points";
                    out[k].warnings.push_back(msg.str());
                    hull_warned[k] = true;
                }
                cond = condition_in_log_domain(joint, contexts[k], bandwidth, model.state_dim());
            }
            ExecutionState state;
            switch (options.mode) {
                case ProfileMode::MaxLikelihood:
                    state = max_likelihood_state(cond);
                    break;
                case ProfileMode::Mean:
                    state = mean_state(cond);
                    break;
                case ProfileMode::Sample: {
                    std::discrete_distribution<Eigen::Index> pick(cond.weights.data(),
                                                                  cond.weights.data() + cond.weights.size());
                    state = row_state(cond, pick(rngs[k]));
                    break;
                }
            }
            out[k].states.push_back(std::move(state));
        }
    }
    return out;
}

SyntheticProfile generate_profile(const GenerativeModel& model, const ResourceContext& beta,
                                  const GenerationOptions& options) {
    auto profiles = generate_profiles(model, std::span<const ResourceContext>(&beta, 1), options);
    return std::move(profiles.front());
}

}  // namespace genprof
