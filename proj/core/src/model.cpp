#include "genprof/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace genprof {

namespace {

struct Prepared {
    AugmentedSamples samples;
    ScalingRecord scaling;
    std::vector<EmpiricalMarginal> scaled;
};

Prepared prepare(const Dataset& training, const SnapshotGrid& grid) {
    Prepared p;
    p.samples = build_augmented_samples(training, grid);
    const auto raw = build_empirical_marginals(p.samples);
    auto [scaled, record] = scale_marginals(raw);
    p.scaled = std::move(scaled);
    p.scaling = std::move(record);
    return p;
}

std::vector<std::string> training_ids_in(const Dataset& training) {
    std::vector<std::string> ids;
    for (const auto& e : training.catalog) {
        if (!training.runs_for(e.id).empty()) {
            ids.push_back(e.id);
        }
    }
    return ids;
}

}  // namespace

std::vector<ResourceContext> GenerativeModel::training_context_values() const {
    std::vector<ResourceContext> out;
    for (const auto& id : training_contexts) {
        out.push_back(context(id));
    }
    return out;
}

const ResourceContext& GenerativeModel::context(const std::string& id) const {
    for (const auto& e : catalog) {
        if (e.id == id) {
            return e.context;
        }
    }
    throw InputError("unknown context id '" + id + "'");
}

GenerativeModel train_model(const Dataset& dataset, const SnapshotGrid& grid,
                            std::span<const std::string> training_ids, const SolverConfig& config,
                            std::string dataset_hash) {
    config.validate();
    std::set<std::string> unique(training_ids.begin(), training_ids.end());
    if (unique.size() != training_ids.size()) {
        throw InputError("training contexts must be distinct");
    }
    const Dataset training = dataset.restricted_to(training_ids);
    training.validate();

    GenerativeModel model;
    model.grid = grid;
    model.state_names = dataset.state_names;
    model.context_names = dataset.context_names;
    model.catalog = dataset.catalog;
    model.training_contexts = training_ids_in(training);
    if (model.training_contexts.size() != training_ids.size()) {
        throw InputError("every training context needs at least one recorded run");
    }
    auto prepared = prepare(training, grid);
    model.samples = std::move(prepared.samples);
    model.scaling = std::move(prepared.scaling);
    model.scaled_marginals = std::move(prepared.scaled);
    model.config = config;
    model.dataset_hash = std::move(dataset_hash);
    model.solution = sinkhorn_solve(build_path_cost(model.scaled_marginals), model.scaled_marginals, config);
    return model;
}

GenerativeModel restore_model(const Dataset& training_data, std::vector<CatalogEntry> catalog,
                              const SnapshotGrid& grid, const SolverConfig& config,
                              std::vector<Eigen::VectorXd> potentials, std::size_t iterations,
                              double final_error, bool converged, std::vector<double> residuals,
                              std::string dataset_hash) {
    config.validate();
    training_data.validate();
    GenerativeModel model;
    model.grid = grid;
    model.state_names = training_data.state_names;
    model.context_names = training_data.context_names;
    model.catalog = std::move(catalog);
    model.training_contexts = training_ids_in(training_data);
    auto prepared = prepare(training_data, grid);
    model.samples = std::move(prepared.samples);
    model.scaling = std::move(prepared.scaling);
    model.scaled_marginals = std::move(prepared.scaled);
    model.config = config;
    model.dataset_hash = std::move(dataset_hash);

    if (potentials.size() != grid.size()) {
        throw InputError("stored potentials do not match the snapshot grid");
    }
    for (const auto& u : potentials) {
        if (static_cast<std::size_t>(u.size()) != model.points() || (u.array() <= 0.0).any() ||
            !u.allFinite()) {
            throw InputError("stored potentials must be positive, finite, and one per training point");
        }
    }
    model.solution.potentials = std::move(potentials);
    model.solution.kernels = gibbs_kernels(build_path_cost(model.scaled_marginals), config.epsilon);
    model.solution.epsilon = config.epsilon;
    model.solution.iterations = iterations;
    model.solution.final_error = final_error;
    model.solution.converged = converged;
    model.solution.residuals = std::move(residuals);
    return model;
}

std::vector<std::string> select_training_contexts(std::span<const CatalogEntry> catalog, double fraction,
                                                  std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw InputError("training fraction must lie in (0, 1]");
    }
    if (catalog.empty()) {
        throw InputError("empty context catalog");
    }
    const std::size_t total = catalog.size();
    std::size_t want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
    want = std::clamp<std::size_t>(want, std::min<std::size_t>(2, total), total);

    const std::size_t b = catalog.front().context.size();
    std::vector<double> lo(b, INFINITY), hi(b, -INFINITY);
    for (const auto& e : catalog) {
        for (std::size_t c = 0; c < b; ++c) {
            lo[c] = std::min(lo[c], e.context[c]);
            hi[c] = std::max(hi[c], e.context[c]);
        }
    }
    std::vector<bool> chosen(total, false);
    std::size_t count = 0;
    for (std::size_t i = 0; i < total; ++i) {
        if ((catalog[i].context.values == lo || catalog[i].context.values == hi) && count < want) {
            chosen[i] = true;
            ++count;
        }
    }
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < total; ++i) {
        if (!chosen[i]) {
            rest.push_back(i);
        }
    }
    std::mt19937_64 rng(seed);
    std::shuffle(rest.begin(), rest.end(), rng);
    for (std::size_t k = 0; count < want && k < rest.size(); ++k, ++count) {
        chosen[rest[k]] = true;
    }
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < total; ++i) {
        if (chosen[i]) {
            ids.push_back(catalog[i].id);
        }
    }
    return ids;
}

}  // namespace genprof
