#include "genprof/workloadsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

namespace genprof::sim {

using nlohmann::json;

double RateLaw::evaluate(const ResourceContext& beta) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pieces) {
        if (p.weights.size() != beta.size()) {
            throw InputError("rate law weight count does not match the context dimension");
        }
        double v = p.offset;
        for (std::size_t c = 0; c < beta.size(); ++c) {
            v += p.weights[c] * beta[c];
        }
        best = std::min(best, v);
    }
    return std::max(best, 0.0);
}

double PhaseModel::total_duration() const {
    double t = 0.0;
    for (const auto& p : phases) {
        t += p.duration;
    }
    return t;
}

void PhaseModel::validate() const {
    if (state_names.empty() || context_names.empty()) {
        throw InputError("phase model needs state and context names");
    }
    if (phases.empty()) {
        throw InputError("phase model needs at least one phase");
    }
    if (catalog.empty()) {
        throw InputError("phase model needs a non-empty context catalog");
    }
    for (const auto& e : catalog) {
        e.context.validate();
        if (e.context.size() != context_dim()) {
            throw InputError("catalog context '" + e.id + "' has the wrong dimension");
        }
    }
    for (std::size_t k = 0; k < phases.size(); ++k) {
        const auto& p = phases[k];
        const std::string where = "phase " + std::to_string(k);
        if (!(p.duration > 0.0) || !std::isfinite(p.duration)) {
            throw InputError(where + ": duration must be positive");
        }
        if (!(p.noise >= 0.0) || !std::isfinite(p.noise)) {
            throw InputError(where + ": noise must be non-negative");
        }
        if (p.rates.size() != state_dim()) {
            throw InputError(where + ": needs one rate law per state component");
        }
        for (const auto& law : p.rates) {
            if (law.pieces.empty()) {
                throw InputError(where + ": rate law without pieces");
            }
            for (const auto& e : catalog) {
                const double v = law.evaluate(e.context);
                if (!std::isfinite(v)) {
                    throw InputError(where + ": rate law not finite on context '" + e.id + "'");
                }
            }
        }
    }
}

namespace {

RateLaw parse_law(const json& j, std::size_t b) {
    RateLaw law;
    // A bare number is a flat rate.
    if (j.is_number()) {
        law.pieces.push_back({std::vector<double>(b, 0.0), j.get<double>()});
        return law;
    }
    const json& pieces = j.is_array() ? j : j.at("min_of");
    for (const auto& p : pieces) {
        AffinePiece piece;
        piece.weights = p.value("weights", std::vector<double>(b, 0.0));
        piece.offset = p.value("offset", 0.0);
        law.pieces.push_back(std::move(piece));
    }
    return law;
}

}  // namespace

PhaseModel parse_phase_model(const std::string& json_text) {
    PhaseModel model;
    try {
        const json j = json::parse(json_text);
        model.state_names = j.at("state_names").get<std::vector<std::string>>();
        model.context_names = j.at("context_names").get<std::vector<std::string>>();
        model.state_units = j.value("state_units", std::vector<std::string>{});
        model.context_units = j.value("context_units", std::vector<std::string>{});
        const std::size_t b = model.context_names.size();
        if (j.contains("catalog")) {
            for (const auto& e : j.at("catalog")) {
                model.catalog.push_back({e.at("id").get<std::string>(),
                                         ResourceContext{e.at("values").get<std::vector<double>>()}});
            }
        } else {
            const auto axes = j.at("context_grid").get<std::vector<std::vector<double>>>();
            if (axes.size() != b) {
                throw InputError("context_grid needs one axis per context component");
            }
            std::size_t total = 1;
            for (const auto& a : axes) {
                if (a.empty()) {
                    throw InputError("context_grid axis is empty");
                }
                total *= a.size();
            }
            const int width = total > 1000 ? 4 : 3;
            for (std::size_t flat = 0; flat < total; ++flat) {
                std::vector<double> v(b);
                std::size_t rem = flat;
                for (std::size_t c = b; c-- > 0;) {
                    v[c] = axes[c][rem % axes[c].size()];
                    rem /= axes[c].size();
                }
                char id[32];
                std::snprintf(id, sizeof id, "c%0*zu", width, flat);
                model.catalog.push_back({id, ResourceContext{std::move(v)}});
            }
        }
        for (const auto& p : j.at("phases")) {
            Phase phase;
            phase.duration = p.at("duration").get<double>();
            phase.noise = p.value("noise", 0.0);
            for (const auto& law : p.at("rates")) {
                phase.rates.push_back(parse_law(law, b));
            }
            model.phases.push_back(std::move(phase));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("phase model: ") + e.what());
    }
    model.validate();
    return model;
}

PhaseModel load_phase_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_phase_model(ss.str());
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t context_index, std::uint64_t run_index) {
    return splitmix64(splitmix64(splitmix64(seed) ^ context_index) ^ run_index);
}

ExecutionState expected_state(const PhaseModel& model, const ResourceContext& beta, double t) {
    double start = 0.0;
    for (const auto& p : model.phases) {
        if (t < start + p.duration) {
            ExecutionState s;
            for (const auto& law : p.rates) {
                s.values.push_back(law.evaluate(beta));
            }
            return s;
        }
        start += p.duration;
    }
    return ExecutionState{std::vector<double>(model.state_dim(), 0.0)};
}

std::vector<ExecutionState> expected_profile(const PhaseModel& model, const ResourceContext& beta,
                                             std::span<const double> times) {
    std::vector<ExecutionState> out;
    out.reserve(times.size());
    // Times on the sampling lattice may sit an ulp below a phase boundary;
    // nudge them forward the same way the sampler's zero-order hold does.
    const double slack = 1e-9 * model.total_duration();
    for (double t : times) {
        const double clamped = std::min(t + slack, std::nextafter(model.total_duration(), 0.0));
        out.push_back(expected_state(model, beta, clamped));
    }
    return out;
}

ProfileRecord simulate_profile(const PhaseModel& model, const CatalogEntry& context, double sample_dt,
                               std::uint64_t seed, const std::string& run_id) {
    if (!(sample_dt > 0.0)) {
        throw InputError("sample_dt must be positive");
    }
    ProfileRecord rec;
    rec.run_id = run_id;
    rec.context_id = context.id;
    rec.context = context.context;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double end = model.total_duration();
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * sample_dt;
        if (t >= end - 1e-9 * sample_dt) {
            break;
        }
        // Phase lookup with the same forward nudge as expected_profile.
        const ExecutionState mean = expected_state(model, context.context, t + 1e-9 * end);
        double noise = 0.0;
        double start = 0.0;
        for (const auto& p : model.phases) {
            if (t + 1e-9 * end < start + p.duration) {
                noise = p.noise;
                break;
            }
            start += p.duration;
        }
        ProfileSample s;
        s.time = t;
        for (double rate : mean.values) {
            const double z = gauss(rng);
            s.state.values.push_back(std::max(0.0, rate * (1.0 + noise * z)));
        }
        rec.samples.push_back(std::move(s));
    }
    return rec;
}

DatasetFiles simulate_dataset(const PhaseModel& model, std::span<const std::string> context_ids,
                              const SimulationOptions& options) {
    model.validate();
    if (options.runs_per_context < 1) {
        throw InputError("runs per context must be at least 1");
    }
    DatasetFiles files;
    Dataset& ds = files.dataset;
    ds.state_names = model.state_names;
    ds.context_names = model.context_names;
    ds.catalog = model.catalog;

    std::vector<std::size_t> chosen;
    if (context_ids.empty()) {
        for (std::size_t i = 0; i < model.catalog.size(); ++i) {
            chosen.push_back(i);
        }
    } else {
        for (const auto& id : context_ids) {
            const auto idx = ds.find_context(id);
            if (!idx) {
                throw InputError("unknown context id '" + id + "'");
            }
            chosen.push_back(*idx);
        }
    }
    for (std::size_t ci : chosen) {
        const auto& entry = model.catalog[ci];
        for (std::size_t r = 0; r < options.runs_per_context; ++r) {
            const std::string run_id = entry.id + "-r" + std::to_string(r);
            ds.records.push_back(simulate_profile(model, entry, options.sample_dt,
                                                  derive_seed(options.seed, ci, r), run_id));
        }
    }
    files.grid = SnapshotGrid::uniform(options.snapshot_dt, model.total_duration());
    files.state_units = model.state_units;
    files.context_units = model.context_units;
    files.sample_dt = options.sample_dt;
    return files;
}

}  // namespace genprof::sim
