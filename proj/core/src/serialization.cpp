#include "genprof/serialization.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "genprof/hash.hpp"

namespace genprof {

using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << text;
}

// JSON has no infinities; store non-finite values as null.
json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double from_nullable(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_number(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw InputError(where + ": not a number: '" + s + "'");
    }
}

}  // namespace

std::string model_to_json(const GenerativeModel& model) {
    json j;
    j["format"] = kSolutionFormat;
    j["solver"] = {{"epsilon", model.config.epsilon},
                   {"tol", model.config.tol},
                   {"maxiter", model.config.maxiter},
                   {"seed", model.config.seed}};
    j["grid"] = std::vector<double>(model.grid.times().begin(), model.grid.times().end());
    j["state_names"] = model.state_names;
    j["context_names"] = model.context_names;
    json catalog = json::array();
    for (const auto& e : model.catalog) {
        catalog.push_back({{"id", e.id}, {"values", e.context.values}});
    }
    j["catalog"] = std::move(catalog);
    j["training_contexts"] = model.training_contexts;

    // Training points: one entry per run with its context id and the raw
    // execution state at every snapshot.
    json runs = json::array();
    const std::size_t m = model.state_dim();
    for (std::size_t p = 0; p < model.points(); ++p) {
        const auto& run_id = model.samples.run_ids[p];
        json states = json::array();
        for (std::size_t s = 0; s < model.grid.size(); ++s) {
            std::vector<double> xi(m);
            for (std::size_t c = 0; c < m; ++c) {
                xi[c] = model.samples.snapshots[s](static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c));
            }
            states.push_back(std::move(xi));
        }
        std::vector<double> beta(model.context_dim());
        for (std::size_t c = 0; c < beta.size(); ++c) {
            beta[c] = model.samples.snapshots[0](static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m + c));
        }
        runs.push_back({{"run_id", run_id}, {"context", std::move(beta)}, {"states", std::move(states)}});
    }
    j["training_runs"] = std::move(runs);

    json potentials = json::array();
    for (const auto& u : model.solution.potentials) {
        potentials.push_back(std::vector<double>(u.data(), u.data() + u.size()));
    }
    j["potentials"] = std::move(potentials);
    j["iterations"] = model.solution.iterations;
    j["final_error"] = finite_or_null(model.solution.final_error);
    j["converged"] = model.solution.converged;
    json residuals = json::array();
    for (double r : model.solution.residuals) {
        residuals.push_back(finite_or_null(r));
    }
    j["residuals"] = std::move(residuals);
    j["dataset_hash"] = model.dataset_hash;
    return j.dump(1);
}

void save_model(const GenerativeModel& model, const std::filesystem::path& path) {
    write_text(path, model_to_json(model) + "\n");
}

GenerativeModel model_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (j.value("format", std::string{}) != kSolutionFormat) {
            throw InputError("not a solution file (expected format '" + std::string(kSolutionFormat) + "')");
        }
        SolverConfig config;
        const auto& sv = j.at("solver");
        config.epsilon = sv.at("epsilon").get<double>();
        config.tol = sv.at("tol").get<double>();
        config.maxiter = sv.at("maxiter").get<std::size_t>();
        config.seed = sv.at("seed").get<std::uint64_t>();
        const SnapshotGrid grid(j.at("grid").get<std::vector<double>>());

        Dataset training;
        training.state_names = j.at("state_names").get<std::vector<std::string>>();
        training.context_names = j.at("context_names").get<std::vector<std::string>>();
        std::vector<CatalogEntry> catalog;
        for (const auto& e : j.at("catalog")) {
            catalog.push_back({e.at("id").get<std::string>(), ResourceContext{e.at("values").get<std::vector<double>>()}});
        }
        const auto training_ids = j.at("training_contexts").get<std::vector<std::string>>();
        for (const auto& id : training_ids) {
            const CatalogEntry* found = nullptr;
            for (const auto& e : catalog) {
                if (e.id == id) {
                    found = &e;
                }
            }
            if (!found) {
                throw InputError("training context '" + id + "' is not in the catalog");
            }
            training.catalog.push_back(*found);
        }
        // Each run becomes a record sampled exactly at the grid times, so
        // rebuilding the augmented samples reproduces the stored points.
        for (const auto& r : j.at("training_runs")) {
            ProfileRecord rec;
            rec.run_id = r.at("run_id").get<std::string>();
            rec.context = ResourceContext{r.at("context").get<std::vector<double>>()};
            for (const auto& e : training.catalog) {
                if (e.context == rec.context) {
                    rec.context_id = e.id;
                }
            }
            if (rec.context_id.empty()) {
                throw InputError("training run '" + rec.run_id + "' has a context outside the training set");
            }
            const auto states = r.at("states").get<std::vector<std::vector<double>>>();
            if (states.size() != grid.size()) {
                throw InputError("training run '" + rec.run_id + "' does not match the grid");
            }
            for (std::size_t s = 0; s < grid.size(); ++s) {
                rec.samples.push_back({grid[s], ExecutionState{states[s]}});
            }
            training.records.push_back(std::move(rec));
        }
        std::vector<Eigen::VectorXd> potentials;
        for (const auto& u : j.at("potentials")) {
            const auto v = u.get<std::vector<double>>();
            potentials.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
        std::vector<double> residuals;
        for (const auto& r : j.at("residuals")) {
            residuals.push_back(from_nullable(r));
        }
        return restore_model(training, std::move(catalog), grid, config, std::move(potentials),
                             j.at("iterations").get<std::size_t>(), from_nullable(j.at("final_error")),
                             j.at("converged").get<bool>(), std::move(residuals),
                             j.value("dataset_hash", std::string{}));
    } catch (const json::exception& e) {
        throw InputError(std::string("solution file: ") + e.what());
    }
}

GenerativeModel load_model(const std::filesystem::path& path) {
    return model_from_json(read_text(path));
}

void write_profile_csv(const SyntheticProfile& profile, const std::vector<std::string>& state_names,
                       const std::filesystem::path& path) {
    std::ostringstream out;
    out << "t_seconds";
    for (const auto& n : state_names) {
        out << ',' << n;
    }
    out << '\n';
    for (std::size_t k = 0; k < profile.times.size(); ++k) {
        out << format_double(profile.times[k]);
        for (double v : profile.states[k].values) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
    write_text(path, out.str());
}

void write_profile_sidecar(const SyntheticProfile& profile, const GenerativeModel& model,
                           const std::string& context_id, const std::filesystem::path& path) {
    json j;
    j["context_id"] = context_id;
    j["context"] = profile.context.values;
    j["context_names"] = model.context_names;
    j["mode"] = to_string(profile.mode);
    j["delta_t"] = profile.delta_t;
    j["bandwidth"] = profile.bandwidth;
    j["seed"] = profile.seed;
    j["solver"] = {{"epsilon", model.config.epsilon},
                   {"tol", model.config.tol},
                   {"maxiter", model.config.maxiter},
                   {"seed", model.config.seed},
                   {"iterations", model.solution.iterations},
                   {"final_error", finite_or_null(model.solution.final_error)},
                   {"converged", model.solution.converged}};
    j["dataset_hash"] = model.dataset_hash;
    j["warnings"] = profile.warnings;
    write_text(path, j.dump(2) + "\n");
}

ProfileTable read_profile_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line)) {
        throw InputError(path.string() + ": empty file");
    }
    auto header = split_csv(line);
    if (header.empty() || header.front() != "t_seconds") {
        throw InputError(path.string() + ": first column must be t_seconds");
    }
    ProfileTable table;
    table.state_names.assign(header.begin() + 1, header.end());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv(line);
        const std::string where = path.string() + ":" + std::to_string(row);
        if (cells.size() != header.size()) {
            throw InputError(where + ": wrong number of columns");
        }
        table.times.push_back(parse_number(cells[0], where));
        ExecutionState s;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            s.values.push_back(parse_number(cells[c], where));
        }
        table.states.push_back(std::move(s));
    }
    return table;
}

}  // namespace genprof
