#include "genprof_cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "genprof/dataset.hpp"
#include "genprof/dense_oracle.hpp"
#include "genprof/eval.hpp"
#include "genprof/generator.hpp"
#include "genprof/hash.hpp"
#include "genprof/model.hpp"
#include "genprof/serialization.hpp"
#include "genprof/solver.hpp"
#include "genprof/workloadsim.hpp"

namespace genprof::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Verbosity { Quiet, Info, Debug };

Verbosity verbosity_from_env() {
    const char* v = std::getenv("GENPROF_LOG");
    if (!v) {
        return Verbosity::Info;
    }
    const std::string s(v);
    if (s == "quiet" || s == "error" || s == "0") {
        return Verbosity::Quiet;
    }
    if (s == "debug" || s == "2") {
        return Verbosity::Debug;
    }
    return Verbosity::Info;
}

class Log {
public:
    explicit Log(std::ostream& err) : err_(err), level_(verbosity_from_env()) {}
    void info(const std::string& msg) const {
        if (level_ != Verbosity::Quiet) err_ << msg << '\n';
    }
    void debug(const std::string& msg) const {
        if (level_ == Verbosity::Debug) err_ << msg << '\n';
    }
    void error(const std::string& msg) const { err_ << "error: " << msg << '\n'; }

private:
    std::ostream& err_;
    Verbosity level_;
};

// Raised for problems that map to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a != std::string::npos) {
            out.push_back(item.substr(a, b - a + 1));
        }
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& s : split_list(text)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(s, &used));
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw UsageError(what + ": not a number: '" + s + "'");
        }
    }
    return out;
}

// Values from --config. A section named after the subcommand overrides the
// top level. Relative paths resolve against the config file's directory.
class Config {
public:
    Config() = default;
    Config(const fs::path& path, const std::string& section) : dir_(path.parent_path()) {
        std::ifstream in(path);
        if (!in) {
            throw UsageError("cannot open config file " + path.string());
        }
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw UsageError("config file " + path.string() + ": " + e.what());
        }
        if (!j.is_object()) {
            throw UsageError("config file must hold a JSON object");
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!it.value().is_object()) values_[it.key()] = it.value();
        }
        if (j.contains(section) && j[section].is_object()) {
            for (auto it = j[section].begin(); it != j[section].end(); ++it) values_[it.key()] = it.value();
        }
    }

    const json* find(const std::string& key) const {
        const auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    }

    fs::path resolve(const std::string& p) const {
        const fs::path path(p);
        return path.is_absolute() || dir_.empty() ? path : dir_ / path;
    }

private:
    fs::path dir_;
    std::map<std::string, json> values_;
};

// One setting with flag > config > default precedence.
template <typename T>
struct Setting {
    T value{};
    CLI::Option* option = nullptr;
    std::string key;

    bool from_flag() const { return option && option->count() > 0; }
};

template <typename T>
T get_json(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
    }
}

template <typename T>
void apply(Setting<T>& s, const Config& cfg) {
    if (s.from_flag()) return;
    if (const json* j = cfg.find(s.key)) s.value = get_json<T>(*j, s.key);
}

void apply_path(Setting<std::string>& s, const Config& cfg) {
    if (s.from_flag()) return;
    if (const json* j = cfg.find(s.key)) s.value = cfg.resolve(get_json<std::string>(*j, s.key)).string();
}

// List settings accept "a,b,c" on the command line and either that string or
// a JSON array in the config file.
void apply_list(Setting<std::string>& s, const Config& cfg) {
    if (s.from_flag()) return;
    if (const json* j = cfg.find(s.key)) {
        if (j->is_array()) {
            std::string joined;
            for (const auto& v : *j) {
                if (!joined.empty()) joined += ',';
                joined += v.is_string() ? v.get<std::string>() : v.dump();
            }
            s.value = joined;
        } else if (j->is_string()) {
            s.value = j->get<std::string>();
        } else {
            s.value = j->dump();
        }
    }
}

bool is_set(const Setting<std::string>& s, const Config& cfg) {
    return s.from_flag() || cfg.find(s.key) != nullptr;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw UsageError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw UsageError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

std::string safe_file_stem(const std::string& id) {
    std::string s = id;
    for (auto& ch : s) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')) ch = '_';
    }
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    Setting<std::string> config{"", nullptr, "config"};
    Setting<std::string> model{"", nullptr, "model"};
    Setting<std::string> out{"", nullptr, "out"};
    Setting<std::uint64_t> seed{0, nullptr, "seed"};
    Setting<std::size_t> runs{10, nullptr, "runs"};
    Setting<double> sample_dt{0.01, nullptr, "sample_dt"};
    Setting<double> snapshot_dt{0.05, nullptr, "snapshot_dt"};
    Setting<std::string> contexts{"", nullptr, "contexts"};
};

int cmd_simulate(SimulateArgs& a, const Log& log, std::ostream& out) {
    const Config cfg = a.config.value.empty() ? Config{} : Config(a.config.value, "simulate");
    apply_path(a.model, cfg);
    apply_path(a.out, cfg);
    apply(a.seed, cfg);
    apply(a.runs, cfg);
    apply(a.sample_dt, cfg);
    apply(a.snapshot_dt, cfg);
    apply_list(a.contexts, cfg);
    if (a.model.value.empty()) throw UsageError("simulate needs --model");
    if (a.out.value.empty()) throw UsageError("simulate needs --out");

    const auto model = sim::load_phase_model(a.model.value);
    sim::SimulationOptions opt;
    opt.runs_per_context = a.runs.value;
    opt.sample_dt = a.sample_dt.value;
    opt.snapshot_dt = a.snapshot_dt.value;
    opt.seed = a.seed.value;
    const auto ids = split_list(a.contexts.value);
    const auto files = sim::simulate_dataset(model, ids, opt);
    ensure_dir(a.out.value);
    const auto manifest = write_dataset(files, a.out.value);
    // Round-trip through the reader so a bad dataset fails here, not later.
    const auto check = load_dataset(manifest);
    log.info("simulated " + std::to_string(check.dataset.records.size()) + " runs over " +
             std::to_string(check.dataset.catalog.size()) + " catalog contexts");
    out << manifest.string() << '\n';
    return kOk;
}

// ---- solve ------------------------------------------------------------------

struct SolveArgs {
    Setting<std::string> config{"", nullptr, "config"};
    Setting<std::string> manifest{"", nullptr, "manifest"};
    Setting<std::string> out{"", nullptr, "out"};
    Setting<std::uint64_t> seed{0, nullptr, "seed"};
    Setting<double> epsilon{0.1, nullptr, "epsilon"};
    Setting<double> tol{1e-12, nullptr, "tol"};
    Setting<std::size_t> maxiter{10000, nullptr, "maxiter"};
    Setting<double> train_fraction{0.15, nullptr, "train_fraction"};
    Setting<std::string> train_contexts{"", nullptr, "train_contexts"};
};

int cmd_solve(SolveArgs& a, const Log& log, std::ostream& out) {
    const Config cfg = a.config.value.empty() ? Config{} : Config(a.config.value, "solve");
    apply_path(a.manifest, cfg);
    apply_path(a.out, cfg);
    apply(a.seed, cfg);
    apply(a.epsilon, cfg);
    apply(a.tol, cfg);
    apply(a.maxiter, cfg);
    if (a.train_fraction.from_flag() && a.train_contexts.from_flag()) {
        throw UsageError("--train-fraction and --train-contexts are mutually exclusive");
    }
    // A flag of either kind beats both config keys; between config keys an
    // explicit list wins.
    bool use_list = a.train_contexts.from_flag();
    if (!a.train_contexts.from_flag() && !a.train_fraction.from_flag()) {
        use_list = is_set(a.train_contexts, cfg);
        apply_list(a.train_contexts, cfg);
        apply(a.train_fraction, cfg);
    }
    if (a.manifest.value.empty()) throw UsageError("solve needs --manifest");
    if (a.out.value.empty()) throw UsageError("solve needs --out");

    const auto files = load_dataset(a.manifest.value);
    std::vector<std::string> training;
    if (use_list) {
        training = split_list(a.train_contexts.value);
        for (const auto& id : training) {
            if (!files.dataset.find_context(id)) throw UsageError("training context '" + id + "' is not in the catalog");
        }
    } else {
        // Only contexts with recorded runs are eligible.
        std::vector<CatalogEntry> measured;
        for (const auto& e : files.dataset.catalog) {
            if (!files.dataset.runs_for(e.id).empty()) measured.push_back(e);
        }
        training = select_training_contexts(measured, a.train_fraction.value, a.seed.value);
    }

    SolverConfig config;
    config.epsilon = a.epsilon.value;
    config.tol = a.tol.value;
    config.maxiter = a.maxiter.value;
    config.seed = a.seed.value;
    config.validate();

    log.info("solving on " + std::to_string(training.size()) + " training contexts");
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = train_model(files.dataset, files.grid, training, config, files.content_hash);
    log.info("solver: " + std::to_string(model.solution.iterations) + " sweeps, final error " +
             format_double(model.solution.final_error) + ", " + format_double(seconds_since(t0)) + " s");

    ensure_dir(a.out.value);
    const fs::path dir(a.out.value);
    save_model(model, dir / "solution.json");
    {
        std::ofstream logf(dir / "convergence_log.csv", std::ios::binary);
        logf << "iteration,max_hilbert_residual\n";
        for (std::size_t k = 0; k < model.solution.residuals.size(); ++k) {
            logf << (k + 1) << ',' << format_double(model.solution.residuals[k]) << '\n';
        }
    }
    out << (dir / "solution.json").string() << '\n';
    if (!model.solution.converged) {
        log.error("solver did not reach tol " + format_double(config.tol) + " within " +
                  std::to_string(config.maxiter) + " sweeps; last iterate written with converged=false");
        return kNotConverged;
    }
    return kOk;
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
    Setting<std::string> config{"", nullptr, "config"};
    Setting<std::string> solution{"", nullptr, "solution"};
    Setting<std::string> out{"", nullptr, "out"};
    Setting<std::uint64_t> seed{0, nullptr, "seed"};
    Setting<double> delta_t{0.01, nullptr, "delta_t"};
    Setting<std::string> mode{"maxlik", nullptr, "mode"};
    Setting<std::string> bandwidth{"", nullptr, "bandwidth"};
    Setting<std::string> contexts{"", nullptr, "contexts"};
    Setting<bool> all_contexts{false, nullptr, "all_contexts"};
    Setting<bool> held_out{false, nullptr, "held_out"};
    Setting<bool> allow_unconverged{false, nullptr, "allow_unconverged"};
};

int cmd_generate(GenerateArgs& a, const Log& log, std::ostream& out) {
    const Config cfg = a.config.value.empty() ? Config{} : Config(a.config.value, "generate");
    apply_path(a.solution, cfg);
    apply_path(a.out, cfg);
    apply(a.seed, cfg);
    apply(a.delta_t, cfg);
    apply(a.mode, cfg);
    apply_list(a.bandwidth, cfg);
    apply_list(a.contexts, cfg);
    apply(a.all_contexts, cfg);
    apply(a.held_out, cfg);
    apply(a.allow_unconverged, cfg);
    if (a.solution.value.empty()) throw UsageError("generate needs --solution");
    if (a.out.value.empty()) throw UsageError("generate needs --out");

    const auto model = load_model(a.solution.value);
    std::vector<std::string> ids;
    if (a.all_contexts.value) {
        for (const auto& e : model.catalog) ids.push_back(e.id);
    } else if (a.held_out.value) {
        for (const auto& e : model.catalog) {
            if (std::find(model.training_contexts.begin(), model.training_contexts.end(), e.id) ==
                model.training_contexts.end()) {
                ids.push_back(e.id);
            }
        }
    } else {
        ids = split_list(a.contexts.value);
    }
    if (ids.empty()) throw UsageError("generate needs --contexts, --held-out or --all-contexts");
    std::vector<ResourceContext> betas;
    for (const auto& id : ids) {
        bool found = false;
        for (const auto& e : model.catalog) {
            if (e.id == id) {
                betas.push_back(e.context);
                found = true;
            }
        }
        if (!found) throw UsageError("unknown context id '" + id + "'");
    }

    GenerationOptions opt;
    opt.delta_t = a.delta_t.value;
    opt.mode = parse_profile_mode(a.mode.value);
    opt.seed = a.seed.value;
    opt.allow_unconverged = a.allow_unconverged.value;
    if (!a.bandwidth.value.empty()) opt.bandwidth = parse_doubles(a.bandwidth.value, "--bandwidth");

    const auto t0 = std::chrono::steady_clock::now();
    const auto profiles = generate_profiles(model, betas, opt);
    log.info("generated " + std::to_string(profiles.size()) + " profiles in " + format_double(seconds_since(t0)) + " s");

    ensure_dir(a.out.value);
    const fs::path dir(a.out.value);
    json listing;
    listing["solution_dataset_hash"] = model.dataset_hash;
    listing["mode"] = to_string(opt.mode);
    listing["delta_t"] = opt.delta_t;
    listing["seed"] = opt.seed;
    listing["training_contexts"] = model.training_contexts;
    listing["profiles"] = json::array();
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        const std::string stem = safe_file_stem(ids[k]);
        write_profile_csv(profiles[k], model.state_names, dir / (stem + ".csv"));
        write_profile_sidecar(profiles[k], model, ids[k], dir / (stem + ".json"));
        for (const auto& w : profiles[k].warnings) log.info("warning [" + ids[k] + "]: " + w);
        listing["profiles"].push_back({{"context_id", ids[k]}, {"csv", stem + ".csv"}, {"sidecar", stem + ".json"}});
    }
    write_json(dir / "generated.json", listing);
    out << (dir / "generated.json").string() << '\n';
    return kOk;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    Setting<std::string> config{"", nullptr, "config"};
    Setting<std::string> generated{"", nullptr, "generated"};
    Setting<std::string> manifest{"", nullptr, "manifest"};
    Setting<std::string> out{"", nullptr, "out"};
    Setting<std::string> train_contexts{"", nullptr, "train_contexts"};
};

int cmd_evaluate(EvaluateArgs& a, const Log& log, std::ostream& out) {
    const Config cfg = a.config.value.empty() ? Config{} : Config(a.config.value, "evaluate");
    apply_path(a.generated, cfg);
    apply_path(a.manifest, cfg);
    apply_path(a.out, cfg);
    apply_list(a.train_contexts, cfg);
    if (a.generated.value.empty()) throw UsageError("evaluate needs --generated");
    if (a.manifest.value.empty()) throw UsageError("evaluate needs --manifest (ground truth)");
    if (a.out.value.empty()) throw UsageError("evaluate needs --out");

    const fs::path gdir(a.generated.value);
    json listing;
    {
        std::ifstream in(gdir / "generated.json");
        if (!in) throw UsageError("no generated.json in " + gdir.string());
        try {
            in >> listing;
        } catch (const json::exception& e) {
            throw UsageError(std::string("generated.json: ") + e.what());
        }
    }
    const auto truth = load_dataset(a.manifest.value);
    std::vector<std::string> training = a.train_contexts.value.empty()
                                            ? listing.at("training_contexts").get<std::vector<std::string>>()
                                            : split_list(a.train_contexts.value);

    std::vector<eval::ScoredProfile> scored;
    std::vector<std::string> missing;
    for (const auto& p : listing.at("profiles")) {
        const auto id = p.at("context_id").get<std::string>();
        if (!truth.dataset.find_context(id) || truth.dataset.runs_for(id).empty()) {
            missing.push_back(id);
            continue;
        }
        const auto table = read_profile_csv(gdir / p.at("csv").get<std::string>());
        scored.push_back({id, table.times, table.states});
    }
    for (const auto& id : training) {
        if (!truth.dataset.find_context(id) || truth.dataset.runs_for(id).empty()) missing.push_back(id);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
        throw UsageError("no ground truth for context(s): " + list);
    }
    const Dataset train = truth.dataset.restricted_to(training);
    const auto report = eval::accuracy_report(truth.dataset, train, scored);

    ensure_dir(a.out.value);
    const fs::path dir(a.out.value);
    report.write_csv(dir / "accuracy_report.csv");

    std::size_t measured = 0;
    for (const auto& e : truth.dataset.catalog) {
        if (!truth.dataset.runs_for(e.id).empty()) ++measured;
    }
    eval::PlotPoint point;
    point.training_fraction = measured ? static_cast<double>(training.size()) / static_cast<double>(measured) : 0.0;
    point.mean_dtw = report.mean_generative;
    point.relative_measurement_time = eval::relative_measurement_time(truth.dataset, train);
    eval::write_plot_data(dir / "plot_data.csv", std::span<const eval::PlotPoint>(&point, 1));

    json meta;
    meta["normalization"] = "dtw / (reference sample count * max reference state norm)";
    meta["alternative_normalization"] = "dtw / (warping path length * max reference state norm)";
    meta["mean_generative_alternative"] = report.mean_generative_path_normalized;
    meta["mean_baseline_alternative"] = report.mean_baseline_path_normalized;
    meta["reference"] = "pointwise mean of the ground-truth runs at the generated times";
    meta["scored_contexts"] = scored.size();
    meta["training_contexts"] = training;
    meta["mean_generative"] = report.mean_generative;
    meta["mean_baseline"] = report.mean_baseline;
    meta["mean_improvement_pct"] = std::isfinite(report.mean_improvement_pct) ? json(report.mean_improvement_pct) : json(nullptr);
    write_json(dir / "report_metadata.json", meta);

    log.info("mean normalized DTW: generative " + format_double(report.mean_generative) + ", baseline " +
             format_double(report.mean_baseline));
    out << (dir / "accuracy_report.csv").string() << '\n';
    return kOk;
}

// ---- oracle-check -----------------------------------------------------------

struct OracleArgs {
    Setting<std::string> config{"", nullptr, "config"};
    Setting<std::string> out{"", nullptr, "out"};
    Setting<std::uint64_t> seed{1, nullptr, "seed"};
    Setting<std::size_t> seeds{10, nullptr, "seeds"};
    Setting<std::size_t> perturbations{100, nullptr, "perturbations"};
    Setting<std::string> snapshots{"2,3,4", nullptr, "snapshots"};
    Setting<std::string> points{"2,3,4,5", nullptr, "points"};
    Setting<double> epsilon{0.1, nullptr, "epsilon"};
    Setting<double> tol{1e-12, nullptr, "tol"};
    Setting<std::size_t> maxiter{200000, nullptr, "maxiter"};
    Setting<bool> flip_cost_sign{false, nullptr, "flip_cost_sign"};
};

std::vector<std::size_t> parse_counts(const std::string& text, const std::string& what) {
    std::vector<std::size_t> out;
    for (double v : parse_doubles(text, what)) {
        if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw UsageError(what + ": expected positive integers");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

int cmd_oracle_check(OracleArgs& a, const Log& log, std::ostream& out) {
    const Config cfg = a.config.value.empty() ? Config{} : Config(a.config.value, "oracle-check");
    apply_path(a.out, cfg);
    apply(a.seed, cfg);
    apply(a.seeds, cfg);
    apply(a.perturbations, cfg);
    apply_list(a.snapshots, cfg);
    apply_list(a.points, cfg);
    apply(a.epsilon, cfg);
    apply(a.tol, cfg);
    apply(a.maxiter, cfg);
    apply(a.flip_cost_sign, cfg);

    OracleSuiteConfig oc;
    oc.snapshot_counts = parse_counts(a.snapshots.value, "--snapshots");
    oc.point_counts = parse_counts(a.points.value, "--points");
    oc.seeds = a.seeds.value;
    oc.perturbations = a.perturbations.value;
    oc.base_seed = a.seed.value;
    oc.solver.epsilon = a.epsilon.value;
    oc.solver.tol = a.tol.value;
    oc.solver.maxiter = a.maxiter.value;
    oc.flip_dense_cost_sign = a.flip_cost_sign.value;
    oc.solver.validate();
    // Refuse before any work if an instance would not fit the dense cap.
    for (auto ns : oc.snapshot_counts) {
        for (auto n : oc.point_counts) {
            checked_entry_count(std::vector<std::size_t>(ns, n), oc.cap);
        }
    }

    const auto report = run_oracle_suite(oc);
    std::ostringstream csv;
    csv << "snapshots,points,seed,plan_max_abs_dev,unimarginal_max_abs_dev,bimarginal_max_abs_dev,"
           "feasibility_l1,kl_optimal,kl_min_perturbed,passed,failure\n";
    std::size_t failed = 0;
    double worst_plan = 0.0;
    for (const auto& r : report.instances) {
        csv << r.snapshots << ',' << r.points << ',' << r.seed << ',' << format_double(r.plan_max_abs_deviation) << ','
            << format_double(r.unimarginal_max_abs_deviation) << ',' << format_double(r.bimarginal_max_abs_deviation)
            << ',' << format_double(r.feasibility_l1) << ',' << format_double(r.kl_optimal) << ','
            << format_double(r.kl_min_perturbed) << ',' << (r.passed ? "true" : "false") << ',' << r.failure << '\n';
        if (!r.passed) ++failed;
        worst_plan = std::max(worst_plan, r.plan_max_abs_deviation);
    }
    if (!a.out.value.empty()) {
        ensure_dir(a.out.value);
        std::ofstream f(fs::path(a.out.value) / "oracle_report.csv", std::ios::binary);
        f << csv.str();
    } else {
        out << csv.str();
    }
    log.info(std::to_string(report.instances.size() - failed) + "/" + std::to_string(report.instances.size()) +
             " instances passed; worst plan deviation " + format_double(worst_plan));
    out << (report.all_passed() ? "PASS" : "FAIL") << '\n';
    return report.all_passed() ? kOk : kCheckFailed;
}

template <typename T>
void add_flag(CLI::App* app, const std::string& name, Setting<T>& s, const std::string& help) {
    s.option = app->add_option(name, s.value, help);
}

void add_switch(CLI::App* app, const std::string& name, Setting<bool>& s, const std::string& help) {
    s.option = app->add_flag(name, s.value, help);
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    const Log log(err);
    CLI::App app{"genprof: generative execution profiles from sparse resource-context measurements"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "simulate a phase-model workload into a dataset");
    add_flag(sim, "--config", sim_args.config, "JSON config file");
    add_flag(sim, "--model", sim_args.model, "phase model JSON");
    add_flag(sim, "--out", sim_args.out, "output directory");
    add_flag(sim, "--seed", sim_args.seed, "top-level seed");
    add_flag(sim, "--runs", sim_args.runs, "runs per context (n_d)");
    add_flag(sim, "--sample-dt", sim_args.sample_dt, "sampling interval in seconds");
    add_flag(sim, "--snapshot-dt", sim_args.snapshot_dt, "snapshot spacing written to the manifest");
    add_flag(sim, "--contexts", sim_args.contexts, "comma-separated context ids (default: whole catalog)");

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "fit the multimarginal bridge on training contexts");
    add_flag(solve, "--config", solve_args.config, "JSON config file");
    add_flag(solve, "--manifest", solve_args.manifest, "dataset manifest");
    add_flag(solve, "--out", solve_args.out, "output directory");
    add_flag(solve, "--seed", solve_args.seed, "seed for context selection and potential initialization");
    add_flag(solve, "--epsilon", solve_args.epsilon, "entropic regularization");
    add_flag(solve, "--tol", solve_args.tol, "Hilbert-metric stopping tolerance");
    add_flag(solve, "--maxiter", solve_args.maxiter, "maximum Sinkhorn sweeps");
    add_flag(solve, "--train-fraction", solve_args.train_fraction, "fraction of measured contexts to train on");
    add_flag(solve, "--train-contexts", solve_args.train_contexts, "comma-separated training context ids");

    GenerateArgs gen_args;
    auto* gen = app.add_subcommand("generate", "synthesize profiles from a solution");
    add_flag(gen, "--config", gen_args.config, "JSON config file");
    add_flag(gen, "--solution", gen_args.solution, "solution.json from solve");
    add_flag(gen, "--out", gen_args.out, "output directory");
    add_flag(gen, "--seed", gen_args.seed, "seed for sample mode");
    add_flag(gen, "--delta-t", gen_args.delta_t, "output spacing in seconds");
    add_flag(gen, "--mode", gen_args.mode, "maxlik, mean or sample");
    add_flag(gen, "--bandwidth", gen_args.bandwidth, "kernel bandwidth, one value or one per context component");
    add_flag(gen, "--contexts", gen_args.contexts, "comma-separated context ids");
    add_switch(gen, "--all-contexts", gen_args.all_contexts, "every context in the catalog");
    add_switch(gen, "--held-out", gen_args.held_out, "every catalog context not used for training");
    add_switch(gen, "--allow-unconverged", gen_args.allow_unconverged, "generate even if the solver did not converge");

    EvaluateArgs eval_args;
    auto* ev = app.add_subcommand("evaluate", "score generated profiles against ground truth");
    add_flag(ev, "--config", eval_args.config, "JSON config file");
    add_flag(ev, "--generated", eval_args.generated, "directory written by generate");
    add_flag(ev, "--manifest", eval_args.manifest, "ground-truth dataset manifest");
    add_flag(ev, "--out", eval_args.out, "output directory");
    add_flag(ev, "--train-contexts", eval_args.train_contexts, "override the training contexts used for the baseline");

    OracleArgs oracle_args;
    auto* oracle = app.add_subcommand("oracle-check", "cross-check the solver against brute force");
    add_flag(oracle, "--config", oracle_args.config, "JSON config file");
    add_flag(oracle, "--out", oracle_args.out, "write oracle_report.csv here instead of stdout");
    add_flag(oracle, "--seed", oracle_args.seed, "base seed for random instances");
    add_flag(oracle, "--seeds", oracle_args.seeds, "instances per size");
    add_flag(oracle, "--perturbations", oracle_args.perturbations, "feasible perturbations per instance");
    add_flag(oracle, "--snapshots", oracle_args.snapshots, "snapshot counts, comma-separated");
    add_flag(oracle, "--points", oracle_args.points, "points per snapshot, comma-separated");
    add_flag(oracle, "--epsilon", oracle_args.epsilon, "entropic regularization");
    add_flag(oracle, "--tol", oracle_args.tol, "stopping tolerance");
    add_flag(oracle, "--maxiter", oracle_args.maxiter, "maximum sweeps");
    add_switch(oracle, "--flip-cost-sign", oracle_args.flip_cost_sign, "negative control: negate the dense cost");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, r;
        const int code = app.exit(e, o, r);
        out << o.str();
        err << r.str();
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args, log, out);
        if (solve->parsed()) return cmd_solve(solve_args, log, out);
        if (gen->parsed()) return cmd_generate(gen_args, log, out);
        if (ev->parsed()) return cmd_evaluate(eval_args, log, out);
        if (oracle->parsed()) return cmd_oracle_check(oracle_args, log, out);
    } catch (const UsageError& e) {
        log.error(e.what());
        return kInputError;
    } catch (const InputError& e) {
        log.error(e.what());
        return kInputError;
    } catch (const std::length_error& e) {
        log.error(e.what());
        return kInputError;
    } catch (const NotConvergedError& e) {
        log.error(e.what());
        return kNotConverged;
    } catch (const UnderflowError& e) {
        log.error(e.what());
        return kNotConverged;
    } catch (const ConvergenceError& e) {
        log.error(e.what());
        return kCheckFailed;
    } catch (const std::exception& e) {
        log.error(e.what());
        return kInputError;
    }
    return kInputError;
}

}  // namespace genprof::cli
