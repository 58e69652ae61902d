#include "genprof/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "genprof/hash.hpp"

namespace genprof {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            return fields;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

double parse_number(std::string_view field, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw InputError(where + ": cannot parse number '" + std::string(field) + "'");
    }
    if (!std::isfinite(v)) {
        throw InputError(where + ": non-finite number");
    }
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            lines.push_back(line);
        }
    }
    return lines;
}

}  // namespace

std::optional<std::size_t> Dataset::find_context(const std::string& id) const {
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (catalog[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

const ResourceContext& Dataset::context(const std::string& id) const {
    const auto idx = find_context(id);
    if (!idx) {
        throw InputError("unknown context id '" + id + "'");
    }
    return catalog[*idx].context;
}

std::vector<const ProfileRecord*> Dataset::runs_for(const std::string& context_id) const {
    std::vector<const ProfileRecord*> out;
    for (const auto& r : records) {
        if (r.context_id == context_id) {
            out.push_back(&r);
        }
    }
    return out;
}

Dataset Dataset::restricted_to(std::span<const std::string> context_ids) const {
    std::set<std::string> wanted;
    for (const auto& id : context_ids) {
        if (!find_context(id)) {
            throw InputError("unknown context id '" + id + "'");
        }
        wanted.insert(id);
    }
    Dataset out;
    out.state_names = state_names;
    out.context_names = context_names;
    for (const auto& e : catalog) {
        if (wanted.count(e.id)) {
            out.catalog.push_back(e);
        }
    }
    for (const auto& r : records) {
        if (wanted.count(r.context_id)) {
            out.records.push_back(r);
        }
    }
    return out;
}

void Dataset::validate() const {
    if (state_names.empty() || context_names.empty()) {
        throw InputError("dataset needs m >= 1 state columns and b >= 1 context columns");
    }
    std::set<std::string> ids;
    std::set<ResourceContext> values;
    for (const auto& e : catalog) {
        e.context.validate();
        if (e.context.size() != context_dim()) {
            throw InputError("context '" + e.id + "' has the wrong dimension");
        }
        if (!ids.insert(e.id).second) {
            throw InputError("duplicate context id '" + e.id + "'");
        }
        if (!values.insert(e.context).second) {
            throw InputError("context '" + e.id + "' duplicates another catalog entry");
        }
    }
    std::set<std::string> runs;
    for (const auto& r : records) {
        r.validate();
        if (r.samples.front().state.size() != state_dim()) {
            throw InputError("profile '" + r.run_id + "' has the wrong state dimension");
        }
        if (!runs.insert(r.run_id).second) {
            throw InputError("duplicate run id '" + r.run_id + "'");
        }
        const auto idx = find_context(r.context_id);
        if (!idx) {
            throw InputError("profile '" + r.run_id + "' references unknown context '" +
                             r.context_id + "'");
        }
        if (!(catalog[*idx].context == r.context)) {
            throw InputError("profile '" + r.run_id + "' disagrees with its catalog context");
        }
    }
}

double covered_until(const ProfileRecord& record) {
    const auto& s = record.samples;
    if (s.size() < 2) {
        return s.empty() ? 0.0 : s.back().time;
    }
    return s.back().time + (s.back().time - s[s.size() - 2].time);
}

ExecutionState state_at(const ProfileRecord& record, double t) {
    const auto& s = record.samples;
    if (s.empty()) {
        throw InputError("profile '" + record.run_id + "' has no samples");
    }
    const std::size_t m = s.front().state.size();
    if (t < 0.0) {
        throw InputError("negative query time");
    }
    // Small slack so grid times computed as k*dt still land on the sample
    // recorded at the same nominal instant.
    const double span = std::max(covered_until(record), 1e-300);
    const double slack = 1e-9 * span;
    if (t > covered_until(record) + slack) {
        return ExecutionState{std::vector<double>(m, 0.0)};
    }
    auto it = std::upper_bound(s.begin(), s.end(), t + slack,
                               [](double v, const ProfileSample& p) { return v < p.time; });
    return std::prev(it)->state;
}

std::vector<ExecutionState> mean_profile(const Dataset& dataset, const std::string& context_id,
                                         std::span<const double> times) {
    const auto runs = dataset.runs_for(context_id);
    if (runs.empty()) {
        throw InputError("no runs recorded for context '" + context_id + "'");
    }
    const std::size_t m = dataset.state_dim();
    std::vector<ExecutionState> out(times.size(), ExecutionState{std::vector<double>(m, 0.0)});
    for (const auto* r : runs) {
        for (std::size_t k = 0; k < times.size(); ++k) {
            const auto s = state_at(*r, times[k]);
            for (std::size_t c = 0; c < m; ++c) {
                out[k].values[c] += s.values[c];
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(runs.size());
    for (auto& s : out) {
        for (auto& v : s.values) {
            v *= inv;
        }
    }
    return out;
}

DatasetFiles load_dataset(const std::filesystem::path& manifest_path) {
    const std::string manifest_text = read_file(manifest_path);
    json manifest;
    try {
        manifest = json::parse(manifest_text);
    } catch (const json::exception& e) {
        throw InputError("manifest " + manifest_path.string() + ": " + e.what());
    }
    const auto base = manifest_path.parent_path();

    DatasetFiles out;
    std::size_t m = 0;
    std::size_t b = 0;
    std::filesystem::path contexts_path;
    std::filesystem::path profiles_path;
    try {
        contexts_path = base / manifest.at("contexts_file").get<std::string>();
        profiles_path = base / manifest.at("profiles_file").get<std::string>();
        m = manifest.at("m").get<std::size_t>();
        b = manifest.at("b").get<std::size_t>();
        out.grid = SnapshotGrid(manifest.at("grid").get<std::vector<double>>());
        if (manifest.contains("units")) {
            const auto& units = manifest["units"];
            out.time_unit = units.value("time", std::string("s"));
            out.state_units = units.value("state", std::vector<std::string>{});
            out.context_units = units.value("context", std::vector<std::string>{});
        }
        out.sample_dt = manifest.value("sample_dt", 0.0);
    } catch (const json::exception& e) {
        throw InputError("manifest " + manifest_path.string() + ": " + e.what());
    }

    const std::string contexts_text = read_file(contexts_path);
    const std::string profiles_text = read_file(profiles_path);
    out.content_hash = "sha256:" + sha256_hex(contexts_text + '\n' + profiles_text);

    Dataset& ds = out.dataset;

    const auto ctx_lines = lines_of(contexts_text);
    if (ctx_lines.empty()) {
        throw InputError(contexts_path.string() + ": missing header row");
    }
    {
        const auto header = split_csv_line(ctx_lines[0]);
        if (header.size() != b + 1 || header[0] != "context_id") {
            throw InputError(contexts_path.string() +
                             ": header must be context_id followed by b columns");
        }
        for (std::size_t c = 1; c < header.size(); ++c) {
            ds.context_names.emplace_back(header[c]);
        }
    }
    for (std::size_t l = 1; l < ctx_lines.size(); ++l) {
        const auto f = split_csv_line(ctx_lines[l]);
        const std::string where = contexts_path.filename().string() + ":" + std::to_string(l + 1);
        if (f.size() != b + 1) {
            throw InputError(where + ": expected " + std::to_string(b + 1) + " fields");
        }
        CatalogEntry e;
        e.id = std::string(f[0]);
        for (std::size_t c = 1; c < f.size(); ++c) {
            e.context.values.push_back(parse_number(f[c], where));
        }
        ds.catalog.push_back(std::move(e));
    }

    const auto prof_lines = lines_of(profiles_text);
    if (prof_lines.empty()) {
        throw InputError(profiles_path.string() + ": missing header row");
    }
    {
        const auto header = split_csv_line(prof_lines[0]);
        if (header.size() != m + 3 || header[0] != "run_id" || header[1] != "context_id" ||
            header[2] != "t_seconds") {
            throw InputError(profiles_path.string() +
                             ": header must be run_id,context_id,t_seconds followed by m columns");
        }
        for (std::size_t c = 3; c < header.size(); ++c) {
            ds.state_names.emplace_back(header[c]);
        }
    }
    std::map<std::string, std::size_t> run_index;
    for (std::size_t l = 1; l < prof_lines.size(); ++l) {
        const auto f = split_csv_line(prof_lines[l]);
        const std::string where = profiles_path.filename().string() + ":" + std::to_string(l + 1);
        if (f.size() != m + 3) {
            throw InputError(where + ": expected " + std::to_string(m + 3) + " fields");
        }
        const std::string run_id(f[0]);
        const std::string context_id(f[1]);
        auto [it, inserted] = run_index.try_emplace(run_id, ds.records.size());
        if (inserted) {
            ProfileRecord rec;
            rec.run_id = run_id;
            rec.context_id = context_id;
            const auto idx = ds.find_context(context_id);
            if (!idx) {
                throw InputError(where + ": unknown context id '" + context_id + "'");
            }
            rec.context = ds.catalog[*idx].context;
            ds.records.push_back(std::move(rec));
        }
        auto& rec = ds.records[it->second];
        if (rec.context_id != context_id) {
            throw InputError(where + ": run '" + run_id + "' changes context");
        }
        ProfileSample s;
        s.time = parse_number(f[2], where);
        for (std::size_t c = 3; c < f.size(); ++c) {
            s.state.values.push_back(parse_number(f[c], where));
        }
        rec.samples.push_back(std::move(s));
    }
    ds.validate();
    return out;
}

std::filesystem::path write_dataset(const DatasetFiles& files, const std::filesystem::path& dir) {
    const Dataset& ds = files.dataset;
    ds.validate();
    std::filesystem::create_directories(dir);

    std::ostringstream ctx;
    ctx << "context_id";
    for (const auto& n : ds.context_names) {
        ctx << ',' << n;
    }
    ctx << '\n';
    for (const auto& e : ds.catalog) {
        ctx << e.id;
        for (double v : e.context.values) {
            ctx << ',' << format_double(v);
        }
        ctx << '\n';
    }

    std::ostringstream prof;
    prof << "run_id,context_id,t_seconds";
    for (const auto& n : ds.state_names) {
        prof << ',' << n;
    }
    prof << '\n';
    for (const auto& r : ds.records) {
        for (const auto& s : r.samples) {
            prof << r.run_id << ',' << r.context_id << ',' << format_double(s.time);
            for (double v : s.state.values) {
                prof << ',' << format_double(v);
            }
            prof << '\n';
        }
    }

    json manifest;
    manifest["contexts_file"] = "contexts.csv";
    manifest["profiles_file"] = "profiles.csv";
    manifest["m"] = ds.state_dim();
    manifest["b"] = ds.context_dim();
    manifest["grid"] = std::vector<double>(files.grid.times().begin(), files.grid.times().end());
    manifest["units"] = {{"time", files.time_unit},
                         {"state", files.state_units},
                         {"context", files.context_units}};
    if (files.sample_dt > 0.0) {
        manifest["sample_dt"] = files.sample_dt;
    }

    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        if (!out) {
            throw InputError("cannot write " + p.string());
        }
        out << text;
    };
    write(dir / "contexts.csv", ctx.str());
    write(dir / "profiles.csv", prof.str());
    const auto manifest_path = dir / "manifest.json";
    write(manifest_path, manifest.dump(2) + "\n");
    return manifest_path;
}

}  // namespace genprof
