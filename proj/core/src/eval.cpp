#include "genprof/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "genprof/hash.hpp"

namespace genprof::eval {

namespace {

double euclidean(const ExecutionState& a, const ExecutionState& b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double d = a[c] - b[c];
        s += d * d;
    }
    return std::sqrt(s);
}

double norm(const ExecutionState& a) {
    double s = 0.0;
    for (double v : a.values) {
        s += v * v;
    }
    return std::sqrt(s);
}

bool leq(const ResourceContext& a, const ResourceContext& b) {
    for (std::size_t c = 0; c < a.size(); ++c) {
        if (a[c] > b[c]) {
            return false;
        }
    }
    return true;
}

double coordinate_sum(const ResourceContext& a) {
    return std::accumulate(a.values.begin(), a.values.end(), 0.0);
}

}  // namespace

DtwResult dtw_distance(std::span<const ExecutionState> a, std::span<const ExecutionState> b) {
    if (a.empty() || b.empty()) {
        throw InputError("dtw_distance: sequences must be non-empty");
    }
    const std::size_t m = a.front().size();
    for (const auto& s : a) {
        if (s.size() != m) throw InputError("dtw_distance: dimension mismatch");
    }
    for (const auto& s : b) {
        if (s.size() != m) throw InputError("dtw_distance: dimension mismatch");
    }
    const std::size_t n = a.size();
    const std::size_t k = b.size();
    const double inf = std::numeric_limits<double>::infinity();
    // acc[i][j] on a (n+1) x (k+1) table, row-major.
    std::vector<double> acc((n + 1) * (k + 1), inf);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * (k + 1) + j]; };
    at(0, 0) = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= k; ++j) {
            const double best = std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
            at(i, j) = euclidean(a[i - 1], b[j - 1]) + best;
        }
    }
    DtwResult out;
    out.distance = at(n, k);
    std::size_t i = n, j = k;
    while (i > 0 && j > 0) {
        out.path.emplace_back(i - 1, j - 1);
        if (i == 1 && j == 1) {
            break;
        }
        const double diag = at(i - 1, j - 1);
        const double up = at(i - 1, j);
        const double left = at(i, j - 1);
        if (diag <= up && diag <= left) {
            --i;
            --j;
        } else if (up <= left) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(out.path.begin(), out.path.end());
    return out;
}

namespace {

double max_reference_norm(std::span<const ExecutionState> reference) {
    if (reference.empty()) {
        throw InputError("normalized_dtw: empty reference");
    }
    double max_norm = 0.0;
    for (const auto& s : reference) {
        max_norm = std::max(max_norm, norm(s));
    }
    if (!(max_norm > 0.0)) {
        throw InputError("normalized_dtw: reference profile is identically zero");
    }
    return max_norm;
}

}  // namespace

double normalized_dtw(std::span<const ExecutionState> generated, std::span<const ExecutionState> reference) {
    const double max_norm = max_reference_norm(reference);
    const double d = dtw_distance(generated, reference).distance;
    return d / (static_cast<double>(reference.size()) * max_norm);
}

double normalized_dtw_by_path(std::span<const ExecutionState> generated, std::span<const ExecutionState> reference) {
    const double max_norm = max_reference_norm(reference);
    const auto r = dtw_distance(generated, reference);
    return r.distance / (static_cast<double>(r.path.size()) * max_norm);
}

Bracket find_bracket(std::span<const CatalogEntry> known, const ResourceContext& beta) {
    const CatalogEntry* lower = nullptr;
    const CatalogEntry* upper = nullptr;
    for (const auto& e : known) {
        if (e.context.size() != beta.size()) {
            throw InputError("find_bracket: context dimension mismatch");
        }
        if (leq(e.context, beta)) {
            if (!lower) {
                lower = &e;
            } else {
                const double s = coordinate_sum(e.context), best = coordinate_sum(lower->context);
                if (s > best || (s == best && lower->context < e.context)) {
                    lower = &e;
                }
            }
        }
        if (leq(beta, e.context)) {
            if (!upper) {
                upper = &e;
            } else {
                const double s = coordinate_sum(e.context), best = coordinate_sum(upper->context);
                if (s < best || (s == best && e.context < upper->context)) {
                    upper = &e;
                }
            }
        }
    }
    if (!lower || !upper) {
        throw InputError("no bracketing pair of known contexts exists for the requested context");
    }
    return {lower->id, upper->id};
}

std::vector<ExecutionState> baseline_profile(const Dataset& known, const ResourceContext& beta,
                                             std::span<const double> times) {
    // Only contexts with recorded runs count as known.
    std::vector<CatalogEntry> measured;
    for (const auto& e : known.catalog) {
        if (!known.runs_for(e.id).empty()) {
            measured.push_back(e);
        }
    }
    const auto bracket = find_bracket(measured, beta);
    auto lo = mean_profile(known, bracket.lower_id, times);
    if (bracket.lower_id == bracket.upper_id) {
        return lo;
    }
    const auto hi = mean_profile(known, bracket.upper_id, times);
    for (std::size_t k = 0; k < lo.size(); ++k) {
        for (std::size_t c = 0; c < lo[k].size(); ++c) {
            lo[k].values[c] = 0.5 * (lo[k].values[c] + hi[k].values[c]);
        }
    }
    return lo;
}

double improvement_percent(double baseline_dtw, double generative_dtw) {
    if (!(baseline_dtw > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return 100.0 * (baseline_dtw - generative_dtw) / baseline_dtw;
}

AccuracyReport accuracy_report(const Dataset& ground_truth, const Dataset& training,
                               std::span<const ScoredProfile> generated) {
    AccuracyReport report;
    report.context_names = ground_truth.context_names;
    std::vector<double> path_generative, path_baseline;
    for (const auto& g : generated) {
        if (!ground_truth.find_context(g.context_id) || ground_truth.runs_for(g.context_id).empty()) {
            throw InputError("no ground truth for context '" + g.context_id + "'");
        }
        AccuracyRow row;
        row.context_id = g.context_id;
        row.context = ground_truth.context(g.context_id);
        const auto reference = mean_profile(ground_truth, g.context_id, g.times);
        const auto baseline = baseline_profile(training, row.context, g.times);
        row.dtw_generative = normalized_dtw(g.states, reference);
        row.dtw_baseline = normalized_dtw(baseline, reference);
        path_generative.push_back(normalized_dtw_by_path(g.states, reference));
        path_baseline.push_back(normalized_dtw_by_path(baseline, reference));
        row.improvement_pct = improvement_percent(row.dtw_baseline, row.dtw_generative);
        report.rows.push_back(std::move(row));
    }
    if (!report.rows.empty()) {
        const double n = static_cast<double>(report.rows.size());
        for (const auto& r : report.rows) {
            report.mean_generative += r.dtw_generative / n;
            report.mean_baseline += r.dtw_baseline / n;
        }
        for (std::size_t k = 0; k < report.rows.size(); ++k) {
            report.mean_generative_path_normalized += path_generative[k] / n;
            report.mean_baseline_path_normalized += path_baseline[k] / n;
        }
        report.mean_improvement_pct = improvement_percent(report.mean_baseline, report.mean_generative);
    }
    return report;
}

void AccuracyReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << "context_id";
    for (const auto& n : context_names) {
        out << ',' << n;
    }
    out << ",dtw_generative,dtw_baseline,improvement_pct\n";
    for (const auto& r : rows) {
        out << r.context_id;
        for (double v : r.context.values) {
            out << ',' << format_double(v);
        }
        out << ',' << format_double(r.dtw_generative) << ',' << format_double(r.dtw_baseline) << ','
            << format_double(r.improvement_pct) << '\n';
    }
    out << "mean";
    for (std::size_t c = 0; c < context_names.size(); ++c) {
        out << ',';
    }
    out << ',' << format_double(mean_generative) << ',' << format_double(mean_baseline) << ','
        << format_double(mean_improvement_pct) << '\n';
}

void write_plot_data(const std::filesystem::path& path, std::span<const PlotPoint> points) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << "training_fraction,mean_dtw,relative_measurement_time\n";
    for (const auto& p : points) {
        out << format_double(p.training_fraction) << ',' << format_double(p.mean_dtw) << ','
            << format_double(p.relative_measurement_time) << '\n';
    }
}

double relative_measurement_time(const Dataset& ground_truth, const Dataset& training) {
    auto total = [](const Dataset& d) {
        double s = 0.0;
        for (const auto& r : d.records) {
            s += covered_until(r);
        }
        return s;
    };
    const double all = total(ground_truth);
    return all > 0.0 ? total(training) / all : 0.0;
}

}  // namespace genprof::eval
