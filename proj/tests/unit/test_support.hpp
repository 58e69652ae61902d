#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genprof/dataset.hpp"
#include "genprof/types.hpp"

namespace genprof::testing {

// One record sampled every `dt` starting at 0.
inline ProfileRecord make_record(const std::string& run_id, const std::string& context_id,
                                 std::vector<double> context, const std::vector<std::vector<double>>& states,
                                 double dt = 0.01) {
    ProfileRecord r;
    r.run_id = run_id;
    r.context_id = context_id;
    r.context = ResourceContext{std::move(context)};
    for (std::size_t k = 0; k < states.size(); ++k) {
        r.samples.push_back({static_cast<double>(k) * dt, ExecutionState{states[k]}});
    }
    return r;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo = 0.0,
                                     double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = u(rng);
        }
    }
    return m;
}

inline Eigen::VectorXd random_positive(Eigen::Index n, std::uint64_t seed) {
    Eigen::VectorXd v = random_matrix(n, 1, seed, 0.5, 1.5);
    return v;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("genprof-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Small linear phase model over a 3 x 3 context grid, two states.
inline const char* kLinearModelJson = R"({
  "state_names": ["instructions", "misses"],
  "context_names": ["ways", "freq"],
  "context_grid": [[2, 4, 6], [1.0, 1.5, 2.0]],
  "phases": [
    {"duration": 0.1, "noise": 0.0, "rates": [[{"weights": [0, 10], "offset": 0}], 1.0]},
    {"duration": 0.1, "noise": 0.0, "rates": [[{"weights": [1, 5], "offset": 2}],
                                             [{"weights": [-0.1, 0], "offset": 1.5}]]}
  ]
})";

}  // namespace genprof::testing
