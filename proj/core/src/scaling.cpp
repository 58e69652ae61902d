#include "genprof/scaling.hpp"

namespace genprof {

Eigen::MatrixXd ScalingRecord::forward(const Eigen::MatrixXd& raw, std::size_t snapshot) const {
    const auto& m = maps.at(snapshot);
    if (static_cast<std::size_t>(raw.cols()) != m.size()) {
        throw InputError("scaling dimension mismatch");
    }
    Eigen::MatrixXd out(raw.rows(), raw.cols());
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        const auto& f = m[static_cast<std::size_t>(c)];
        for (Eigen::Index r = 0; r < raw.rows(); ++r) {
            out(r, c) = f.forward(raw(r, c));
        }
    }
    return out;
}

Eigen::MatrixXd ScalingRecord::inverse(const Eigen::MatrixXd& scaled, std::size_t snapshot) const {
    const auto& m = maps.at(snapshot);
    if (static_cast<std::size_t>(scaled.cols()) != m.size()) {
        throw InputError("scaling dimension mismatch");
    }
    Eigen::MatrixXd out(scaled.rows(), scaled.cols());
    for (Eigen::Index c = 0; c < scaled.cols(); ++c) {
        const auto& f = m[static_cast<std::size_t>(c)];
        for (Eigen::Index r = 0; r < scaled.rows(); ++r) {
            out(r, c) = f.inverse(scaled(r, c));
        }
    }
    return out;
}

std::pair<std::vector<EmpiricalMarginal>, ScalingRecord>
scale_marginals(std::span<const EmpiricalMarginal> marginals) {
    ScalingRecord record;
    std::vector<EmpiricalMarginal> scaled;
    scaled.reserve(marginals.size());
    for (const auto& mu : marginals) {
        if (!mu.points.allFinite()) {
            throw InputError("cannot scale non-finite marginal points");
        }
        std::vector<ComponentMap> maps;
        for (Eigen::Index c = 0; c < mu.points.cols(); ++c) {
            const double lo = mu.points.col(c).minCoeff();
            const double hi = mu.points.col(c).maxCoeff();
            ComponentMap f;
            f.offset = lo;
            if (hi > lo) {
                f.factor = kScaledRange / (hi - lo);
            } else {
                f.degenerate = true;
            }
            maps.push_back(f);
        }
        record.maps.push_back(std::move(maps));
        scaled.push_back({record.forward(mu.points, record.maps.size() - 1), mu.weights});
    }
    return {std::move(scaled), std::move(record)};
}

}  // namespace genprof
