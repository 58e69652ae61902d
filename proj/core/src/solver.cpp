#include "genprof/solver.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace genprof {

namespace {

void check_chain(std::span<const Eigen::VectorXd> potentials, std::span<const Eigen::MatrixXd> kernels) {
    if (potentials.size() < 2 || kernels.size() + 1 != potentials.size()) {
        throw InputError("projection needs n_s >= 2 potentials and n_s - 1 kernels");
    }
    const auto n = potentials.front().size();
    for (const auto& u : potentials) {
        if (u.size() != n) {
            throw InputError("potentials differ in length");
        }
    }
    for (const auto& k : kernels) {
        if (k.rows() != n || k.cols() != n) {
            throw InputError("kernel shape does not match potentials");
        }
    }
}

// left[s]: contraction of everything before snapshot s, as a vector over i_s.
Eigen::VectorXd left_message(std::span<const Eigen::VectorXd> u, std::span<const Eigen::MatrixXd> k,
                             std::size_t sigma) {
    Eigen::VectorXd msg = Eigen::VectorXd::Ones(u.front().size());
    for (std::size_t j = 0; j < sigma; ++j) {
        msg = k[j].transpose() * msg.cwiseProduct(u[j]);
    }
    return msg;
}

// right[s]: contraction of everything after snapshot s.
Eigen::VectorXd right_message(std::span<const Eigen::VectorXd> u, std::span<const Eigen::MatrixXd> k,
                              std::size_t sigma) {
    Eigen::VectorXd msg = Eigen::VectorXd::Ones(u.front().size());
    for (std::size_t j = u.size() - 1; j > sigma; --j) {
        msg = k[j - 1] * msg.cwiseProduct(u[j]);
    }
    return msg;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw InputError("epsilon must be positive");
    }
    if (!(tol > 0.0)) {
        throw InputError("tol must be positive");
    }
    if (maxiter < 1) {
        throw InputError("maxiter must be at least 1");
    }
}

UnderflowError::UnderflowError(std::size_t snapshot, double epsilon)
    : std::runtime_error([&] {
          std::ostringstream msg;
          msg << "projection onto snapshot " << snapshot
              << " has a zero or non-finite entry at epsilon = " << epsilon
              << "; try a larger epsilon (e.g. " << 2.0 * epsilon << ")";
          return msg.str();
      }()),
      snapshot_(snapshot),
      suggested_epsilon_(2.0 * epsilon) {}

double hilbert_metric(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() != q.size() || p.size() == 0) {
        throw InputError("hilbert_metric: vectors must be non-empty and equal length");
    }
    if ((p.array() <= 0.0).any() || (q.array() <= 0.0).any() || !p.allFinite() || !q.allFinite()) {
        throw InputError("hilbert_metric: entries must be positive and finite");
    }
    const Eigen::ArrayXd ratio = p.array() / q.array();
    return std::log(ratio.maxCoeff()) - std::log(ratio.minCoeff());
}

std::vector<Eigen::MatrixXd> gibbs_kernels(const PathCost& cost, double epsilon) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(cost.matrices.size());
    for (const auto& c : cost.matrices) {
        out.push_back((-c.array() / epsilon).exp().matrix());
    }
    return out;
}

Eigen::VectorXd unimarginal_projection(std::span<const Eigen::VectorXd> potentials,
                                       std::span<const Eigen::MatrixXd> kernels, std::size_t sigma) {
    check_chain(potentials, kernels);
    if (sigma >= potentials.size()) {
        throw std::out_of_range("unimarginal_projection: snapshot index out of range");
    }
    return left_message(potentials, kernels, sigma)
        .cwiseProduct(potentials[sigma])
        .cwiseProduct(right_message(potentials, kernels, sigma));
}

Eigen::MatrixXd bimarginal_projection(std::span<const Eigen::VectorXd> potentials,
                                      std::span<const Eigen::MatrixXd> kernels, std::size_t first,
                                      std::size_t second) {
    check_chain(potentials, kernels);
    if (first >= second) {
        throw InputError("bimarginal_projection: first index must precede second");
    }
    if (second >= potentials.size()) {
        throw std::out_of_range("bimarginal_projection: snapshot index out of range");
    }
    const Eigen::VectorXd row_scale = left_message(potentials, kernels, first).cwiseProduct(potentials[first]);
    Eigen::MatrixXd chain = kernels[first];
    for (std::size_t j = first + 1; j < second; ++j) {
        chain = (chain * potentials[j].asDiagonal()) * kernels[j];
    }
    const Eigen::VectorXd col_scale =
        potentials[second].cwiseProduct(right_message(potentials, kernels, second));
    return row_scale.asDiagonal() * chain * col_scale.asDiagonal();
}

std::vector<Eigen::VectorXd> normalized_weights(std::span<const Eigen::VectorXd> weights) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(weights.size());
    for (const auto& w : weights) {
        if (w.size() == 0 || (w.array() <= 0.0).any() || !w.allFinite()) {
            throw InputError("marginal weights must be positive and finite");
        }
        const double total = w.sum();
        if (std::abs(total - 1.0) > 1e-9) {
            throw InputError("marginal weights must sum to one");
        }
        out.push_back(w / total);
    }
    return out;
}

SinkhornIteration::SinkhornIteration(const PathCost& cost, std::span<const Eigen::VectorXd> weights,
                                     const SolverConfig& config)
    : epsilon_(config.epsilon) {
    config.validate();
    if (cost.matrices.empty() || weights.size() != cost.snapshots()) {
        throw InputError("sinkhorn: need one marginal per snapshot and n_s >= 2");
    }
    const auto n = static_cast<Eigen::Index>(cost.points());
    for (const auto& c : cost.matrices) {
        if (c.rows() != n || c.cols() != n) {
            throw InputError("sinkhorn: cost matrices must all be N x N");
        }
    }
    weights_ = normalized_weights(weights);
    for (const auto& w : weights_) {
        if (w.size() != n) {
            throw InputError("sinkhorn: marginal sizes differ from cost size");
        }
    }
    kernels_ = gibbs_kernels(cost, epsilon_);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    potentials_.resize(weights_.size());
    for (auto& u : potentials_) {
        u.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double v = 0.0;
            while (v <= 0.0) {
                v = unit(rng);
            }
            u(i) = v;
        }
    }
    right_.resize(weights_.size());
}

double SinkhornIteration::sweep() {
    const std::size_t ns = potentials_.size();
    const auto n = potentials_.front().size();

    right_[ns - 1] = Eigen::VectorXd::Ones(n);
    for (std::size_t j = ns - 1; j-- > 0;) {
        right_[j] = kernels_[j] * potentials_[j + 1].cwiseProduct(right_[j + 1]);
    }

    double worst = 0.0;
    Eigen::VectorXd left = Eigen::VectorXd::Ones(n);
    for (std::size_t s = 0; s < ns; ++s) {
        // proj_s = left (.) u_s (.) right_s, so u_s (.) mu_s ./ proj_s = mu_s ./ (left (.) right_s).
        const Eigen::VectorXd denom = left.cwiseProduct(right_[s]);
        const Eigen::VectorXd proj = denom.cwiseProduct(potentials_[s]);
        if (!proj.allFinite() || (proj.array() <= 0.0).any()) {
            throw UnderflowError(s, epsilon_);
        }
        Eigen::VectorXd updated = weights_[s].cwiseQuotient(denom);
        if (!updated.allFinite() || (updated.array() <= 0.0).any()) {
            throw UnderflowError(s, epsilon_);
        }
        worst = std::max(worst, hilbert_metric(potentials_[s], updated));
        potentials_[s] = std::move(updated);
        if (s + 1 < ns) {
            left = kernels_[s].transpose() * left.cwiseProduct(potentials_[s]);
        }
    }
    return worst;
}

void normalize_potentials(std::vector<Eigen::VectorXd>& potentials) {
    if (potentials.empty()) {
        return;
    }
    double carried = 1.0;
    for (std::size_t s = 0; s + 1 < potentials.size(); ++s) {
        const double peak = potentials[s].maxCoeff();
        potentials[s] /= peak;
        carried *= peak;
    }
    potentials.back() *= carried;
}

SolverSolution sinkhorn_solve(const PathCost& cost, std::span<const Eigen::VectorXd> weights,
                              const SolverConfig& config) {
    SinkhornIteration iter(cost, weights, config);
    SolverSolution out;
    out.epsilon = config.epsilon;
    while (out.iterations < config.maxiter) {
        const double err = iter.sweep();
        ++out.iterations;
        out.residuals.push_back(err);
        out.final_error = err;
        if (err <= config.tol) {
            out.converged = true;
            break;
        }
    }
    out.potentials = iter.release_potentials();
    out.kernels = iter.release_kernels();
    normalize_potentials(out.potentials);
    return out;
}

SolverSolution sinkhorn_solve(const PathCost& cost, std::span<const EmpiricalMarginal> marginals,
                              const SolverConfig& config) {
    std::vector<Eigen::VectorXd> weights;
    weights.reserve(marginals.size());
    for (const auto& m : marginals) {
        weights.push_back(m.weights);
    }
    return sinkhorn_solve(cost, weights, config);
}

DenseTensor assemble_dense_plan(const SolverSolution& solution, std::size_t cap) {
    const std::size_t ns = solution.snapshots();
    if (ns < 2 || solution.kernels.size() + 1 != ns) {
        throw InputError("assemble_dense_plan: malformed solution");
    }
    const std::vector<std::size_t> shape(ns, solution.points());
    checked_entry_count(shape, cap);
    DenseTensor plan(shape);
    std::vector<std::size_t> idx(ns);
    for (std::size_t flat = 0; flat < plan.size(); ++flat) {
        plan.unravel(flat, idx);
        double v = 1.0;
        for (std::size_t s = 0; s < ns; ++s) {
            v *= solution.potentials[s](static_cast<Eigen::Index>(idx[s]));
        }
        for (std::size_t j = 0; j + 1 < ns; ++j) {
            v *= solution.kernels[j](static_cast<Eigen::Index>(idx[j]), static_cast<Eigen::Index>(idx[j + 1]));
        }
        plan[flat] = v;
    }
    return plan;
}

}  // namespace genprof
