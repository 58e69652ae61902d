#include "genprof/dense_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace genprof {

namespace {

void check_axis(const DenseTensor& t, std::size_t axis) {
    if (axis >= t.order()) {
        throw std::out_of_range("tensor axis out of range");
    }
}

}  // namespace

Eigen::VectorXd dense_unimarginal(const DenseTensor& plan, std::size_t sigma) {
    check_axis(plan, sigma);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(plan.shape()[sigma]));
    std::vector<std::size_t> idx(plan.order());
    for (std::size_t flat = 0; flat < plan.size(); ++flat) {
        plan.unravel(flat, idx);
        out(static_cast<Eigen::Index>(idx[sigma])) += plan[flat];
    }
    return out;
}

Eigen::MatrixXd dense_bimarginal(const DenseTensor& plan, std::size_t first, std::size_t second) {
    check_axis(plan, first);
    check_axis(plan, second);
    if (first >= second) {
        throw InputError("dense_bimarginal: first index must precede second");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(plan.shape()[first]),
                                                static_cast<Eigen::Index>(plan.shape()[second]));
    std::vector<std::size_t> idx(plan.order());
    for (std::size_t flat = 0; flat < plan.size(); ++flat) {
        plan.unravel(flat, idx);
        out(static_cast<Eigen::Index>(idx[first]), static_cast<Eigen::Index>(idx[second])) += plan[flat];
    }
    return out;
}

DenseTensor dense_scaled_kernel(const DenseTensor& cost, double epsilon,
                                std::span<const Eigen::VectorXd> potentials) {
    if (potentials.size() != cost.order()) {
        throw InputError("dense_scaled_kernel: one potential per axis required");
    }
    DenseTensor out(std::vector<std::size_t>(cost.shape().begin(), cost.shape().end()));
    std::vector<std::size_t> idx(cost.order());
    for (std::size_t flat = 0; flat < cost.size(); ++flat) {
        cost.unravel(flat, idx);
        double v = std::exp(-cost[flat] / epsilon);
        for (std::size_t s = 0; s < idx.size(); ++s) {
            v *= potentials[s](static_cast<Eigen::Index>(idx[s]));
        }
        out[flat] = v;
    }
    return out;
}

DenseTensor dense_sinkhorn_solve(const DenseTensor& cost, std::span<const Eigen::VectorXd> weights,
                                 const SolverConfig& config, std::size_t cap) {
    config.validate();
    checked_entry_count(cost.shape(), cap);
    const std::size_t ns = cost.order();
    if (ns < 1 || weights.size() != ns) {
        throw InputError("dense_sinkhorn_solve: one marginal per tensor axis required");
    }
    const auto mu = normalized_weights(weights);
    for (std::size_t s = 0; s < ns; ++s) {
        if (static_cast<std::size_t>(mu[s].size()) != cost.shape()[s]) {
            throw InputError("dense_sinkhorn_solve: marginal size does not match tensor axis");
        }
    }

    DenseTensor kernel(std::vector<std::size_t>(cost.shape().begin(), cost.shape().end()));
    for (std::size_t flat = 0; flat < cost.size(); ++flat) {
        kernel[flat] = std::exp(-cost[flat] / config.epsilon);
    }

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Eigen::VectorXd> u(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        u[s].resize(mu[s].size());
        for (Eigen::Index i = 0; i < u[s].size(); ++i) {
            double v = 0.0;
            while (v <= 0.0) {
                v = unit(rng);
            }
            u[s](i) = v;
        }
    }

    std::vector<std::size_t> idx(ns);
    bool converged = false;
    for (std::size_t iter = 0; iter < config.maxiter && !converged; ++iter) {
        double worst = 0.0;
        for (std::size_t s = 0; s < ns; ++s) {
            Eigen::VectorXd proj = Eigen::VectorXd::Zero(u[s].size());
            for (std::size_t flat = 0; flat < kernel.size(); ++flat) {
                kernel.unravel(flat, idx);
                double v = kernel[flat];
                for (std::size_t r = 0; r < ns; ++r) {
                    v *= u[r](static_cast<Eigen::Index>(idx[r]));
                }
                proj(static_cast<Eigen::Index>(idx[s])) += v;
            }
            if (!proj.allFinite() || (proj.array() <= 0.0).any()) {
                throw UnderflowError(s, config.epsilon);
            }
            Eigen::VectorXd updated = u[s].cwiseProduct(mu[s]).cwiseQuotient(proj);
            worst = std::max(worst, hilbert_metric(u[s], updated));
            u[s] = std::move(updated);
        }
        converged = worst <= config.tol;
    }
    if (!converged) {
        throw ConvergenceError("dense_sinkhorn_solve did not converge within maxiter");
    }
    return dense_scaled_kernel(cost, config.epsilon, u);
}

double kl_to_gibbs(const DenseTensor& plan, const DenseTensor& cost, double epsilon) {
    if (!std::equal(plan.shape().begin(), plan.shape().end(), cost.shape().begin(), cost.shape().end())) {
        throw InputError("kl_to_gibbs: plan and cost shapes differ");
    }
    if (!(epsilon > 0.0)) {
        throw InputError("kl_to_gibbs: epsilon must be positive");
    }
    // log Z by log-sum-exp over -C/eps.
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cost.size(); ++i) {
        top = std::max(top, -cost[i] / epsilon);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < cost.size(); ++i) {
        acc += std::exp(-cost[i] / epsilon - top);
    }
    const double log_z = top + std::log(acc);

    double kl = 0.0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const double m = plan[i];
        if (m < 0.0) {
            throw InputError("kl_to_gibbs: plan has a negative entry");
        }
        if (m == 0.0) {
            continue;
        }
        const double log_gibbs = -cost[i] / epsilon - log_z;
        if (std::exp(log_gibbs) == 0.0) {
            throw std::domain_error("kl_to_gibbs: plan puts mass where the Gibbs measure underflows");
        }
        kl += m * (std::log(m) - log_gibbs);
    }
    return kl;
}

DenseTensor feasible_perturbation(const DenseTensor& plan, std::mt19937_64& rng, int swaps) {
    const std::size_t k = plan.order();
    if (k < 2) {
        throw InputError("feasible_perturbation: needs at least two axes");
    }
    for (std::size_t n : plan.shape()) {
        if (n < 2) {
            throw InputError("feasible_perturbation: every axis needs at least two points");
        }
    }
    DenseTensor out = plan;
    std::vector<std::size_t> a(k), b(k), a2(k), b2(k);
    std::vector<bool> in_subset(k);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int done = 0; done < swaps;) {
        for (std::size_t s = 0; s < k; ++s) {
            std::uniform_int_distribution<std::size_t> pick(0, plan.shape()[s] - 1);
            a[s] = pick(rng);
            b[s] = pick(rng);
        }
        bool differs_in = false;
        bool differs_out = false;
        for (std::size_t s = 0; s < k; ++s) {
            in_subset[s] = unit(rng) < 0.5;
            if (a[s] != b[s]) {
                (in_subset[s] ? differs_in : differs_out) = true;
            }
        }
        // Otherwise {a', b'} == {a, b} and the move is zero.
        if (!differs_in || !differs_out) {
            continue;
        }
        for (std::size_t s = 0; s < k; ++s) {
            a2[s] = in_subset[s] ? b[s] : a[s];
            b2[s] = in_subset[s] ? a[s] : b[s];
        }
        const std::size_t fa = out.flat_index(a), fb = out.flat_index(b);
        const std::size_t fa2 = out.flat_index(a2), fb2 = out.flat_index(b2);
        const bool grow = unit(rng) < 0.5;
        const double room = grow ? std::min(out[fa2], out[fb2]) : std::min(out[fa], out[fb]);
        const double t = (0.1 + 0.8 * unit(rng)) * room * (grow ? 1.0 : -1.0);
        out[fa] += t;
        out[fb] += t;
        out[fa2] -= t;
        out[fb2] -= t;
        ++done;
    }
    return out;
}

bool OracleReport::all_passed() const {
    return std::all_of(instances.begin(), instances.end(), [](const auto& r) { return r.passed; });
}

RandomInstance random_instance(std::size_t snapshots, std::size_t points, std::uint64_t seed) {
    if (snapshots < 2 || points < 1) {
        throw InputError("random_instance: need at least two snapshots and one point");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(points);
    RandomInstance inst;
    for (std::size_t j = 0; j + 1 < snapshots; ++j) {
        Eigen::MatrixXd c(n, n);
        for (Eigen::Index q = 0; q < n; ++q) {
            for (Eigen::Index p = 0; p < n; ++p) {
                c(p, q) = unit(rng);
            }
        }
        inst.cost.matrices.push_back(std::move(c));
    }
    for (std::size_t s = 0; s < snapshots; ++s) {
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            w(i) = 0.5 + unit(rng);
        }
        inst.weights.push_back(w / w.sum());
    }
    return inst;
}

OracleReport run_oracle_suite(const OracleSuiteConfig& config) {
    OracleReport report;
    for (std::size_t ns : config.snapshot_counts) {
        for (std::size_t n : config.point_counts) {
            std::vector<std::size_t> shape(ns, n);
            checked_entry_count(shape, config.cap);
            for (std::size_t k = 0; k < config.seeds; ++k) {
                OracleInstanceResult r;
                r.snapshots = ns;
                r.points = n;
                r.seed = config.base_seed + 1000 * ns + 100 * n + k;
                std::ostringstream why;
                try {
                    const auto inst = random_instance(ns, n, r.seed);
                    SolverConfig sc = config.solver;
                    sc.seed = r.seed;
                    const auto solution = sinkhorn_solve(inst.cost, inst.weights, sc);
                    if (!solution.converged) {
                        why << "path solver did not converge; ";
                    }
                    const DenseTensor path_plan = assemble_dense_plan(solution, config.cap);

                    DenseTensor dense_cost = materialize_dense(inst.cost, config.cap);
                    DenseTensor oracle_cost = dense_cost;
                    if (config.flip_dense_cost_sign) {
                        for (std::size_t i = 0; i < oracle_cost.size(); ++i) {
                            oracle_cost[i] = -oracle_cost[i];
                        }
                    }
                    const DenseTensor dense_plan = dense_sinkhorn_solve(oracle_cost, inst.weights, sc, config.cap);
                    for (std::size_t i = 0; i < path_plan.size(); ++i) {
                        r.plan_max_abs_deviation =
                            std::max(r.plan_max_abs_deviation, std::abs(path_plan[i] - dense_plan[i]));
                    }
                    if (r.plan_max_abs_deviation > config.plan_tolerance) {
                        why << "plan deviation " << r.plan_max_abs_deviation << "; ";
                    }

                    for (std::size_t s = 0; s < ns; ++s) {
                        r.feasibility_l1 = std::max(
                            r.feasibility_l1, (solution.unimarginal(s) - inst.weights[s]).lpNorm<1>());
                    }
                    if (r.feasibility_l1 > config.feasibility_tolerance) {
                        why << "feasibility " << r.feasibility_l1 << "; ";
                    }

                    // Projections at random (unconverged) potentials.
                    std::mt19937_64 rng(r.seed ^ 0x9e3779b97f4a7c15ULL);
                    std::uniform_real_distribution<double> unit(0.5, 1.5);
                    std::vector<Eigen::VectorXd> u(ns, Eigen::VectorXd(static_cast<Eigen::Index>(n)));
                    for (auto& v : u) {
                        for (Eigen::Index i = 0; i < v.size(); ++i) {
                            v(i) = unit(rng);
                        }
                    }
                    const auto kernels = gibbs_kernels(inst.cost, sc.epsilon);
                    const DenseTensor scaled = dense_scaled_kernel(dense_cost, sc.epsilon, u);
                    for (std::size_t s = 0; s < ns; ++s) {
                        const double d = (unimarginal_projection(u, kernels, s) - dense_unimarginal(scaled, s))
                                             .cwiseAbs()
                                             .maxCoeff();
                        r.unimarginal_max_abs_deviation = std::max(r.unimarginal_max_abs_deviation, d);
                        for (std::size_t s2 = s + 1; s2 < ns; ++s2) {
                            const double e = (bimarginal_projection(u, kernels, s, s2) -
                                              dense_bimarginal(scaled, s, s2))
                                                 .cwiseAbs()
                                                 .maxCoeff();
                            r.bimarginal_max_abs_deviation = std::max(r.bimarginal_max_abs_deviation, e);
                        }
                    }
                    if (r.unimarginal_max_abs_deviation > config.projection_tolerance ||
                        r.bimarginal_max_abs_deviation > config.projection_tolerance) {
                        why << "projection deviation; ";
                    }

                    r.kl_optimal = kl_to_gibbs(path_plan, dense_cost, sc.epsilon);
                    r.kl_min_perturbed = std::numeric_limits<double>::infinity();
                    if (n >= 2) {
                        for (std::size_t p = 0; p < config.perturbations; ++p) {
                            const auto perturbed = feasible_perturbation(path_plan, rng);
                            r.kl_min_perturbed =
                                std::min(r.kl_min_perturbed, kl_to_gibbs(perturbed, dense_cost, sc.epsilon));
                        }
                        if (r.kl_optimal > r.kl_min_perturbed + config.kl_slack) {
                            why << "perturbed plan has lower KL; ";
                        }
                    }
                } catch (const std::exception& e) {
                    why << e.what();
                }
                r.failure = why.str();
                r.passed = r.failure.empty();
                report.instances.push_back(std::move(r));
            }
        }
    }
    return report;
}

}  // namespace genprof
