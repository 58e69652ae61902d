#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "genprof/dense_oracle.hpp"
#include "genprof/generator.hpp"
#include "genprof/model.hpp"
#include "genprof/workloadsim.hpp"
#include "test_support.hpp"

using namespace genprof;
using genprof::testing::make_record;

namespace {

WeightedCloud cloud_of(const std::vector<double>& values, const std::vector<double>& weights) {
    WeightedCloud c;
    c.points.resize(static_cast<Eigen::Index>(values.size()), 1);
    c.weights.resize(static_cast<Eigen::Index>(weights.size()));
    for (std::size_t k = 0; k < values.size(); ++k) {
        c.points(static_cast<Eigen::Index>(k), 0) = values[k];
        c.weights(static_cast<Eigen::Index>(k)) = weights[k];
    }
    return c;
}

// Noise-free one-resource model: freq 1.0 .. 2.0 in steps of 0.1.
const char* kFreqModel = R"({
  "state_names": ["instructions", "misses"],
  "context_names": ["freq"],
  "context_grid": [[1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0]],
  "phases": [
    {"duration": 0.2, "noise": 0.0, "rates": [[{"weights": [10], "offset": 0}], 1.0]},
    {"duration": 0.2, "noise": 0.0, "rates": [[{"weights": [4], "offset": 3}],
                                             [{"weights": [-0.5], "offset": 1.5}]]}
  ]
})";

struct Trained {
    sim::PhaseModel phases;
    DatasetFiles files;
    GenerativeModel model;
};

Trained train_freq_model(std::size_t runs, std::uint64_t seed = 0) {
    Trained t;
    t.phases = sim::parse_phase_model(kFreqModel);
    sim::SimulationOptions opt;
    opt.runs_per_context = runs;
    opt.seed = seed;
    t.files = sim::simulate_dataset(t.phases, {}, opt);
    std::vector<std::string> train;
    for (std::size_t k = 0; k < t.phases.catalog.size(); k += 2) train.push_back(t.phases.catalog[k].id);
    t.model = train_model(t.files.dataset, t.files.grid, train, SolverConfig{});
    return t;
}

// Small noisy three-snapshot model for oracle comparisons.
GenerativeModel small_noisy_model() {
    auto phases = sim::parse_phase_model(genprof::testing::kLinearModelJson);
    for (auto& p : phases.phases) p.noise = 0.1;
    sim::SimulationOptions opt;
    opt.runs_per_context = 1;
    opt.snapshot_dt = 0.1;
    opt.seed = 3;
    const auto files = sim::simulate_dataset(phases, {}, opt);
    const std::vector<std::string> train{"c000", "c004", "c008"};
    return train_model(files.dataset, files.grid, train, SolverConfig{});
}

}  // namespace

TEST(InterpolateJoint, LambdaZeroCollapsesOntoSnapshot) {
    const auto model = small_noisy_model();
    ASSERT_TRUE(model.solution.converged);
    const auto n = static_cast<Eigen::Index>(model.points());
    const auto joint = interpolate_joint(model, 0, 0.0);
    ASSERT_EQ(joint.size(), static_cast<std::size_t>(n * n));
    EXPECT_NO_THROW(joint.validate());
    for (Eigen::Index i = 0; i < n; ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            row += joint.weights(i * n + j);
            EXPECT_EQ(joint.points.row(i * n + j), model.samples.snapshots[0].row(i));
        }
        EXPECT_NEAR(row, 1.0 / static_cast<double>(n), 1e-9);
    }
}

TEST(InterpolateJoint, LambdaOneUsesNextSnapshotWithColumnSums) {
    const auto model = small_noisy_model();
    const auto n = static_cast<Eigen::Index>(model.points());
    const auto joint = interpolate_joint(model, 1, 1.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        double col = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            col += joint.weights(i * n + j);
            EXPECT_EQ(joint.points.row(i * n + j), model.samples.snapshots[2].row(j));
        }
        EXPECT_NEAR(col, 1.0 / static_cast<double>(n), 1e-9);
    }
}

TEST(InterpolateJoint, EndpointsAgreeAcrossIntervals) {
    // lambda = 1 of interval sigma and lambda = 0 of interval sigma + 1 put
    // the same mass on the same points.
    const auto model = small_noisy_model();
    const auto n = static_cast<Eigen::Index>(model.points());
    const auto a = interpolate_joint(model, 0, 1.0);
    const auto b = interpolate_joint(model, 1, 0.0);
    std::map<std::vector<double>, double> ma, mb;
    for (Eigen::Index r = 0; r < n * n; ++r) {
        std::vector<double> ka, kb;
        for (Eigen::Index c = 0; c < a.points.cols(); ++c) {
            ka.push_back(a.points(r, c));
            kb.push_back(b.points(r, c));
        }
        ma[ka] += a.weights(r);
        mb[kb] += b.weights(r);
    }
    ASSERT_EQ(ma.size(), mb.size());
    for (const auto& [k, w] : ma) {
        ASSERT_TRUE(mb.count(k));
        EXPECT_NEAR(w, mb[k], 1e-9);
    }
}

TEST(InterpolateJoint, MidpointMatchesDenseOracleBimarginal) {
    const auto model = small_noisy_model();
    const auto n = static_cast<Eigen::Index>(model.points());
    const auto plan = assemble_dense_plan(model.solution);
    const Eigen::MatrixXd bm = dense_bimarginal(plan, 0, 1);
    const auto joint = interpolate_joint(model, 0, 0.5);
    const double total = bm.sum();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::RowVectorXd want =
                0.5 * model.samples.snapshots[0].row(i) + 0.5 * model.samples.snapshots[1].row(j);
            EXPECT_LE((joint.points.row(i * n + j) - want).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_NEAR(joint.weights(i * n + j), bm(i, j) / total, 1e-12);
        }
    }
}

TEST(InterpolateJoint, BadArgumentsRejected) {
    const auto model = small_noisy_model();
    EXPECT_THROW(interpolate_joint(model, 0, 1.5), InputError);
    EXPECT_THROW(interpolate_joint(model, 2, 0.5), std::out_of_range);
}

TEST(ContextMarginal, UniformWeights) {
    const std::vector<ResourceContext> one{ResourceContext{{1.0, 2.0}}};
    EXPECT_EQ(context_marginal(one).weights(0), 1.0);
    std::vector<ResourceContext> many;
    for (int k = 0; k < 125; ++k) many.push_back(ResourceContext{{static_cast<double>(k)}});
    const auto m = context_marginal(many);
    ASSERT_EQ(m.size(), 125u);
    for (Eigen::Index k = 0; k < 125; ++k) EXPECT_DOUBLE_EQ(m.weights(k), 1.0 / 125.0);
    many.push_back(many[3]);
    EXPECT_THROW(context_marginal(many), InputError);
}

TEST(Conditioning, SingleContextGivesXiMarginal) {
    WeightedCloud joint;
    joint.points.resize(3, 2);
    joint.points << 1, 5, 2, 5, 3, 5;
    joint.weights = Eigen::Vector3d(0.2, 0.3, 0.5);
    const std::vector<double> h{0.7};
    const auto c = condition_on_context(joint, ResourceContext{{5.0}}, h, 1);
    ASSERT_EQ(c.points.cols(), 1);
    EXPECT_LE((c.weights - joint.weights).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(c.points.col(0), joint.points.col(0));
}

TEST(Conditioning, WeightsSumToOne) {
    const auto model = small_noisy_model();
    const auto joint = interpolate_joint(model, 1, 0.3);
    const auto h = silverman_bandwidth(model.training_context_values());
    for (const auto& e : model.catalog) {
        const auto c = condition_on_context(joint, e.context, h, model.state_dim());
        EXPECT_NO_THROW(c.validate());
        EXPECT_EQ(c.points.cols(), static_cast<Eigen::Index>(model.state_dim()));
    }
}

TEST(Conditioning, WideBandwidthRecoversMarginal) {
    const auto model = small_noisy_model();
    const auto joint = interpolate_joint(model, 0, 0.4);
    // Range of the training contexts is 4 ways and 1 GHz.
    const std::vector<double> h{1e3 * 4.0, 1e3 * 1.0};
    const auto c = condition_on_context(joint, ResourceContext{{3.0, 1.2}}, h, model.state_dim());
    EXPECT_LE((c.weights - joint.weights).lpNorm<1>(), 1e-6);
}

TEST(Conditioning, FarContextThrowsOutOfHull) {
    const auto model = small_noisy_model();
    const auto joint = interpolate_joint(model, 0, 0.0);
    const std::vector<double> h{0.01, 0.01};
    try {
        condition_on_context(joint, ResourceContext{{1000.0, 1.5}}, h, model.state_dim());
        FAIL() << "expected OutOfHullError";
    } catch (const OutOfHullError& e) {
        EXPECT_GT(e.nearest_distance(), 990.0);
    }
}

TEST(Conditioning, DimensionAndBandwidthChecks) {
    const auto model = small_noisy_model();
    const auto joint = interpolate_joint(model, 0, 0.0);
    const std::vector<double> one{1.0};
    const std::vector<double> zero{0.0, 1.0};
    EXPECT_THROW(condition_on_context(joint, ResourceContext{{2.0, 1.0}}, one, model.state_dim()), InputError);
    EXPECT_THROW(condition_on_context(joint, ResourceContext{{2.0, 1.0}}, zero, model.state_dim()), InputError);
}

TEST(MaxLikelihood, PicksHeaviestPoint) {
    EXPECT_EQ(max_likelihood_state(cloud_of({10, 20, 30}, {0.2, 0.5, 0.3}))[0], 20.0);
}

TEST(MaxLikelihood, TiesGoToFirstPoint) {
    EXPECT_EQ(max_likelihood_state(cloud_of({10, 20, 30}, {1.0 / 3, 1.0 / 3, 1.0 / 3}))[0], 10.0);
}

TEST(MaxLikelihood, MatchesExhaustiveArgmaxOnSimulatorConditional) {
    const auto model = small_noisy_model();
    const auto joint = interpolate_joint(model, 0, 0.6);
    const auto h = silverman_bandwidth(model.training_context_values());
    const auto c = condition_on_context(joint, ResourceContext{{4.0, 1.5}}, h, model.state_dim());
    Eigen::Index best = 0;
    for (Eigen::Index k = 0; k < c.weights.size(); ++k) {
        if (c.weights(k) > c.weights(best)) best = k;
    }
    const auto ml = max_likelihood_state(c);
    for (Eigen::Index d = 0; d < c.points.cols(); ++d) EXPECT_EQ(ml[static_cast<std::size_t>(d)], c.points(best, d));
}

TEST(MeanState, SinglePointAndHalfway) {
    EXPECT_EQ(mean_state(cloud_of({4.5}, {1.0}))[0], 4.5);
    EXPECT_EQ(mean_state(cloud_of({0, 1}, {0.5, 0.5}))[0], 0.5);
}

TEST(MeanState, DiffersFromMaxLikelihoodWhenBimodal) {
    // One context, two clusters of runs: most near 1, a few near 10.
    Dataset ds;
    ds.state_names = {"rate"};
    ds.context_names = {"freq"};
    ds.catalog = {{"c0", ResourceContext{{2.0}}}};
    const std::vector<double> levels{1.00, 1.01, 1.02, 1.03, 1.04, 1.05, 1.06, 10.0, 10.5, 11.0};
    for (std::size_t r = 0; r < levels.size(); ++r) {
        ds.records.push_back(make_record("r" + std::to_string(r), "c0", {2.0},
                                         std::vector<std::vector<double>>(10, {levels[r]})));
    }
    const std::vector<std::string> train{"c0"};
    const auto model = train_model(ds, SnapshotGrid({0.0, 0.05, 0.09}), train, SolverConfig{});
    GenerationOptions opt;
    opt.delta_t = 0.01;
    opt.mode = ProfileMode::MaxLikelihood;
    const auto ml = generate_profile(model, ResourceContext{{2.0}}, opt);
    opt.mode = ProfileMode::Mean;
    const auto mean = generate_profile(model, ResourceContext{{2.0}}, opt);
    for (std::size_t k = 0; k < ml.states.size(); ++k) {
        EXPECT_NEAR(mean.states[k][0], 3.871, 1e-6);  // the run average
        EXPECT_GT(std::abs(mean.states[k][0] - ml.states[k][0]), 1.0);
    }
}

TEST(Sampling, DegenerateCloud) {
    for (const auto& s : sample_states(cloud_of({7.0}, {1.0}), 50, 3)) EXPECT_EQ(s[0], 7.0);
}

TEST(Sampling, FrequenciesWithinThreeSigma) {
    const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
    const auto draws = sample_states(cloud_of({0, 1, 2, 3}, w), 100000, 11);
    std::vector<double> count(4, 0.0);
    for (const auto& s : draws) count[static_cast<std::size_t>(s[0])] += 1.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const double sigma = std::sqrt(1e5 * w[k] * (1 - w[k]));
        EXPECT_LE(std::abs(count[k] - 1e5 * w[k]), 3 * sigma) << k;
    }
}

TEST(Sampling, TopStates) {
    const auto top = top_states(cloud_of({0, 1, 2, 3}, {0.5, 0.3, 0.1, 0.1}), 3);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0][0], 0.0);
    EXPECT_EQ(top[1][0], 1.0);
    EXPECT_EQ(top[2][0], 2.0);
}

TEST(Bandwidth, SilvermanByHand) {
    // Values 1..5: sd = sqrt(2.5), IQR = 2 -> spread = min(1.5811, 1.4925) = 1.4925.
    std::vector<ResourceContext> ctx;
    for (int k = 1; k <= 5; ++k) ctx.push_back(ResourceContext{{static_cast<double>(k), 3.0}});
    const auto h = silverman_bandwidth(ctx);
    EXPECT_NEAR(h[0], 0.9 * (2.0 / 1.34) * std::pow(5.0, -0.2), 1e-12);
    EXPECT_GT(h[1], 0.0);  // constant component still gets a width
}

TEST(GenerationTimes, SnapshotSpacingHitsSnapshotsOnly) {
    const auto grid = SnapshotGrid::uniform(0.05, 0.4);
    const auto times = generation_times(grid, 0.05);
    ASSERT_EQ(times.size(), grid.size());
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const auto pos = locate(grid, times[k]);
        EXPECT_EQ(pos.sigma, k);
        EXPECT_EQ(pos.lambda, 0.0);
    }
    const auto last = locate(grid, times.back());
    EXPECT_EQ(last.sigma, grid.size() - 2);
    EXPECT_EQ(last.lambda, 1.0);
}

TEST(GenerationTimes, TenMillisecondOutputOverFiftyMillisecondSnapshots) {
    const auto grid = SnapshotGrid::uniform(0.05, 1.0);
    const auto times = generation_times(grid, 0.01);
    ASSERT_EQ(times.size(), 101u);
    EXPECT_EQ(times.front(), 0.0);
    EXPECT_EQ(times.back(), grid.back());
    const auto pos = locate(grid, times[23]);
    EXPECT_EQ(pos.sigma, 4u);
    EXPECT_NEAR(pos.lambda, 0.6, 1e-9);
}

TEST(GenerationTimes, ShortLastStep) {
    const auto times = generation_times(SnapshotGrid({0.0, 0.1, 0.25}), 0.1);
    ASSERT_EQ(times.size(), 4u);
    EXPECT_EQ(times.back(), 0.25);
    EXPECT_THROW(generation_times(SnapshotGrid({0.0, 0.1}), 0.0), InputError);
    EXPECT_THROW(locate(SnapshotGrid({0.0, 0.1}), 0.2), InputError);
}

TEST(ProfileModeText, RoundTrip) {
    for (auto m : {ProfileMode::MaxLikelihood, ProfileMode::Mean, ProfileMode::Sample}) {
        EXPECT_EQ(parse_profile_mode(to_string(m)), m);
    }
    EXPECT_EQ(parse_profile_mode("max-likelihood"), ProfileMode::MaxLikelihood);
    EXPECT_THROW(parse_profile_mode("median"), InputError);
}

TEST(GenerateProfiles, HeldOutContextTracksTrueRates) {
    const auto t = train_freq_model(3);
    ASSERT_TRUE(t.model.solution.converged);
    GenerationOptions opt;
    for (std::size_t k = 1; k < t.phases.catalog.size(); k += 2) {
        const auto& beta = t.phases.catalog[k].context;
        const auto p = generate_profile(t.model, beta, opt);
        ASSERT_EQ(p.times.size(), 41u);
        const auto truth = sim::expected_profile(t.phases, beta, p.times);
        for (std::size_t i = 0; i < p.times.size(); ++i) {
            // Away from the phase boundary the nearest training context is one
            // catalog step (0.1 GHz) away: at most 1.0 instructions and 0.05 misses off.
            if (std::abs(p.times[i] - 0.2) < 0.06) continue;
            EXPECT_LE(std::abs(p.states[i][0] - truth[i][0]), 1.0 + 1e-9) << beta[0] << " t=" << p.times[i];
            EXPECT_LE(std::abs(p.states[i][1] - truth[i][1]), 0.05 + 1e-9) << beta[0] << " t=" << p.times[i];
        }
        EXPECT_TRUE(p.warnings.empty());
    }
}

TEST(GenerateProfiles, TrainingContextReproducedExactlyWithoutNoise) {
    const auto t = train_freq_model(2);
    GenerationOptions opt;
    const auto& beta = t.phases.catalog[4].context;
    const auto p = generate_profile(t.model, beta, opt);
    const auto truth = sim::expected_profile(t.phases, beta, p.times);
    for (std::size_t i = 0; i < p.times.size(); ++i) {
        if (std::abs(p.times[i] - 0.2) < 0.06) continue;
        EXPECT_NEAR(p.states[i][0], truth[i][0], 1e-9);
    }
}

TEST(GenerateProfiles, RefusesUnconvergedUnlessAllowed) {
    auto t = train_freq_model(1);
    t.model.solution.converged = false;
    GenerationOptions opt;
    EXPECT_THROW(generate_profile(t.model, t.phases.catalog[1].context, opt), NotConvergedError);
    opt.allow_unconverged = true;
    EXPECT_NO_THROW(generate_profile(t.model, t.phases.catalog[1].context, opt));
}

TEST(GenerateProfiles, FarContextFallsBackWithWarning) {
    const auto t = train_freq_model(1);
    GenerationOptions opt;
    opt.bandwidth = {1e-3};
    const auto p = generate_profile(t.model, ResourceContext{{9.0}}, opt);
    ASSERT_EQ(p.states.size(), p.times.size());
    ASSERT_FALSE(p.warnings.empty());
    bool fallback = false;
    for (const auto& w : p.warnings) fallback |= w.find("falling back") != std::string::npos;
    EXPECT_TRUE(fallback);
    // The nearest support context is freq 2.0.
    const auto truth = sim::expected_profile(t.phases, ResourceContext{{2.0}}, p.times);
    EXPECT_NEAR(p.states[5][0], truth[5][0], 1e-9);
}

TEST(GenerateProfiles, DeterministicAndSeededSampling) {
    const auto model = small_noisy_model();
    const std::vector<ResourceContext> ctx{ResourceContext{{4.0, 1.5}}, ResourceContext{{2.0, 2.0}}};
    GenerationOptions opt;
    opt.mode = ProfileMode::Sample;
    opt.seed = 42;
    const auto a = generate_profiles(model, ctx, opt);
    const auto b = generate_profiles(model, ctx, opt);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].states, b[k].states);
    opt.seed = 43;
    const auto c = generate_profiles(model, ctx, opt);
    EXPECT_NE(a[0].states, c[0].states);
}

TEST(GenerateProfiles, BatchEqualsOneAtATime) {
    const auto model = small_noisy_model();
    const std::vector<ResourceContext> ctx{ResourceContext{{4.0, 1.5}}, ResourceContext{{6.0, 1.0}}};
    GenerationOptions opt;
    const auto batch = generate_profiles(model, ctx, opt);
    for (std::size_t k = 0; k < ctx.size(); ++k) {
        EXPECT_EQ(batch[k].states, generate_profile(model, ctx[k], opt).states);
    }
}

TEST(TrainingSelection, IncludesExtremesAndIsDeterministic) {
    const auto phases = sim::parse_phase_model(genprof::testing::kLinearModelJson);
    const auto ids = select_training_contexts(phases.catalog, 0.4, 7);
    EXPECT_EQ(ids.size(), 4u);  // round(0.4 * 9)
    EXPECT_EQ(ids.front(), "c000");
    EXPECT_EQ(ids.back(), "c008");
    EXPECT_EQ(ids, select_training_contexts(phases.catalog, 0.4, 7));
    EXPECT_EQ(select_training_contexts(phases.catalog, 0.01, 0).size(), 2u);
    EXPECT_EQ(select_training_contexts(phases.catalog, 1.0, 0).size(), 9u);
    EXPECT_THROW(select_training_contexts(phases.catalog, 0.0, 0), InputError);
    EXPECT_THROW(select_training_contexts(phases.catalog, 1.5, 0), InputError);
}

TEST(TrainModel, KeepsCatalogAndTrainingIds) {
    const auto t = train_freq_model(2);
    EXPECT_EQ(t.model.catalog.size(), 11u);
    EXPECT_EQ(t.model.training_contexts.size(), 6u);
    EXPECT_EQ(t.model.points(), 12u);
    EXPECT_EQ(t.model.training_context_values().size(), 6u);
    EXPECT_THROW(t.model.context("nope"), InputError);
}
