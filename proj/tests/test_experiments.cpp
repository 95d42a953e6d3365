// SPDX-License-Identifier: Apache-2.0
//
// rislsm: reservoir-computing reflection tracking for RIS-aided wideband links
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "rislsm/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace rislsm;

namespace {

experiment_config tiny_config()
{
    auto c = desk_profile();
    c.system.n_tx = 4;
    c.system.n_ris = 4;
    c.system.n_users = 1;
    c.system.n_subcarriers = 2;
    c.learner = reservoir_arch::for_ris(4);
    c.learner.n_layers = 2;
    c.learner.neurons = 30;
    c.ensemble.m1 = 3;
    c.schedule.n_slots = 60;
    c.schedule.horizon = 10;
    c.schedule.epochs = 4;
    c.sweeps.users = {1, 2};
    c.sweeps.ris_sizes = {2, 4};
    c.sweeps.seeds = {0, 1, 2};
    c.oracle.grid_size = 4;
    c.oracle.max_sweeps = 5;
    c.threads = 2;
    return c;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("rislsm_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(Config, DefaultsAreValidAndRoundTrip)
{
    for (const auto& name : {"desk", "paper"}) {
        const auto c = profile_by_name(name);
        EXPECT_TRUE(c.problems().empty()) << name;
        const auto back = parse_config(to_json(c).dump());
        EXPECT_EQ(to_json(back), to_json(c)) << name;
    }
    const auto p = paper_profile();
    EXPECT_EQ(p.system.n_tx, 256u);
    EXPECT_EQ(p.system.n_ris, 64u);
    EXPECT_EQ(p.system.n_users, 4u);
    EXPECT_EQ(p.system.n_subcarriers, 128u);
    EXPECT_EQ(p.ensemble.m1, 15u);
    EXPECT_EQ(p.schedule.horizon, 50u);
    EXPECT_DOUBLE_EQ(p.schedule.train_fraction, 0.7);
}

TEST(Config, TrainFractionBoundary)
{
    auto c = tiny_config();
    c.schedule.train_fraction = 0.99;
    c.schedule.n_slots = 100;
    EXPECT_NO_THROW(run_training_report(c));
    c.schedule.train_fraction = 1.0;
    EXPECT_THROW(run_training_report(c), config_error);
}

TEST(Config, EveryProblemIsListed)
{
    auto c = tiny_config();
    c.schedule.horizon = 0;
    c.task.element = 4;
    c.sweeps.users = {1, 5};
    const auto p = c.problems();
    EXPECT_EQ(p.size(), 3u);
    try {
        c.validate();
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("horizon"), std::string::npos);
        EXPECT_NE(msg.find("task.element"), std::string::npos);
        EXPECT_NE(msg.find("sweeps.users"), std::string::npos);
    }
}

TEST(Config, HorizonZeroAndElementOutOfRangeRejectedByTracking)
{
    auto c = tiny_config();
    c.schedule.horizon = 0;
    EXPECT_THROW(run_tracking_report(c), config_error);
    c = tiny_config();
    c.task.element = c.system.n_ris;
    EXPECT_THROW(run_tracking_report(c), config_error);
}

TEST(Config, MoreUsersThanAntennasRejectedBySweep)
{
    auto c = tiny_config();
    c.sweeps.users = {1, 8};
    EXPECT_THROW(run_se_sweeps(c), config_error);
}

TEST(Config, UnknownKeysAndBadValuesRejected)
{
    EXPECT_THROW(parse_config(R"({"system": {"n_txx": 4}})"), config_error);
    EXPECT_THROW(parse_config(R"({"bogus": 1})"), config_error);
    EXPECT_THROW(parse_config(R"({"profile": "huge"})"), config_error);
    EXPECT_THROW(parse_config("{not json"), config_error);
    EXPECT_THROW(parse_config(R"({"baselines": ["oracle", "lstm"]})").validate(), config_error);
    const auto c = parse_config(R"({"profile": "paper", "seed": 9, "system": {"n_users": 2}})");
    EXPECT_EQ(c.profile, "paper");
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.system.n_users, 2u);
    EXPECT_EQ(c.system.n_tx, 256u);
}

// ---------------------------------------------------------------------------

TEST(TrainingReport, LongerPrefixDoesNotHurtValidation)
{
    const auto rep = run_training_report(desk_profile());
    ASSERT_EQ(rep.epochs.size(), 10u);
    EXPECT_LE(rep.epochs.back().validation_rmse, rep.epochs[4].validation_rmse);
    EXPECT_EQ(rep.epochs.back().n_pairs, 59u);
    for (const auto& e : rep.epochs)
        EXPECT_LT(e.train_rmse, 1e-3);
    EXPECT_GT(rep.counted.multiplications, 0u);
    EXPECT_EQ(rep.formula.additions, lsm_training_flops(70, 10, 32, 500, 32).additions);
}

TEST(TrainingReport, BatchTableCoversHeldOutSteps)
{
    const auto rep = run_training_report(tiny_config());
    ASSERT_EQ(rep.batches.size(), 3u);
    // 60 slots at 0.7 leave 18 held-out steps plus 10 forecast-window steps
    EXPECT_EQ(rep.batches[0].n_batches, 7u);
    EXPECT_EQ(rep.batches[2].n_batches, 1u);
    for (const auto& b : rep.batches) {
        EXPECT_LE(b.min, b.median);
        EXPECT_LE(b.median, b.max);
    }
}

TEST(TrainingReport, FilesAreDeterministicAndEmbedConfig)
{
    const auto a = scratch("train_a");
    const auto b = scratch("train_b");
    const auto cfg = tiny_config();
    run_training_report(cfg, a.string());
    run_training_report(cfg, b.string());
    for (const auto* f : {"train_rmse.csv", "train_batches.csv", "train_flops.csv", "model.bin"}) {
        const auto x = slurp(a / f);
        ASSERT_FALSE(x.empty()) << f;
        EXPECT_EQ(x, slurp(b / f)) << f;
    }
    const auto text = slurp(a / "train_rmse.csv");
    EXPECT_EQ(text.rfind("# rislsm train-report\n# config {", 0), 0u);
    EXPECT_NE(text.find("\"seeds\":[0,1,2]"), std::string::npos);
    const auto m = load_model((a / "model.bin").string());
    EXPECT_TRUE(m.trained());
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
}

// ---------------------------------------------------------------------------

TEST(VarianceReport, NeedsTwoSchemes)
{
    auto c = tiny_config();
    c.baselines = {"oracle", "ensemble", "random_reflection"};
    EXPECT_THROW(run_variance_report(c), config_error);
    c.baselines = {"xavier_lsm", "ensemble"};
    EXPECT_NO_THROW(run_variance_report(c));
}

TEST(VarianceReport, SingleSeedGivesZeroRowsAndWarning)
{
    auto c = tiny_config();
    c.sweeps.seeds = {5};
    const auto rep = run_variance_report(c);
    ASSERT_EQ(rep.schemes.size(), 3u);
    for (const auto& d : rep.schemes) {
        EXPECT_EQ(d.tau1, 0.0);
        EXPECT_EQ(d.tau2, 0.0);
    }
    EXPECT_EQ(rep.warnings.size(), 1u);
    EXPECT_NE(rep.tables[0].str().find("# warning:"), std::string::npos);
}

TEST(VarianceReport, PopulationIsSeedsTimesHeldOutSteps)
{
    const auto rep = run_variance_report(tiny_config());
    for (const auto& d : rep.schemes)
        EXPECT_EQ(d.q, 3u * 18u) << d.scheme;
    EXPECT_GE(rep.single_learner_worst_tau2, rep.single_learner_median_tau2);
}

TEST(VarianceReport, EnsembleLessDispersedThanMedianLearner)
{
    auto c = desk_profile();
    c.sweeps.seeds = {0, 1, 2, 3, 4, 5, 6, 7};
    const auto rep = run_variance_report(c);
    EXPECT_LT(rep.find("ensemble")->median_step_tau2, rep.single_learner_median_tau2);
}

// ---------------------------------------------------------------------------

TEST(TrackingReport, ConstantTrajectoryForecastIsExact)
{
    auto c = tiny_config();
    c.task.drift_max = 0.0;
    c.task.amp_min = c.task.amp_max = 0.0;
    const auto rep = run_tracking_report(c);
    EXPECT_LT(rep.forecast_max_error, 1e-3);
    EXPECT_LT(rep.tracked_median_error, 1e-3);
    EXPECT_EQ(rep.persistence_mae, 0.0);
}

TEST(TrackingReport, StepTableLayout)
{
    const auto c = tiny_config();
    const auto rep = run_tracking_report(c);
    const auto& t = rep.tables[0];
    ASSERT_EQ(t.rows.size(), c.schedule.n_slots + c.schedule.horizon);
    EXPECT_EQ(t.rows[0].rfind("0,washout,", 0), 0u);
    EXPECT_EQ(t.rows[c.learner.washout].find(",washout,"), 2u);
    EXPECT_NE(t.rows[c.learner.washout + 1].find(",tracked,"), std::string::npos);
    EXPECT_NE(t.rows.back().find(",forecast,"), std::string::npos);
}

TEST(TrackingReport, DeskForecastBeatsPersistence)
{
    const auto rep = run_tracking_report(desk_profile());
    EXPECT_LT(rep.forecast_mae, rep.persistence_mae);
    EXPECT_LT(rep.tracked_median_error, 0.05);
}

// ---------------------------------------------------------------------------

TEST(SeSweep, OracleDominatesAndWithoutRisIsFlat)
{
    const auto c = tiny_config();
    const auto rep = run_se_sweeps(c);
    EXPECT_EQ(rep.points.size(), (2u + 2u) * 3u * c.baselines.size());
    for (const auto& p : rep.points) {
        if (p.scheme == "oracle")
            continue;
        for (const auto& q : rep.points)
            if (q.scheme == "oracle" && q.sweep == p.sweep && q.point == p.point && q.seed == p.seed)
                EXPECT_GE(q.se + 1e-12, p.se) << p.scheme << " " << p.sweep << " " << p.point << " " << p.seed;
    }
    for (auto s : c.sweeps.seeds) {
        double first = -1.0;
        for (const auto& p : rep.points)
            if (p.sweep == "ris_size" && p.scheme == "without_ris" && p.seed == s) {
                if (first < 0.0)
                    first = p.se;
                EXPECT_EQ(p.se, first);
            }
    }
}

TEST(SeSweep, WithoutRisMatchesZeroAmplitudePipeline)
{
    auto c = tiny_config();
    c.baselines = {"without_ris"};
    c.sweeps.users = {1};
    c.sweeps.ris_sizes = {3};
    c.sweeps.seeds = {4};
    const auto rep = run_se_sweeps(c);
    const auto slots = instance_slots(c, 3, 1, c.schedule.n_slots, 4);
    const auto from = make_split(c.arch_for(3), static_cast<Eigen::Index>(c.schedule.n_slots),
                                 c.schedule.train_fraction).n_train_slots;
    double want = 0.0;
    for (auto t = static_cast<std::size_t>(from); t < slots.size(); ++t)
        want += zf_spectral_efficiency(slots[t], phase_config::uniform(3, 1.234, 0.0), c.system.power);
    want /= static_cast<double>(slots.size() - static_cast<std::size_t>(from));
    EXPECT_NEAR(rep.values("ris_size", 3, "without_ris").at(0), want, 1e-12);
}

TEST(SeSweep, ThreadCountDoesNotChangeResults)
{
    auto c = tiny_config();
    c.threads = 1;
    const auto a = run_se_sweeps(c);
    c.threads = 3;
    const auto b = run_se_sweeps(c);
    EXPECT_EQ(a.tables[0].rows, b.tables[0].rows);
    EXPECT_EQ(a.tables[1].rows, b.tables[1].rows);
}

// ---------------------------------------------------------------------------

TEST(OracleGen, TrajectoryFileLoadsBack)
{
    const auto dir = scratch("oracle");
    const auto c = tiny_config();
    const auto rep = run_oracle_gen(c, dir.string(), 3);
    ASSERT_EQ(rep.se.size(), c.schedule.n_slots);
    const auto back = load_trajectory((dir / "oracle_trajectory.csv").string());
    EXPECT_TRUE(back.warnings.empty());
    EXPECT_EQ(back.trajectory.phases, rep.trajectory.phases);
    EXPECT_TRUE(std::filesystem::exists(dir / "channel_slot3.csv"));
    EXPECT_THROW(run_oracle_gen(c, "", static_cast<long>(c.schedule.n_slots)), config_error);
    std::filesystem::remove_all(dir);
}

TEST(Inspect, DescribesBothContainers)
{
    const auto c = tiny_config();
    const auto tr = run_training_report(c);
    const auto m = inspect_container(serialize_model(tr.model));
    EXPECT_NE(m.find("container,LSM-MODEL-v1\n"), std::string::npos);
    EXPECT_NE(m.find("layers,2\n"), std::string::npos);
    const auto rep = run_tracking_report(c);
    const auto e = inspect_container(serialize_ensemble(rep.model));
    EXPECT_NE(e.find("container,LSM-ENS-v1\n"), std::string::npos);
    EXPECT_NE(e.find("learners,3\n"), std::string::npos);
    EXPECT_NE(e.find("learner2_layers,2\n"), std::string::npos);
    EXPECT_THROW(inspect_container("garbage"), format_error);
}

TEST(Percentile, LinearInterpolation)
{
    EXPECT_DOUBLE_EQ(percentile({3.0, 1.0, 2.0, 4.0}, 50.0), 2.5);
    EXPECT_DOUBLE_EQ(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 10.0), 1.4);
    EXPECT_DOUBLE_EQ(percentile({7.0}, 90.0), 7.0);
    EXPECT_THROW(percentile({}, 50.0), domain_error);
}
