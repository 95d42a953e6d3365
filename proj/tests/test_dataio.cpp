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

#include "rislsm/dataio.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>
#include <sstream>

using namespace rislsm;
using rislsm::testing::small_channel;
using rislsm::testing::small_spec;

namespace {

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("rislsm_test_" + name)).string();
}

reservoir_model trained_model(std::uint64_t seed)
{
    auto a = reservoir_arch::for_ris(2);
    a.n_layers = 2;
    a.neurons = 20;
    a.connectivity = 0.3;
    synthetic_spec s;
    s.n_elements = 2;
    s.length = 80;
    return train_readout(init_lsm(a, input_init::xavier, seed), synthetic_trajectory(s, seed));
}

} // namespace

TEST(Synthetic, ConstantWhenStatic)
{
    synthetic_spec s;
    s.length = 20;
    s.coeffs = {{7.0, 0.0, 0.0, 1.0, 0.0}};
    const auto tr = synthetic_trajectory(s, 0);
    for (Eigen::Index t = 0; t < 20; ++t)
        EXPECT_DOUBLE_EQ(tr.phases(t, 0), 7.0 - 2 * std::numbers::pi);
    EXPECT_EQ(tr.origin, trajectory_origin::synthetic);
}

TEST(Synthetic, LinearSweep)
{
    synthetic_spec s;
    s.length = 101;
    s.coeffs = {{0.0, 2 * std::numbers::pi / 100, 0.0, 1.0, 0.0}};
    const auto tr = synthetic_trajectory(s, 0);
    EXPECT_EQ(tr.phases(0, 0), 0.0);
    EXPECT_NEAR(tr.phases(50, 0), std::numbers::pi, 1e-12);
    EXPECT_NEAR(std::abs(wrap_difference(tr.phases(100, 0))), 0.0, 1e-12);
}

TEST(Synthetic, DeterministicAndValid)
{
    synthetic_spec s;
    s.n_elements = 5;
    s.length = 60;
    const auto a = synthetic_trajectory(s, 9);
    EXPECT_TRUE(a.phases == synthetic_trajectory(s, 9).phases);
    EXPECT_FALSE(a.phases == synthetic_trajectory(s, 10).phases);
    EXPECT_NO_THROW(a.validate());
    s.coeffs = {{0.0, 0.0, 0.0, 0.0, 0.0}};
    EXPECT_THROW(synthetic_trajectory(s, 0), config_error);
}

TEST(OracleTrajectory, StaticSlotIsConstantAfterFirst)
{
    const auto ch = small_channel(4, 4, 2, 2, 3);
    const std::vector<channel_set> slots(4, ch);
    const auto tr = oracle_trajectory(slots, 1.0, {8, 20, 1e-6, 1.0}, true);
    for (Eigen::Index t = 1; t < 4; ++t)
        EXPECT_TRUE(tr.phases.row(t) == tr.phases.row(0));
    EXPECT_EQ(tr.origin, trajectory_origin::oracle);
    EXPECT_THROW(oracle_trajectory({}, 1.0, {}), config_error);
}

TEST(OracleTrajectory, MatchesExhaustiveOnTinyInstance)
{
    const auto spec = small_spec(4, 3, 1, 2);
    mobility_model mob;
    mob.n_slots = 2;
    mob.angular_rate = 0.01;
    const auto slots = evolve_trajectory(spec, mob, 42);
    std::vector<double> se;
    oracle_trajectory(slots, 1.0, {8, 50, 1e-9, 1.0}, false, &se);
    ASSERT_EQ(se.size(), 2u);
    for (std::size_t t = 0; t < 2; ++t) {
        const double best = exhaustive_theta(slots[t], 1.0, 8).se;
        const double ms = oracle_multistart(slots[t], 1.0, {8, 50, 1e-9, 1.0}).se;
        EXPECT_NEAR(ms, best, 1e-9);
        EXPECT_LE(se[t], best + 1e-12);
    }
}

TEST(OracleTrajectory, WarmStartIsSmoothUnderSlowMobility)
{
    const auto spec = small_spec(8, 8, 2, 4);
    mobility_model mob;
    mob.n_slots = 30;
    mob.angular_rate = 0.002;
    const auto slots = evolve_trajectory(spec, mob, 7);
    const auto tr = oracle_trajectory(slots, 1.0, {16, 20, 1e-6, 1.0}, true);
    double total = 0.0;
    for (Eigen::Index t = 1; t < tr.length(); ++t)
        for (Eigen::Index m = 0; m < tr.n_elements(); ++m)
            total += std::abs(wrap_difference(tr.phases(t, m) - tr.phases(t - 1, m)));
    const double mean_step = total / static_cast<double>((tr.length() - 1) * tr.n_elements());
    EXPECT_LT(mean_step, two_pi / 16);
}

TEST(TrajectoryCsv, RoundTrip)
{
    synthetic_spec s;
    s.n_elements = 3;
    s.length = 25;
    const auto tr = synthetic_trajectory(s, 4);
    const auto path = temp_path("traj.csv");
    save_trajectory(path, tr);
    const auto back = load_trajectory(path);
    EXPECT_TRUE(back.warnings.empty());
    EXPECT_TRUE(back.trajectory.phases == tr.phases);
    std::filesystem::remove(path);
}

TEST(TrajectoryCsv, LeadingCommentLinesSkipped)
{
    std::istringstream is("# rislsm oracle-gen\n# config {}\nt,phi_0,phi_1\n0,0.5,1\n1,0.25,2\n");
    const auto back = read_trajectory_csv(is);
    ASSERT_EQ(back.trajectory.length(), 2);
    EXPECT_EQ(back.trajectory.phases(1, 0), 0.25);
    EXPECT_EQ(back.trajectory.phases(1, 1), 2.0);
}

TEST(TrajectoryCsv, WrapsWithWarning)
{
    std::istringstream in("t,phi_0\n0,7.0\n1,-0.5\n");
    const auto r = read_trajectory_csv(in);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NEAR(r.trajectory.phases(0, 0), 0.71681469282041377, 1e-15);
    EXPECT_NEAR(r.trajectory.phases(1, 0), 2 * std::numbers::pi - 0.5, 1e-15);
}

TEST(TrajectoryCsv, ErrorsNameTheLine)
{
    auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream in(text);
        try {
            read_trajectory_csv(in);
        } catch (const parse_error& e) {
            return e.line;
        }
        return 0;
    };
    EXPECT_EQ(line_of("t,phi_0,phi_1\n0,1,2\n1,1,2,3\n"), 3u);
    EXPECT_EQ(line_of("time,phi_0\n0,1\n"), 1u);
    EXPECT_EQ(line_of("t,phi_1\n0,1\n"), 1u);
    EXPECT_EQ(line_of("t,phi_0\n0,abc\n"), 2u);
    EXPECT_EQ(line_of(""), 1u);
    EXPECT_EQ(line_of("# note\n# more\nt,phi_0\n0,x\n"), 4u);
    std::istringstream nan_in("t,phi_0\n0,nan\n");
    EXPECT_THROW(read_trajectory_csv(nan_in), data_error);
    std::istringstream empty_rows("t,phi_0\n");
    EXPECT_THROW(read_trajectory_csv(empty_rows), data_error);
}

TEST(PhaseRow, RoundTrip)
{
    const auto cfg = phase_config::from_phases(Eigen::Vector3d(0.1, 3.0, 6.2));
    EXPECT_TRUE(parse_phase_row(format_phase_row(cfg)).phases == cfg.phases);
}

TEST(ModelContainer, ByteStableRoundTrip)
{
    const auto m = trained_model(5);
    const auto bytes = serialize_model(m);
    EXPECT_EQ(bytes.substr(0, model_tag.size()), model_tag);
    const auto back = deserialize_model(bytes);
    EXPECT_EQ(serialize_model(back), bytes);
    synthetic_spec s;
    s.n_elements = 2;
    s.length = 40;
    const auto probe = synthetic_trajectory(s, 77);
    EXPECT_TRUE(predict_next(back, probe) == predict_next(m, probe));
}

TEST(ModelContainer, FileRoundTrip)
{
    const auto m = trained_model(6);
    const auto path = temp_path("model.bin");
    save_model(path, m);
    EXPECT_EQ(serialize_model(load_model(path)), serialize_model(m));
    std::filesystem::remove(path);
}

TEST(ModelContainer, CorruptionFailsClosed)
{
    const auto bytes = serialize_model(trained_model(7));
    auto kind_of = [](const std::string& b) {
        try {
            deserialize_model(b);
        } catch (const format_error& e) {
            return e.reason;
        }
        return format_error::kind::malformed;
    };
    std::string bad_version = bytes;
    bad_version[11] = '9';
    EXPECT_EQ(kind_of(bad_version), format_error::kind::version);
    EXPECT_EQ(kind_of("garbage"), format_error::kind::version);
    EXPECT_EQ(kind_of(std::string(model_tag) + "abc"), format_error::kind::truncated);
    std::string flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x01;
    EXPECT_EQ(kind_of(flipped), format_error::kind::checksum);
    EXPECT_THROW(deserialize_model(bytes.substr(0, bytes.size() - 20)), format_error);
    EXPECT_THROW(deserialize_ensemble(bytes), format_error);
}

TEST(EnsembleContainer, RoundTrip)
{
    auto a = reservoir_arch::for_ris(2);
    a.n_layers = 2;
    a.neurons = 15;
    a.connectivity = 0.3;
    synthetic_spec s;
    s.n_elements = 2;
    s.length = 90;
    const auto tr = synthetic_trajectory(s, 1);
    const auto e = train_ensemble(a, tr, 3, {}, 9);
    const auto bytes = serialize_ensemble(e);
    EXPECT_EQ(bytes.substr(0, ensemble_tag.size()), ensemble_tag);
    const auto back = deserialize_ensemble(bytes);
    EXPECT_EQ(serialize_ensemble(back), bytes);
    EXPECT_TRUE(ensemble_predict_next(back, tr) == ensemble_predict_next(e, tr));
    const auto path = temp_path("ens.bin");
    save_ensemble(path, e);
    EXPECT_EQ(serialize_ensemble(load_ensemble(path)), bytes);
    std::filesystem::remove(path);
}

TEST(ChannelDump, SizesAndHeader)
{
    const auto ch = small_channel(3, 2, 2, 2, 1);
    const auto bin = dump_channel_binary(ch);
    // 4 header words, then S*(M*Nt + K*Nt + K*M) complex values
    EXPECT_EQ(bin.size(), 32u + 16u * 2u * (6u + 6u + 4u));
    std::ostringstream os;
    write_channel_csv(os, ch);
    const auto text = os.str();
    EXPECT_EQ(text.rfind("tensor,k,s,i,j,re,im\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 16);
}
