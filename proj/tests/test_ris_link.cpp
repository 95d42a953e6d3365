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

#include "rislsm/ris_link.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

using namespace rislsm;
using rislsm::testing::manual_channel;
using rislsm::testing::small_channel;

namespace {

/// Hand-set instance: M = 2, N_t = 1, K = 1, S = 1.
channel_set hand_instance()
{
    Eigen::MatrixXcd G(2, 1);
    G << cplx(2, 0), cplx(0, 1);
    Eigen::VectorXcd hd(1), hr(2);
    hd << cplx(1, 1);
    hr << cplx(1, 0), cplx(1, -1);
    return manual_channel(G, {hd}, {hr});
}

phase_config random_config(Eigen::Index m, rng_engine& rng)
{
    Eigen::VectorXd phi(m);
    for (Eigen::Index i = 0; i < m; ++i)
        phi[i] = uniform(rng, 0.0, two_pi);
    return phase_config::from_phases(phi);
}

} // namespace

TEST(EffectiveChannel, HandComputedCascade)
{
    // h_eff = h_d + conj(g1) r1 + conj(g2) r2 = (1+i) + 2 + (-i)(1-i) = 2
    const auto h = effective_channel(hand_instance(), phase_config::uniform(2), 0, 0);
    ASSERT_EQ(h.size(), 1);
    EXPECT_NEAR(std::abs(h[0] - cplx(2, 0)), 0.0, 1e-15);
}

TEST(EffectiveChannel, ZeroAmplitudeLeavesDirectPath)
{
    const auto ch = small_channel(8, 6, 2, 3, 4);
    auto off = phase_config::uniform(6, 1.0, 0.0);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t s = 0; s < 3; ++s)
            EXPECT_NEAR((effective_channel(ch, off, k, s) - ch.h_d[k][s]).norm(), 0.0, 1e-15);
}

TEST(EffectiveChannel, ZeroChannelsGiveZero)
{
    const auto ch = manual_channel(Eigen::MatrixXcd::Zero(3, 2), {Eigen::VectorXcd::Zero(2)},
                                   {Eigen::VectorXcd::Ones(3)});
    EXPECT_EQ(effective_channel(ch, phase_config::uniform(3, 0.4), 0, 0).norm(), 0.0);
}

TEST(EffectiveChannel, DimensionMismatchRejected)
{
    EXPECT_THROW(effective_channel(hand_instance(), phase_config::uniform(3), 0, 0), dimension_error);
}

TEST(Sinr, HandValueAndLinearityInPower)
{
    const auto ch = hand_instance();
    precoder p;
    p.W = {Eigen::MatrixXcd::Ones(1, 1)};
    p.power = 2.0;
    EXPECT_NEAR(sinr(ch, phase_config::uniform(2), p, 0, 0), 8.0, 1e-13);
    p.power = 4.0;
    EXPECT_NEAR(sinr(ch, phase_config::uniform(2), p, 0, 0), 16.0, 1e-13);
}

TEST(Sinr, OrthogonalBeamGivesZero)
{
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(1, 2);
    Eigen::VectorXcd hd(2);
    hd << cplx(1, 0), cplx(0, 0);
    const auto ch = manual_channel(G, {hd}, {Eigen::VectorXcd::Zero(1)});
    precoder p;
    p.W = {Eigen::MatrixXcd(2, 1)};
    p.W[0] << cplx(0, 0), cplx(1, 0);
    p.power = 5.0;
    EXPECT_EQ(sinr(ch, phase_config::uniform(1), p, 0, 0), 0.0);
}

TEST(SpectralEfficiency, LogInverseAndZeroCases)
{
    const auto ch = hand_instance();
    precoder p;
    p.W = {Eigen::MatrixXcd::Ones(1, 1)};
    p.power = (std::numbers::e - 1.0) / 4.0;
    EXPECT_NEAR(spectral_efficiency(ch, phase_config::uniform(2), p), 1.0, 1e-14);
    p.power = 0.0;
    EXPECT_EQ(spectral_efficiency(ch, phase_config::uniform(2), p), 0.0);
}

TEST(SpectralEfficiency, InvariantToGlobalBeamRotation)
{
    const auto ch = small_channel(8, 4, 3, 2, 77);
    auto rng = make_rng(1);
    const auto th = random_config(4, rng);
    auto p = zf_precoder(ch, th, 3.0);
    const double se = spectral_efficiency(ch, th, p);
    for (auto& W : p.W)
        W *= std::polar(1.0, 1.234);
    EXPECT_NEAR(spectral_efficiency(ch, th, p), se, 1e-12 * se);
}

TEST(ZeroForcing, SingleUserIsMatchedFilter)
{
    const auto ch = small_channel(6, 4, 1, 2, 5);
    const auto th = phase_config::uniform(4, 0.3);
    const auto p = zf_precoder(ch, th, 1.0);
    for (std::size_t s = 0; s < 2; ++s) {
        const auto h = effective_channel(ch, th, 0, s);
        EXPECT_NEAR(p.W[s].col(0).norm(), 1.0, 1e-12);
        EXPECT_NEAR(std::abs(h.dot(p.W[s].col(0))), h.norm(), 1e-12 * h.norm());
    }
}

TEST(ZeroForcing, OrthogonalRowsGiveConjugateRows)
{
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(2, 3);
    H(0, 0) = cplx(0, 2);
    H(1, 1) = cplx(1, 1);
    H(1, 2) = cplx(1, -1);
    const auto zf = zero_forcing(H);
    EXPECT_FALSE(zf.rank_deficient);
    for (Eigen::Index k = 0; k < 2; ++k) {
        const Eigen::VectorXcd want = H.row(k).adjoint().normalized();
        EXPECT_NEAR(std::abs(want.dot(zf.W.col(k))), 1.0, 1e-12);
    }
}

TEST(ZeroForcing, NullsInterUserGain)
{
    const auto ch = small_channel(8, 6, 4, 3, 99);
    auto rng = make_rng(3);
    const auto th = random_config(6, rng);
    const auto p = zf_precoder(ch, th, 1.0);
    double worst = 0.0;
    for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t k = 0; k < 4; ++k) {
            const auto h = effective_channel(ch, th, k, s);
            const double own = std::abs(h.dot(p.W[s].col(static_cast<Eigen::Index>(k))));
            for (std::size_t j = 0; j < 4; ++j)
                if (j != k)
                    worst = std::max(worst, std::abs(h.dot(p.W[s].col(static_cast<Eigen::Index>(j)))) / own);
        }
    EXPECT_LT(worst, 1e-9);
}

TEST(ZeroForcing, RankDeficientFallsBackToPseudoInverse)
{
    Eigen::MatrixXcd H(2, 3);
    H << cplx(1, 0), cplx(2, 0), cplx(0, 1), cplx(1, 0), cplx(2, 0), cplx(0, 1);
    const auto zf = zero_forcing(H);
    EXPECT_TRUE(zf.rank_deficient);
    EXPECT_TRUE(zf.W.allFinite());
    EXPECT_THROW(zero_forcing(Eigen::MatrixXcd::Ones(3, 2)), dimension_error);
}

TEST(CascadedChannel, FastSeMatchesFullPipeline)
{
    auto rng = make_rng(8);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto ch = small_channel(8, 5, 3, 4, seed);
        const auto th = random_config(5, rng);
        const cascaded_channel cc(ch, 2.5);
        const double fast = cc.zf_se(cc.rows(th.coefficients()));
        const double full = zf_spectral_efficiency(ch, th, 2.5);
        EXPECT_NEAR(fast, full, 1e-10 * full);
    }
}

TEST(Oracle, SingleElementAlignsWithDirectPath)
{
    const std::size_t B = 16;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto rng = make_rng(seed, {1});
        Eigen::MatrixXcd g(1, 1);
        g(0, 0) = complex_normal(rng);
        Eigen::VectorXcd hd(1), hr(1);
        hd[0] = complex_normal(rng);
        hr[0] = complex_normal(rng);
        const auto ch = manual_channel(g, {hd}, {hr});
        const auto r = oracle_optimize_theta(ch, 1.0, {B, 10, 1e-6, 1.0});
        // maximize |conj(hd) + theta conj(hr) g|
        const double best = -std::arg(hd[0]) + std::arg(hr[0]) - std::arg(g(0, 0));
        EXPECT_LE(std::abs(wrap_difference(r.config.phases[0] - best)), std::numbers::pi / B + 1e-12);
    }
}

TEST(Oracle, GridOptimumIsFixedPoint)
{
    const auto ch = small_channel(4, 4, 2, 2, 12);
    const oracle_options opt{8, 20, 1e-6, 1.0};
    const auto first = oracle_optimize_theta(ch, 1.0, opt);
    const auto again = oracle_optimize_theta(ch, 1.0, opt, first.config);
    EXPECT_TRUE(again.config.phases == first.config.phases);
    EXPECT_EQ(again.sweeps, 1u);
}

TEST(Oracle, NeverWorseThanStart)
{
    auto rng = make_rng(21);
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const auto ch = small_channel(8, 6, 2, 2, seed);
        const auto start = random_config(6, rng);
        const double se0 = zf_spectral_efficiency(ch, start, 1.0);
        const auto r = oracle_optimize_theta(ch, 1.0, {8, 20, 1e-6, 1.0}, start);
        EXPECT_GE(se0, 0.0);
        EXPECT_GE(r.se, se0);
    }
}

TEST(Oracle, MultistartMatchesExhaustiveOnSmallGrid)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto ch = small_channel(4, 4, 1, 2, 500 + seed);
        const auto ex = exhaustive_theta(ch, 1.0, 8);
        const auto ca = oracle_multistart(ch, 1.0, {8, 50, 1e-6, 1.0});
        EXPECT_NEAR(ca.se, ex.se, 1e-9);
    }
}

TEST(Exhaustive, SingleElementScan)
{
    const auto ch = small_channel(3, 1, 1, 2, 31);
    const auto ex = exhaustive_theta(ch, 1.0, 12);
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t b = 0; b < 12; ++b) {
        const double se = zf_spectral_efficiency(ch, phase_config::uniform(1, grid_phase(b, 12)), 1.0);
        if (se > best) {
            best = se;
            arg = b;
        }
    }
    EXPECT_EQ(ex.config.phases[0], grid_phase(arg, 12));
    EXPECT_EQ(ex.se, best);
}

TEST(Exhaustive, AllZeroChannelsReturnFirstConfiguration)
{
    const auto ch = generate_channel_set(rislsm::testing::small_spec(2, 3, 1, 2, 0), {}, 1);
    const auto ex = exhaustive_theta(ch, 1.0, 4);
    EXPECT_EQ(ex.se, 0.0);
    EXPECT_TRUE(ex.config.phases.isZero());
}

TEST(Exhaustive, BeatsRandomSampling)
{
    const auto ch = small_channel(4, 3, 1, 2, 64);
    const auto ex = exhaustive_theta(ch, 1.0, 4);
    auto rng = make_rng(64);
    for (int i = 0; i < 100; ++i)
        EXPECT_GE(ex.se, zf_spectral_efficiency(ch, random_config(3, rng), 1.0) - 1e-12);
}

TEST(Exhaustive, SearchSpaceGuard)
{
    const auto ch = small_channel(2, 8, 1, 1, 1);
    EXPECT_THROW(exhaustive_theta(ch, 1.0, 8), search_space_error);
}
