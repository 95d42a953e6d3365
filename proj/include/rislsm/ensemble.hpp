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

#pragma once

// Bootstrap aggregation of reservoir learners. Learners are trained on block-bootstrap
// subsets of the readout training pairs and combined by an accuracy-weighted circular
// mean in the (cos, sin) space.

#include "rislsm/error.hpp"
#include "rislsm/phase.hpp"
#include "rislsm/random.hpp"
#include "rislsm/reservoir.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace rislsm {

struct bootstrap_spec {
    std::size_t block_len = 10;
    double coverage = 0.8;
};

/// m1 subsets of [0, T). Each is a union of contiguous blocks of `block_len` indices
/// whose starts are drawn uniformly with replacement until coverage * T indices
/// (with multiplicity) are drawn; sorted ascending.
inline std::vector<std::vector<std::size_t>> bootstrap_indices(std::size_t T, std::size_t m1, std::size_t block_len,
                                                               double coverage, std::uint64_t seed)
{
    if (block_len < 2)
        throw config_error("bootstrap block length must be >= 2");
    if (!(coverage > 0.0 && coverage <= 1.0))
        throw config_error("bootstrap coverage must lie in (0, 1]");
    if (T < block_len)
        throw config_error("bootstrap block length " + std::to_string(block_len) + " exceeds the " +
                           std::to_string(T) + " available samples");
    if (m1 < 1)
        throw config_error("ensemble needs at least one learner");
    const auto wanted = static_cast<std::size_t>(std::ceil(coverage * static_cast<double>(T) - 1e-9));
    const std::size_t n_blocks = std::max<std::size_t>(1, (wanted + block_len - 1) / block_len);
    std::vector<std::vector<std::size_t>> out(m1);
    for (std::size_t i = 0; i < m1; ++i) {
        auto rng = make_rng(seed, {0x42, i});
        std::uniform_int_distribution<std::size_t> start(0, T - block_len);
        auto& idx = out[i];
        idx.reserve(n_blocks * block_len);
        for (std::size_t b = 0; b < n_blocks; ++b) {
            const std::size_t s0 = start(rng);
            for (std::size_t j = 0; j < block_len; ++j)
                idx.push_back(s0 + j);
        }
        std::sort(idx.begin(), idx.end());
    }
    return out;
}

struct ensemble_model {
    std::vector<reservoir_model> learners;
    Eigen::VectorXd weights;
    bootstrap_spec bootstrap;
    std::uint64_t master_seed = 0;

    std::size_t size() const { return learners.size(); }
};

/// weight_i proportional to 1 / (eps + rmse_i), normalized to sum to one.
inline Eigen::VectorXd inverse_rmse_weights(const std::vector<double>& rmse, double eps = 1e-12)
{
    if (rmse.empty())
        throw domain_error("no learners to weight");
    Eigen::VectorXd w(static_cast<Eigen::Index>(rmse.size()));
    for (std::size_t i = 0; i < rmse.size(); ++i) {
        if (!(rmse[i] >= 0.0) || !std::isfinite(rmse[i]))
            throw data_error("learner " + std::to_string(i) + " has an invalid validation RMSE");
        w[static_cast<Eigen::Index>(i)] = 1.0 / (eps + rmse[i]);
    }
    return w / w.sum();
}

struct ensemble_train_options {
    input_init init = input_init::xavier;
    double train_fraction = 0.7;
    std::size_t threads = 0;  // 0 = hardware concurrency
};

/// Learner i uses seed derive_seed(master_seed, {i}) and bootstrap subset i. The result is
/// assembled by learner index, so it does not depend on thread scheduling.
inline ensemble_model train_ensemble(const reservoir_arch& arch, const phase_trajectory& traj, std::size_t m1,
                                     const bootstrap_spec& boot, std::uint64_t master_seed,
                                     const ensemble_train_options& opt = {})
{
    arch.validate();
    const readout_split sp = make_split(arch, traj.length(), opt.train_fraction);
    const auto subsets = bootstrap_indices(static_cast<std::size_t>(sp.n_train_pairs), m1, boot.block_len,
                                           boot.coverage, derive_seed(master_seed, {0xB0}));

    std::vector<std::optional<reservoir_model>> done(m1);
    std::vector<std::exception_ptr> failed(m1);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < m1; i = next++) {
            try {
                const auto base = init_lsm(arch, opt.init, derive_seed(master_seed, {i}));
                done[i] = train_readout(base, traj, opt.train_fraction, subsets[i]);
            } catch (...) {
                failed[i] = std::current_exception();
            }
        }
    };
    std::size_t n_threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, m1);
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back(work);
    }

    ensemble_model ens;
    ens.bootstrap = boot;
    ens.master_seed = master_seed;
    std::vector<double> rmse;
    for (std::size_t i = 0; i < m1; ++i) {
        if (failed[i]) {
            try {
                std::rethrow_exception(failed[i]);
            } catch (const std::exception& e) {
                throw error("learner " + std::to_string(i) + ": " + e.what());
            }
        }
        rmse.push_back(done[i]->validation_rmse);
        ens.learners.push_back(std::move(*done[i]));
    }
    ens.weights = inverse_rmse_weights(rmse);
    return ens;
}

struct aggregate_result {
    Eigen::VectorXd encoded;        // unit (cos, sin) pairs
    std::vector<std::size_t> fallbacks;  // elements resolved by the highest-weight learner
};

/// Weighted mean of the learners' unit-normalized outputs followed by per-pair
/// renormalization (circular mean). A pair that cancels exactly takes the value of
/// the highest-weight learner.
inline aggregate_result aggregate(const std::vector<Eigen::VectorXd>& outputs, const Eigen::VectorXd& weights)
{
    if (outputs.empty() || static_cast<Eigen::Index>(outputs.size()) != weights.size())
        throw dimension_error("aggregate needs one weight per learner output");
    const Eigen::Index n = outputs.front().size();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::VectorXd> unit;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        if (outputs[i].size() != n)
            throw dimension_error("learner outputs differ in length");
        unit.push_back(normalize_pairs(outputs[i]));
        acc += weights[static_cast<Eigen::Index>(i)] * unit.back();
    }
    Eigen::Index lead = 0;
    weights.maxCoeff(&lead);
    aggregate_result res;
    const Eigen::Index m = n / 2;
    for (Eigen::Index e = 0; e < m; ++e) {
        if (std::hypot(acc[e], acc[m + e]) < 1e-12) {
            acc[e] = unit[static_cast<std::size_t>(lead)][e];
            acc[m + e] = unit[static_cast<std::size_t>(lead)][m + e];
            res.fallbacks.push_back(static_cast<std::size_t>(e));
        }
    }
    res.encoded = normalize_pairs(acc);
    return res;
}

enum class feedback_mode { shared, per_learner };

namespace detail {

inline std::vector<reservoir_runner> start_runners(const ensemble_model& model, const phase_trajectory& history)
{
    if (model.learners.empty())
        throw state_error("ensemble has no learners");
    std::vector<reservoir_runner> runners;
    runners.reserve(model.size());
    for (const auto& l : model.learners) {
        check_history(l, history);
        runners.emplace_back(l);
        runners.back().consume(history.phases);
    }
    return runners;
}

}  // namespace detail

inline Eigen::VectorXd ensemble_predict_next(const ensemble_model& model, const phase_trajectory& history)
{
    auto runners = detail::start_runners(model, history);
    std::vector<Eigen::VectorXd> outs;
    for (const auto& r : runners)
        outs.push_back(r.readout());
    return decode_phases(aggregate(outs, model.weights).encoded);
}

/// Strong-learner forecast. In shared mode every learner is fed the aggregated
/// prediction; in per-learner mode each learner rolls out on its own outputs and only
/// the reported trajectory is aggregated.
inline phase_trajectory ensemble_forecast(const ensemble_model& model, const phase_trajectory& history,
                                          std::size_t horizon, feedback_mode mode = feedback_mode::shared)
{
    if (horizon < 1)
        throw config_error("forecast horizon must be >= 1");
    auto runners = detail::start_runners(model, history);
    phase_trajectory out;
    out.slot_interval = history.slot_interval;
    out.origin = history.origin;
    out.phases.resize(static_cast<Eigen::Index>(horizon), history.n_elements());
    for (std::size_t h = 0; h < horizon; ++h) {
        std::vector<Eigen::VectorXd> outs;
        for (const auto& r : runners)
            outs.push_back(r.readout());
        const Eigen::VectorXd agg = aggregate(outs, model.weights).encoded;
        out.phases.row(static_cast<Eigen::Index>(h)) = decode_phases(agg).transpose();
        if (h + 1 == horizon)
            break;
        for (std::size_t i = 0; i < runners.size(); ++i)
            runners[i].step(mode == feedback_mode::shared ? agg : normalize_pairs(outs[i]));
    }
    return out;
}

/// Strong-learner one-step predictions for slots [from, T) with true history.
inline Eigen::MatrixXd ensemble_one_step_predictions(const ensemble_model& model, const phase_trajectory& traj,
                                                     Eigen::Index from)
{
    if (model.learners.empty())
        throw state_error("ensemble has no learners");
    if (from < 1 || from > traj.length())
        throw index_error("one-step prediction start out of range");
    std::vector<reservoir_runner> runners;
    for (const auto& l : model.learners)
        runners.emplace_back(l);
    Eigen::MatrixXd out(traj.length() - from, traj.n_elements());
    for (Eigen::Index t = 0; t + 1 < traj.length(); ++t) {
        const Eigen::VectorXd u = encode_phases(Eigen::VectorXd(traj.phases.row(t).transpose()));
        std::vector<Eigen::VectorXd> outs;
        for (auto& r : runners) {
            r.step(u);
            outs.push_back(r.readout());
        }
        if (t + 1 >= from)
            out.row(t + 1 - from) = decode_phases(aggregate(outs, model.weights).encoded).transpose();
    }
    return out;
}

} // namespace rislsm
