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

// Report runners behind the command-line tool. Each runner returns its tables and,
// when an output directory is given, writes them as CSV files whose leading `#` lines
// carry the resolved configuration. Nothing time- or host-dependent is written.

#include "rislsm/config.hpp"
#include "rislsm/dataio.hpp"
#include "rislsm/ensemble.hpp"
#include "rislsm/metrics.hpp"
#include "rislsm/reservoir.hpp"
#include "rislsm/ris_link.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace rislsm {

/// Tags of the per-stage seed streams: derive_seed(run_seed, {tag, ...}).
namespace stage {
inline constexpr std::uint64_t channel = 0xC4;
inline constexpr std::uint64_t xavier = 0x58;
inline constexpr std::uint64_t random_init = 0x55;
inline constexpr std::uint64_t ensemble = 0xE5;
inline constexpr std::uint64_t reflection = 0x7F;
}  // namespace stage

// ---------------------------------------------------------------------------
// Helpers

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware concurrency).
/// The first exception by index is rethrown after all workers finish.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn)
{
    std::vector<std::exception_ptr> failed(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                failed[i] = std::current_exception();
            }
        }
    };
    std::size_t t = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    t = std::min(t, n);
    if (t <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t k = 0; k < t; ++k)
            pool.emplace_back(work);
    }
    for (auto& e : failed)
        if (e)
            std::rethrow_exception(e);
}

/// Linear-interpolation percentile, q in [0, 100].
inline double percentile(std::vector<double> v, double q)
{
    if (v.empty())
        throw domain_error("percentile of an empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(const std::vector<double>& v) { return percentile(v, 50.0); }

/// CSV table with `#` preamble lines.
struct csv_table {
    std::string name;  // file name inside the output directory
    std::vector<std::string> preamble;
    std::string header;
    std::vector<std::string> rows;

    std::string str() const
    {
        std::string s;
        for (const auto& p : preamble)
            s += "# " + p + "\n";
        s += header + "\n";
        for (const auto& r : rows)
            s += r + "\n";
        return s;
    }
};

inline std::vector<std::string> config_preamble(const experiment_config& cfg, const std::string& report)
{
    return {"rislsm " + report, "config " + to_json(cfg).dump()};
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f)
        throw error("write to " + path.string() + " failed");
}

inline void write_tables(const std::string& dir, const std::vector<csv_table>& tables)
{
    if (dir.empty())
        return;
    std::filesystem::create_directories(dir);
    for (const auto& t : tables)
        write_text(std::filesystem::path(dir) / t.name, t.str());
}

inline std::string join_row(std::initializer_list<std::string> cells)
{
    std::string s;
    bool first = true;
    for (const auto& c : cells) {
        if (!first)
            s += ',';
        s += c;
        first = false;
    }
    return s;
}

inline std::string fmt(double v) { return format_double(v); }
inline std::string fmt(std::size_t v) { return std::to_string(v); }

/// Channel slots for one seeded instance.
inline std::vector<channel_set> instance_slots(const experiment_config& cfg, std::size_t n_ris, std::size_t n_users,
                                               std::size_t n_slots, std::uint64_t seed)
{
    return evolve_trajectory(cfg.make_channel_spec(n_ris, n_users), cfg.make_mobility(n_slots),
                             derive_seed(seed, {stage::channel}));
}

/// The configured phase task of length `length` for an `n_ris`-element surface.
inline phase_trajectory task_trajectory(const experiment_config& cfg, std::size_t n_ris, std::size_t length)
{
    if (cfg.task.source == "synthetic") {
        synthetic_spec s;
        s.n_elements = n_ris;
        s.length = length;
        s.slot_interval = cfg.schedule.slot_interval;
        s.drift_max = cfg.task.drift_max;
        s.amp_min = cfg.task.amp_min;
        s.amp_max = cfg.task.amp_max;
        s.omega_min = cfg.task.omega_min;
        s.omega_max = cfg.task.omega_max;
        return synthetic_trajectory(s, cfg.task.seed);
    }
    const auto slots = instance_slots(cfg, n_ris, cfg.system.n_users, length, cfg.task.seed);
    auto tr = oracle_trajectory(slots, cfg.system.power, cfg.make_oracle_options(), cfg.oracle.warm_start);
    tr.slot_interval = cfg.schedule.slot_interval;
    return tr;
}

inline Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, Eigen::Index first, Eigen::Index n)
{
    return m.middleRows(first, n);
}

/// Absolute wrapped errors of every entry.
inline std::vector<double> abs_errors(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth)
{
    std::vector<double> e;
    e.reserve(static_cast<std::size_t>(pred.size()));
    for (Eigen::Index i = 0; i < pred.rows(); ++i)
        for (Eigen::Index j = 0; j < pred.cols(); ++j)
            e.push_back(std::abs(wrap_difference(pred(i, j) - truth(i, j))));
    return e;
}

inline double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// Training report: RMSE against training-prefix length ("epochs") and batch losses.

struct training_epoch {
    std::size_t epoch = 0;
    std::size_t n_pairs = 0;
    double train_rmse = 0.0;
    double validation_rmse = 0.0;
    double test_rmse = 0.0;
};

struct batch_loss {
    std::size_t batch_size = 0;
    std::size_t n_batches = 0;
    double min = 0.0, median = 0.0, max = 0.0;
};

struct training_report {
    std::vector<training_epoch> epochs;
    std::vector<batch_loss> batches;
    flops_breakdown formula;
    solve_counts counted;
    reservoir_model model;  // trained on the full training span
    std::vector<csv_table> tables;
};

inline training_report run_training_report(const experiment_config& cfg, const std::string& out_dir = "")
{
    cfg.validate();
    const std::size_t M = cfg.system.n_ris;
    const auto T = static_cast<Eigen::Index>(cfg.schedule.n_slots);
    const auto traj = task_trajectory(cfg, M, cfg.schedule.n_slots + cfg.schedule.horizon);
    const auto hist = traj.head(T);
    const auto arch = cfg.arch_for(M);
    const auto sp = make_split(arch, T, cfg.schedule.train_fraction);
    const auto base = init_lsm(arch, input_init::xavier, derive_seed(cfg.seed, {stage::xavier}));

    training_report rep;
    const Eigen::Index first = sp.first_target;
    const std::size_t E = cfg.schedule.epochs;
    for (std::size_t e = 1; e <= E; ++e) {
        const auto n = std::max<std::size_t>(
            1, (static_cast<std::size_t>(sp.n_train_pairs) * e + E - 1) / E);
        std::vector<std::size_t> pairs(n);
        for (std::size_t i = 0; i < n; ++i)
            pairs[i] = i;
        solve_counts counted;
        const auto m = train_readout(base, hist, cfg.schedule.train_fraction, pairs, &counted);
        const auto one = one_step_predictions(m, traj, first);
        training_epoch row;
        row.epoch = e;
        row.n_pairs = n;
        row.train_rmse = rmse(rows_of(one, 0, static_cast<Eigen::Index>(n)),
                              rows_of(traj.phases, first, static_cast<Eigen::Index>(n)));
        row.validation_rmse = rmse(rows_of(one, sp.n_train_slots - first, sp.n_validation),
                                   rows_of(traj.phases, sp.n_train_slots, sp.n_validation));
        row.test_rmse = rmse(rows_of(one, T - first, traj.length() - T), traj.phases.bottomRows(traj.length() - T));
        rep.epochs.push_back(row);
        if (e == E) {
            rep.model = m;
            rep.counted = counted;
        }
    }

    // Batched losses of the final model over the held-out steps (validation then test).
    const auto one = one_step_predictions(rep.model, traj, sp.n_train_slots);
    const Eigen::MatrixXd truth = traj.phases.bottomRows(one.rows());
    std::vector<double> step_loss;
    for (Eigen::Index t = 0; t < one.rows(); ++t) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < one.cols(); ++j) {
            const double d = wrap_difference(one(t, j) - truth(t, j));
            acc += d * d;
        }
        step_loss.push_back(acc);
    }
    for (auto b : cfg.schedule.batch_sizes) {
        batch_loss bl;
        bl.batch_size = b;
        std::vector<double> losses;
        for (std::size_t s = 0; s + b <= step_loss.size(); s += b)
            losses.push_back(mean_of(std::vector<double>(step_loss.begin() + static_cast<std::ptrdiff_t>(s),
                                                         step_loss.begin() + static_cast<std::ptrdiff_t>(s + b))));
        bl.n_batches = losses.size();
        if (!losses.empty()) {
            bl.min = *std::min_element(losses.begin(), losses.end());
            bl.max = *std::max_element(losses.begin(), losses.end());
            bl.median = median(losses);
        }
        rep.batches.push_back(bl);
    }

    rep.formula = lsm_training_flops(static_cast<std::uint64_t>(sp.n_train_slots), arch.washout, arch.input_dim,
                                     arch.state_dim(), arch.output_dim);

    auto pre = config_preamble(cfg, "train-report");
    pre.push_back("epochs are training-prefix increments of the closed-form ridge readout");
    csv_table rm{"train_rmse.csv", pre, "epoch,n_pairs,train_rmse,validation_rmse,test_rmse", {}};
    for (const auto& r : rep.epochs)
        rm.rows.push_back(join_row({fmt(r.epoch), fmt(r.n_pairs), fmt(r.train_rmse), fmt(r.validation_rmse),
                                    fmt(r.test_rmse)}));
    auto bpre = config_preamble(cfg, "train-report");
    bpre.push_back("loss = mean over the batch of the squared wrapped error norm; held-out steps only");
    csv_table bt{"train_batches.csv", bpre, "batch_size,n_batches,loss_min,loss_median,loss_max", {}};
    for (const auto& b : rep.batches)
        bt.rows.push_back(join_row({fmt(b.batch_size), fmt(b.n_batches), fmt(b.min), fmt(b.median), fmt(b.max)}));
    const std::string ctx = "T_max=" + std::to_string(sp.n_train_slots) + ";T_0=" + std::to_string(arch.washout);
    csv_table fl{"train_flops.csv", config_preamble(cfg, "train-report"), "metric,value,context", {}};
    fl.rows.push_back(metric_row("formula_additions", static_cast<double>(rep.formula.additions), ctx));
    fl.rows.push_back(metric_row("formula_multiplications", static_cast<double>(rep.formula.multiplications), ctx));
    fl.rows.push_back(metric_row("counted_additions", static_cast<double>(rep.counted.additions), ctx));
    fl.rows.push_back(metric_row("counted_multiplications", static_cast<double>(rep.counted.multiplications), ctx));
    rep.tables = {rm, bt, fl};
    write_tables(out_dir, rep.tables);
    if (!out_dir.empty())
        save_model((std::filesystem::path(out_dir) / "model.bin").string(), rep.model);
    return rep;
}

// ---------------------------------------------------------------------------
// Variance report: tau1 / tau2 of one-step predictions across seeds.

struct scheme_dispersion {
    std::string scheme;
    double tau1 = 0.0;              // pooled over seeds x steps
    double tau2 = 0.0;
    double median_step_tau2 = 0.0;  // median over steps of the per-step tau2
    std::size_t q = 0;
};

struct variance_report {
    std::vector<scheme_dispersion> schemes;
    // Per-learner-index statistics of the ensemble members (empty without ensemble).
    double single_learner_median_tau2 = 0.0;
    double single_learner_worst_tau2 = 0.0;
    std::vector<std::string> warnings;
    std::vector<csv_table> tables;

    const scheme_dispersion* find(const std::string& s) const
    {
        for (const auto& d : schemes)
            if (d.scheme == s)
                return &d;
        return nullptr;
    }
};

/// runs[q] is a steps x M prediction matrix of seed q.
inline scheme_dispersion dispersion_over_seeds(const std::string& name, const std::vector<Eigen::MatrixXd>& runs)
{
    std::vector<Eigen::MatrixXd> groups;
    std::vector<double> step_tau2;
    for (Eigen::Index t = 0; t < runs.front().rows(); ++t) {
        Eigen::MatrixXd g(static_cast<Eigen::Index>(runs.size()), runs.front().cols());
        for (std::size_t q = 0; q < runs.size(); ++q)
            g.row(static_cast<Eigen::Index>(q)) = runs[q].row(t);
        step_tau2.push_back(std_deviation(g));
        groups.push_back(std::move(g));
    }
    const auto d = pooled_dispersion(groups);
    return {name, d.tau1, d.tau2, median(step_tau2), d.q};
}

inline variance_report run_variance_report(const experiment_config& cfg, const std::string& out_dir = "")
{
    cfg.validate();
    std::vector<std::string> schemes;
    for (const char* s : {"random_init_lsm", "xavier_lsm", "ensemble"})
        if (cfg.has_scheme(s))
            schemes.emplace_back(s);
    if (schemes.size() < 2)
        throw config_error("variance-report needs at least two of random_init_lsm, xavier_lsm, ensemble in baselines");

    const std::size_t M = cfg.system.n_ris;
    const auto traj = task_trajectory(cfg, M, cfg.schedule.n_slots);
    const auto& hist = traj;
    const auto arch = cfg.arch_for(M);
    const Eigen::Index T = make_split(arch, traj.length(), cfg.schedule.train_fraction).n_train_slots;
    const auto& seeds = cfg.sweeps.seeds;
    const bool with_ens = cfg.has_scheme("ensemble");

    struct seed_out {
        Eigen::MatrixXd random, xavier, ensemble;
        std::vector<Eigen::MatrixXd> learners;
    };
    std::vector<seed_out> outs(seeds.size());
    ensemble_train_options eopt;
    eopt.train_fraction = cfg.schedule.train_fraction;
    eopt.threads = 1;
    parallel_for(seeds.size(), cfg.threads, [&](std::size_t i) {
        const auto s = seeds[i];
        auto& o = outs[i];
        if (cfg.has_scheme("random_init_lsm")) {
            const auto m = train_readout(init_lsm(arch, input_init::uniform_random, derive_seed(s, {stage::random_init})),
                                         hist, cfg.schedule.train_fraction);
            o.random = one_step_predictions(m, traj, T);
        }
        if (cfg.has_scheme("xavier_lsm")) {
            const auto m = train_readout(init_lsm(arch, input_init::xavier, derive_seed(s, {stage::xavier})), hist,
                                         cfg.schedule.train_fraction);
            o.xavier = one_step_predictions(m, traj, T);
        }
        if (with_ens) {
            const auto e = train_ensemble(arch, hist, cfg.ensemble.m1, cfg.bootstrap(),
                                          derive_seed(s, {stage::ensemble}), eopt);
            o.ensemble = ensemble_one_step_predictions(e, traj, T);
            for (const auto& l : e.learners)
                o.learners.push_back(one_step_predictions(l, traj, T));
        }
    });

    variance_report rep;
    if (seeds.size() == 1)
        rep.warnings.push_back("only one seed: every deviation is zero (Q = number of steps, one prediction each)");
    for (const auto& name : schemes) {
        std::vector<Eigen::MatrixXd> runs;
        for (const auto& o : outs)
            runs.push_back(name == "random_init_lsm" ? o.random : name == "xavier_lsm" ? o.xavier : o.ensemble);
        rep.schemes.push_back(dispersion_over_seeds(name, runs));
    }
    if (with_ens) {
        std::vector<double> per_index;
        for (std::size_t l = 0; l < cfg.ensemble.m1; ++l) {
            std::vector<Eigen::MatrixXd> runs;
            for (const auto& o : outs)
                runs.push_back(o.learners[l]);
            per_index.push_back(dispersion_over_seeds("learner", runs).median_step_tau2);
        }
        rep.single_learner_median_tau2 = median(per_index);
        rep.single_learner_worst_tau2 = *std::max_element(per_index.begin(), per_index.end());
    }

    auto pre = config_preamble(cfg, "variance-report");
    pre.push_back("population: one-step predictions over the held-out slots [" + std::to_string(T) + ", " +
                  std::to_string(cfg.schedule.n_slots) + "), one per seed and step");
    for (const auto& w : rep.warnings)
        pre.push_back("warning: " + w);
    csv_table t{"variance_report.csv", pre, "scheme,tau1,tau2,median_step_tau2,q", {}};
    for (const auto& d : rep.schemes)
        t.rows.push_back(join_row({d.scheme, fmt(d.tau1), fmt(d.tau2), fmt(d.median_step_tau2), fmt(d.q)}));
    if (with_ens) {
        t.rows.push_back(join_row({"single_learner_median", "", "", fmt(rep.single_learner_median_tau2), ""}));
        t.rows.push_back(join_row({"single_learner_worst", "", "", fmt(rep.single_learner_worst_tau2), ""}));
    }
    csv_table r{"variance_reductions.csv", config_preamble(cfg, "variance-report"),
                "scheme,reference,tau1_reduction_pct,tau2_reduction_pct", {}};
    auto pct = [](double v, double ref) {
        return ref > 0.0 ? 100.0 * (1.0 - v / ref) : 0.0;
    };
    if (const auto* ref = rep.find("random_init_lsm"))
        for (const auto& d : rep.schemes)
            if (d.scheme != ref->scheme)
                r.rows.push_back(join_row({d.scheme, ref->scheme, fmt(pct(d.tau1, ref->tau1)), fmt(pct(d.tau2, ref->tau2))}));
    if (const auto* e = rep.find("ensemble"))
        r.rows.push_back(join_row({"ensemble", "single_learner_median", "",
                                   fmt(pct(e->median_step_tau2, rep.single_learner_median_tau2))}));
    rep.tables = {t, r};
    write_tables(out_dir, rep.tables);
    return rep;
}

// ---------------------------------------------------------------------------
// Tracking report: one-step tracking over the observed slots, then a forecast.

struct tracking_report {
    double tracked_median_error = 0.0;  // all elements, slots (washout, n_slots)
    double tracked_rmse = 0.0;
    double forecast_mae = 0.0;          // all elements over the horizon
    double persistence_mae = 0.0;
    double forecast_max_error = 0.0;
    ensemble_model model;
    std::vector<csv_table> tables;
};

inline tracking_report run_tracking_report(const experiment_config& cfg, const std::string& out_dir = "")
{
    cfg.validate();
    const std::size_t M = cfg.system.n_ris;
    const auto T = static_cast<Eigen::Index>(cfg.schedule.n_slots);
    const auto H = static_cast<Eigen::Index>(cfg.schedule.horizon);
    const auto traj = task_trajectory(cfg, M, cfg.schedule.n_slots + cfg.schedule.horizon);
    const auto hist = traj.head(T);
    const auto arch = cfg.arch_for(M);
    ensemble_train_options eopt;
    eopt.train_fraction = cfg.schedule.train_fraction;
    eopt.threads = cfg.threads;

    tracking_report rep;
    rep.model = train_ensemble(arch, hist, cfg.ensemble.m1, cfg.bootstrap(), derive_seed(cfg.seed, {stage::ensemble}),
                               eopt);
    const auto first = static_cast<Eigen::Index>(arch.washout) + 1;
    const auto tracked = ensemble_one_step_predictions(rep.model, hist, first);
    const Eigen::MatrixXd tracked_truth = hist.phases.bottomRows(tracked.rows());
    const auto fc = ensemble_forecast(rep.model, hist, cfg.schedule.horizon, cfg.ensemble.feedback);
    const Eigen::MatrixXd future = traj.phases.bottomRows(H);
    const Eigen::MatrixXd persist = hist.phases.row(T - 1).replicate(H, 1);

    rep.tracked_median_error = median(abs_errors(tracked, tracked_truth));
    rep.tracked_rmse = rmse(tracked, tracked_truth);
    const auto fe = abs_errors(fc.phases, future);
    rep.forecast_mae = mean_of(fe);
    rep.forecast_max_error = *std::max_element(fe.begin(), fe.end());
    rep.persistence_mae = mean_of(abs_errors(persist, future));

    const auto el = static_cast<Eigen::Index>(cfg.task.element);
    auto pre = config_preamble(cfg, "tracking-report");
    pre.push_back("element " + std::to_string(el) + "; tracked rows are one-step predictions from the true history, "
                  "forecast rows feed predictions back");
    csv_table steps{"tracking_steps.csv", pre, "slot,segment,truth,prediction,abs_error,persistence", {}};
    for (Eigen::Index t = 0; t < T; ++t) {
        const double truth = traj.phases(t, el);
        if (t < first) {
            steps.rows.push_back(join_row({std::to_string(t), "washout", fmt(truth), "", "", ""}));
            continue;
        }
        const double p = tracked(t - first, el);
        steps.rows.push_back(join_row({std::to_string(t), "tracked", fmt(truth), fmt(p),
                                       fmt(std::abs(wrap_difference(p - truth))), ""}));
    }
    for (Eigen::Index h = 0; h < H; ++h) {
        const double truth = future(h, el);
        const double p = fc.phases(h, el);
        steps.rows.push_back(join_row({std::to_string(T + h), "forecast", fmt(truth), fmt(p),
                                       fmt(std::abs(wrap_difference(p - truth))), fmt(persist(h, el))}));
    }
    csv_table sum{"tracking_summary.csv", config_preamble(cfg, "tracking-report"), "metric,value,context", {}};
    sum.rows.push_back(metric_row("tracked_median_abs_error", rep.tracked_median_error, "all elements"));
    sum.rows.push_back(metric_row("tracked_rmse", rep.tracked_rmse, "all elements"));
    sum.rows.push_back(metric_row("forecast_mae", rep.forecast_mae, "ensemble"));
    sum.rows.push_back(metric_row("forecast_max_abs_error", rep.forecast_max_error, "ensemble"));
    sum.rows.push_back(metric_row("persistence_mae", rep.persistence_mae, "repeat last observed slot"));
    rep.tables = {steps, sum};
    write_tables(out_dir, rep.tables);
    if (!out_dir.empty())
        save_ensemble((std::filesystem::path(out_dir) / "ensemble.bin").string(), rep.model);
    return rep;
}

// ---------------------------------------------------------------------------
// Spectral-efficiency sweeps over user count and RIS size.

struct se_point {
    std::string sweep;  // users | ris_size
    std::size_t point = 0;
    std::string scheme;
    std::uint64_t seed = 0;
    double se = 0.0;  // mean over evaluation slots, nats/s/Hz summed over users and subcarriers
};

struct se_sweep_report {
    std::vector<se_point> points;
    std::vector<csv_table> tables;

    std::vector<double> values(const std::string& sweep, std::size_t point, const std::string& scheme) const
    {
        std::vector<double> v;
        for (const auto& p : points)
            if (p.sweep == sweep && p.point == point && p.scheme == scheme)
                v.push_back(p.se);
        return v;
    }
};

namespace detail {

inline channel_set without_direct(channel_set ch)
{
    for (auto& user : ch.h_d)
        for (auto& v : user)
            v.setZero();
    return ch;
}

/// SE of every enabled scheme on one seeded instance; order follows cfg.baselines.
inline std::vector<std::pair<std::string, double>> se_instance(const experiment_config& cfg, std::size_t n_ris,
                                                               std::size_t n_users, std::uint64_t seed)
{
    const std::size_t T = cfg.schedule.n_slots;
    const auto slots = instance_slots(cfg, n_ris, n_users, T, seed);
    const auto opt = cfg.make_oracle_options();
    const double P = cfg.system.power;
    const double N0 = cfg.system.noise_variance;
    std::vector<double> oracle_se;
    const auto truth = oracle_trajectory(slots, P, opt, cfg.oracle.warm_start, &oracle_se);
    const auto arch = cfg.arch_for(n_ris);
    const auto sp = make_split(arch, static_cast<Eigen::Index>(T), cfg.schedule.train_fraction);
    const Eigen::Index from = sp.n_train_slots;
    const auto n_eval = static_cast<double>(static_cast<Eigen::Index>(T) - from);

    auto mean_se = [&](const Eigen::MatrixXd& phases) {
        double acc = 0.0;
        for (Eigen::Index t = from; t < static_cast<Eigen::Index>(T); ++t)
            acc += zf_spectral_efficiency(slots[static_cast<std::size_t>(t)],
                                          phase_config::from_phases(phases.row(t - from).transpose()), P, N0);
        return acc / n_eval;
    };

    std::vector<std::pair<std::string, double>> out;
    for (const auto& scheme : cfg.baselines) {
        double se = 0.0;
        if (scheme == "oracle") {
            for (Eigen::Index t = from; t < static_cast<Eigen::Index>(T); ++t)
                se += oracle_se[static_cast<std::size_t>(t)];
            se /= n_eval;
        } else if (scheme == "xavier_lsm" || scheme == "random_init_lsm") {
            const bool x = scheme == "xavier_lsm";
            const auto m = train_readout(init_lsm(arch, x ? input_init::xavier : input_init::uniform_random,
                                                  derive_seed(seed, {x ? stage::xavier : stage::random_init})),
                                         truth, cfg.schedule.train_fraction);
            se = mean_se(one_step_predictions(m, truth, from));
        } else if (scheme == "ensemble") {
            ensemble_train_options eopt;
            eopt.train_fraction = cfg.schedule.train_fraction;
            eopt.threads = 1;
            const auto e = train_ensemble(arch, truth, cfg.ensemble.m1, cfg.bootstrap(),
                                          derive_seed(seed, {stage::ensemble}), eopt);
            se = mean_se(ensemble_one_step_predictions(e, truth, from));
        } else if (scheme == "random_reflection") {
            auto rng = make_rng(seed, {stage::reflection, n_ris, n_users});
            Eigen::MatrixXd ph(static_cast<Eigen::Index>(T) - from, static_cast<Eigen::Index>(n_ris));
            for (Eigen::Index i = 0; i < ph.size(); ++i)
                ph.data()[i] = uniform(rng, 0.0, two_pi);
            se = mean_se(ph);
        } else if (scheme == "without_ris") {
            for (Eigen::Index t = from; t < static_cast<Eigen::Index>(T); ++t)
                se += zf_spectral_efficiency(slots[static_cast<std::size_t>(t)],
                                             phase_config::uniform(static_cast<Eigen::Index>(n_ris), 0.0, 0.0), P, N0);
            se /= n_eval;
        } else if (scheme == "without_direct_link") {
            phase_config start = phase_config::uniform(static_cast<Eigen::Index>(n_ris));
            for (Eigen::Index t = from; t < static_cast<Eigen::Index>(T); ++t) {
                const auto r = oracle_optimize_theta(without_direct(slots[static_cast<std::size_t>(t)]), P, opt, start);
                se += r.se;
                if (cfg.oracle.warm_start)
                    start = r.config;
            }
            se /= n_eval;
        }
        out.emplace_back(scheme, se);
    }
    return out;
}

}  // namespace detail

inline se_sweep_report run_se_sweeps(const experiment_config& cfg, const std::string& out_dir = "")
{
    cfg.validate();
    struct job {
        std::string sweep;
        std::size_t point, n_ris, n_users;
        std::uint64_t seed;
    };
    std::vector<job> jobs;
    for (auto k : cfg.sweeps.users)
        for (auto s : cfg.sweeps.seeds)
            jobs.push_back({"users", k, cfg.system.n_ris, k, s});
    for (auto m : cfg.sweeps.ris_sizes)
        for (auto s : cfg.sweeps.seeds)
            jobs.push_back({"ris_size", m, m, cfg.system.n_users, s});

    std::vector<std::vector<std::pair<std::string, double>>> results(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        const auto& j = jobs[i];
        results[i] = detail::se_instance(cfg, j.n_ris, j.n_users, j.seed);
    });

    se_sweep_report rep;
    for (std::size_t i = 0; i < jobs.size(); ++i)
        for (const auto& [scheme, se] : results[i])
            rep.points.push_back({jobs[i].sweep, jobs[i].point, scheme, jobs[i].seed, se});

    auto pre = config_preamble(cfg, "se-sweep");
    pre.push_back("se: mean over held-out slots of sum over users and subcarriers of ln(1 + SINR), nats/s/Hz");
    csv_table raw{"se_sweep.csv", pre, "sweep,point,scheme,seed,se", {}};
    for (const auto& p : rep.points)
        raw.rows.push_back(join_row({p.sweep, fmt(p.point), p.scheme, std::to_string(p.seed), fmt(p.se)}));
    csv_table sum{"se_summary.csv", config_preamble(cfg, "se-sweep"), "sweep,point,scheme,n,median,p10,p90", {}};
    auto summarize = [&](const std::string& sweep, const std::vector<std::size_t>& pts) {
        for (auto pt : pts)
            for (const auto& scheme : cfg.baselines) {
                const auto v = rep.values(sweep, pt, scheme);
                sum.rows.push_back(join_row({sweep, fmt(pt), scheme, fmt(v.size()), fmt(median(v)),
                                             fmt(percentile(v, 10.0)), fmt(percentile(v, 90.0))}));
            }
    };
    summarize("users", cfg.sweeps.users);
    summarize("ris_size", cfg.sweeps.ris_sizes);
    rep.tables = {raw, sum};
    write_tables(out_dir, rep.tables);
    return rep;
}

// ---------------------------------------------------------------------------
// Oracle trajectory generation.

struct oracle_gen_report {
    phase_trajectory trajectory;
    std::vector<double> se;
    std::vector<csv_table> tables;
};

/// `dump_slot` >= 0 also writes that slot's channel tensors.
inline oracle_gen_report run_oracle_gen(const experiment_config& cfg, const std::string& out_dir = "",
                                        long dump_slot = -1)
{
    cfg.validate();
    const auto slots = instance_slots(cfg, cfg.system.n_ris, cfg.system.n_users, cfg.schedule.n_slots, cfg.seed);
    if (dump_slot >= static_cast<long>(slots.size()))
        throw config_error("channel dump slot " + std::to_string(dump_slot) + " is out of range");
    oracle_gen_report rep;
    rep.trajectory = oracle_trajectory(slots, cfg.system.power, cfg.make_oracle_options(), cfg.oracle.warm_start,
                                       &rep.se);
    rep.trajectory.slot_interval = cfg.schedule.slot_interval;

    std::ostringstream traj;
    write_trajectory_csv(traj, rep.trajectory);
    csv_table t{"oracle_trajectory.csv", config_preamble(cfg, "oracle-gen"), "", {}};
    {
        // header and rows come from the trajectory writer
        std::string body = traj.str();
        const auto nl = body.find('\n');
        t.header = body.substr(0, nl);
        std::istringstream rest(body.substr(nl + 1));
        for (std::string line; std::getline(rest, line);)
            t.rows.push_back(line);
    }
    csv_table s{"oracle_se.csv", config_preamble(cfg, "oracle-gen"), "slot,se", {}};
    for (std::size_t i = 0; i < rep.se.size(); ++i)
        s.rows.push_back(join_row({std::to_string(i), fmt(rep.se[i])}));
    rep.tables = {t, s};
    if (dump_slot >= 0) {
        std::ostringstream ch;
        write_channel_csv(ch, slots[static_cast<std::size_t>(dump_slot)]);
        auto pre = config_preamble(cfg, "oracle-gen");
        pre.push_back("channel tensors of slot " + std::to_string(dump_slot));
        csv_table c{"channel_slot" + std::to_string(dump_slot) + ".csv", pre, "", {}};
        std::string body = ch.str();
        const auto nl = body.find('\n');
        c.header = body.substr(0, nl);
        std::istringstream rest(body.substr(nl + 1));
        for (std::string line; std::getline(rest, line);)
            c.rows.push_back(line);
        rep.tables.push_back(c);
    }
    write_tables(out_dir, rep.tables);
    return rep;
}

// ---------------------------------------------------------------------------
// Model inspection.

inline std::string describe_model(const reservoir_model& m, const std::string& prefix = "")
{
    std::ostringstream os;
    const auto& a = m.arch;
    os << prefix << "layers," << a.n_layers << "\n"
       << prefix << "neurons," << a.neurons << "\n"
       << prefix << "input_dim," << a.input_dim << "\n"
       << prefix << "output_dim," << a.output_dim << "\n"
       << prefix << "connectivity," << format_double(a.connectivity) << "\n"
       << prefix << "spectral_radius_target," << format_double(a.spectral_radius) << "\n"
       << prefix << "activation," << (a.act == activation::tanh ? "tanh" : "softsign") << "\n"
       << prefix << "washout," << a.washout << "\n"
       << prefix << "ridge_lambda," << format_double(a.ridge_lambda) << "\n"
       << prefix << "init," << (m.init == input_init::xavier ? "xavier" : "uniform_random") << "\n"
       << prefix << "seed," << m.seed << "\n"
       << prefix << "trained," << (m.trained() ? 1 : 0) << "\n"
       << prefix << "train_rmse," << format_double(m.train_rmse) << "\n"
       << prefix << "validation_rmse," << format_double(m.validation_rmse) << "\n";
    for (std::size_t l = 0; l < m.layers.size(); ++l)
        os << prefix << "layer" << l << "_nonzeros," << m.layers[l].w_res.nonZeros() << "\n";
    return os.str();
}

/// Key,value description of a model or ensemble container.
inline std::string inspect_container(const std::string& bytes)
{
    if (bytes.rfind(std::string(ensemble_tag), 0) == 0) {
        const auto e = deserialize_ensemble(bytes);
        std::ostringstream os;
        os << "key,value\ncontainer,LSM-ENS-v1\nlearners," << e.size() << "\nblock_len," << e.bootstrap.block_len
           << "\ncoverage," << format_double(e.bootstrap.coverage) << "\nmaster_seed," << e.master_seed << "\n";
        for (std::size_t i = 0; i < e.size(); ++i)
            os << "weight" << i << "," << format_double(e.weights[static_cast<Eigen::Index>(i)]) << "\n";
        for (std::size_t i = 0; i < e.size(); ++i)
            os << describe_model(e.learners[i], "learner" + std::to_string(i) + "_");
        return os.str();
    }
    const auto m = deserialize_model(bytes);
    return "key,value\ncontainer,LSM-MODEL-v1\n" + describe_model(m);
}

} // namespace rislsm
