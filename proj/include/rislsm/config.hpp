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

// Experiment configuration: JSON document, two built-in profiles, exhaustive validation.

#include "rislsm/channel.hpp"
#include "rislsm/error.hpp"
#include "rislsm/ensemble.hpp"
#include "rislsm/reservoir.hpp"
#include "rislsm/ris_link.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <set>
#include <string>
#include <vector>

namespace rislsm {

inline const std::vector<std::string>& known_schemes()
{
    static const std::vector<std::string> s{"oracle",           "xavier_lsm",  "random_init_lsm",    "ensemble",
                                            "random_reflection", "without_ris", "without_direct_link"};
    return s;
}

struct system_config {
    std::size_t n_tx = 16;
    std::size_t n_ris = 16;
    std::size_t n_users = 2;
    std::size_t n_subcarriers = 8;
    double carrier_hz = 100e9;
    double bandwidth_hz = 400e6;
    double power = 10.0;
    double noise_variance = 1.0;
};

struct channel_config {
    std::size_t n_clusters = 3;
    std::size_t n_rays = 1;
    double tap_spacing = 2.5e-9;
    std::size_t n_taps = 8;
    double roll_off = 0.3;
    double angular_rate = 0.002;  // radians per slot
    double gain_correlation = 0.99;
};

struct oracle_config {
    std::size_t grid_size = 16;
    std::size_t max_sweeps = 20;
    double tolerance = 1e-6;
    bool warm_start = true;
};

struct ensemble_config {
    std::size_t m1 = 15;
    std::size_t block_len = 10;
    double coverage = 0.8;
    feedback_mode feedback = feedback_mode::shared;
};

struct schedule_config {
    std::size_t n_slots = 100;  // tracked slots T
    double slot_interval = 1.0;
    double train_fraction = 0.7;
    std::size_t horizon = 50;
    std::size_t epochs = 10;
    std::vector<std::size_t> batch_sizes{4, 8, 16};
};

/// Phase trajectory used by the training, variance and tracking reports.
struct task_config {
    std::string source = "synthetic";  // synthetic | oracle
    std::uint64_t seed = 7;
    double drift_max = 0.005;
    double amp_min = 0.2, amp_max = 0.8;
    double omega_min = 0.1, omega_max = 0.3;
    std::size_t element = 0;  // element shown by the tracking report
};

struct sweep_config {
    std::vector<std::size_t> users{1, 2, 4};
    std::vector<std::size_t> ris_sizes{4, 9, 16, 25};
    std::vector<std::uint64_t> seeds;
};

struct experiment_config {
    std::string profile = "desk";
    std::uint64_t seed = 2024;
    std::string output_dir = "out";
    std::size_t threads = 0;
    system_config system;
    channel_config channel;
    oracle_config oracle;
    reservoir_arch learner = reservoir_arch::for_ris(16);
    ensemble_config ensemble;
    schedule_config schedule;
    task_config task;
    sweep_config sweeps;
    std::vector<std::string> baselines = known_schemes();

    /// Every problem found, one per entry.
    std::vector<std::string> problems() const;

    /// Throws config_error listing every problem.
    void validate() const
    {
        const auto p = problems();
        if (p.empty())
            return;
        std::string msg = "invalid configuration:";
        for (const auto& s : p)
            msg += "\n  - " + s;
        throw config_error(msg);
    }

    bool has_scheme(const std::string& s) const
    {
        return std::find(baselines.begin(), baselines.end(), s) != baselines.end();
    }

    /// Channel statistics for a given RIS size and user count.
    channel_spec make_channel_spec(std::size_t n_ris, std::size_t n_users) const
    {
        channel_spec spec;
        for (auto* c : {&spec.bs_ris, &spec.bs_user, &spec.ris_user}) {
            c->n_clusters = channel.n_clusters;
            c->n_rays_per_cluster = channel.n_rays;
            c->tap_spacing = channel.tap_spacing;
            c->n_taps = channel.n_taps;
            c->n_subcarriers = system.n_subcarriers;
            c->roll_off = channel.roll_off;
        }
        spec.bs = make_wideband_array(system.n_tx, system.carrier_hz, system.bandwidth_hz, system.n_subcarriers);
        spec.ris = make_wideband_array(n_ris, system.carrier_hz, system.bandwidth_hz, system.n_subcarriers);
        spec.n_users = n_users;
        return spec;
    }

    mobility_model make_mobility(std::size_t n_slots) const
    {
        mobility_model mob;
        mob.angular_rate = channel.angular_rate;
        mob.gain_correlation = channel.gain_correlation;
        mob.slot_interval = schedule.slot_interval;
        mob.n_slots = n_slots;
        return mob;
    }

    oracle_options make_oracle_options() const
    {
        return {oracle.grid_size, oracle.max_sweeps, oracle.tolerance, system.noise_variance};
    }

    reservoir_arch arch_for(std::size_t n_ris) const
    {
        auto a = learner;
        a.input_dim = 2 * n_ris;
        a.output_dim = 2 * n_ris;
        return a;
    }

    bootstrap_spec bootstrap() const { return {ensemble.block_len, ensemble.coverage}; }
};

/// Desk scale: N_t = 16, M = 16, K = 2, S = 8, T = 100, 20 seeds.
inline experiment_config desk_profile()
{
    experiment_config c;
    for (std::uint64_t s = 0; s < 20; ++s)
        c.sweeps.seeds.push_back(s);
    return c;
}

/// Full simulation scale: N_t = 256, M = 8x8, K = 4, S = 128.
inline experiment_config paper_profile()
{
    experiment_config c;
    c.profile = "paper";
    c.system.n_tx = 256;
    c.system.n_ris = 64;
    c.system.n_users = 4;
    c.system.n_subcarriers = 128;
    c.learner = reservoir_arch::for_ris(64);
    c.sweeps.users = {2, 4, 6, 8};
    c.sweeps.ris_sizes = {64, 81, 100, 121};
    for (std::uint64_t s = 0; s < 20; ++s)
        c.sweeps.seeds.push_back(s);
    return c;
}

inline experiment_config profile_by_name(const std::string& name)
{
    if (name == "desk")
        return desk_profile();
    if (name == "paper")
        return paper_profile();
    throw config_error("unknown profile '" + name + "' (expected desk or paper)");
}

inline std::vector<std::string> experiment_config::problems() const
{
    std::vector<std::string> p;
    auto need = [&p](bool ok, const std::string& what) {
        if (!ok)
            p.push_back(what);
    };
    need(system.n_tx >= 1, "system.n_tx must be >= 1");
    need(system.n_ris >= 1, "system.n_ris must be >= 1");
    need(system.n_users >= 1, "system.n_users must be >= 1");
    need(system.n_users <= system.n_tx, "system.n_users exceeds system.n_tx (zero-forcing infeasible)");
    need(system.n_subcarriers >= 1, "system.n_subcarriers must be >= 1");
    need(system.carrier_hz > 0.0, "system.carrier_hz must be > 0");
    need(system.bandwidth_hz > 0.0 && system.bandwidth_hz < 2.0 * system.carrier_hz,
         "system.bandwidth_hz must lie in (0, 2 * carrier_hz)");
    need(system.power >= 0.0, "system.power must be >= 0");
    need(system.noise_variance > 0.0, "system.noise_variance must be > 0");
    need(channel.n_rays >= 1, "channel.n_rays must be >= 1");
    need(channel.tap_spacing > 0.0, "channel.tap_spacing must be > 0");
    need(channel.n_taps >= 1, "channel.n_taps must be >= 1");
    need(channel.roll_off >= 0.0 && channel.roll_off <= 1.0, "channel.roll_off must lie in [0, 1]");
    need(channel.gain_correlation >= 0.0 && channel.gain_correlation <= 1.0,
         "channel.gain_correlation must lie in [0, 1]");
    need(oracle.grid_size >= 2, "oracle.grid_size must be >= 2");
    need(oracle.max_sweeps >= 1, "oracle.max_sweeps must be >= 1");
    need(oracle.tolerance >= 0.0, "oracle.tolerance must be >= 0");
    need(learner.n_layers >= 1, "learner.n_layers must be >= 1");
    need(learner.neurons >= 1, "learner.neurons must be >= 1");
    need(learner.connectivity > 0.0 && learner.connectivity <= 1.0, "learner.connectivity must lie in (0, 1]");
    need(learner.spectral_radius > 0.0, "learner.spectral_radius must be > 0");
    need(learner.ridge_lambda >= 0.0, "learner.ridge_lambda must be >= 0");
    need(ensemble.m1 >= 1, "ensemble.m1 must be >= 1");
    need(ensemble.block_len >= 2, "ensemble.block_len must be >= 2");
    need(ensemble.coverage > 0.0 && ensemble.coverage <= 1.0, "ensemble.coverage must lie in (0, 1]");
    need(schedule.n_slots >= learner.washout + 4, "schedule.n_slots must be >= learner.washout + 4");
    need(schedule.slot_interval > 0.0, "schedule.slot_interval must be > 0");
    need(schedule.train_fraction > 0.0 && schedule.train_fraction < 1.0,
         "schedule.train_fraction must lie in (0, 1)");
    need(schedule.horizon >= 1, "schedule.horizon must be >= 1");
    need(schedule.epochs >= 1, "schedule.epochs must be >= 1");
    need(!schedule.batch_sizes.empty(), "schedule.batch_sizes must not be empty");
    for (auto b : schedule.batch_sizes)
        need(b >= 1, "schedule.batch_sizes entries must be >= 1");
    need(task.source == "synthetic" || task.source == "oracle", "task.source must be synthetic or oracle");
    need(task.drift_max >= 0.0, "task.drift_max must be >= 0");
    need(task.amp_min <= task.amp_max, "task amplitude range is not ordered");
    need(task.omega_min > 0.0 && task.omega_min <= task.omega_max, "task omega range must be positive and ordered");
    need(task.element < system.n_ris, "task.element must be < system.n_ris");
    need(!sweeps.users.empty(), "sweeps.users must not be empty");
    need(!sweeps.ris_sizes.empty(), "sweeps.ris_sizes must not be empty");
    need(!sweeps.seeds.empty(), "sweeps.seeds must not be empty");
    for (auto k : sweeps.users)
        need(k >= 1 && k <= system.n_tx,
             "sweeps.users entry " + std::to_string(k) + " is outside [1, n_tx] (zero-forcing infeasible)");
    for (auto m : sweeps.ris_sizes)
        need(m >= 1, "sweeps.ris_sizes entries must be >= 1");
    std::set<std::string> seen;
    for (const auto& b : baselines) {
        const auto& k = known_schemes();
        need(std::find(k.begin(), k.end(), b) != k.end(), "unknown baseline '" + b + "'");
        need(seen.insert(b).second, "baseline '" + b + "' listed twice");
    }
    return p;
}

// ---------------------------------------------------------------------------
// JSON mapping. Unknown keys are rejected so typos do not silently fall back to defaults.

namespace detail {

class json_reader {
public:
    json_reader(const nlohmann::json& j, std::string path, std::vector<std::string>& problems)
        : j_(j), path_(std::move(path)), problems_(problems)
    {
        if (!j_.is_object())
            problems_.push_back(path_ + " must be an object");
    }

    ~json_reader()
    {
        if (!j_.is_object())
            return;
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                problems_.push_back("unknown key " + path_ + "." + it.key());
    }

    json_reader(const json_reader&) = delete;
    json_reader& operator=(const json_reader&) = delete;

    template <class T>
    void get(const char* key, T& out)
    {
        used_.insert(key);
        if (!j_.is_object() || !j_.contains(key))
            return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            problems_.push_back(path_ + "." + key + " has the wrong type");
        }
    }

    const nlohmann::json* child(const char* key)
    {
        used_.insert(key);
        if (!j_.is_object() || !j_.contains(key))
            return nullptr;
        return &j_.at(key);
    }

    const std::string& path() const { return path_; }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::vector<std::string>& problems_;
    std::set<std::string> used_;
};

}  // namespace detail

/// Applies a JSON document on top of `base` (normally a profile). Throws config_error
/// listing every parse and validation problem.
inline experiment_config apply_json(experiment_config c, const nlohmann::json& doc)
{
    std::vector<std::string> problems;
    {
        detail::json_reader r(doc, "config", problems);
        std::string ignored_profile;
        r.get("profile", ignored_profile);
        r.get("seed", c.seed);
        r.get("output_dir", c.output_dir);
        r.get("threads", c.threads);
        r.get("baselines", c.baselines);
        if (const auto* j = r.child("system")) {
            detail::json_reader s(*j, "system", problems);
            s.get("n_tx", c.system.n_tx);
            s.get("n_ris", c.system.n_ris);
            s.get("n_users", c.system.n_users);
            s.get("n_subcarriers", c.system.n_subcarriers);
            s.get("carrier_hz", c.system.carrier_hz);
            s.get("bandwidth_hz", c.system.bandwidth_hz);
            s.get("power", c.system.power);
            s.get("noise_variance", c.system.noise_variance);
        }
        if (const auto* j = r.child("channel")) {
            detail::json_reader s(*j, "channel", problems);
            s.get("n_clusters", c.channel.n_clusters);
            s.get("n_rays", c.channel.n_rays);
            s.get("tap_spacing", c.channel.tap_spacing);
            s.get("n_taps", c.channel.n_taps);
            s.get("roll_off", c.channel.roll_off);
            s.get("angular_rate", c.channel.angular_rate);
            s.get("gain_correlation", c.channel.gain_correlation);
        }
        if (const auto* j = r.child("oracle")) {
            detail::json_reader s(*j, "oracle", problems);
            s.get("grid_size", c.oracle.grid_size);
            s.get("max_sweeps", c.oracle.max_sweeps);
            s.get("tolerance", c.oracle.tolerance);
            s.get("warm_start", c.oracle.warm_start);
        }
        if (const auto* j = r.child("learner")) {
            detail::json_reader s(*j, "learner", problems);
            s.get("n_layers", c.learner.n_layers);
            s.get("neurons", c.learner.neurons);
            s.get("connectivity", c.learner.connectivity);
            s.get("spectral_radius", c.learner.spectral_radius);
            s.get("rescale", c.learner.rescale);
            s.get("washout", c.learner.washout);
            s.get("ridge_lambda", c.learner.ridge_lambda);
            std::string act = c.learner.act == activation::tanh ? "tanh" : "softsign";
            s.get("activation", act);
            if (act == "tanh")
                c.learner.act = activation::tanh;
            else if (act == "softsign")
                c.learner.act = activation::softsign;
            else
                problems.push_back("learner.activation must be tanh or softsign");
        }
        if (const auto* j = r.child("ensemble")) {
            detail::json_reader s(*j, "ensemble", problems);
            s.get("m1", c.ensemble.m1);
            s.get("block_len", c.ensemble.block_len);
            s.get("coverage", c.ensemble.coverage);
            std::string fb = c.ensemble.feedback == feedback_mode::shared ? "shared" : "per_learner";
            s.get("feedback", fb);
            if (fb == "shared")
                c.ensemble.feedback = feedback_mode::shared;
            else if (fb == "per_learner")
                c.ensemble.feedback = feedback_mode::per_learner;
            else
                problems.push_back("ensemble.feedback must be shared or per_learner");
        }
        if (const auto* j = r.child("schedule")) {
            detail::json_reader s(*j, "schedule", problems);
            s.get("n_slots", c.schedule.n_slots);
            s.get("slot_interval", c.schedule.slot_interval);
            s.get("train_fraction", c.schedule.train_fraction);
            s.get("horizon", c.schedule.horizon);
            s.get("epochs", c.schedule.epochs);
            s.get("batch_sizes", c.schedule.batch_sizes);
        }
        if (const auto* j = r.child("task")) {
            detail::json_reader s(*j, "task", problems);
            s.get("source", c.task.source);
            s.get("seed", c.task.seed);
            s.get("drift_max", c.task.drift_max);
            s.get("amp_min", c.task.amp_min);
            s.get("amp_max", c.task.amp_max);
            s.get("omega_min", c.task.omega_min);
            s.get("omega_max", c.task.omega_max);
            s.get("element", c.task.element);
        }
        if (const auto* j = r.child("sweeps")) {
            detail::json_reader s(*j, "sweeps", problems);
            s.get("users", c.sweeps.users);
            s.get("ris_sizes", c.sweeps.ris_sizes);
            s.get("seeds", c.sweeps.seeds);
        }
    }
    c.learner.input_dim = 2 * c.system.n_ris;
    c.learner.output_dim = 2 * c.system.n_ris;
    for (auto& s : c.problems())
        problems.push_back(std::move(s));
    if (!problems.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& s : problems)
            msg += "\n  - " + s;
        throw config_error(msg);
    }
    return c;
}

/// Profile named in the document (or `fallback_profile`) with the document applied.
inline experiment_config parse_config(const std::string& text, const std::string& fallback_profile = "desk")
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    std::string profile = fallback_profile;
    if (doc.is_object() && doc.contains("profile") && doc["profile"].is_string())
        profile = doc["profile"].get<std::string>();
    auto base = profile_by_name(profile);
    return apply_json(base, doc);
}

inline experiment_config load_config(const std::string& path, const std::string& fallback_profile = "desk")
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw config_error("cannot open config file " + path);
    const std::string text{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    return parse_config(text, fallback_profile);
}

/// Fully resolved configuration. Keys are sorted, so the dump is stable.
inline nlohmann::json to_json(const experiment_config& c)
{
    nlohmann::json j;
    j["profile"] = c.profile;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["threads"] = c.threads;
    j["baselines"] = c.baselines;
    j["system"] = {{"n_tx", c.system.n_tx},
                   {"n_ris", c.system.n_ris},
                   {"n_users", c.system.n_users},
                   {"n_subcarriers", c.system.n_subcarriers},
                   {"carrier_hz", c.system.carrier_hz},
                   {"bandwidth_hz", c.system.bandwidth_hz},
                   {"power", c.system.power},
                   {"noise_variance", c.system.noise_variance}};
    j["channel"] = {{"n_clusters", c.channel.n_clusters},     {"n_rays", c.channel.n_rays},
                    {"tap_spacing", c.channel.tap_spacing},   {"n_taps", c.channel.n_taps},
                    {"roll_off", c.channel.roll_off},         {"angular_rate", c.channel.angular_rate},
                    {"gain_correlation", c.channel.gain_correlation}};
    j["oracle"] = {{"grid_size", c.oracle.grid_size},
                   {"max_sweeps", c.oracle.max_sweeps},
                   {"tolerance", c.oracle.tolerance},
                   {"warm_start", c.oracle.warm_start}};
    j["learner"] = {{"n_layers", c.learner.n_layers},
                    {"neurons", c.learner.neurons},
                    {"connectivity", c.learner.connectivity},
                    {"spectral_radius", c.learner.spectral_radius},
                    {"rescale", c.learner.rescale},
                    {"washout", c.learner.washout},
                    {"ridge_lambda", c.learner.ridge_lambda},
                    {"activation", c.learner.act == activation::tanh ? "tanh" : "softsign"}};
    j["ensemble"] = {{"m1", c.ensemble.m1},
                     {"block_len", c.ensemble.block_len},
                     {"coverage", c.ensemble.coverage},
                     {"feedback", c.ensemble.feedback == feedback_mode::shared ? "shared" : "per_learner"}};
    j["schedule"] = {{"n_slots", c.schedule.n_slots},   {"slot_interval", c.schedule.slot_interval},
                     {"train_fraction", c.schedule.train_fraction}, {"horizon", c.schedule.horizon},
                     {"epochs", c.schedule.epochs},     {"batch_sizes", c.schedule.batch_sizes}};
    j["task"] = {{"source", c.task.source},       {"seed", c.task.seed},         {"drift_max", c.task.drift_max},
                 {"amp_min", c.task.amp_min},     {"amp_max", c.task.amp_max},   {"omega_min", c.task.omega_min},
                 {"omega_max", c.task.omega_max}, {"element", c.task.element}};
    j["sweeps"] = {{"users", c.sweeps.users}, {"ris_sizes", c.sweeps.ris_sizes}, {"seeds", c.sweeps.seeds}};
    return j;
}

} // namespace rislsm
