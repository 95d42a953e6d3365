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

// Command-line front end for the experiment runners.

#include "rislsm/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct global_flags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string profile;
};

rislsm::experiment_config resolve(const global_flags& g)
{
    const std::string profile = g.profile.empty() ? "desk" : g.profile;
    auto cfg = g.config_path.empty() ? rislsm::profile_by_name(profile) : rislsm::load_config(g.config_path, profile);
    if (!g.profile.empty() && cfg.profile != g.profile)
        throw rislsm::config_error("--profile " + g.profile + " conflicts with profile '" + cfg.profile +
                                   "' in " + g.config_path);
    if (g.seed)
        cfg.seed = *g.seed;
    if (!g.out.empty())
        cfg.output_dir = g.out;
    cfg.validate();
    return cfg;
}

void report_files(const std::string& dir, const std::vector<rislsm::csv_table>& tables)
{
    for (const auto& t : tables)
        std::cout << (std::filesystem::path(dir) / t.name).string() << "\n";
}

std::string error_kind(const std::exception& e)
{
    if (dynamic_cast<const rislsm::config_error*>(&e))
        return "config";
    if (dynamic_cast<const rislsm::format_error*>(&e))
        return "format";
    if (dynamic_cast<const rislsm::parse_error*>(&e))
        return "parse";
    if (dynamic_cast<const rislsm::error*>(&e))
        return "runtime";
    return "internal";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rislsm: reservoir tracking of RIS reflection phases"};
    app.require_subcommand(1);
    app.fallthrough();
    global_flags g;
    app.add_option("--config", g.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "master seed override");
    app.add_option("--out", g.out, "output directory override");
    app.add_option("--profile", g.profile, "base profile")->check(CLI::IsMember({"desk", "paper"}));

    auto* train = app.add_subcommand("train-report", "RMSE against training length, batch losses, FLOPs");
    auto* variance = app.add_subcommand("variance-report", "tau1 / tau2 dispersion across seeds");
    auto* tracking = app.add_subcommand("tracking-report", "ensemble tracking and forecast of one element");
    auto* sweep = app.add_subcommand("se-sweep", "spectral efficiency against user count and RIS size");
    auto* oracle = app.add_subcommand("oracle-gen", "per-slot optimal phases of the configured channel");
    long dump_slot = -1;
    oracle->add_option("--dump-channel", dump_slot, "also write the channel tensors of this slot");
    auto* model = app.add_subcommand("model", "model container tools");
    model->require_subcommand(1);
    auto* inspect = model->add_subcommand("inspect", "print a model or ensemble container as key,value lines");
    std::string model_path;
    inspect->add_option("path", model_path, "container file")->required()->check(CLI::ExistingFile);
    auto* show = app.add_subcommand("show-config", "print the resolved configuration as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (inspect->parsed()) {
            std::cout << rislsm::inspect_container(rislsm::detail::read_file(model_path));
            return 0;
        }
        const auto cfg = resolve(g);
        const auto& dir = cfg.output_dir;
        if (show->parsed()) {
            std::cout << rislsm::to_json(cfg).dump(2) << "\n";
        } else if (train->parsed()) {
            report_files(dir, rislsm::run_training_report(cfg, dir).tables);
            std::cout << (std::filesystem::path(dir) / "model.bin").string() << "\n";
        } else if (variance->parsed()) {
            const auto rep = rislsm::run_variance_report(cfg, dir);
            for (const auto& w : rep.warnings)
                std::cerr << "warning: " << w << "\n";
            report_files(dir, rep.tables);
        } else if (tracking->parsed()) {
            report_files(dir, rislsm::run_tracking_report(cfg, dir).tables);
            std::cout << (std::filesystem::path(dir) / "ensemble.bin").string() << "\n";
        } else if (sweep->parsed()) {
            report_files(dir, rislsm::run_se_sweeps(cfg, dir).tables);
        } else if (oracle->parsed()) {
            report_files(dir, rislsm::run_oracle_gen(cfg, dir, dump_slot).tables);
        }
    } catch (const std::exception& e) {
        std::cerr << "error[" << error_kind(e) << "]: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
