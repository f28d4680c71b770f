// SPDX-License-Identifier: Apache-2.0
//
// uavisac: trajectory and beamforming planner for secure UAV sensing/communication
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

// Command-line front end: single runs and the two parameter sweeps.
//
// Exit status: 0 on success, 2 when a run reports infeasibility, 1 on errors.

#include "uavisac/uavisac.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool literal_velocity = false;
    bool literal_sensing_gain = false;
    std::optional<int> nlos;
    std::optional<double> epsilon;
    std::optional<int> max_outer;

    void attach(CLI::App* app)
    {
        app->add_option("config", config, "scenario JSON file")->required()->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "override rng_seed");
        app->add_flag("--paper-literal-velocity", literal_velocity, "speed limit sqrt(slot_len * v_max)");
        app->add_flag("--paper-literal-sensing-gain", literal_sensing_gain, "echo gain without the altitude term");
        app->add_option("--evaluate-with-nlos", nlos, "Monte-Carlo draws for Rician evaluation of the result");
        app->add_option("--epsilon", epsilon, "relative-change stopping threshold");
        app->add_option("--max-outer", max_outer, "outer iteration cap");
    }

    [[nodiscard]] uavisac::ScenarioConfig load() const
    {
        uavisac::ScenarioConfig c = uavisac::load_scenario_file(config);
        if (seed) c.rng_seed = *seed;
        if (literal_velocity) c.paper_literal_velocity = true;
        if (literal_sensing_gain) c.paper_literal_sensing_gain = true;
        if (nlos) c.evaluate_with_nlos = *nlos;
        if (epsilon) c.epsilon = *epsilon;
        if (max_outer) c.max_outer_iters = *max_outer;
        uavisac::validate(c);
        return c;
    }
};

const std::map<std::string, uavisac::Scheme> kSchemes{{"proposed", uavisac::Scheme::proposed},
                                                      {"no-traj", uavisac::Scheme::no_trajectory},
                                                      {"no-txbf", uavisac::Scheme::no_txbf}};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Trajectory and beamforming planner for secure UAV sensing/communication"};
    app.require_subcommand(1);

    Common run_opts, sweep_t_opts, sweep_g_opts, print_opts;
    uavisac::Scheme scheme = uavisac::Scheme::proposed;
    std::string run_out;
    auto* run_cmd = app.add_subcommand("run", "optimize one scenario");
    run_opts.attach(run_cmd);
    run_cmd->add_option("--scheme", scheme, "proposed | no-traj | no-txbf")
        ->transform(CLI::CheckedTransformer(kSchemes, CLI::ignore_case));
    run_cmd->add_option("--out", run_out, "artifact directory");

    std::vector<double> t_list;
    std::vector<uavisac::Scheme> t_schemes{uavisac::Scheme::proposed, uavisac::Scheme::no_trajectory,
                                           uavisac::Scheme::no_txbf};
    std::string t_out;
    auto* sweep_t = app.add_subcommand("sweep-t", "sum secrecy rate versus mission time");
    sweep_t_opts.attach(sweep_t);
    sweep_t->add_option("--t-list", t_list, "mission times in seconds")->required()->delimiter(',');
    sweep_t->add_option("--schemes", t_schemes, "schemes to run")
        ->delimiter(',')
        ->transform(CLI::CheckedTransformer(kSchemes, CLI::ignore_case));
    sweep_t->add_option("--out", t_out, "output directory")->required();

    std::vector<double> g_list;
    std::string g_out;
    auto* sweep_g = app.add_subcommand("sweep-gamma", "trajectory versus echo-SINR threshold");
    sweep_g_opts.attach(sweep_g);
    sweep_g->add_option("--gamma-list", g_list, "thresholds in dB")->required()->delimiter(',');
    sweep_g->add_option("--out", g_out, "output directory")->required();

    auto* print = app.add_subcommand("print-config", "print the canonical linear-scale config");
    print_opts.attach(print);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*print) {
            std::cout << uavisac::emit_scenario(print_opts.load()) << '\n';
            return 0;
        }
        if (*run_cmd) {
            const auto cfg = run_opts.load();
            const auto r = uavisac::run(cfg, scheme);
            if (!run_out.empty()) uavisac::write_run_artifacts(run_out, cfg, r);
            std::printf("scheme %s status %s iterations %d sum_secrecy_rate %.9g min_eve_distance %.6g\n",
                        uavisac::to_string(scheme), uavisac::run_status(r).c_str(), r.log.outer_iterations(),
                        r.log.final_sum_secrecy(), uavisac::min_distance_to(r.trajectory, cfg.eve));
            if (r.log.failed) {
                std::fprintf(stderr, "%s\n", r.log.failure.c_str());
                return 2;
            }
            return 0;
        }
        if (*sweep_t) {
            const auto rows = uavisac::sweep_mission_time(sweep_t_opts.load(), t_list, t_schemes, t_out);
            int code = 0;
            for (const auto& r : rows) {
                std::printf("T %g scheme %s sum_secrecy_rate %.9g status %s\n", r.mission_time, uavisac::to_string(r.scheme),
                            r.sum_secrecy, r.status.c_str());
                if (r.status != "converged" && r.status != "max_iterations") code = 2;
            }
            return code;
        }
        if (*sweep_g) {
            const auto rows = uavisac::sweep_sensing_threshold(sweep_g_opts.load(), g_list, g_out);
            int code = 0;
            for (const auto& r : rows) {
                std::printf("gamma_th_db %g min_eve_distance %.6g status %s\n", r.gamma_th_db, r.min_eve_distance,
                            r.status.c_str());
                if (r.status == "infeasible_initialization") code = 2;
            }
            return code;
        }
    } catch (const uavisac::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
