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

// Run artifacts and parameter sweeps.
//
// A run directory holds convergence.csv, trajectory.csv, beams_summary.csv
// and result.json. The CSV files carry no timing data, so byte-for-byte
// comparison of two runs checks determinism.

#pragma once

#include "uavisac/bcd.hpp"
#include "uavisac/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace uavisac {

inline std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Hash of the canonical config text.
inline std::string config_hash(const ScenarioConfig& cfg)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(cfg).dump())));
    return buf;
}

/// "converged", "max_iterations" or "infeasible_initialization".
inline std::string run_status(const RunResult& r)
{
    if (r.log.failed) return "infeasible_initialization";
    return r.log.converged ? "converged" : "max_iterations";
}

inline void write_convergence_csv(std::ostream& os, const RunResult& r)
{
    os << "iteration,sum_secrecy_rate,min_sensing_sinr\n";
    os << 0 << ',' << fmt_double(r.log.initial_sum_secrecy) << ',' << fmt_double(r.log.initial_min_sensing_sinr) << '\n';
    for (const auto& it : r.log.iterations)
        os << it.iteration << ',' << fmt_double(it.sum_secrecy) << ',' << fmt_double(it.min_sensing_sinr) << '\n';
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& t)
{
    os << "n,x,y\n";
    for (int n = 0; n < t.size(); ++n) os << n << ',' << fmt_double(t[n].x()) << ',' << fmt_double(t[n].y()) << '\n';
}

inline void write_beams_summary_csv(std::ostream& os, const ScenarioConfig& cfg, const RunResult& r)
{
    const int k = cfg.num_users();
    os << "slot";
    for (int i = 0; i < k; ++i) os << ",power_user_" << i;
    os << ",power_jam,total_power";
    for (int i = 0; i < k; ++i) os << ",eigen_ratio_user_" << i;
    os << ",eigen_ratio_jam,sensing_sinr,secrecy_rate\n";
    for (int n = 0; n < static_cast<int>(r.beams.slots.size()); ++n) {
        const SlotBeams& b = r.beams.slots[n];
        os << n;
        for (const auto& f : b.users) os << ',' << fmt_double(f.squaredNorm());
        os << ',' << fmt_double(b.jam.squaredNorm()) << ',' << fmt_double(b.power());
        const auto& er = r.eigen_ratio.size() > static_cast<std::size_t>(n) ? r.eigen_ratio[n] : std::vector<double>{};
        for (int i = 0; i <= k; ++i) os << ',' << (static_cast<int>(er.size()) > i ? fmt_double(er[i]) : std::string("nan"));
        const SlotChannel& ch = r.channels.slots[n];
        os << ',' << fmt_double(sensing_sinr(ch, b, cfg.noise_power)) << ','
           << fmt_double(slot_secrecy_rate(ch, b, cfg.noise_power)) << '\n';
    }
}

inline nlohmann::json result_json(const ScenarioConfig& cfg, const RunResult& r)
{
    nlohmann::json j;
    j["scheme"] = to_string(r.scheme);
    j["status"] = run_status(r);
    if (r.log.failed) j["failure"] = r.log.failure;
    j["rng_seed"] = cfg.rng_seed;
    j["config_hash"] = config_hash(cfg);
    j["config"] = to_json(cfg);
    j["sum_secrecy_rate"] = r.log.final_sum_secrecy();
    j["initial_sum_secrecy_rate"] = r.log.initial_sum_secrecy;
    j["outer_iterations"] = r.log.outer_iterations();
    j["inner_iterations_total"] = r.log.inner_iterations_total;
    j["converged"] = r.log.converged;
    j["min_eve_distance_m"] = r.trajectory.size() ? min_distance_to(r.trajectory, cfg.eve) : 0.0;
    double min_gs = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < r.beams.slots.size(); ++n)
        min_gs = std::min(min_gs, sensing_sinr(r.channels.slots[n], r.beams.slots[n], cfg.noise_power));
    j["min_sensing_sinr"] = min_gs;
    j["wall_seconds"] = r.log.wall_seconds;
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& it : r.log.iterations) {
        nlohmann::json e;
        e["iteration"] = it.iteration;
        e["sum_secrecy_rate"] = it.sum_secrecy;
        e["min_sensing_sinr"] = it.min_sensing_sinr;
        e["min_eve_distance_m"] = it.min_eve_distance;
        e["trajectory_status"] = it.trajectory_status;
        e["trajectory_step"] = it.trajectory_step;
        e["txbf_solved"] = it.txbf_solved;
        e["txbf_accepted"] = it.txbf_accepted;
        e["txbf_failed"] = it.txbf_failed;
        e["inner_passes"] = it.inner_passes;
        e["extraction_flags"] = it.extraction_flags;
        if (std::isfinite(it.median_eigen_ratio)) e["median_eigen_ratio"] = it.median_eigen_ratio;
        e["wall_seconds"] = it.wall_seconds;
        iters.push_back(std::move(e));
    }
    j["iterations"] = std::move(iters);
    if (cfg.evaluate_with_nlos > 0) {
        j["nlos"] = {{"draws", cfg.evaluate_with_nlos},
                     {"mean_sum_secrecy_rate", r.nlos_mean_sum_secrecy},
                     {"std_sum_secrecy_rate", r.nlos_std_sum_secrecy}};
    }
    return j;
}

namespace detail {
    inline void write_file(const std::filesystem::path& p, const std::string& text)
    {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
        out << text;
    }
} // namespace detail

inline void write_run_artifacts(const std::filesystem::path& dir, const ScenarioConfig& cfg, const RunResult& r)
{
    std::filesystem::create_directories(dir);
    std::ostringstream conv, traj, beams;
    write_convergence_csv(conv, r);
    write_trajectory_csv(traj, r.trajectory);
    write_beams_summary_csv(beams, cfg, r);
    detail::write_file(dir / "convergence.csv", conv.str());
    detail::write_file(dir / "trajectory.csv", traj.str());
    detail::write_file(dir / "beams_summary.csv", beams.str());
    detail::write_file(dir / "result.json", result_json(cfg, r).dump(2) + "\n");
}

struct SweepRowT {
    double mission_time = 0.0;
    Scheme scheme = Scheme::proposed;
    double sum_secrecy = 0.0;
    std::string status;
};

/// Runs every scheme at each mission time (slot length held fixed).
inline std::vector<SweepRowT> sweep_mission_time(const ScenarioConfig& base, const std::vector<double>& times,
                                                 const std::vector<Scheme>& schemes,
                                                 const std::filesystem::path& out_dir = {})
{
    std::vector<SweepRowT> rows;
    for (double t : times) {
        ScenarioConfig cfg;
        std::string bad;
        try {
            cfg = with_mission_time(base, t);
        } catch (const ConfigError& e) {
            bad = e.what();
        }
        for (Scheme s : schemes) {
            SweepRowT row{t, s, 0.0, "invalid_config"};
            if (bad.empty()) {
                const RunResult r = run(cfg, s);
                row.sum_secrecy = r.log.final_sum_secrecy();
                row.status = run_status(r);
                if (!out_dir.empty()) write_run_artifacts(out_dir / ("T_" + fmt_double(t)) / to_string(s), cfg, r);
            }
            rows.push_back(row);
        }
    }
    if (!out_dir.empty()) {
        std::ostringstream os;
        os << "T,scheme,sum_secrecy_rate,status\n";
        for (const auto& r : rows)
            os << fmt_double(r.mission_time) << ',' << to_string(r.scheme) << ',' << fmt_double(r.sum_secrecy) << ','
               << r.status << '\n';
        std::filesystem::create_directories(out_dir);
        detail::write_file(out_dir / "secrecy_vs_T.csv", os.str());
    }
    return rows;
}

struct SweepRowGamma {
    double gamma_th_db = 0.0;
    std::string status;
    double min_eve_distance = 0.0;
    Trajectory trajectory;
};

/// Runs the proposed scheme at each echo-SINR threshold (dB).
inline std::vector<SweepRowGamma> sweep_sensing_threshold(const ScenarioConfig& base, const std::vector<double>& gammas_db,
                                                          const std::filesystem::path& out_dir = {})
{
    std::vector<SweepRowGamma> rows;
    for (double g : gammas_db) {
        ScenarioConfig cfg = base;
        cfg.gamma_th = db_to_linear(g);
        const RunResult r = run(cfg, Scheme::proposed);
        rows.push_back({g, run_status(r), min_distance_to(r.trajectory, cfg.eve), r.trajectory});
        if (!out_dir.empty()) write_run_artifacts(out_dir / ("gamma_" + fmt_double(g)), cfg, r);
    }
    if (!out_dir.empty()) {
        std::ostringstream os;
        os << "gamma_th_db,n,x,y,min_eve_distance,status\n";
        for (const auto& r : rows)
            for (int n = 0; n < r.trajectory.size(); ++n)
                os << fmt_double(r.gamma_th_db) << ',' << n << ',' << fmt_double(r.trajectory[n].x()) << ','
                   << fmt_double(r.trajectory[n].y()) << ',' << fmt_double(r.min_eve_distance) << ',' << r.status << '\n';
        std::filesystem::create_directories(out_dir);
        detail::write_file(out_dir / "trajectory_by_gamma.csv", os.str());
    }
    return rows;
}

} // namespace uavisac
