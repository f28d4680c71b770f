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

// Scenario configuration, node geometry and time discretization.
//
// Configs are JSON documents. Powers may be given in watts (`*_w`) or dBm
// (`*_dbm`), gains in linear scale or dB (`*_db`). Everything is converted to
// linear scale at load time. `emit_scenario` writes the canonical linear-scale
// form, which reloads to an identical config.

#pragma once

#include "uavisac/types.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uavisac {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
    std::vector<Vec2> users{{20.0, 60.0}, {30.0, 30.0}, {40.0, 55.0}, {50.0, 30.0}};
    Vec2 eve{20.0, 0.0};
    double altitude = 40.0;     // m
    double mission_time = 4.0;  // s
    int slot_count = 80;
    double slot_len = 0.05;     // s
    double v_max = 50.0;        // m/s
    double p_max = 5.0;         // W
    double gamma_th = 10.0;     // linear; 0 disables the sensing constraint
    double noise_power = 1e-14; // W (-110 dBm)
    double beta0 = 1e-3;        // linear (-30 dB)
    double rician_k = 500.0;
    double rcs = 0.1;           // m^2
    double si_power = 5e-7;     // per-entry power of H_SI (-70 dB relative to p_max)
    int mx = 3;
    int my = 3;
    Vec2 q0{20.0, 50.0};
    Vec2 qf{50.0, 10.0};
    double epsilon = 1e-3;
    std::uint64_t rng_seed = 1;
    int max_outer_iters = 20;
    int max_inner_iters = 3;    // transmit-beamforming SCA passes per outer iteration
    double solver_tol = 1e-7;
    bool paper_literal_velocity = false;
    bool paper_literal_sensing_gain = false;
    int evaluate_with_nlos = 0; // Monte-Carlo draws for the NLOS evaluation, 0 = off

    [[nodiscard]] int num_users() const { return static_cast<int>(users.size()); }
    [[nodiscard]] int num_antennas() const { return mx * my; }

    /// Largest allowed ||q[n] - q[n-1]||.
    [[nodiscard]] double step_limit() const
    {
        const double r = slot_len * v_max;
        return paper_literal_velocity ? std::sqrt(r) : r;
    }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

/// Throws ConfigError naming the first violated invariant.
inline void validate(const ScenarioConfig& c)
{
    auto fail = [](const std::string& m) { throw ConfigError("invalid scenario: " + m); };
    if (c.users.empty()) fail("at least one user is required (K >= 1)");
    if (c.mx < 1 || c.my < 1) fail("antenna counts must be >= 1");
    if (c.slot_count < 1) fail("slot_count must be >= 1");
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) fail(std::string(name) + " must be strictly positive");
    };
    positive(c.altitude, "altitude_m");
    positive(c.mission_time, "mission_time_s");
    positive(c.slot_len, "slot_len_s");
    positive(c.v_max, "v_max_mps");
    positive(c.p_max, "p_max_w");
    positive(c.noise_power, "noise_power_w");
    positive(c.beta0, "beta0");
    positive(c.rcs, "rcs_m2");
    if (!(c.gamma_th >= 0.0) || !std::isfinite(c.gamma_th)) fail("gamma_th must be >= 0");
    if (!(c.si_power >= 0.0)) fail("si_power_w must be >= 0");
    if (!(c.rician_k >= 0.0)) fail("rician_k must be >= 0");
    if (!(c.epsilon > 0.0)) fail("epsilon must be > 0");
    if (c.max_outer_iters < 1) fail("max_outer_iters must be >= 1");
    if (c.max_inner_iters < 1) fail("max_inner_iters must be >= 1");
    if (!(c.solver_tol > 0.0)) fail("solver_tol must be > 0");
    if (c.evaluate_with_nlos < 0) fail("evaluate_with_nlos must be >= 0");
    const double span = c.slot_count * c.slot_len;
    if (std::abs(span - c.mission_time) > 1e-9 * c.mission_time)
        fail("slot_count * slot_len_s must equal mission_time_s");
    const double travel = (c.slot_count - 1) * c.step_limit();
    const double need = (c.q0 - c.qf).norm();
    if (need > travel * (1.0 + 1e-12))
        fail("endpoint unreachable: ||q0 - qf|| = " + std::to_string(need) + " m exceeds maximum travel " +
             std::to_string(travel) + " m");
}

namespace detail {

    inline Vec2 parse_point(const nlohmann::json& j, const char* key)
    {
        if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
            throw ConfigError(std::string("invalid scenario: ") + key + " must be a [x, y] pair");
        return {j[0].get<double>(), j[1].get<double>()};
    }

    inline double parse_number(const nlohmann::json& j, const std::string& key)
    {
        if (j.is_number()) return j.get<double>();
        if (j.is_string()) {
            const auto s = j.get<std::string>();
            if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        }
        throw ConfigError("invalid scenario: " + key + " must be a number");
    }

} // namespace detail

/// Parses a JSON scenario; missing fields take the default values.
inline ScenarioConfig load_scenario(std::string_view text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    if (j.is_null()) j = nlohmann::json::object();
    if (!j.is_object()) throw ConfigError("config parse failure: top level must be an object");

    ScenarioConfig c;
    static const char* known[] = {"users", "eve", "altitude_m", "mission_time_s", "slot_count", "slot_len_s",
                                  "v_max_mps", "p_max_w", "p_max_dbm", "gamma_th", "gamma_th_db", "noise_power_w",
                                  "noise_power_dbm", "beta0", "beta0_db", "rician_k", "rician_k_db", "rcs_m2",
                                  "si_power_w", "si_rel_db", "mx", "my", "q0", "qf", "epsilon", "rng_seed",
                                  "max_outer_iters", "max_inner_iters", "solver_tol", "paper_literal_velocity",
                                  "paper_literal_sensing_gain", "evaluate_with_nlos"};
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("config parse failure: unknown key '" + key + "'");
    }

    auto num = [&](const char* key, double& out) {
        if (j.contains(key)) out = detail::parse_number(j[key], key);
    };
    auto integer = [&](const char* key, auto& out) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer()) throw ConfigError(std::string("invalid scenario: ") + key + " must be an integer");
        out = j[key].get<std::remove_reference_t<decltype(out)>>();
    };
    auto flag = [&](const char* key, bool& out) {
        if (!j.contains(key)) return;
        if (!j[key].is_boolean()) throw ConfigError(std::string("invalid scenario: ") + key + " must be a boolean");
        out = j[key].get<bool>();
    };
    auto either = [&](const char* lin, const char* log, double& out, double (*conv)(double)) {
        if (j.contains(lin) && j.contains(log))
            throw ConfigError(std::string("invalid scenario: give only one of ") + lin + " / " + log);
        if (j.contains(lin)) out = detail::parse_number(j[lin], lin);
        if (j.contains(log)) out = conv(detail::parse_number(j[log], log));
    };

    if (j.contains("users")) {
        if (!j["users"].is_array()) throw ConfigError("invalid scenario: users must be an array of [x, y]");
        c.users.clear();
        for (const auto& u : j["users"]) c.users.push_back(detail::parse_point(u, "users[]"));
    }
    if (j.contains("eve")) c.eve = detail::parse_point(j["eve"], "eve");
    if (j.contains("q0")) c.q0 = detail::parse_point(j["q0"], "q0");
    if (j.contains("qf")) c.qf = detail::parse_point(j["qf"], "qf");
    num("altitude_m", c.altitude);
    num("v_max_mps", c.v_max);
    either("p_max_w", "p_max_dbm", c.p_max, dbm_to_watts);
    either("gamma_th", "gamma_th_db", c.gamma_th, db_to_linear);
    either("noise_power_w", "noise_power_dbm", c.noise_power, dbm_to_watts);
    either("beta0", "beta0_db", c.beta0, db_to_linear);
    either("rician_k", "rician_k_db", c.rician_k, db_to_linear);
    num("rcs_m2", c.rcs);
    if (j.contains("si_power_w") && j.contains("si_rel_db"))
        throw ConfigError("invalid scenario: give only one of si_power_w / si_rel_db");
    if (j.contains("si_power_w"))
        c.si_power = detail::parse_number(j["si_power_w"], "si_power_w");
    else
        c.si_power = c.p_max * db_to_linear(j.contains("si_rel_db") ? detail::parse_number(j["si_rel_db"], "si_rel_db") : -70.0);
    integer("mx", c.mx);
    integer("my", c.my);
    num("epsilon", c.epsilon);
    integer("rng_seed", c.rng_seed);
    integer("max_outer_iters", c.max_outer_iters);
    integer("max_inner_iters", c.max_inner_iters);
    num("solver_tol", c.solver_tol);
    flag("paper_literal_velocity", c.paper_literal_velocity);
    flag("paper_literal_sensing_gain", c.paper_literal_sensing_gain);
    integer("evaluate_with_nlos", c.evaluate_with_nlos);

    // Time grid: any two of (mission time, slot count, slot length).
    const bool has_t = j.contains("mission_time_s"), has_n = j.contains("slot_count"), has_d = j.contains("slot_len_s");
    num("mission_time_s", c.mission_time);
    num("slot_len_s", c.slot_len);
    integer("slot_count", c.slot_count);
    if (has_t && has_n && !has_d) {
        if (c.slot_count >= 1) c.slot_len = c.mission_time / c.slot_count;
    } else if (has_n && has_d && !has_t) {
        c.mission_time = c.slot_count * c.slot_len;
    } else if (!has_n && c.slot_len > 0.0) {
        c.slot_count = static_cast<int>(std::llround(c.mission_time / c.slot_len));
    }
    validate(c);
    return c;
}

inline ScenarioConfig load_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

inline nlohmann::json to_json(const ScenarioConfig& c)
{
    auto pt = [](const Vec2& p) { return nlohmann::json::array({p.x(), p.y()}); };
    nlohmann::json users = nlohmann::json::array();
    for (const auto& u : c.users) users.push_back(pt(u));
    nlohmann::json j;
    j["users"] = users;
    j["eve"] = pt(c.eve);
    j["altitude_m"] = c.altitude;
    j["mission_time_s"] = c.mission_time;
    j["slot_count"] = c.slot_count;
    j["slot_len_s"] = c.slot_len;
    j["v_max_mps"] = c.v_max;
    j["p_max_w"] = c.p_max;
    j["gamma_th"] = c.gamma_th;
    j["noise_power_w"] = c.noise_power;
    j["beta0"] = c.beta0;
    if (std::isinf(c.rician_k))
        j["rician_k"] = "inf";
    else
        j["rician_k"] = c.rician_k;
    j["rcs_m2"] = c.rcs;
    j["si_power_w"] = c.si_power;
    j["mx"] = c.mx;
    j["my"] = c.my;
    j["q0"] = pt(c.q0);
    j["qf"] = pt(c.qf);
    if (std::isinf(c.epsilon))
        j["epsilon"] = "inf";
    else
        j["epsilon"] = c.epsilon;
    j["rng_seed"] = c.rng_seed;
    j["max_outer_iters"] = c.max_outer_iters;
    j["max_inner_iters"] = c.max_inner_iters;
    j["solver_tol"] = c.solver_tol;
    j["paper_literal_velocity"] = c.paper_literal_velocity;
    j["paper_literal_sensing_gain"] = c.paper_literal_sensing_gain;
    j["evaluate_with_nlos"] = c.evaluate_with_nlos;
    return j;
}

/// Canonical text form (sorted keys, shortest round-trip doubles).
inline std::string emit_scenario(const ScenarioConfig& c) { return to_json(c).dump(2); }

/// Same scenario with a new mission time at the current slot length.
inline ScenarioConfig with_mission_time(ScenarioConfig c, double mission_time)
{
    c.mission_time = mission_time;
    c.slot_count = std::max(1, static_cast<int>(std::llround(mission_time / c.slot_len)));
    c.slot_len = mission_time / c.slot_count;
    validate(c);
    return c;
}

/// UAV horizontal positions, one per slot.
struct Trajectory {
    std::vector<Vec2> points;

    [[nodiscard]] int size() const { return static_cast<int>(points.size()); }
    const Vec2& operator[](int n) const { return points[n]; }
    Vec2& operator[](int n) { return points[n]; }
};

inline Trajectory straight_line_trajectory(const ScenarioConfig& c)
{
    Trajectory t;
    t.points.resize(c.slot_count);
    const int n = c.slot_count;
    for (int i = 0; i < n; ++i) {
        const double s = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        t.points[i] = c.q0 + s * (c.qf - c.q0);
    }
    if (n >= 1) {
        t.points.front() = c.q0;
        t.points.back() = c.qf;
    }
    return t;
}

/// Empty string when the trajectory satisfies endpoint and speed invariants.
inline std::string check_trajectory(const ScenarioConfig& c, const Trajectory& t, double tol = 1e-9)
{
    if (t.size() != c.slot_count) return "trajectory length differs from slot_count";
    if (t.size() == 0) return "empty trajectory";
    if ((t.points.front() - c.q0).norm() > tol) return "first point differs from q0";
    if ((t.points.back() - c.qf).norm() > tol) return "last point differs from qf";
    const double lim = c.step_limit();
    for (int n = 1; n < t.size(); ++n)
        if ((t[n] - t[n - 1]).norm() > lim + tol)
            return "speed limit violated between slots " + std::to_string(n - 1) + " and " + std::to_string(n);
    return {};
}

inline double min_distance_to(const Trajectory& t, const Vec2& p)
{
    double d = std::numeric_limits<double>::infinity();
    for (const auto& q : t.points) d = std::min(d, (q - p).norm());
    return d;
}

} // namespace uavisac
