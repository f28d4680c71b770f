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

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace uavisac;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("uavisac_test_" + name);
    fs::remove_all(p);
    return p;
}

ScenarioConfig quick_config()
{
    ScenarioConfig c = testing::desk_config();
    c.max_outer_iters = 2;
    return c;
}

} // namespace

TEST_CASE("run artifacts have stable headers and are byte-identical on rerun", "[experiments]")
{
    const ScenarioConfig c = quick_config();
    const fs::path a = scratch("a"), b = scratch("b");
    write_run_artifacts(a, c, run(c));
    write_run_artifacts(b, c, run(c));
    for (const char* f : {"convergence.csv", "trajectory.csv", "beams_summary.csv"}) {
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const auto conv = lines(slurp(a / "convergence.csv"));
    CHECK(conv.front() == "iteration,sum_secrecy_rate,min_sensing_sinr");
    CHECK(conv.size() == 1 + 1 + 2u);
    const auto traj = lines(slurp(a / "trajectory.csv"));
    CHECK(traj.front() == "n,x,y");
    CHECK(traj.size() == 21u);
    const auto beams = lines(slurp(a / "beams_summary.csv"));
    CHECK(beams.front() ==
          "slot,power_user_0,power_user_1,power_jam,total_power,eigen_ratio_user_0,eigen_ratio_user_1,eigen_ratio_jam,"
          "sensing_sinr,secrecy_rate");
    CHECK(beams.size() == 21u);

    const auto j = nlohmann::json::parse(slurp(a / "result.json"));
    CHECK(j["config_hash"] == config_hash(c));
    CHECK(j["rng_seed"] == c.rng_seed);
    CHECK(j["scheme"] == "proposed");
    CHECK(load_scenario(j["config"].dump()).slot_count == c.slot_count);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("infinite tolerance writes a single iteration row", "[experiments]")
{
    ScenarioConfig c = quick_config();
    c.epsilon = std::numeric_limits<double>::infinity();
    std::ostringstream os;
    write_convergence_csv(os, run(c));
    const auto l = lines(os.str());
    REQUIRE(l.size() == 3u); // header, initial point, one iteration
    CHECK(l[1].rfind("0,", 0) == 0);
    CHECK(l[2].rfind("1,", 0) == 0);
}

TEST_CASE("config hash depends on the content only", "[experiments]")
{
    const ScenarioConfig a = quick_config();
    ScenarioConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    b.rng_seed = 77;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 16u);
}

TEST_CASE("mission time sweep marks unreachable points", "[experiments]")
{
    ScenarioConfig c = quick_config();
    c.max_outer_iters = 1;
    const fs::path out = scratch("sweep_t");
    // 0.4 s is two slots of 0.2 s: 20 m of travel for a 50 m route
    const auto rows = sweep_mission_time(c, {0.4, 4.0}, {Scheme::proposed, Scheme::no_trajectory}, out);
    REQUIRE(rows.size() == 4u);
    CHECK(rows[0].status == "invalid_config");
    CHECK(rows[1].status == "invalid_config");
    CHECK(rows[2].status != "invalid_config");
    // single point reduces to a plain run
    CHECK(rows[2].sum_secrecy == run(c, Scheme::proposed).log.final_sum_secrecy());
    const auto l = lines(slurp(out / "secrecy_vs_T.csv"));
    REQUIRE(l.size() == 5u);
    CHECK(l[0] == "T,scheme,sum_secrecy_rate,status");
    CHECK(l[4].rfind("4,no-traj,", 0) == 0);
    CHECK(fs::exists(out / "T_4" / "proposed" / "convergence.csv"));
    fs::remove_all(out);
}

TEST_CASE("sensing threshold sweep keeps one schema", "[experiments]")
{
    ScenarioConfig c = quick_config();
    c.max_outer_iters = 1;
    const fs::path out = scratch("sweep_g");
    const auto rows = sweep_sensing_threshold(c, {0.0, 10.0}, out);
    REQUIRE(rows.size() == 2u);
    const auto l = lines(slurp(out / "trajectory_by_gamma.csv"));
    CHECK(l[0] == "gamma_th_db,n,x,y,min_eve_distance,status");
    CHECK(l.size() == 1 + 2 * 20u);
    for (std::size_t i = 1; i < l.size(); ++i) CHECK(std::count(l[i].begin(), l[i].end(), ',') == 5);
    fs::remove_all(out);
}

TEST_CASE("vanishing threshold matches the unconstrained run", "[experiments]")
{
    ScenarioConfig c = quick_config();
    c.max_outer_iters = 1;
    ScenarioConfig off = c;
    off.gamma_th = 0.0;
    const auto rows = sweep_sensing_threshold(c, {-300.0}, {});
    const Trajectory free = run(off).trajectory;
    REQUIRE(rows[0].trajectory.size() == free.size());
    for (int n = 0; n < free.size(); ++n) CHECK((rows[0].trajectory[n] - free[n]).norm() < 1e-3);
}
