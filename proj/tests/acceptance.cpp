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

// Acceptance report: one PASS/FAIL line per criterion. Exit status is 0 unless
// the run itself breaks; pass --strict to turn any FAIL into a nonzero status.
// --only N,M restricts the report to the listed criteria.

#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

using namespace uavisac;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string num(double v)
{
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

/// Proposed-scheme desk run with every reported iterate checked for feasibility.
struct CheckedRun {
    RunResult result;
    std::vector<std::string> violations;
    double worst_power = 0.0;   // max P/P_max - 1
    double worst_sensing = 0.0; // max (th - G_s)/th
    double worst_filter = 0.0;
    double worst_speed = 0.0;
};

CheckedRun checked_run(const ScenarioConfig& cfg, Scheme scheme = Scheme::proposed)
{
    CheckedRun c;
    c.result = run(cfg, scheme, [&](const IterationRecord& rec, const Trajectory& t, const ChannelState& ch,
                                    const BeamformerSet& b) {
        if (auto e = check_trajectory(cfg, t, 1e-9); !e.empty())
            c.violations.push_back("iteration " + std::to_string(rec.iteration) + ": " + e);
        for (int n = 1; n < t.size(); ++n) c.worst_speed = std::max(c.worst_speed, (t[n] - t[n - 1]).norm() - cfg.step_limit());
        for (int n = 0; n < t.size(); ++n) {
            const SlotBeams& s = b.slots[n];
            c.worst_power = std::max(c.worst_power, s.power() / cfg.p_max - 1.0);
            c.worst_filter = std::max(c.worst_filter, std::abs(s.rx.norm() - 1.0));
            if (cfg.gamma_th > 0.0)
                c.worst_sensing = std::max(c.worst_sensing, (cfg.gamma_th - sensing_sinr(ch.slots[n], s, cfg.noise_power)) / cfg.gamma_th);
        }
    });
    return c;
}

const CheckedRun& desk()
{
    static const CheckedRun r = checked_run(testing::desk_config());
    return r;
}

Verdict criterion1()
{
    const auto& log = desk().result.log;
    if (log.failed) return {false, log.failure};
    double prev = log.initial_sum_secrecy, worst_drop = 0.0;
    for (const auto& it : log.iterations) {
        worst_drop = std::max(worst_drop, prev - it.sum_secrecy);
        prev = it.sum_secrecy;
    }
    const bool ok = worst_drop <= 1e-6 && log.converged && log.outer_iterations() <= 15;
    return {ok, std::to_string(log.outer_iterations()) + " outer iterations, converged=" + (log.converged ? "yes" : "no") +
                    ", R " + num(log.initial_sum_secrecy) + " -> " + num(log.final_sum_secrecy()) +
                    ", largest drop " + num(worst_drop)};
}

Verdict criterion2()
{
    std::mt19937_64 rng(2024);
    double worst_rel = 0.0;
    int beaten = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 2 + trial % 8;
        const int k = 1 + trial % 4;
        const SlotChannel ch = testing::random_channel(m, k, rng, 0.5);
        const SlotBeams b = testing::random_beams(m, k, rng);
        const double noise = 0.05;
        const CVec w = optimal_rx_filter(ch, b, noise);
        const double best = sensing_sinr(ch, b, w, noise);
        for (int s = 0; s < 1000; ++s)
            if (sensing_sinr(ch, b, testing::random_unit(m, rng), noise) > best * (1 + 1e-12)) ++beaten;
        double g = std::norm(ch.chi_eve().dot(b.jam));
        for (const auto& f : b.users) g += std::norm(ch.chi_eve().dot(f));
        const CMat a = interference_covariance(ch, b, noise);
        const CMat num_m = ch.zeta_eve * ch.zeta_eve * g * ch.chi_eve() * ch.chi_eve().adjoint();
        const double oracle = Eigen::GeneralizedSelfAdjointEigenSolver<CMat>(num_m, a).eigenvalues().maxCoeff();
        worst_rel = std::max(worst_rel, std::abs(best - oracle) / oracle);
    }
    return {beaten == 0 && worst_rel <= 1e-8,
            "100 instances x 1000 random filters, " + std::to_string(beaten) + " beat the optimum; worst oracle gap " +
                num(worst_rel)};
}

Verdict criterion3()
{
    std::mt19937_64 rng(3031);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    auto cov = [&](int m, int k, double p) {
        SlotCovariance f;
        for (int i = 0; i < k; ++i) f.users.push_back(testing::random_psd(m, rng, p * u(rng)));
        f.jam = testing::random_psd(m, rng, p * u(rng));
        return f;
    };
    double anchor_gap = 0.0, bound_excess = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 2 + trial % 4, k = 1 + trial % 3;
        const SlotChannel ch = testing::random_channel(m, k, rng);
        const SlotCovariance anchor = cov(m, k, 1.0), f = cov(m, k, 2.0);
        for (int i = 0; i < k; ++i) {
            anchor_gap = std::max(anchor_gap, std::abs(taylor_secrecy_surrogate(anchor, anchor, ch, i, 0.1) -
                                                       secrecy_rate_cov(anchor, ch, i, 0.1)));
            bound_excess = std::max(bound_excess,
                                    taylor_secrecy_surrogate(f, anchor, ch, i, 0.1) - secrecy_rate_cov(f, ch, i, 0.1));
        }
    }

    // trajectory surrogate against the slack objective on the desk initialization
    const ScenarioConfig cfg = testing::desk_config();
    const Trajectory t = straight_line_trajectory(cfg);
    const ChannelState ch = compute_channels(cfg, t);
    BeamformerSet bs;
    for (const auto& s : ch.slots) {
        SlotBeams b = mrt_beams(cfg, s, 0.99);
        b.rx = rx_filter_or_fallback(s, b, cfg.noise_power);
        bs.slots.push_back(b);
    }
    const auto co = compute_step_coefficients(cfg, ch, bs, t);
    const double traj_anchor_gap = std::abs(surrogate_objective(co, co.anchor_slacks) - slack_objective(co, co.anchor_slacks));
    double traj_excess = -1e300;
    for (int trial = 0; trial < 1000; ++trial) {
        Slacks s = co.anchor_slacks;
        for (auto& a : s.alpha)
            for (auto& v : a) v *= 0.2 + 3.0 * u(rng);
        for (auto& g : s.gamma) g *= 0.2 + 3.0 * u(rng);
        traj_excess = std::max(traj_excess, surrogate_objective(co, s) - slack_objective(co, s));
    }
    std::uniform_real_distribution<double> pos(-100.0, 100.0);
    int restriction_broken = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec2 q(pos(rng), pos(rng)), a(pos(rng), pos(rng));
        const double truth = cfg.altitude * cfg.altitude + (q - cfg.eve).squaredNorm();
        if (gamma_taylor_bound(cfg, q, a) > truth * (1 + 1e-12)) ++restriction_broken;
    }
    const bool ok = anchor_gap <= 1e-8 && bound_excess <= 1e-10 && traj_anchor_gap <= 1e-8 && traj_excess <= 1e-10 &&
                    restriction_broken == 0;
    return {ok, "covariance: anchor gap " + num(anchor_gap) + ", max excess " + num(bound_excess) +
                    "; trajectory: anchor gap " + num(traj_anchor_gap) + ", max excess " + num(traj_excess) +
                    ", restriction failures " + std::to_string(restriction_broken)};
}

Verdict criterion4()
{
    const auto& d = desk();
    const bool ok = d.violations.empty() && d.worst_power <= 1e-9 && d.worst_filter <= 1e-12 && d.worst_sensing <= 1e-6 &&
                    d.worst_speed <= 1e-9 && !d.result.log.iterations.empty();
    std::string detail = std::to_string(d.result.log.outer_iterations()) + " iterates; worst power excess " +
                         num(d.worst_power) + ", filter norm error " + num(d.worst_filter) + ", sensing shortfall " +
                         num(d.worst_sensing) + ", speed excess " + num(d.worst_speed);
    if (!d.violations.empty()) detail += "; " + d.violations.front();
    return {ok, detail};
}

/// Section IV geometry (4 users, 3x3 array) with 0.2 s slots.
ScenarioConfig geometry_config(double mission_time)
{
    ScenarioConfig c;
    c.slot_len = 0.2;
    c.mission_time = mission_time;
    c.slot_count = static_cast<int>(std::llround(mission_time / c.slot_len));
    c.max_outer_iters = 15;
    validate(c);
    return c;
}

Verdict criterion5()
{
    const ScenarioConfig c4 = geometry_config(4.0);
    const double p4 = run(c4, Scheme::proposed).log.final_sum_secrecy();
    const double nt4 = run(c4, Scheme::no_trajectory).log.final_sum_secrecy();
    const double nb4 = run(c4, Scheme::no_txbf).log.final_sum_secrecy();
    const ScenarioConfig c6 = geometry_config(6.0);
    const double nt6 = run(c6, Scheme::no_trajectory).log.final_sum_secrecy();
    const double nb6 = run(c6, Scheme::no_txbf).log.final_sum_secrecy();
    const bool best = p4 >= nt4 && p4 >= nb4;
    const bool order = nb4 >= nt4 && nb6 >= nt6;
    return {best && order, "T=4: proposed " + num(p4) + ", no-traj " + num(nt4) + ", no-txbf " + num(nb4) +
                               "; T=6: no-traj " + num(nt6) + ", no-txbf " + num(nb6) + "; proposed best: " +
                               (best ? "yes" : "no") + ", no-txbf >= no-traj: " + (order ? "yes" : "no")};
}

/// Desk users with 0.1 s slots.
ScenarioConfig tradeoff_config(double mission_time, double gamma_db)
{
    ScenarioConfig c = testing::desk_config();
    c.slot_len = 0.1;
    c.mission_time = mission_time;
    c.slot_count = static_cast<int>(std::llround(mission_time / c.slot_len));
    c.gamma_th = db_to_linear(gamma_db);
    validate(c);
    return c;
}

Verdict criterion6()
{
    std::vector<double> dist;
    std::string detail = "min UAV-eve distance at 10 dB:";
    bool feasible = true;
    for (double t : {2.0, 4.0, 6.0}) {
        const RunResult r = run(tradeoff_config(t, 10.0));
        feasible = feasible && !r.log.failed;
        dist.push_back(min_distance_to(r.trajectory, r.log.failed ? Vec2(1e9, 1e9) : testing::desk_config().eve));
        detail += " T=" + num(t) + " " + num(dist.back());
    }
    const RunResult hi = run(tradeoff_config(4.0, 30.0));
    feasible = feasible && !hi.log.failed;
    const double d30 = min_distance_to(hi.trajectory, testing::desk_config().eve);
    detail += "; T=4 at 30 dB " + num(d30);
    if (hi.log.failed) detail += " (" + hi.log.failure + ")";
    const bool tradeoff = d30 <= dist[1] + 1e-9;
    const bool monotone = dist[0] <= dist[1] + 1e-9 && dist[1] <= dist[2] + 1e-9;
    return {feasible && tradeoff && monotone, detail};
}

Verdict criterion7()
{
    const auto& r = desk().result;
    std::vector<double> ratios;
    for (const auto& slot : r.eigen_ratio)
        for (std::size_t i = 0; i + 1 < slot.size(); ++i) ratios.push_back(slot[i]);
    if (ratios.empty()) return {false, "no solved covariances recorded"};
    std::sort(ratios.begin(), ratios.end());
    const double med = ratios.size() % 2 ? ratios[ratios.size() / 2]
                                         : 0.5 * (ratios[ratios.size() / 2 - 1] + ratios[ratios.size() / 2]);
    int flags = 0;
    for (const auto& it : r.log.iterations) flags += static_cast<int>(it.extraction_flags.size());
    // unflagged extractions are the only ones that enter the reported beams, and those are checked in
    // criterion 4; power is scaled inside the extraction itself
    const bool ok = med >= 0.95 && desk().worst_power <= 1e-9 && desk().worst_sensing <= 1e-6;
    return {ok, "median lambda_max/tr " + num(med) + " over " + std::to_string(ratios.size()) +
                    " user covariances; flagged extractions " + std::to_string(flags)};
}

Verdict criterion8()
{
    double worst_tx = 0.0;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const testing::MicroTx x = testing::micro_tx(seed, 2, 1, 0.0);
        const auto r = solve_txbf_step(x.anchor, x.w, x.ch, x.cfg);
        if (r.status != conic::Status::optimal) return {false, "covariance step did not solve"};
        const double best = testing::rank_one_search(x, seed);
        worst_tx = std::max(worst_tx, std::abs(r.surrogate - best) / std::abs(r.surrogate));
    }
    double worst_traj = 0.0;
    for (const Vec2& anchor : {Vec2(10.0, 0.0), Vec2(6.0, 0.0), Vec2(13.0, 0.0)}) {
        const auto m = testing::micro_trajectory(anchor);
        const auto r = solve_trajectory_step(m.cfg, m.co, solver_options(m.cfg));
        if (r.status != conic::Status::optimal) return {false, "trajectory step did not solve"};
        const double lim = m.cfg.step_limit();
        double best_x = 0.0, best = -1e300;
        for (double x = 20.0 - lim; x <= lim + 1e-12; x += 1e-3) {
            const double v = testing::micro_trajectory_value(m, {x, 0.0});
            if (v > best) {
                best = v;
                best_x = x;
            }
        }
        worst_traj = std::max(worst_traj, (r.trajectory[1] - Vec2(best_x, 0.0)).norm());
    }
    return {worst_tx <= 0.02 && worst_traj <= 0.1,
            "covariance vs 10^4 rank-one samples: worst gap " + num(100 * worst_tx) + " %; trajectory vs grid: worst " +
                num(worst_traj) + " m"};
}

Verdict criterion9()
{
    const ScenarioConfig c = testing::desk_config();
    std::ostringstream a, b;
    write_convergence_csv(a, desk().result);
    write_convergence_csv(b, run(c));
    return {a.str() == b.str(), "convergence.csv " + std::to_string(a.str().size()) + " bytes, identical: " +
                                    (a.str() == b.str() ? "yes" : "no")};
}

} // namespace

int main(int argc, char** argv)
{
    bool strict = false;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--strict")) {
            strict = true;
        } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
        } else {
            std::cerr << "usage: acceptance [--strict] [--only N,M,...]\n";
            return 1;
        }
    }
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"monotone BCD on the desk scenario", criterion1},
        {"receive-filter optimality", criterion2},
        {"surrogate soundness", criterion3},
        {"constraint satisfaction of every iterate", criterion4},
        {"scheme ordering on the 4-user geometry", criterion5},
        {"sensing/mobility trade-off", criterion6},
        {"relaxation tightness and extraction", criterion7},
        {"micro-scale oracle equivalence", criterion8},
        {"determinism of convergence.csv", criterion9},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << "): " << v.detail
                  << " [" << num(secs) << " s]" << std::endl;
    }
    std::cout << (criteria.size() - failed) << " passed, " << failed << " failed" << std::endl;
    return strict && failed ? 1 : 0;
}
