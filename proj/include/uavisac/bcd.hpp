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

// Block coordinate descent over trajectory, receive filters and transmit
// beams, plus the two reference schemes.
//
// Every block keeps the incumbent when its candidate does not improve the
// clipped sum secrecy rate or breaks the echo-SINR threshold, so the logged
// objective is non-decreasing and every logged iterate is feasible.

#pragma once

#include "uavisac/channel.hpp"
#include "uavisac/conic.hpp"
#include "uavisac/metrics.hpp"
#include "uavisac/rx_beamform.hpp"
#include "uavisac/scenario.hpp"
#include "uavisac/traj_opt.hpp"
#include "uavisac/tx_beamform.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uavisac {

enum class Scheme { proposed, no_trajectory, no_txbf };

inline const char* to_string(Scheme s)
{
    switch (s) {
    case Scheme::proposed: return "proposed";
    case Scheme::no_trajectory: return "no-traj";
    case Scheme::no_txbf: return "no-txbf";
    }
    return "unknown";
}

inline std::optional<Scheme> parse_scheme(std::string_view s)
{
    if (s == "proposed") return Scheme::proposed;
    if (s == "no-traj") return Scheme::no_trajectory;
    if (s == "no-txbf") return Scheme::no_txbf;
    return std::nullopt;
}

struct IterationRecord {
    int iteration = 0;
    double sum_secrecy = 0.0;
    std::vector<double> sensing_sinr; // per slot
    double min_sensing_sinr = 0.0;
    double min_eve_distance = 0.0;
    std::string trajectory_status = "skipped";
    double trajectory_step = 0.0;     // accepted fraction of the SCA step, 0 = kept incumbent
    int trajectory_newton = 0;
    int txbf_solved = 0;              // slots whose covariance program returned optimal
    int txbf_accepted = 0;            // slots whose extracted beams replaced the incumbent
    int txbf_failed = 0;
    int inner_passes = 0;             // largest number of SCA passes over the slots
    std::vector<int> extraction_flags; // slots where extraction could not meet the threshold
    double median_eigen_ratio = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;
};

struct IterateLog {
    double initial_sum_secrecy = 0.0;
    double initial_min_sensing_sinr = 0.0;
    std::vector<IterationRecord> iterations;
    bool converged = false;
    bool failed = false;
    std::string failure;
    int inner_iterations_total = 0;
    double wall_seconds = 0.0;

    [[nodiscard]] int outer_iterations() const { return static_cast<int>(iterations.size()); }
    [[nodiscard]] double final_sum_secrecy() const
    {
        return iterations.empty() ? initial_sum_secrecy : iterations.back().sum_secrecy;
    }
};

struct RunResult {
    Scheme scheme = Scheme::proposed;
    Trajectory trajectory;
    BeamformerSet beams;
    ChannelState channels; // LOS channels at the returned trajectory
    IterateLog log;
    std::vector<std::vector<double>> eigen_ratio; // last solved covariances, [slot][entity]
    double nlos_mean_sum_secrecy = std::numeric_limits<double>::quiet_NaN();
    double nlos_std_sum_secrecy = std::numeric_limits<double>::quiet_NaN();
};

/// Equal-power maximum-ratio beams towards every user and the eavesdropper.
inline SlotBeams mrt_beams(const ScenarioConfig& cfg, const SlotChannel& ch, double scale = 1.0)
{
    SlotBeams b;
    const int k = cfg.num_users();
    const double amp = scale * std::sqrt(cfg.p_max / (k + 1));
    for (int i = 0; i < k; ++i) b.users.push_back(amp * ch.chi[i] / ch.chi[i].norm());
    b.jam = amp * ch.chi_eve() / ch.chi_eve().norm();
    b.rx = ch.chi_eve() / ch.chi_eve().norm();
    return b;
}

namespace detail {

    inline bool sensing_ok(const ScenarioConfig& cfg, double value)
    {
        return cfg.gamma_th <= 0.0 || value >= cfg.gamma_th * (1.0 - 1e-9);
    }

    inline double median(std::vector<double> v)
    {
        if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
        std::sort(v.begin(), v.end());
        const std::size_t h = v.size() / 2;
        return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    }

    /// Shift power to the jamming beam until the echo SINR meets the threshold.
    inline bool raise_jamming(const ScenarioConfig& cfg, const SlotChannel& ch, SlotBeams& b)
    {
        const int k = cfg.num_users();
        const double total = b.power();
        const CVec jam_dir = ch.chi_eve() / ch.chi_eve().norm();
        constexpr int steps = 40;
        for (int s = 0; s <= steps; ++s) {
            const double frac = 1.0 / (k + 1) + (1.0 - 1.0 / (k + 1)) * s / steps;
            SlotBeams t = b;
            for (int i = 0; i < k; ++i) {
                const double nrm = b.users[i].norm();
                t.users[i] = nrm > 0.0 ? b.users[i] / nrm * std::sqrt((1.0 - frac) * total / k) : b.users[i];
            }
            t.jam = jam_dir * std::sqrt(frac * total);
            t.rx = rx_filter_or_fallback(ch, t, cfg.noise_power);
            if (sensing_ok(cfg, sensing_sinr(ch, t, cfg.noise_power))) {
                b = t;
                return true;
            }
        }
        return false;
    }

    /// Moves beams to a new channel so their inner products with every
    /// steering vector are preserved (exact when M >= K+1), keeping the part
    /// orthogonal to both direction sets and staying within the power budget.
    inline SlotBeams transport_beams(const SlotBeams& b, const SlotChannel& from, const SlotChannel& to, double p_max)
    {
        const int m = static_cast<int>(from.chi[0].size());
        const int e = static_cast<int>(from.chi.size());
        CMat x0(m, e), x1(m, e);
        for (int i = 0; i < e; ++i) {
            x0.col(i) = from.chi[i];
            x1.col(i) = to.chi[i];
        }
        const Eigen::CompleteOrthogonalDecomposition<CMat> c0(x0.adjoint());
        const Eigen::CompleteOrthogonalDecomposition<CMat> c1(x1.adjoint());
        auto move = [&](const CVec& f) -> CVec {
            const CVec ip = x0.adjoint() * f;
            const CVec rest = f - c0.solve(ip);
            return c1.solve(ip) + rest - c1.solve(x1.adjoint() * rest);
        };
        SlotBeams out = b;
        for (auto& f : out.users) f = move(f);
        out.jam = move(b.jam);
        const double pw = out.power();
        if (pw > p_max) {
            const double s = std::sqrt(p_max / pw) * (1.0 - 1e-15);
            for (auto& f : out.users) f *= s;
            out.jam *= s;
        }
        return out;
    }

} // namespace detail

inline conic::Options solver_options(const ScenarioConfig& cfg)
{
    conic::Options o;
    o.tol = cfg.solver_tol;
    return o;
}

/// Called after every outer iteration with the state that iteration reports.
using IterateObserver =
    std::function<void(const IterationRecord&, const Trajectory&, const ChannelState&, const BeamformerSet&)>;

/// Runs the optimizer for the given scheme.
inline RunResult run(const ScenarioConfig& cfg, Scheme scheme = Scheme::proposed, const IterateObserver& observe = {})
{
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();
    RunResult out;
    out.scheme = scheme;
    const double noise = cfg.noise_power;
    const int n_slots = cfg.slot_count;
    const auto h_si = self_interference_all(cfg);
    const conic::Options opt = solver_options(cfg);
    const bool optimize_traj = scheme != Scheme::no_trajectory;
    const bool optimize_beams = scheme != Scheme::no_txbf;

    Trajectory traj = straight_line_trajectory(cfg);
    ChannelState ch = compute_channels(cfg, traj, h_si);
    BeamformerSet beams;
    beams.slots.resize(n_slots);
    out.eigen_ratio.assign(n_slots, {});

    auto refresh_rx = [&](const ChannelState& c, BeamformerSet& b) {
        for (int n = 0; n < n_slots; ++n) b.slots[n].rx = rx_filter_or_fallback(c.slots[n], b.slots[n], noise);
    };
    auto fixed_beams = [&](const ChannelState& c, BeamformerSet& b) {
        for (int n = 0; n < n_slots; ++n) b.slots[n] = mrt_beams(cfg, c.slots[n], 1.0);
    };

    // Initialization: straight line, MRT beams (scaled in the optimized schemes), optimal filters.
    for (int n = 0; n < n_slots; ++n) beams.slots[n] = mrt_beams(cfg, ch.slots[n], optimize_beams ? 0.99 : 1.0);
    refresh_rx(ch, beams);
    for (int n = 0; n < n_slots; ++n) {
        if (detail::sensing_ok(cfg, sensing_sinr(ch.slots[n], beams.slots[n], noise))) continue;
        if (optimize_beams && detail::raise_jamming(cfg, ch.slots[n], beams.slots[n])) continue;
        out.log.failed = true;
        out.log.failure = "infeasible initialization: echo SINR threshold unattainable at slot " + std::to_string(n);
        break;
    }
    out.log.initial_sum_secrecy = sum_secrecy_rate(ch, beams, noise);
    out.log.initial_min_sensing_sinr = std::numeric_limits<double>::infinity();
    for (int n = 0; n < n_slots; ++n)
        out.log.initial_min_sensing_sinr =
            std::min(out.log.initial_min_sensing_sinr, sensing_sinr(ch.slots[n], beams.slots[n], noise));
    if (out.log.failed) {
        out.trajectory = traj;
        out.beams = beams;
        out.channels = ch;
        out.log.wall_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
        return out;
    }

    double r_prev = out.log.initial_sum_secrecy;
    for (int l = 1; l <= cfg.max_outer_iters; ++l) {
        const auto t_iter = clock::now();
        IterationRecord rec;
        rec.iteration = l;
        double r_cur = r_prev;

        // Trajectory block.
        if (optimize_traj) {
            const auto co = compute_step_coefficients(cfg, ch, beams, traj);
            const auto step = solve_trajectory_step(cfg, co, opt);
            rec.trajectory_status = conic::to_string(step.status);
            rec.trajectory_newton = step.newton_iterations;
            if (step.usable) {
                for (double frac = 1.0; frac > 1.0 / 128.0; frac *= 0.5) {
                    Trajectory cand = traj;
                    for (int n = 0; n < n_slots; ++n) cand[n] = traj[n] + frac * (step.trajectory[n] - traj[n]);
                    ChannelState cch = compute_channels(cfg, cand, h_si);
                    BeamformerSet cb = beams;
                    if (optimize_beams) {
                        for (int n = 0; n < n_slots; ++n)
                            cb.slots[n] = detail::transport_beams(beams.slots[n], ch.slots[n], cch.slots[n], cfg.p_max);
                    } else {
                        fixed_beams(cch, cb);
                    }
                    refresh_rx(cch, cb);
                    bool ok = true;
                    for (int n = 0; n < n_slots && ok; ++n)
                        ok = detail::sensing_ok(cfg, sensing_sinr(cch.slots[n], cb.slots[n], noise));
                    if (!ok) continue;
                    const double r = sum_secrecy_rate(cch, cb, noise);
                    if (r >= r_cur) {
                        traj = std::move(cand);
                        ch = std::move(cch);
                        beams = std::move(cb);
                        r_cur = r;
                        rec.trajectory_step = frac;
                        break;
                    }
                }
            }
        }

        // Receive filters (closed form; never lowers the echo SINR).
        refresh_rx(ch, beams);

        // Transmit beamforming block, slot by slot.
        if (optimize_beams) {
            std::vector<double> ratios;
            for (int n = 0; n < n_slots; ++n) {
                const SlotChannel& sc = ch.slots[n];
                SlotBeams& cur = beams.slots[n];
                SlotCovariance anchor = outer_products(cur);
                std::optional<TxStepResult> best;
                int passes = 0;
                double prev_val = std::numeric_limits<double>::quiet_NaN();
                for (int pass = 0; pass < cfg.max_inner_iters; ++pass) {
                    auto r = solve_txbf_step(anchor, cur.rx, sc, cfg, opt);
                    ++passes;
                    if (!r.usable) break;
                    const double val = r.surrogate;
                    const bool stop = r.status != conic::Status::optimal;
                    anchor = r.covariance;
                    best = std::move(r);
                    if (stop) break;
                    if (std::isfinite(prev_val) && std::abs(val - prev_val) <= cfg.epsilon * std::max(std::abs(val), 1e-12))
                        break;
                    prev_val = val;
                }
                rec.inner_passes = std::max(rec.inner_passes, passes);
                out.log.inner_iterations_total += passes;
                if (!best) {
                    ++rec.txbf_failed;
                    continue;
                }
                ++rec.txbf_solved;
                const auto ex = extract_rank1(best->covariance, cur.rx, sc, cfg);
                out.eigen_ratio[n] = ex.eigen_ratio;
                for (int k = 0; k < cfg.num_users(); ++k) ratios.push_back(ex.eigen_ratio[k]);
                if (ex.sensing_violated) {
                    rec.extraction_flags.push_back(n);
                    continue;
                }
                if (!detail::sensing_ok(cfg, ex.sensing) || ex.beams.power() > cfg.p_max * (1.0 + 1e-12)) continue;
                if (slot_secrecy_rate(sc, ex.beams, noise) >= slot_secrecy_rate(sc, cur, noise)) {
                    cur.users = ex.beams.users;
                    cur.jam = ex.beams.jam;
                    ++rec.txbf_accepted;
                }
            }
            rec.median_eigen_ratio = detail::median(ratios);
        }

        r_cur = sum_secrecy_rate(ch, beams, noise);
        rec.sum_secrecy = r_cur;
        rec.min_sensing_sinr = std::numeric_limits<double>::infinity();
        for (int n = 0; n < n_slots; ++n) {
            rec.sensing_sinr.push_back(sensing_sinr(ch.slots[n], beams.slots[n], noise));
            rec.min_sensing_sinr = std::min(rec.min_sensing_sinr, rec.sensing_sinr.back());
        }
        rec.min_eve_distance = min_distance_to(traj, cfg.eve);
        rec.wall_seconds = std::chrono::duration<double>(clock::now() - t_iter).count();
        if (observe) observe(rec, traj, ch, beams);
        out.log.iterations.push_back(std::move(rec));

        const double rel = std::abs(r_cur - r_prev) / std::max(r_cur, 1e-12);
        r_prev = r_cur;
        if (rel <= cfg.epsilon) {
            out.log.converged = true;
            break;
        }
    }

    out.trajectory = traj;
    out.beams = beams;
    out.channels = ch;
    if (cfg.evaluate_with_nlos > 0) {
        double s = 0.0, s2 = 0.0;
        for (int d = 0; d < cfg.evaluate_with_nlos; ++d) {
            const double v = sum_secrecy_rate(draw_nlos_channels(cfg, ch, d), beams, noise);
            s += v;
            s2 += v * v;
        }
        const double cnt = cfg.evaluate_with_nlos;
        out.nlos_mean_sum_secrecy = s / cnt;
        out.nlos_std_sum_secrecy = std::sqrt(std::max(0.0, s2 / cnt - (s / cnt) * (s / cnt)));
    }
    out.log.wall_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
    return out;
}

inline RunResult run_baseline_no_trajectory(const ScenarioConfig& cfg) { return run(cfg, Scheme::no_trajectory); }
inline RunResult run_baseline_no_txbf(const ScenarioConfig& cfg) { return run(cfg, Scheme::no_txbf); }

} // namespace uavisac
