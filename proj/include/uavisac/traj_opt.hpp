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

// One successive-convex-approximation step of the UAV trajectory with the
// transmit beams and receive filters held fixed.
//
// Per slot and user the rate term is written with slacks
//     alpha_k >= H^2 + ||q - q_k||^2,   gamma <= H^2 + ||q - q_E||^2,
// the user part -log2(C_k - c_k + C_beta alpha_k) is replaced by its tangent
// at the previous trajectory, and the gamma bound by its first-order
// expansion. The echo-SINR constraint becomes a disk around the eavesdropper
// because only the sensing gain depends on the position once angles are frozen.

#pragma once

#include "uavisac/channel.hpp"
#include "uavisac/conic.hpp"
#include "uavisac/metrics.hpp"
#include "uavisac/scenario.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace uavisac {

struct SlotStepCoefficients {
    std::vector<double> c;     // |chi_k^H f_k|^2
    std::vector<double> c_eve; // |chi_E^H f_k|^2
    std::vector<double> C;     // sum_i |chi_k^H f_i|^2 + |chi_k^H f_E|^2
    double C_eve = 0.0;        // sum_i |chi_E^H f_i|^2 + |chi_E^H f_E|^2
    double echo_gain = 0.0;    // |w^H chi_E|^2 C_eve
    double echo_den = 0.0;     // sum |w^H H_SI f|^2 + noise
    double disk_bound = std::numeric_limits<double>::infinity(); // upper bound on zeta's distance term
};

struct Slacks {
    std::vector<std::vector<double>> alpha; // [slot][user]
    std::vector<double> gamma;              // [slot]
};

struct TrajectoryStepCoefficients {
    double c_beta = 0.0; // noise / (M beta0)
    std::vector<SlotStepCoefficients> slots;
    Trajectory anchor;   // linearization trajectory
    Slacks anchor_slacks; // tight at the anchor
};

/// Slacks that are tight at trajectory t.
inline Slacks tight_slacks(const ScenarioConfig& c, const Trajectory& t)
{
    Slacks s;
    const double h2 = c.altitude * c.altitude;
    for (const auto& q : t.points) {
        std::vector<double> a;
        for (const auto& u : c.users) a.push_back(h2 + (q - u).squaredNorm());
        s.alpha.push_back(std::move(a));
        s.gamma.push_back(h2 + (q - c.eve).squaredNorm());
    }
    return s;
}

/// First-order lower bound of H^2 + ||q - q_E||^2 around the anchor.
inline double gamma_taylor_bound(const ScenarioConfig& c, const Vec2& q, const Vec2& anchor)
{
    const Vec2 d = anchor - c.eve;
    return c.altitude * c.altitude + 2.0 * d.dot(q - anchor) + d.squaredNorm();
}

inline TrajectoryStepCoefficients compute_step_coefficients(const ScenarioConfig& cfg, const ChannelState& ch,
                                                            const BeamformerSet& beams, const Trajectory& anchor)
{
    TrajectoryStepCoefficients out;
    out.c_beta = cfg.noise_power / (cfg.num_antennas() * cfg.beta0);
    out.anchor = anchor;
    out.anchor_slacks = tight_slacks(cfg, anchor);
    const int k_users = cfg.num_users();
    const double m = cfg.num_antennas();
    for (std::size_t n = 0; n < ch.slots.size(); ++n) {
        const SlotChannel& s = ch.slots[n];
        const SlotBeams& b = beams.slots[n];
        SlotStepCoefficients sc;
        const CVec& chi_e = s.chi_eve();
        auto gain = [](const CVec& chi, const CVec& f) { return std::norm(chi.dot(f)); };
        sc.C_eve = gain(chi_e, b.jam);
        for (int i = 0; i < k_users; ++i) sc.C_eve += gain(chi_e, b.users[i]);
        for (int k = 0; k < k_users; ++k) {
            const CVec& chi = s.chi[k];
            double total = gain(chi, b.jam);
            for (int i = 0; i < k_users; ++i) total += gain(chi, b.users[i]);
            sc.c.push_back(gain(chi, b.users[k]));
            sc.c_eve.push_back(gain(chi_e, b.users[k]));
            sc.C.push_back(total);
        }
        const CVec& w = b.rx;
        sc.echo_gain = std::norm(w.dot(chi_e)) * sc.C_eve;
        const CVec si_w = s.h_si.adjoint() * w;
        sc.echo_den = cfg.noise_power + std::norm(si_w.dot(b.jam));
        for (const auto& f : b.users) sc.echo_den += std::norm(si_w.dot(f));
        if (cfg.gamma_th > 0.0)
            sc.disk_bound = std::sqrt(m * m * cfg.beta0 * cfg.rcs * sc.echo_gain / (cfg.gamma_th * sc.echo_den));
        out.slots.push_back(std::move(sc));
    }
    return out;
}

/// Slack-form objective (exact in the slacks), bits.
inline double slack_objective(const TrajectoryStepCoefficients& co, const Slacks& s)
{
    double v = 0.0;
    for (std::size_t n = 0; n < co.slots.size(); ++n) {
        const auto& sc = co.slots[n];
        for (std::size_t k = 0; k < sc.c.size(); ++k) {
            v += std::log2(1.0 + sc.c[k] / (sc.C[k] - sc.c[k] + co.c_beta * s.alpha[n][k]));
            v -= std::log2(1.0 + sc.c_eve[k] / (sc.C_eve - sc.c_eve[k] + co.c_beta * s.gamma[n]));
        }
    }
    return v;
}

/// Linearized objective: user interference log replaced by its tangent at the anchor slacks.
inline double surrogate_objective(const TrajectoryStepCoefficients& co, const Slacks& s)
{
    double v = 0.0;
    for (std::size_t n = 0; n < co.slots.size(); ++n) {
        const auto& sc = co.slots[n];
        for (std::size_t k = 0; k < sc.c.size(); ++k) {
            const double at = co.anchor_slacks.alpha[n][k];
            const double den = sc.C[k] - sc.c[k] + co.c_beta * at;
            v += std::log2(sc.C[k] + co.c_beta * s.alpha[n][k]);
            v -= co.c_beta * (s.alpha[n][k] - at) / (std::numbers::ln2 * den);
            v -= std::log2(den);
            v -= std::log2(1.0 + sc.c_eve[k] / (sc.C_eve - sc.c_eve[k] + co.c_beta * s.gamma[n]));
        }
    }
    return v;
}

struct TrajectoryStepResult {
    conic::Status status = conic::Status::numerical_failure;
    Trajectory trajectory;
    Slacks slacks;
    double objective = 0.0;           // surrogate at the returned point
    double objective_at_anchor = 0.0; // surrogate (= slack objective) at the anchor
    int violating_slot = -1;
    std::string message;
    int newton_iterations = 0;
    bool usable = false; // optimal, or stopped early at a strictly feasible point
};

/// Builds and solves the convex trajectory program around coeffs.anchor.
inline TrajectoryStepResult solve_trajectory_step(const ScenarioConfig& cfg, const TrajectoryStepCoefficients& co,
                                                  const conic::Options& opt = {})
{
    using conic::LinExpr;
    TrajectoryStepResult res;
    const Trajectory& prev = co.anchor;
    const int n_slots = prev.size();
    const int k_users = cfg.num_users();
    const double h2 = cfg.altitude * cfg.altitude;
    const double inv_ln2 = 1.0 / std::numbers::ln2;
    res.objective_at_anchor = surrogate_objective(co, co.anchor_slacks);

    if (n_slots <= 2) {
        if (n_slots == 2 && (prev[1] - prev[0]).norm() > cfg.step_limit() + 1e-9) {
            res.status = conic::Status::infeasible;
            res.violating_slot = 1;
            res.message = "endpoints violate the speed limit";
            return res;
        }
        res.status = conic::Status::optimal;
        res.usable = true;
        res.trajectory = prev;
        res.slacks = co.anchor_slacks;
        res.objective = res.objective_at_anchor;
        return res;
    }

    const int per_slot = 3 + k_users;
    auto xi = [&](int n) { return (n - 1) * per_slot; };
    conic::Problem p;
    p.add_variables((n_slots - 2) * per_slot);
    Eigen::VectorXd start((n_slots - 2) * per_slot);

    // coordinate expression of q[n]; endpoints are constants
    auto coord = [&](int n, int axis) {
        if (n == 0 || n == n_slots - 1) return LinExpr(prev[n][axis]);
        return LinExpr().add(xi(n) + axis, 1.0);
    };

    for (int n = 1; n < n_slots - 1; ++n) {
        const auto& sc = co.slots[n];
        const int base = xi(n);
        const int gvar = base + 2 + k_users;
        start[base] = prev[n].x();
        start[base + 1] = prev[n].y();
        for (int k = 0; k < k_users; ++k) {
            const int avar = base + 2 + k;
            const double at = co.anchor_slacks.alpha[n][k];
            const double den = sc.C[k] - sc.c[k] + co.c_beta * at;
            // log2(C_k + C_beta alpha) - C_beta (alpha - at) / (ln2 den) - log2(den)
            p.add_log(inv_ln2, LinExpr(sc.C[k]).add(avar, co.c_beta), {n, "user_rate"});
            p.add_objective_linear(avar, -co.c_beta * inv_ln2 / den);
            p.add_objective_constant(co.c_beta * at * inv_ln2 / den - std::log2(den));
            // -log2(1 + cE / (CE - cE + C_beta gamma)) = log2(CE - cE + Cb g) - log2(CE + Cb g)
            if (sc.c_eve[k] > 0.0) {
                p.add_log(inv_ln2, LinExpr(sc.C_eve - sc.c_eve[k]).add(gvar, co.c_beta), {n, "eve_rate"});
                p.add_log(-inv_ln2, LinExpr(sc.C_eve).add(gvar, co.c_beta), {n, "eve_rate"});
            }
            // alpha >= H^2 + ||q - q_k||^2
            LinExpr dx = coord(n, 0);
            dx.constant -= cfg.users[k].x();
            LinExpr dy = coord(n, 1);
            dy.constant -= cfg.users[k].y();
            p.add_quad(LinExpr(-h2).add(avar, 1.0), {dx, dy}, {n, "alpha_" + std::to_string(k)});
            start[avar] = co.anchor_slacks.alpha[n][k] + std::max(1.0, 1e-3 * co.anchor_slacks.alpha[n][k]);
        }
        // gamma <= H^2 + 2 (q~ - q_E)'(q - q~) + ||q~ - q_E||^2
        const Vec2 d = prev[n] - cfg.eve;
        LinExpr g(h2 + d.squaredNorm() - 2.0 * d.dot(prev[n]));
        g.add(base, 2.0 * d.x()).add(base + 1, 2.0 * d.y()).add(gvar, -1.0);
        p.add_nonneg(std::move(g), {n, "gamma_taylor"});
        start[gvar] = (h2 + d.squaredNorm()) * (1.0 - 1e-3);

        if (std::isfinite(sc.disk_bound)) {
            const double r2 = cfg.paper_literal_sensing_gain ? sc.disk_bound : sc.disk_bound - h2;
            if (!(r2 > 0.0)) {
                res.status = conic::Status::infeasible;
                res.violating_slot = n;
                res.message = "sensing disk is empty at slot " + std::to_string(n);
                return res;
            }
            LinExpr ex = coord(n, 0);
            ex.constant -= cfg.eve.x();
            LinExpr ey = coord(n, 1);
            ey.constant -= cfg.eve.y();
            p.add_quad(LinExpr(r2), {ex, ey}, {n, "sensing_disk"});
        }
    }
    const double lim = cfg.step_limit();
    for (int n = 1; n < n_slots; ++n) {
        LinExpr ux = coord(n, 0), uy = coord(n, 1);
        const LinExpr px = coord(n - 1, 0), py = coord(n - 1, 1);
        for (std::size_t i = 0; i < px.idx.size(); ++i) ux.add(px.idx[i], -px.coef[i]);
        for (std::size_t i = 0; i < py.idx.size(); ++i) uy.add(py.idx[i], -py.coef[i]);
        ux.constant -= px.constant;
        uy.constant -= py.constant;
        p.add_quad(LinExpr(lim * lim), {ux, uy}, {n, "velocity"});
    }

    const conic::Result r = conic::solve(p, opt, &start);
    res.newton_iterations = r.newton_iterations;
    res.status = r.status;
    res.usable = r.interior;
    if (!r.interior) {
        if (r.worst_constraint) {
            res.violating_slot = r.worst_constraint->slot;
            res.message = r.worst_constraint->label;
        }
        return res;
    }
    res.trajectory = prev;
    res.slacks = co.anchor_slacks;
    for (int n = 1; n < n_slots - 1; ++n) {
        const int base = xi(n);
        res.trajectory[n] = {r.x[base], r.x[base + 1]};
        for (int k = 0; k < k_users; ++k) res.slacks.alpha[n][k] = r.x[base + 2 + k];
        res.slacks.gamma[n] = r.x[base + 2 + k_users];
    }
    res.objective = surrogate_objective(co, res.slacks);
    return res;
}

} // namespace uavisac
