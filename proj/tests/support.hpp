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

// Shared fixtures for the unit tests and the acceptance driver.

#pragma once

#include "uavisac/uavisac.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace uavisac::testing {

inline CVec random_cvec(int m, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> nd(0.0, scale);
    CVec v(m);
    for (int i = 0; i < m; ++i) v[i] = cd(nd(rng), nd(rng));
    return v;
}

inline CVec random_unit(int m, std::mt19937_64& rng)
{
    CVec v = random_cvec(m, rng);
    return v / v.norm();
}

/// Random PSD matrix of random rank with trace `tr`.
inline CMat random_psd(int m, std::mt19937_64& rng, double tr)
{
    std::uniform_int_distribution<int> rk(1, m);
    const int r = rk(rng);
    CMat g(m, r);
    for (int j = 0; j < r; ++j) g.col(j) = random_cvec(m, rng);
    CMat f = g * g.adjoint();
    return f * (tr / f.trace().real());
}

/// K = 2, 2x2 array, 20 slots over 4 s, 10 dB threshold.
inline ScenarioConfig desk_config()
{
    ScenarioConfig c;
    c.users = {{20.0, 60.0}, {30.0, 30.0}};
    c.mx = 2;
    c.my = 2;
    c.mission_time = 4.0;
    c.slot_count = 20;
    c.slot_len = 0.2;
    c.gamma_th = 10.0;
    c.max_outer_iters = 15;
    validate(c);
    return c;
}

/// One-slot channel at UAV position q with the configured SI draw.
inline SlotChannel channel_at(const ScenarioConfig& c, const Vec2& q, int slot = 0)
{
    return slot_channel(c, q, self_interference(c, slot));
}

/// Random channel with arbitrary directions and gains (not tied to geometry).
inline SlotChannel random_channel(int m, int k, std::mt19937_64& rng, double si_scale = 1e-3)
{
    SlotChannel s;
    std::uniform_real_distribution<double> ug(0.5, 2.0);
    for (int i = 0; i <= k; ++i) {
        s.chi.push_back(random_unit(m, rng));
        s.beta.push_back(ug(rng));
        s.dir.push_back({});
    }
    s.zeta_eve = ug(rng);
    s.h_si = CMat(m, m);
    for (int r = 0; r < m; ++r) s.h_si.row(r) = random_cvec(m, rng, si_scale).transpose();
    return s;
}

inline SlotBeams random_beams(int m, int k, std::mt19937_64& rng)
{
    SlotBeams b;
    for (int i = 0; i < k; ++i) b.users.push_back(random_cvec(m, rng));
    b.jam = random_cvec(m, rng);
    b.rx = random_unit(m, rng);
    return b;
}

/// Single-slot covariance instance with unit-scale gains and MRT anchor beams.
struct MicroTx {
    ScenarioConfig cfg;
    SlotChannel ch;
    SlotCovariance anchor;
    CVec w;
};

inline MicroTx micro_tx(std::uint64_t seed, int m, int k, double gamma_th)
{
    std::mt19937_64 rng(seed);
    MicroTx x;
    x.cfg.users.assign(k, Vec2(0.0, 0.0));
    x.cfg.p_max = 1.0;
    x.cfg.noise_power = 0.1;
    x.cfg.gamma_th = gamma_th;
    x.ch = random_channel(m, k, rng, 0.1);
    SlotBeams b;
    const double amp = 0.99 * std::sqrt(x.cfg.p_max / (k + 1));
    for (int i = 0; i < k; ++i) b.users.push_back(amp * x.ch.chi[i]);
    b.jam = amp * x.ch.chi_eve();
    x.w = rx_filter_or_fallback(x.ch, b, x.cfg.noise_power);
    x.anchor = outer_products(b);
    return x;
}

/// Best covariance surrogate over rank-one beams at full or partial power.
///
/// Global samples first, then perturbations of the incumbent with a shrinking
/// radius; the landscape has narrow ridges that plain sampling misses.
inline double rank_one_search(const MicroTx& x, std::uint64_t seed, int samples = 10000)
{
    const int m = int(x.ch.chi_eve().size());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto value = [&](double p, double split, const CVec& du, const CVec& dj) {
        SlotBeams b;
        b.users = {std::sqrt(p * split) * du};
        b.jam = std::sqrt(p * (1 - split)) * dj;
        return slot_surrogate(outer_products(b), x.anchor, x.ch, x.cfg.noise_power);
    };
    double bp = x.cfg.p_max, bs = 1.0;
    CVec bu = random_unit(m, rng), bj = random_unit(m, rng);
    double best = value(bp, bs, bu, bj);
    const int global = samples / 5;
    for (int s = 1; s < samples; ++s) {
        double p, split;
        CVec du, dj;
        if (s < global) {
            p = x.cfg.p_max * std::sqrt(u(rng));
            split = u(rng);
            du = random_unit(m, rng);
            dj = random_unit(m, rng);
        } else {
            const double r = 0.5 * std::pow(1e-4, double(s - global) / (samples - global));
            p = std::clamp(bp + r * x.cfg.p_max * (2 * u(rng) - 1), 0.0, x.cfg.p_max);
            split = std::clamp(bs + r * (2 * u(rng) - 1), 0.0, 1.0);
            du = (bu + r * random_cvec(m, rng)).normalized();
            dj = (bj + r * random_cvec(m, rng)).normalized();
        }
        const double v = value(p, split, du, dj);
        if (v > best) {
            best = v;
            bp = p;
            bs = split;
            bu = du;
            bj = dj;
        }
    }
    return best;
}

/// One free slot between fixed endpoints on the x axis, one user, hand-set coefficients.
struct MicroTrajectory {
    ScenarioConfig cfg;
    TrajectoryStepCoefficients co;
};

inline MicroTrajectory micro_trajectory(const Vec2& anchor_mid)
{
    MicroTrajectory m;
    ScenarioConfig& c = m.cfg;
    c.users = {{10.0, 0.0}};
    c.eve = {5.0, 0.0};
    c.q0 = {0.0, 0.0};
    c.qf = {20.0, 0.0};
    c.slot_count = 3;
    c.slot_len = 1.0;
    c.mission_time = 3.0;
    c.v_max = 18.0;
    c.gamma_th = 0.0;
    c.mx = c.my = 2;
    validate(c);
    Trajectory t;
    t.points = {c.q0, anchor_mid, c.qf};
    m.co.c_beta = c.noise_power / (c.num_antennas() * c.beta0);
    m.co.anchor = t;
    m.co.anchor_slacks = tight_slacks(c, t);
    // beam gains on the scale of the noise term so that position matters
    const double kappa = m.co.c_beta * c.altitude * c.altitude;
    for (int n = 0; n < 3; ++n) {
        SlotStepCoefficients s;
        s.c = {3.0 * kappa};
        s.C = {3.3 * kappa};
        s.c_eve = {1.5 * kappa};
        s.C_eve = 2.0 * kappa;
        m.co.slots.push_back(s);
    }
    return m;
}

/// Surrogate value with tight alpha and the largest admissible gamma at q.
inline double micro_trajectory_value(const MicroTrajectory& m, const Vec2& q)
{
    Slacks s = m.co.anchor_slacks;
    const double h2 = m.cfg.altitude * m.cfg.altitude;
    s.alpha[1][0] = h2 + (q - m.cfg.users[0]).squaredNorm();
    s.gamma[1] = gamma_taylor_bound(m.cfg, q, m.co.anchor[1]);
    return surrogate_objective(m.co, s);
}

} // namespace uavisac::testing
