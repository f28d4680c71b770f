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

// UPA steering vectors, Rician channels, path/sensing gains and the
// full-duplex self-interference matrix.

#pragma once

#include "uavisac/scenario.hpp"
#include "uavisac/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace uavisac {

/// Direction cosines and angles of departure from the UAV towards a ground node.
struct Direction {
    double u = 0.0;         // cos(azimuth) sin(elevation)
    double v = 0.0;         // sin(azimuth) sin(elevation)
    double elevation = 0.0; // measured from the array normal (nadir)
    double azimuth = 0.0;
    double distance = 0.0;  // 3D
};

inline Direction direction(const Vec2& q_uav, const Vec2& q_node, double altitude)
{
    const Vec2 d = q_node - q_uav;
    const double dist = std::sqrt(altitude * altitude + d.squaredNorm());
    if (!(dist > 0.0)) throw std::domain_error("steering vector undefined at zero 3D distance");
    Direction r;
    r.distance = dist;
    r.u = d.x() / dist;
    r.v = d.y() / dist;
    r.elevation = std::atan2(d.norm(), altitude);
    r.azimuth = std::atan2(d.y(), d.x());
    return r;
}

/// Half-wavelength UPA response, x-major Kronecker order, unit norm.
inline CVec steering_vector(const Vec2& q_uav, const Vec2& q_node, double altitude, int mx, int my)
{
    const Direction dir = direction(q_uav, q_node, altitude);
    const int m = mx * my;
    const double amp = 1.0 / std::sqrt(static_cast<double>(m));
    CVec g(m);
    for (int a = 0; a < mx; ++a)
        for (int b = 0; b < my; ++b)
            g[a * my + b] = std::polar(amp, -std::numbers::pi * (a * dir.u + b * dir.v));
    return g;
}

/// beta = M beta0 / (H^2 + ||q_U - q_i||^2)
inline double path_gain(const Vec2& q_uav, const Vec2& q_node, const ScenarioConfig& c)
{
    return c.num_antennas() * c.beta0 / (c.altitude * c.altitude + (q_uav - q_node).squaredNorm());
}

/// Sensing amplitude gain towards the eavesdropper, sqrt(M^2 beta0 rho0) / d^2.
///
/// By default d^2 includes the altitude. The literal variant uses only the
/// squared horizontal distance and diverges above the eavesdropper.
inline double sensing_gain(const Vec2& q_uav, const Vec2& q_eve, const ScenarioConfig& c)
{
    const double m = c.num_antennas();
    const double num = std::sqrt(m * m * c.beta0 * c.rcs);
    const double horiz = (q_uav - q_eve).squaredNorm();
    if (c.paper_literal_sensing_gain) {
        if (!(horiz > 0.0)) throw std::domain_error("literal sensing gain diverges at zero horizontal distance");
        return num / horiz;
    }
    return num / (c.altitude * c.altitude + horiz);
}

/// Circularly-symmetric complex Gaussian vector with the given per-entry variance.
inline CVec cscg_vector(int size, double variance, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    CVec v(size);
    for (int i = 0; i < size; ++i) {
        const double re = nd(rng);
        const double im = nd(rng);
        v[i] = {re, im};
    }
    return v;
}

/// sqrt(K/(K+1)) gamma + sqrt(1/(K+1)) gamma_nlos, gamma_nlos ~ CN(0, I/M).
inline CVec rician_direction(const CVec& los, double rician_k, std::mt19937_64& rng)
{
    if (std::isinf(rician_k)) return los;
    const CVec nlos = cscg_vector(static_cast<int>(los.size()), 1.0 / static_cast<double>(los.size()), rng);
    return std::sqrt(rician_k / (rician_k + 1.0)) * los + std::sqrt(1.0 / (rician_k + 1.0)) * nlos;
}

/// Deterministic generator for one (purpose, slot, node) stream.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t slot, std::uint64_t node = 0)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(slot),
                      static_cast<std::uint32_t>(node)};
    return std::mt19937_64(seq);
}

namespace stream_id {
    inline constexpr std::uint64_t self_interference = 1;
    inline constexpr std::uint64_t nlos = 2;
} // namespace stream_id

inline CMat self_interference(const ScenarioConfig& c, std::mt19937_64& rng)
{
    const int m = c.num_antennas();
    if (c.si_power == 0.0) return CMat::Zero(m, m);
    std::normal_distribution<double> nd(0.0, std::sqrt(c.si_power / 2.0));
    CMat h(m, m);
    for (int col = 0; col < m; ++col)
        for (int row = 0; row < m; ++row) {
            const double re = nd(rng);
            const double im = nd(rng);
            h(row, col) = {re, im};
        }
    return h;
}

/// Self-interference matrix for slot n, fixed by (rng_seed, n).
inline CMat self_interference(const ScenarioConfig& c, int slot)
{
    auto rng = stream(c.rng_seed, stream_id::self_interference, static_cast<std::uint64_t>(slot));
    return self_interference(c, rng);
}

/// Channel quantities of one slot. Node index K is the eavesdropper.
struct SlotChannel {
    std::vector<CVec> chi;      // K users then eve
    std::vector<double> beta;   // power gains, same order
    std::vector<Direction> dir; // same order
    double zeta_eve = 0.0;      // sensing amplitude gain
    CMat h_si;

    [[nodiscard]] int num_users() const { return static_cast<int>(chi.size()) - 1; }
    [[nodiscard]] int num_antennas() const { return static_cast<int>(chi.front().size()); }
    [[nodiscard]] const CVec& chi_eve() const { return chi.back(); }
    [[nodiscard]] CVec h(int node) const { return std::sqrt(beta[node]) * chi[node]; }
    [[nodiscard]] CVec h_eve() const { return h(num_users()); }
};

struct ChannelState {
    std::vector<SlotChannel> slots;
};

/// Line-of-sight channel of one slot at UAV position q.
inline SlotChannel slot_channel(const ScenarioConfig& c, const Vec2& q, CMat h_si)
{
    SlotChannel s;
    const int k = c.num_users();
    s.chi.reserve(k + 1);
    for (int i = 0; i <= k; ++i) {
        const Vec2& node = i < k ? c.users[i] : c.eve;
        s.chi.push_back(steering_vector(q, node, c.altitude, c.mx, c.my));
        s.beta.push_back(path_gain(q, node, c));
        s.dir.push_back(direction(q, node, c.altitude));
    }
    s.zeta_eve = sensing_gain(q, c.eve, c);
    s.h_si = std::move(h_si);
    return s;
}

inline std::vector<CMat> self_interference_all(const ScenarioConfig& c)
{
    std::vector<CMat> out;
    out.reserve(c.slot_count);
    for (int n = 0; n < c.slot_count; ++n) out.push_back(self_interference(c, n));
    return out;
}

/// LOS channels along a trajectory (the optimization model).
inline ChannelState compute_channels(const ScenarioConfig& c, const Trajectory& t, const std::vector<CMat>& h_si)
{
    ChannelState st;
    st.slots.reserve(t.size());
    for (int n = 0; n < t.size(); ++n) st.slots.push_back(slot_channel(c, t[n], h_si[n]));
    return st;
}

inline ChannelState compute_channels(const ScenarioConfig& c, const Trajectory& t)
{
    return compute_channels(c, t, self_interference_all(c));
}

/// Channels with one Rician NLOS realization applied to every direction.
inline ChannelState draw_nlos_channels(const ScenarioConfig& c, const ChannelState& los, int draw)
{
    ChannelState st = los;
    for (std::size_t n = 0; n < st.slots.size(); ++n)
        for (std::size_t i = 0; i < st.slots[n].chi.size(); ++i) {
            auto rng = stream(c.rng_seed, stream_id::nlos + 16 * static_cast<std::uint64_t>(draw), n, i);
            st.slots[n].chi[i] = rician_direction(los.slots[n].chi[i], c.rician_k, rng);
        }
    return st;
}

} // namespace uavisac
