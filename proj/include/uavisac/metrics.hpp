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

// SINRs and rates evaluated from the deterministic SINR formulas.

#pragma once

#include "uavisac/channel.hpp"
#include "uavisac/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace uavisac {

/// Transmit beams for the K users plus the jamming beam, and the receive filter.
struct SlotBeams {
    std::vector<CVec> users;
    CVec jam;
    CVec rx;

    [[nodiscard]] double power() const
    {
        double p = jam.squaredNorm();
        for (const auto& f : users) p += f.squaredNorm();
        return p;
    }
};

struct BeamformerSet {
    std::vector<SlotBeams> slots;
};

namespace detail {
    inline double abs2(const cd& z) { return std::norm(z); }

    /// |h^H f_k|^2 / (sum_{i != k} |h^H f_i|^2 + |h^H f_E|^2 + noise)
    inline double sinr_on(const CVec& h, int k, const SlotBeams& b, double noise)
    {
        double interf = abs2(h.dot(b.jam)) + noise;
        for (int i = 0; i < static_cast<int>(b.users.size()); ++i)
            if (i != k) interf += abs2(h.dot(b.users[i]));
        return abs2(h.dot(b.users[k])) / interf;
    }
} // namespace detail

inline double user_sinr(int k, const SlotChannel& ch, const SlotBeams& b, double noise)
{
    return detail::sinr_on(ch.h(k), k, b, noise);
}

/// SINR of user k's stream at the eavesdropper.
inline double eve_sinr(int k, const SlotChannel& ch, const SlotBeams& b, double noise)
{
    return detail::sinr_on(ch.h_eve(), k, b, noise);
}

inline double secrecy_rate_unclipped(int k, const SlotChannel& ch, const SlotBeams& b, double noise)
{
    return std::log2(1.0 + user_sinr(k, ch, b, noise)) - std::log2(1.0 + eve_sinr(k, ch, b, noise));
}

/// [log2(1 + G_k) - log2(1 + G_E,k)]^+ in bit/s/Hz.
inline double secrecy_rate(int k, const SlotChannel& ch, const SlotBeams& b, double noise)
{
    return std::max(0.0, secrecy_rate_unclipped(k, ch, b, noise));
}

inline double slot_secrecy_rate(const SlotChannel& ch, const SlotBeams& b, double noise)
{
    double r = 0.0;
    for (int k = 0; k < static_cast<int>(b.users.size()); ++k) r += secrecy_rate(k, ch, b, noise);
    return r;
}

/// Sum over slots and users of the clipped secrecy rate.
inline double sum_secrecy_rate(const ChannelState& ch, const BeamformerSet& b, double noise)
{
    double r = 0.0;
    for (std::size_t n = 0; n < ch.slots.size(); ++n) r += slot_secrecy_rate(ch.slots[n], b.slots[n], noise);
    return r;
}

/// Echo SINR with receive filter w:
/// sum |a^H f|^2 / (sum |w^H H_SI f|^2 + noise),  a^H = zeta w^H chi_E chi_E^H.
inline double sensing_sinr(const SlotChannel& ch, const SlotBeams& b, const CVec& w, double noise)
{
    const CVec& chi = ch.chi_eve();
    const CVec a = ch.zeta_eve * chi * chi.dot(w); // a = zeta chi chi^H w
    const CVec si_w = ch.h_si.adjoint() * w;        // (w^H H_SI)^H
    double num = detail::abs2(a.dot(b.jam));
    double den = detail::abs2(si_w.dot(b.jam)) + noise;
    for (const auto& f : b.users) {
        num += detail::abs2(a.dot(f));
        den += detail::abs2(si_w.dot(f));
    }
    return num / den;
}

inline double sensing_sinr(const SlotChannel& ch, const SlotBeams& b, double noise)
{
    return sensing_sinr(ch, b, b.rx, noise);
}

} // namespace uavisac
