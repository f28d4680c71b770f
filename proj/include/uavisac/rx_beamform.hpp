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

// Closed-form receive filter maximizing the echo SINR.

#pragma once

#include "uavisac/channel.hpp"
#include "uavisac/metrics.hpp"

#include <stdexcept>

namespace uavisac {

class DegenerateDirectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A = H_SI (sum_i f_i f_i^H + f_E f_E^H) H_SI^H + noise I
inline CMat interference_covariance(const SlotChannel& ch, const SlotBeams& b, double noise)
{
    const int m = ch.num_antennas();
    CMat a = CMat::Identity(m, m) * noise;
    auto acc = [&](const CVec& f) {
        const CVec g = ch.h_si * f;
        a.selfadjointView<Eigen::Lower>().rankUpdate(g, 1.0);
    };
    for (const auto& f : b.users) acc(f);
    acc(b.jam);
    a.triangularView<Eigen::StrictlyUpper>() = a.adjoint().triangularView<Eigen::StrictlyUpper>();
    return a;
}

/// w = A^-1 chi_E chi_E^H (sum_i f_i + f_E), normalized.
///
/// Throws DegenerateDirectionError when chi_E^H (sum_i f_i + f_E) vanishes; the
/// echo SINR is then zero for every w.
inline CVec optimal_rx_filter(const SlotChannel& ch, const SlotBeams& b, double noise)
{
    const CVec& chi = ch.chi_eve();
    CVec sum = b.jam;
    for (const auto& f : b.users) sum += f;
    const cd proj = chi.dot(sum);
    if (!(std::abs(proj) > 1e-15 * std::max(sum.norm(), 1e-300)))
        throw DegenerateDirectionError("transmit beams have no component along the eavesdropper direction");
    const CMat a = interference_covariance(ch, b, noise);
    Eigen::LLT<CMat> llt(a);
    CVec w = llt.solve(chi * proj);
    return w / w.norm();
}

/// optimal_rx_filter, falling back to A^-1 chi_E in the degenerate case.
///
/// The summed beam can cancel along chi_E while single beams do not, so the
/// echo is not necessarily zero there; A^-1 chi_E stays optimal (and equals
/// chi_E without self-interference).
inline CVec rx_filter_or_fallback(const SlotChannel& ch, const SlotBeams& b, double noise)
{
    try {
        return optimal_rx_filter(ch, b, noise);
    } catch (const DegenerateDirectionError&) {
        const CVec w = interference_covariance(ch, b, noise).llt().solve(ch.chi_eve());
        return w / w.norm();
    }
}

} // namespace uavisac
