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

// Transmit beamforming step: semidefinite relaxation over beam covariances,
// first-order secrecy surrogate, then rank-one extraction.

#pragma once

#include "uavisac/channel.hpp"
#include "uavisac/conic.hpp"
#include "uavisac/metrics.hpp"
#include "uavisac/scenario.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace uavisac {

/// Covariances of one slot: F_k for every user and F_E for jamming.
struct SlotCovariance {
    std::vector<CMat> users;
    CMat jam;

    [[nodiscard]] CMat total() const
    {
        CMat t = jam;
        for (const auto& f : users) t += f;
        return t;
    }
    [[nodiscard]] CMat total_except(int k) const
    {
        CMat t = jam;
        for (int i = 0; i < static_cast<int>(users.size()); ++i)
            if (i != k) t += users[i];
        return t;
    }
    [[nodiscard]] double power() const { return total().trace().real(); }
};

struct CovarianceSet {
    std::vector<SlotCovariance> slots;
};

inline SlotCovariance outer_products(const SlotBeams& b)
{
    SlotCovariance c;
    for (const auto& f : b.users) c.users.push_back(f * f.adjoint());
    c.jam = b.jam * b.jam.adjoint();
    return c;
}

/// [[Re, -Im], [Im, Re]]; PSD iff the Hermitian matrix is PSD.
inline Eigen::MatrixXd real_embedding(const CMat& h)
{
    const int m = static_cast<int>(h.rows());
    Eigen::MatrixXd e(2 * m, 2 * m);
    e.topLeftCorner(m, m) = h.real();
    e.topRightCorner(m, m) = -h.imag();
    e.bottomLeftCorner(m, m) = h.imag();
    e.bottomRightCorner(m, m) = h.real();
    return e;
}

inline CMat from_real_embedding(const Eigen::MatrixXd& e)
{
    const int m = static_cast<int>(e.rows()) / 2;
    CMat h(m, m);
    h.real() = e.topLeftCorner(m, m);
    h.imag() = e.bottomLeftCorner(m, m);
    return h;
}

/// Real parameterization of an M x M Hermitian matrix X occupying M^2
/// consecutive solver variables: diagonal, then (Re, Im) of each a < b entry.
/// With a basis L the represented covariance is F = L X L^H, which
/// preconditions the barrier around L L^H.
struct HermitianBlock {
    int offset = 0;
    int m = 0;
    CMat basis; // empty = identity

    [[nodiscard]] int size() const { return m * m; }
    [[nodiscard]] int diag(int a) const { return offset + a; }
    [[nodiscard]] int pair_index(int a, int b) const { return a * m - a * (a + 1) / 2 + (b - a - 1); }
    [[nodiscard]] int re(int a, int b) const { return offset + m + 2 * pair_index(a, b); }
    [[nodiscard]] int im(int a, int b) const { return re(a, b) + 1; }

    /// tr(H F) for Hermitian H, as a linear function of the block.
    [[nodiscard]] conic::LinExpr trace_with(const CMat& h_in, conic::LinExpr e = {}) const
    {
        const CMat h = basis.size() ? CMat(basis.adjoint() * h_in * basis) : h_in;
        for (int a = 0; a < m; ++a) {
            e.add(diag(a), h(a, a).real());
            for (int b = a + 1; b < m; ++b) {
                e.add(re(a, b), 2.0 * h(a, b).real());
                e.add(im(a, b), 2.0 * h(a, b).imag());
            }
        }
        return e;
    }

    [[nodiscard]] conic::LinExpr trace() const
    {
        if (basis.size()) return trace_with(CMat::Identity(m, m));
        conic::LinExpr e;
        for (int a = 0; a < m; ++a) e.add(diag(a), 1.0);
        return e;
    }

    /// Embedding F -> [[Re F, -Im F], [Im F, Re F]] as an LMI.
    [[nodiscard]] conic::PsdConstraint psd(conic::Tag tag) const
    {
        conic::PsdConstraint c;
        c.dim = 2 * m;
        c.tag = std::move(tag);
        for (int a = 0; a < m; ++a) {
            c.coefs.push_back({diag(a), a, a, 1.0});
            c.coefs.push_back({diag(a), a + m, a + m, 1.0});
            for (int b = a + 1; b < m; ++b) {
                c.coefs.push_back({re(a, b), a, b, 1.0});
                c.coefs.push_back({re(a, b), a + m, b + m, 1.0});
                c.coefs.push_back({im(a, b), a, b + m, -1.0});
                c.coefs.push_back({im(a, b), b, a + m, 1.0});
            }
        }
        return c;
    }

    void store(const CMat& f_in, Eigen::VectorXd& x) const
    {
        CMat f = f_in;
        if (basis.size()) {
            const Eigen::PartialPivLU<CMat> lu(basis);
            f = lu.solve(CMat(lu.solve(f_in).adjoint()));
            f = 0.5 * (f + f.adjoint()).eval();
        }
        for (int a = 0; a < m; ++a) {
            x[diag(a)] = f(a, a).real();
            for (int b = a + 1; b < m; ++b) {
                x[re(a, b)] = f(a, b).real();
                x[im(a, b)] = f(a, b).imag();
            }
        }
    }

    [[nodiscard]] CMat load(const Eigen::VectorXd& x) const
    {
        CMat f(m, m);
        for (int a = 0; a < m; ++a) {
            f(a, a) = x[diag(a)];
            for (int b = a + 1; b < m; ++b) {
                f(a, b) = {x[re(a, b)], x[im(a, b)]};
                f(b, a) = std::conj(f(a, b));
            }
        }
        if (basis.size()) return basis * f * basis.adjoint();
        return f;
    }
};

namespace detail {
    inline double quad(const CVec& h, const CMat& f) { return h.dot(f * h).real(); }

    struct CovTerms {
        double s_user, i_user, s_eve, i_eve;
    };

    inline CovTerms cov_terms(const SlotCovariance& f, const SlotChannel& ch, int k, double noise)
    {
        const CVec hk = ch.h(k), he = ch.h_eve();
        const CMat all = f.total(), others = f.total_except(k);
        return {quad(hk, all) + noise, quad(hk, others) + noise, quad(he, all) + noise, quad(he, others) + noise};
    }
} // namespace detail

/// Unclipped secrecy rate of user k written in covariances.
inline double secrecy_rate_cov(const SlotCovariance& f, const SlotChannel& ch, int k, double noise)
{
    const auto t = detail::cov_terms(f, ch, k, noise);
    return std::log2(t.s_user) - std::log2(t.i_user) - std::log2(t.s_eve) + std::log2(t.i_eve);
}

/// First-order secrecy surrogate around `anchor`: the two concave logs are
/// kept, the convex -log terms are replaced by tangents. A global lower bound
/// of secrecy_rate_cov with equality at the anchor.
inline double taylor_secrecy_surrogate(const SlotCovariance& f, const SlotCovariance& anchor, const SlotChannel& ch, int k,
                                       double noise)
{
    const auto t = detail::cov_terms(f, ch, k, noise);
    const auto a = detail::cov_terms(anchor, ch, k, noise);
    const double ln2 = std::numbers::ln2;
    return std::log2(t.s_user) - std::log2(a.i_user) - (t.i_user - a.i_user) / (ln2 * a.i_user) - std::log2(a.s_eve) -
           (t.s_eve - a.s_eve) / (ln2 * a.s_eve) + std::log2(t.i_eve);
}

inline double slot_surrogate(const SlotCovariance& f, const SlotCovariance& anchor, const SlotChannel& ch, double noise)
{
    double v = 0.0;
    for (int k = 0; k < static_cast<int>(f.users.size()); ++k) v += taylor_secrecy_surrogate(f, anchor, ch, k, noise);
    return v;
}

struct TxStepResult {
    conic::Status status = conic::Status::numerical_failure;
    SlotCovariance covariance;
    double surrogate = 0.0;
    double surrogate_at_anchor = 0.0;
    int newton_iterations = 0;
    bool usable = false; // optimal, or stopped early at a strictly feasible point
};

/// Linear echo-SINR constraint terms: a a^H - gamma_th b b^H, a = zeta chi_E chi_E^H w, b = H_SI^H w.
inline CMat sensing_constraint_matrix(const SlotChannel& ch, const CVec& w, double gamma_th)
{
    const CVec& chi = ch.chi_eve();
    const CVec a = ch.zeta_eve * chi * chi.dot(w);
    const CVec b = ch.h_si.adjoint() * w;
    return a * a.adjoint() - gamma_th * (b * b.adjoint());
}

namespace detail {
    /// Hermitian square root of a PSD matrix with eigenvalues floored at `floor`.
    inline CMat psd_sqrt(const CMat& f, double floor)
    {
        const Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (f + f.adjoint()));
        const Eigen::VectorXd d = es.eigenvalues().cwiseMax(floor).cwiseSqrt();
        return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
    }
} // namespace detail

/// Solves the relaxed covariance program of one slot around `anchor`.
///
/// The covariances are written as L X L^H with L the square root of the
/// current point. When the barrier method stalls on a badly scaled point it is
/// restarted with L taken at that point.
inline TxStepResult solve_txbf_step(const SlotCovariance& anchor, const CVec& w, const SlotChannel& ch,
                                    const ScenarioConfig& cfg, const conic::Options& opt = {})
{
    using conic::LinExpr;
    TxStepResult res;
    const int k_users = static_cast<int>(anchor.users.size());
    const int m = ch.num_antennas();
    const double noise = cfg.noise_power;
    const double inv_ln2 = 1.0 / std::numbers::ln2;
    res.surrogate_at_anchor = slot_surrogate(anchor, anchor, ch, noise);

    const int entities = k_users + 1; // users then jamming
    std::vector<CMat> hh;
    for (int i = 0; i <= k_users; ++i) {
        const CVec h = ch.h(i);
        hh.push_back(h * h.adjoint());
    }
    const CMat& he = hh[k_users];
    const CMat sensing = cfg.gamma_th > 0.0 ? sensing_constraint_matrix(ch, w, cfg.gamma_th) : CMat();
    auto anchor_quad = [&](const CVec& h, const CMat& f) { return h.dot(f * h).real(); };
    const CMat anchor_total = anchor.total();
    const double s_eve_anchor = anchor_quad(ch.h_eve(), anchor_total) + noise;

    auto build = [&](conic::Problem& p, std::vector<HermitianBlock>& blocks) {
        auto sum_trace = [&](const CMat& h, int skip) {
            LinExpr e(noise);
            for (int i = 0; i < entities; ++i)
                if (i != skip) e = blocks[i].trace_with(h, std::move(e));
            return e;
        };
        for (int k = 0; k < k_users; ++k) {
            const double i_user_anchor = anchor_quad(ch.h(k), anchor.total_except(k)) + noise;
            p.add_log(inv_ln2, sum_trace(hh[k], -1), {-1, "user_total"});
            // -log I_k ~ -log Ia - (I_k - Ia) / Ia
            p.add_objective(sum_trace(hh[k], k), -inv_ln2 / i_user_anchor);
            p.add_objective_constant(inv_ln2 * (1.0 - std::log(i_user_anchor)));
            p.add_objective(sum_trace(he, -1), -inv_ln2 / s_eve_anchor);
            p.add_objective_constant(inv_ln2 * (1.0 - std::log(s_eve_anchor)));
            p.add_log(inv_ln2, sum_trace(he, k), {-1, "eve_interference"});
        }
        LinExpr power(cfg.p_max);
        for (const auto& b : blocks) {
            const LinExpr tr = b.trace();
            for (std::size_t i = 0; i < tr.idx.size(); ++i) power.add(tr.idx[i], -tr.coef[i]);
        }
        p.add_nonneg(power, {-1, "power"});
        if (sensing.size()) {
            LinExpr e(-cfg.gamma_th * noise);
            for (const auto& b : blocks) e = b.trace_with(sensing, std::move(e));
            p.add_nonneg(e, {-1, "sensing"});
        }
        for (int e = 0; e < entities; ++e) p.add_psd(blocks[e].psd({-1, e < k_users ? "F_user" : "F_jam"}));
    };

    // Start slightly inside the cone from the anchor; the isotropic part is
    // shrunk while it breaks the echo-SINR constraint.
    const double fill = 0.5 * cfg.p_max / (entities * m);
    std::vector<CMat> point(entities);
    auto blend = [&](double eta) {
        CMat total = CMat::Zero(m, m);
        for (int e = 0; e < entities; ++e) {
            const CMat& fa = e < k_users ? anchor.users[e] : anchor.jam;
            point[e] = (1.0 - eta) * fa + eta * fill * CMat::Identity(m, m);
            total += point[e];
        }
        return !sensing.size() || (sensing * total).trace().real() > cfg.gamma_th * noise;
    };
    bool inside = false;
    for (double eta = 1e-2; eta >= 1e-12 && !inside; eta *= 0.1) inside = blend(eta);
    // An infeasible anchor is left to Phase I; a near-singular basis would cripple it.
    if (!inside) blend(0.5);

    constexpr int max_restarts = 6;
    int budget = opt.max_newton;
    for (int restart = 0; restart <= max_restarts && budget > 0; ++restart) {
        conic::Problem p;
        std::vector<HermitianBlock> blocks;
        for (int e = 0; e < entities; ++e) {
            HermitianBlock b{p.num_variables(), m, {}};
            b.basis = detail::psd_sqrt(point[e], 1e-14 * cfg.p_max);
            blocks.push_back(std::move(b));
            p.add_variables(m * m);
        }
        build(p, blocks);
        Eigen::VectorXd start = Eigen::VectorXd::Zero(p.num_variables());
        for (int e = 0; e < entities; ++e) blocks[e].store(point[e], start);
        conic::Options o = opt;
        o.max_newton = budget;
        if (restart < max_restarts) o.center_limit = 40;
        const conic::Result r = conic::solve(p, o, &start);
        res.status = r.status;
        res.newton_iterations += r.newton_iterations;
        budget -= std::max(1, r.newton_iterations);
        if (!r.interior) break;
        res.usable = true;
        for (int e = 0; e < entities; ++e) point[e] = blocks[e].load(r.x);
        if (r.status == conic::Status::optimal) break;
    }
    if (!res.usable) return res;
    for (int e = 0; e < k_users; ++e) res.covariance.users.push_back(point[e]);
    res.covariance.jam = point[k_users];
    res.surrogate = slot_surrogate(res.covariance, anchor, ch, noise);
    return res;
}

struct Rank1Extraction {
    SlotBeams beams;           // rx is the filter used for the sensing check
    double rho = 1.0;          // common scaling factor
    double sensing = 0.0;      // achieved echo SINR
    std::vector<double> eigen_ratio; // lambda_max / trace, users then jamming
    bool sensing_violated = false;
};

namespace detail {
    /// sqrt(lambda_max) v_max with a deterministic phase (largest entry real positive).
    inline CVec principal_beam(const CMat& f, double& lambda, double& ratio)
    {
        const int m = static_cast<int>(f.rows());
        const CMat herm = 0.5 * (f + f.adjoint());
        Eigen::SelfAdjointEigenSolver<CMat> es(herm);
        const auto& ev = es.eigenvalues();
        const double lmax = ev[m - 1];
        int pick = m - 1;
        // among ties take the lowest index
        for (int i = m - 1; i >= 0 && ev[i] >= lmax - 1e-12 * std::max(1.0, std::abs(lmax)); --i) pick = i;
        CVec v = es.eigenvectors().col(pick);
        int big = 0;
        v.cwiseAbs().maxCoeff(&big);
        if (std::abs(v[big]) > 0.0) v *= std::conj(v[big]) / std::abs(v[big]);
        lambda = std::max(0.0, lmax);
        const double tr = herm.trace().real();
        ratio = tr > 0.0 ? lambda / tr : 1.0;
        return std::sqrt(lambda) * v;
    }
} // namespace detail

/// Rank-one beams from covariances, scaled for power and, if possible, for the
/// echo-SINR threshold under filter w.
inline Rank1Extraction extract_rank1(const SlotCovariance& f, const CVec& w, const SlotChannel& ch,
                                     const ScenarioConfig& cfg)
{
    Rank1Extraction out;
    SlotBeams base;
    double lambda_sum = 0.0;
    for (const auto& fk : f.users) {
        double l = 0.0, r = 0.0;
        base.users.push_back(detail::principal_beam(fk, l, r));
        lambda_sum += l;
        out.eigen_ratio.push_back(r);
    }
    {
        double l = 0.0, r = 0.0;
        base.jam = detail::principal_beam(f.jam, l, r);
        lambda_sum += l;
        out.eigen_ratio.push_back(r);
    }
    base.rx = w;
    auto scaled = [&](double rho) {
        SlotBeams b = base;
        for (auto& v : b.users) v *= rho;
        b.jam *= rho;
        return b;
    };
    const double rho_cap = lambda_sum > 0.0 ? std::sqrt(cfg.p_max / lambda_sum) : 1.0;
    double rho = std::min(1.0, rho_cap);
    out.rho = rho;
    out.beams = scaled(rho);
    out.sensing = sensing_sinr(ch, out.beams, w, cfg.noise_power);
    if (cfg.gamma_th <= 0.0 || out.sensing >= cfg.gamma_th) return out;

    const SlotBeams top = scaled(rho_cap);
    if (rho_cap <= rho || sensing_sinr(ch, top, w, cfg.noise_power) < cfg.gamma_th) {
        out.sensing_violated = true;
        return out;
    }
    double lo = rho, hi = rho_cap;
    for (int it = 0; it < 100 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sensing_sinr(ch, scaled(mid), w, cfg.noise_power) >= cfg.gamma_th)
            hi = mid;
        else
            lo = mid;
    }
    out.rho = hi;
    out.beams = scaled(hi);
    out.sensing = sensing_sinr(ch, out.beams, w, cfg.noise_power);
    return out;
}

} // namespace uavisac
