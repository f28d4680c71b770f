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

// Small conic programming back end.
//
// Problems have the form
//
//     maximize   c'x + sum_j w_j log(a_j'x + b_j) + c0
//     subject to g'x + h >= 0                      (nonnegative cone)
//                ||U x + u|| <= t'x + t0           (second-order cone)
//                G0 + sum_i x_i G_i  is PSD       (real symmetric blocks)
//
// The caller guarantees that the objective is concave on the feasible set
// (negative weights are only used in pairs that stay concave, e.g.
// log(b + x) - log(c + x) with b <= c). The solver is a primal log-barrier
// method with a Phase I stage for finding a strictly feasible point.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace uavisac::conic {

/// Sparse affine expression a'x + b.
struct LinExpr {
    std::vector<int> idx;
    std::vector<double> coef;
    double constant = 0.0;

    LinExpr() = default;
    explicit LinExpr(double c) : constant(c) {}

    LinExpr& add(int var, double value)
    {
        if (value != 0.0) {
            idx.push_back(var);
            coef.push_back(value);
        }
        return *this;
    }

    [[nodiscard]] double eval(const Eigen::VectorXd& x) const
    {
        double v = constant;
        for (std::size_t i = 0; i < idx.size(); ++i) v += coef[i] * x[idx[i]];
        return v;
    }

    [[nodiscard]] bool is_constant() const { return idx.empty(); }
};

/// Identifies a constraint or term for diagnostics (slot -1 means "global").
struct Tag {
    int slot = -1;
    std::string label;
};

struct LogTerm {
    double weight = 1.0;
    LinExpr arg;
    Tag tag;
};

struct LinearConstraint {
    LinExpr expr; // expr >= 0
    Tag tag;
};

struct SocConstraint {
    LinExpr t;              // cone "height"
    std::vector<LinExpr> u; // ||u|| <= t
    Tag tag;
};

/// lin - sum sq_i^2 >= 0 (convex quadratic constraint).
struct QuadConstraint {
    LinExpr lin;
    std::vector<LinExpr> sq;
    Tag tag;
};

/// One coefficient of a symmetric LMI block. Both (row, col) and (col, row)
/// receive `value` when row != col.
struct PsdCoef {
    int var;
    int row;
    int col;
    double value;
};

struct PsdConstraint {
    int dim = 0;
    Eigen::MatrixXd constant; // G0, dim x dim symmetric (empty means zero)
    std::vector<PsdCoef> coefs;
    Tag tag;
};

class Problem {
public:
    int add_variable(std::string name = {})
    {
        names_.push_back(std::move(name));
        linear_.push_back(0.0);
        return static_cast<int>(names_.size()) - 1;
    }

    int add_variables(int count, const std::string& prefix = {})
    {
        const int first = num_variables();
        for (int i = 0; i < count; ++i) add_variable(prefix.empty() ? std::string{} : prefix + std::to_string(i));
        return first;
    }

    [[nodiscard]] int num_variables() const { return static_cast<int>(names_.size()); }
    [[nodiscard]] const std::string& variable_name(int i) const { return names_[i]; }

    void add_objective_linear(int var, double value) { linear_[var] += value; }
    void add_objective_constant(double value) { objective_constant_ += value; }
    void add_objective(const LinExpr& e, double scale = 1.0)
    {
        for (std::size_t i = 0; i < e.idx.size(); ++i) linear_[e.idx[i]] += scale * e.coef[i];
        objective_constant_ += scale * e.constant;
    }
    void add_log(double weight, LinExpr arg, Tag tag = {}) { logs_.push_back({weight, std::move(arg), std::move(tag)}); }

    void add_nonneg(LinExpr e, Tag tag = {}) { linear_cons_.push_back({std::move(e), std::move(tag)}); }
    void add_soc(LinExpr t, std::vector<LinExpr> u, Tag tag = {}) { socs_.push_back({std::move(t), std::move(u), std::move(tag)}); }
    void add_quad(LinExpr lin, std::vector<LinExpr> sq, Tag tag = {}) { quads_.push_back({std::move(lin), std::move(sq), std::move(tag)}); }
    void add_psd(PsdConstraint c) { psds_.push_back(std::move(c)); }

    [[nodiscard]] const std::vector<double>& objective_linear() const { return linear_; }
    [[nodiscard]] double objective_constant() const { return objective_constant_; }
    [[nodiscard]] const std::vector<LogTerm>& log_terms() const { return logs_; }
    [[nodiscard]] const std::vector<LinearConstraint>& linear_constraints() const { return linear_cons_; }
    [[nodiscard]] const std::vector<SocConstraint>& soc_constraints() const { return socs_; }
    [[nodiscard]] const std::vector<QuadConstraint>& quad_constraints() const { return quads_; }
    [[nodiscard]] const std::vector<PsdConstraint>& psd_constraints() const { return psds_; }

    [[nodiscard]] double objective(const Eigen::VectorXd& x) const
    {
        double v = objective_constant_;
        for (int i = 0; i < num_variables(); ++i) v += linear_[i] * x[i];
        for (const auto& l : logs_) {
            const double a = l.arg.eval(x);
            if (a <= 0.0) return -std::numeric_limits<double>::infinity();
            v += l.weight * std::log(a);
        }
        return v;
    }

    /// Plain-text dump for offline debugging.
    void dump(std::ostream& os) const
    {
        os << std::setprecision(17);
        os << "variables " << num_variables() << "\n";
        for (int i = 0; i < num_variables(); ++i)
            if (!names_[i].empty()) os << "name " << i << " " << names_[i] << "\n";
        os << "objective_constant " << objective_constant_ << "\n";
        for (int i = 0; i < num_variables(); ++i)
            if (linear_[i] != 0.0) os << "objective_linear " << i << " " << linear_[i] << "\n";
        auto expr = [&os](const LinExpr& e) {
            os << e.constant << " " << e.idx.size();
            for (std::size_t i = 0; i < e.idx.size(); ++i) os << " " << e.idx[i] << ":" << e.coef[i];
        };
        auto tag = [&os](const Tag& t) { os << " [slot " << t.slot << (t.label.empty() ? "" : " " + t.label) << "]"; };
        for (const auto& l : logs_) {
            os << "log " << l.weight << " ";
            expr(l.arg);
            tag(l.tag);
            os << "\n";
        }
        for (const auto& c : linear_cons_) {
            os << "nonneg ";
            expr(c.expr);
            tag(c.tag);
            os << "\n";
        }
        for (const auto& c : socs_) {
            os << "soc " << c.u.size() << " t ";
            expr(c.t);
            for (const auto& u : c.u) {
                os << " u ";
                expr(u);
            }
            tag(c.tag);
            os << "\n";
        }
        for (const auto& c : quads_) {
            os << "quad " << c.sq.size() << " lin ";
            expr(c.lin);
            for (const auto& q : c.sq) {
                os << " sq ";
                expr(q);
            }
            tag(c.tag);
            os << "\n";
        }
        for (const auto& c : psds_) {
            os << "psd " << c.dim << " " << c.coefs.size();
            tag(c.tag);
            os << "\n";
            if (c.constant.size() > 0)
                for (int r = 0; r < c.dim; ++r)
                    for (int col = r; col < c.dim; ++col)
                        if (c.constant(r, col) != 0.0) os << "  const " << r << " " << col << " " << c.constant(r, col) << "\n";
            for (const auto& k : c.coefs) os << "  coef " << k.var << " " << k.row << " " << k.col << " " << k.value << "\n";
        }
    }

private:
    std::vector<std::string> names_;
    std::vector<double> linear_;
    double objective_constant_ = 0.0;
    std::vector<LogTerm> logs_;
    std::vector<LinearConstraint> linear_cons_;
    std::vector<SocConstraint> socs_;
    std::vector<QuadConstraint> quads_;
    std::vector<PsdConstraint> psds_;
};

enum class Status { optimal, infeasible, unbounded, numerical_failure };

inline const char* to_string(Status s)
{
    switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

struct Options {
    double tol = 1e-7;        // relative duality-gap target
    double mu = 20.0;         // barrier parameter growth
    int max_newton = 400;     // total Newton iterations per phase
    double newton_tol = 1e-9; // centering stop on lambda^2 / 2
    double unbounded_limit = 1e13;
    int center_limit = 0;     // Newton steps per centering in the main phase, 0 = no limit
};

struct Result {
    Status status = Status::numerical_failure;
    Eigen::VectorXd x;
    double objective = -std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    int newton_iterations = 0;
    std::optional<Tag> worst_constraint; // set on infeasible
    bool interior = false; // x is strictly feasible (always true when optimal)
};

namespace detail {

    // Internal constraint layout shared by Phase I and the main phase. Phase I
    // appends one extra variable s that enters every cone along its identity.
    struct Lmi {
        int dim;
        Eigen::MatrixXd constant;
        std::vector<int> vars;                                  // unique vars
        std::vector<std::vector<std::pair<int, double>>> entries; // per var: flat (r*dim+c) entries, both triangles
    };

    struct Compiled {
        int n = 0;
        int shift_var = -1; // Phase I variable, -1 in main phase
        Eigen::VectorXd linear;
        double constant = 0.0;
        std::vector<LogTerm> obj_logs;       // objective logs
        std::vector<LinExpr> lin;            // >= 0 barrier
        std::vector<Tag> lin_tags;
        std::vector<SocConstraint> soc;
        std::vector<QuadConstraint> quad;
        std::vector<Lmi> lmi;
        std::vector<Tag> lmi_tags;
        std::vector<LinExpr> domain;         // objective log args (guards only)
        double degree = 0.0;
    };

    inline Lmi compile_lmi(const PsdConstraint& p, int shift_var)
    {
        Lmi l;
        l.dim = p.dim;
        l.constant = p.constant.size() > 0 ? p.constant : Eigen::MatrixXd::Zero(p.dim, p.dim);
        std::vector<int> order;
        for (const auto& c : p.coefs) order.push_back(c.var);
        std::sort(order.begin(), order.end());
        order.erase(std::unique(order.begin(), order.end()), order.end());
        l.vars = order;
        l.entries.resize(order.size());
        for (const auto& c : p.coefs) {
            const auto pos = std::lower_bound(order.begin(), order.end(), c.var) - order.begin();
            l.entries[pos].push_back({c.row * p.dim + c.col, c.value});
            if (c.row != c.col) l.entries[pos].push_back({c.col * p.dim + c.row, c.value});
        }
        if (shift_var >= 0) {
            l.vars.push_back(shift_var);
            l.entries.emplace_back();
            for (int r = 0; r < p.dim; ++r) l.entries.back().push_back({r * p.dim + r, 1.0});
        }
        return l;
    }

    // Largest magnitude among the coefficients and constant of an expression.
    inline double expr_scale(const LinExpr& e)
    {
        double m = std::abs(e.constant);
        for (double v : e.coef) m = std::max(m, std::abs(v));
        return m > 0.0 ? m : 1.0;
    }

    inline LinExpr scaled(LinExpr e, double s)
    {
        e.constant *= s;
        for (double& v : e.coef) v *= s;
        return e;
    }

    // Constraints are rescaled to unit magnitude so that the Phase I shift and
    // the barrier weights act on comparable quantities.
    inline Compiled compile(const Problem& p, bool phase1)
    {
        Compiled c;
        c.n = p.num_variables() + (phase1 ? 1 : 0);
        c.shift_var = phase1 ? p.num_variables() : -1;
        c.linear = Eigen::VectorXd::Zero(c.n);
        auto shifted = [&](LinExpr e) {
            if (phase1) e.add(c.shift_var, 1.0);
            return e;
        };
        if (phase1) {
            c.linear[c.shift_var] = -1.0; // maximize -s
        } else {
            for (int i = 0; i < p.num_variables(); ++i) c.linear[i] = p.objective_linear()[i];
            c.constant = p.objective_constant();
            for (LogTerm l : p.log_terms()) {
                const double sc = 1.0 / expr_scale(l.arg);
                l.arg = scaled(std::move(l.arg), sc);
                c.constant -= l.weight * std::log(sc);
                c.obj_logs.push_back(std::move(l));
            }
        }
        for (const auto& l : p.linear_constraints()) {
            c.lin.push_back(shifted(scaled(l.expr, 1.0 / expr_scale(l.expr))));
            c.lin_tags.push_back(l.tag);
        }
        for (const auto& l : p.log_terms()) {
            LinExpr a = scaled(l.arg, 1.0 / expr_scale(l.arg));
            if (phase1) {
                c.lin.push_back(shifted(std::move(a)));
                c.lin_tags.push_back(l.tag);
            } else {
                c.domain.push_back(std::move(a));
            }
        }
        for (const auto& s : p.soc_constraints()) {
            double m = expr_scale(s.t);
            for (const auto& u : s.u) m = std::max(m, expr_scale(u));
            SocConstraint sc = s;
            sc.t = shifted(scaled(s.t, 1.0 / m));
            for (auto& u : sc.u) u = scaled(std::move(u), 1.0 / m);
            c.soc.push_back(std::move(sc));
        }
        for (const auto& m : p.psd_constraints()) {
            c.lmi.push_back(compile_lmi(m, c.shift_var));
            c.lmi_tags.push_back(m.tag);
        }
        for (const auto& q : p.quad_constraints()) {
            double m = expr_scale(q.lin);
            for (const auto& e : q.sq) m = std::max(m, std::pow(expr_scale(e), 2));
            QuadConstraint qc = q;
            qc.lin = shifted(scaled(q.lin, 1.0 / m));
            for (auto& e : qc.sq) e = scaled(std::move(e), 1.0 / std::sqrt(m));
            c.quad.push_back(std::move(qc));
        }
        c.degree = static_cast<double>(c.lin.size() + c.quad.size()) + 2.0 * static_cast<double>(c.soc.size());
        for (const auto& m : c.lmi) c.degree += m.dim;
        return c;
    }

    inline Eigen::MatrixXd lmi_value(const Lmi& l, const Eigen::VectorXd& x)
    {
        Eigen::MatrixXd s = l.constant;
        double* data = s.data();
        for (std::size_t k = 0; k < l.vars.size(); ++k) {
            const double xv = x[l.vars[k]];
            if (xv == 0.0) continue;
            // column-major: flat index r*dim+c maps to (r,c); symmetric so layout is irrelevant
            for (const auto& [flat, v] : l.entries[k]) data[flat] += v * xv;
        }
        return s;
    }

    inline double soc_gap(const SocConstraint& s, const Eigen::VectorXd& x, double& t_out)
    {
        const double t = s.t.eval(x);
        double uu = 0.0;
        for (const auto& u : s.u) {
            const double v = u.eval(x);
            uu += v * v;
        }
        t_out = t;
        return t * t - uu;
    }

    inline double quad_gap(const QuadConstraint& q, const Eigen::VectorXd& x)
    {
        double v = q.lin.eval(x);
        for (const auto& e : q.sq) v -= std::pow(e.eval(x), 2);
        return v;
    }

    /// Barrier value B(x); +inf outside the domain.
    inline double barrier(const Compiled& c, const Eigen::VectorXd& x)
    {
        constexpr double inf = std::numeric_limits<double>::infinity();
        double b = 0.0;
        for (const auto& e : c.lin) {
            const double v = e.eval(x);
            if (!(v > 0.0)) return inf;
            b -= std::log(v);
        }
        for (const auto& s : c.soc) {
            double t = 0.0;
            const double g = soc_gap(s, x, t);
            if (!(t > 0.0) || !(g > 0.0)) return inf;
            b -= std::log(g);
        }
        for (const auto& q : c.quad) {
            const double g = quad_gap(q, x);
            if (!(g > 0.0)) return inf;
            b -= std::log(g);
        }
        for (const auto& l : c.lmi) {
            Eigen::LLT<Eigen::MatrixXd> llt(lmi_value(l, x));
            if (llt.info() != Eigen::Success) return inf;
            const auto& lm = llt.matrixLLT();
            for (int i = 0; i < l.dim; ++i) {
                if (!(lm(i, i) > 0.0)) return inf;
                b -= 2.0 * std::log(lm(i, i));
            }
        }
        for (const auto& e : c.domain)
            if (!(e.eval(x) > 0.0)) return inf;
        return b;
    }

    inline double objective(const Compiled& c, const Eigen::VectorXd& x)
    {
        double v = c.constant + c.linear.dot(x);
        for (const auto& l : c.obj_logs) {
            const double a = l.arg.eval(x);
            if (!(a > 0.0)) return -std::numeric_limits<double>::infinity();
            v += l.weight * std::log(a);
        }
        return v;
    }

    /// Accumulates gradient and Hessian; the Hessian is stored as a sparse
    /// part plus a list of rank-one terms d * u u' with wide support.
    class Assembler {
    public:
        explicit Assembler(int n) : n_(n), grad_(Eigen::VectorXd::Zero(n)) {}

        Eigen::VectorXd& grad() { return grad_; }

        void add_entry(int i, int j, double v) { trip_.emplace_back(i, j, v); }

        /// d * a a' for the sparse row a (given as an expression).
        void add_rank1(const LinExpr& a, double d)
        {
            if (a.idx.size() > kWide) {
                wide_.push_back({a, d});
                return;
            }
            for (std::size_t p = 0; p < a.idx.size(); ++p)
                for (std::size_t q = 0; q < a.idx.size(); ++q) trip_.emplace_back(a.idx[p], a.idx[q], d * a.coef[p] * a.coef[q]);
        }

        void add_grad(const LinExpr& a, double scale)
        {
            for (std::size_t p = 0; p < a.idx.size(); ++p) grad_[a.idx[p]] += scale * a.coef[p];
        }

        /// Solves H dx = rhs. Returns false on factorization failure.
        bool solve(const Eigen::VectorXd& rhs, Eigen::VectorXd& out)
        {
            if (n_ <= kDenseLimit) return solve_dense(rhs, out);
            return solve_sparse(rhs, out);
        }

        void clear()
        {
            trip_.clear();
            wide_.clear();
            grad_.setZero();
        }

    private:
        static constexpr std::size_t kWide = 48;
        static constexpr int kDenseLimit = 256;

        struct Wide {
            LinExpr a;
            double d;
        };

        bool solve_dense(const Eigen::VectorXd& rhs, Eigen::VectorXd& out)
        {
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_, n_);
            for (const auto& t : trip_) h(t.row(), t.col()) += t.value();
            for (const auto& w : wide_) {
                Eigen::VectorXd a = Eigen::VectorXd::Zero(n_);
                for (std::size_t p = 0; p < w.a.idx.size(); ++p) a[w.a.idx[p]] += w.a.coef[p];
                h.selfadjointView<Eigen::Lower>().rankUpdate(a, w.d);
            }
            h.triangularView<Eigen::StrictlyUpper>() = h.transpose().triangularView<Eigen::StrictlyUpper>();
            return dense_factor_solve(h, rhs, out);
        }

        static bool dense_factor_solve(Eigen::MatrixXd& h, const Eigen::VectorXd& rhs, Eigen::VectorXd& out)
        {
            // symmetric Jacobi equilibration: solve (D H D) y = D r, x = D y
            Eigen::VectorXd d = h.diagonal().cwiseAbs();
            for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = d[i] > 0.0 ? 1.0 / std::sqrt(d[i]) : 1.0;
            h = d.asDiagonal() * h * d.asDiagonal();
            const Eigen::VectorXd r = d.cwiseProduct(rhs);
            Eigen::LLT<Eigen::MatrixXd> llt(h);
            if (llt.info() == Eigen::Success) {
                out = d.cwiseProduct(llt.solve(r));
                if (out.allFinite()) return true;
            }
            for (double reg : {1e-14, 1e-11, 1e-8}) {
                Eigen::MatrixXd hr = h;
                hr.diagonal().array() += reg;
                Eigen::LLT<Eigen::MatrixXd> l2(hr);
                if (l2.info() == Eigen::Success) {
                    out = d.cwiseProduct(l2.solve(r));
                    if (out.allFinite()) return true;
                }
            }
            return false;
        }

        bool solve_sparse(const Eigen::VectorXd& rhs, Eigen::VectorXd& out)
        {
            Eigen::SparseMatrix<double> s(n_, n_);
            s.setFromTriplets(trip_.begin(), trip_.end());
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
            ldlt.compute(s);
            if (ldlt.info() != Eigen::Success) {
                Eigen::SparseMatrix<double> reg(n_, n_);
                reg.setIdentity();
                double dmax = 0.0;
                for (int k = 0; k < s.outerSize(); ++k)
                    for (Eigen::SparseMatrix<double>::InnerIterator it(s, k); it; ++it)
                        if (it.row() == it.col()) dmax = std::max(dmax, std::abs(it.value()));
                s += reg * (1e-12 * std::max(1.0, dmax));
                ldlt.compute(s);
                if (ldlt.info() != Eigen::Success) return false;
            }
            Eigen::VectorXd y = ldlt.solve(rhs);
            if (wide_.empty()) {
                out = std::move(y);
                return out.allFinite();
            }
            // Woodbury: (S + U D U')^-1 r = y - Z (D^-1 + U'Z)^-1 U'y, Z = S^-1 U
            const int r = static_cast<int>(wide_.size());
            Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n_, r);
            for (int k = 0; k < r; ++k)
                for (std::size_t p = 0; p < wide_[k].a.idx.size(); ++p) u(wide_[k].a.idx[p], k) += wide_[k].a.coef[p];
            Eigen::MatrixXd z = ldlt.solve(u);
            Eigen::MatrixXd cap = u.transpose() * z;
            for (int k = 0; k < r; ++k) cap(k, k) += 1.0 / wide_[k].d;
            Eigen::VectorXd corr = cap.partialPivLu().solve(u.transpose() * y);
            out = y - z * corr;
            return out.allFinite();
        }

        int n_;
        Eigen::VectorXd grad_;
        std::vector<Eigen::Triplet<double>> trip_;
        std::vector<Wide> wide_;
    };

    /// Gradient and Hessian of  -t f0(x) + B(x).
    inline void assemble(const Compiled& c, const Eigen::VectorXd& x, double t, Assembler& a)
    {
        a.clear();
        Eigen::VectorXd& g = a.grad();
        g = -t * c.linear;
        for (const auto& l : c.obj_logs) {
            const double v = l.arg.eval(x);
            a.add_grad(l.arg, -t * l.weight / v);
            a.add_rank1(l.arg, t * l.weight / (v * v));
        }
        for (const auto& e : c.lin) {
            const double v = e.eval(x);
            a.add_grad(e, -1.0 / v);
            a.add_rank1(e, 1.0 / (v * v));
        }
        for (const auto& s : c.soc) {
            // f = t^2 - sum u_i^2;  B = -log f
            double tv = 0.0;
            const double f = soc_gap(s, x, tv);
            // grad f = 2 t dt - 2 sum u_i du_i, collected as a sparse expression
            LinExpr df;
            for (std::size_t p = 0; p < s.t.idx.size(); ++p) df.add(s.t.idx[p], 2.0 * tv * s.t.coef[p]);
            for (const auto& u : s.u) {
                const double uv = u.eval(x);
                for (std::size_t p = 0; p < u.idx.size(); ++p) df.add(u.idx[p], -2.0 * uv * u.coef[p]);
            }
            a.add_grad(df, -1.0 / f);
            a.add_rank1(df, 1.0 / (f * f));
            // - hess f / f = -(2 dt dt' - 2 sum du du') / f
            a.add_rank1(s.t, -2.0 / f);
            for (const auto& u : s.u) a.add_rank1(u, 2.0 / f);
        }
        for (const auto& q : c.quad) {
            // g = lin - sum e_i^2;  B = -log g;  hess = dg dg' / g^2 + 2 sum de de' / g
            const double gv = quad_gap(q, x);
            LinExpr dg = q.lin;
            for (const auto& e : q.sq) {
                const double ev = e.eval(x);
                for (std::size_t p = 0; p < e.idx.size(); ++p) dg.add(e.idx[p], -2.0 * ev * e.coef[p]);
            }
            a.add_grad(dg, -1.0 / gv);
            a.add_rank1(dg, 1.0 / (gv * gv));
            for (const auto& e : q.sq) a.add_rank1(e, 2.0 / gv);
        }
        for (const auto& l : c.lmi) {
            const Eigen::MatrixXd sv = lmi_value(l, x);
            Eigen::LLT<Eigen::MatrixXd> llt(sv);
            const Eigen::MatrixXd tinv = llt.solve(Eigen::MatrixXd::Identity(l.dim, l.dim));
            const int d = l.dim;
            const double* tp = tinv.data();
            const std::size_t nv = l.vars.size();
            for (std::size_t i = 0; i < nv; ++i) {
                double gi = 0.0;
                for (const auto& [flat, v] : l.entries[i]) gi += v * tp[flat];
                g[l.vars[i]] -= gi;
            }
            // tr(T Gi T Gj) = sum_{(a,b) in Gi} sum_{(c,e) in Gj} gi_ab gj_ce T_bc T_ea
            for (std::size_t i = 0; i < nv; ++i) {
                for (std::size_t j = i; j < nv; ++j) {
                    double h = 0.0;
                    for (const auto& [fi, vi] : l.entries[i]) {
                        const int ra = fi / d, cb = fi % d;
                        for (const auto& [fj, vj] : l.entries[j]) {
                            const int rc = fj / d, ce = fj % d;
                            h += vi * vj * tp[cb * d + rc] * tp[ce * d + ra];
                        }
                    }
                    a.add_entry(l.vars[i], l.vars[j], h);
                    if (i != j) a.add_entry(l.vars[j], l.vars[i], h);
                }
            }
        }
    }

    enum class CenterOutcome { centered, stalled, failed, unbounded, early_exit };

    /// Damped Newton centering of -t f0 + B. `stop` is checked after each step.
    template <class Stop>
    CenterOutcome center(const Compiled& c, Eigen::VectorXd& x, double t, const Options& opt, int& newton_budget, Stop&& stop,
                         int limit = 0)
    {
        Assembler a(c.n);
        auto phi = [&](const Eigen::VectorXd& z) {
            const double b = barrier(c, z);
            if (!std::isfinite(b)) return std::numeric_limits<double>::infinity();
            const double f = objective(c, z);
            if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();
            return -t * f + b;
        };
        double cur = phi(x);
        if (!std::isfinite(cur)) return CenterOutcome::failed;
        Eigen::VectorXd dx;
        int sticky = 0;
        int steps = 0;
        while (newton_budget-- > 0) {
            if (limit > 0 && steps++ >= limit) return CenterOutcome::failed;
            assemble(c, x, t, a);
            const Eigen::VectorXd g = a.grad();
            if (!a.solve(-g, dx)) return CenterOutcome::failed;
            const double lambda2 = -g.dot(dx);
            if (!std::isfinite(lambda2)) return CenterOutcome::failed;
            if (lambda2 * 0.5 <= opt.newton_tol) return CenterOutcome::centered;
            double step = 1.0;
            Eigen::VectorXd trial;
            double val = std::numeric_limits<double>::infinity();
            const double slack = 1e-13 * std::max(1.0, std::abs(cur));
            while (step > 1e-12) {
                trial = x + step * dx;
                val = phi(trial);
                if (std::isfinite(val) && val <= cur + 0.25 * step * g.dot(dx) + slack) break;
                step *= 0.5;
            }
            if (step <= 1e-12) return lambda2 < 1e-3 ? CenterOutcome::stalled : CenterOutcome::failed;
            // progress below floating-point resolution counts as centered
            if (cur - val <= 4.0 * slack) {
                x = trial;
                if (++sticky >= 3) return lambda2 < 1e-2 ? CenterOutcome::stalled : CenterOutcome::failed;
            } else {
                sticky = 0;
                x = trial;
            }
            cur = val;
            if (x.lpNorm<Eigen::Infinity>() > opt.unbounded_limit) return CenterOutcome::unbounded;
            if (stop(x)) return CenterOutcome::early_exit;
        }
        return CenterOutcome::stalled;
    }

    inline double initial_t(const Compiled& c, const Eigen::VectorXd& x)
    {
        Assembler a0(c.n), a1(c.n);
        assemble(c, x, 0.0, a0);
        assemble(c, x, 1.0, a1);
        const Eigen::VectorXd gb = a0.grad();
        const Eigen::VectorXd gf = a1.grad() - gb; // -grad f0
        const double nf = gf.squaredNorm();
        if (!(nf > 0.0)) return 1.0;
        const double t = -gf.dot(gb) / nf;
        return std::clamp(t, 1e-3, 1e6);
    }

    /// Largest violation over the normalized constraints of a compiled problem.
    inline double compiled_violation(const Compiled& c, const Eigen::VectorXd& x)
    {
        double v = -std::numeric_limits<double>::infinity();
        for (const auto& e : c.lin) v = std::max(v, -e.eval(x));
        for (const auto& sc : c.soc) {
            double uu = 0.0;
            for (const auto& u : sc.u) uu += std::pow(u.eval(x), 2);
            v = std::max(v, std::sqrt(uu) - sc.t.eval(x));
        }
        for (const auto& q : c.quad) v = std::max(v, -quad_gap(q, x));
        for (const auto& l : c.lmi) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lmi_value(l, x), Eigen::EigenvaluesOnly);
            v = std::max(v, -es.eigenvalues()[0]);
        }
        return v;
    }

    /// Largest violation of any constraint at x (positive = violated) and its tag.
    inline double max_violation(const Problem& p, const Eigen::VectorXd& x, Tag* worst)
    {
        double v = -std::numeric_limits<double>::infinity();
        auto upd = [&](double val, const Tag& tag) {
            if (val > v) {
                v = val;
                if (worst) *worst = tag;
            }
        };
        for (const auto& l : p.linear_constraints()) upd(-l.expr.eval(x), l.tag);
        for (const auto& l : p.log_terms()) upd(-l.arg.eval(x), l.tag);
        for (const auto& s : p.soc_constraints()) {
            double uu = 0.0;
            for (const auto& u : s.u) uu += std::pow(u.eval(x), 2);
            upd(std::sqrt(uu) - s.t.eval(x), s.tag);
        }
        for (const auto& q : p.quad_constraints()) upd(-quad_gap(q, x), q.tag);
        for (const auto& m : p.psd_constraints()) {
            const Lmi l = compile_lmi(m, -1);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lmi_value(l, x), Eigen::EigenvaluesOnly);
            upd(-es.eigenvalues()[0], m.tag);
        }
        return v;
    }

} // namespace detail

/// Solves the problem. `start`, when given and strictly feasible, skips Phase I.
inline Result solve(const Problem& p, const Options& opt = {}, const Eigen::VectorXd* start = nullptr)
{
    Result res;
    const int n = p.num_variables();
    Eigen::VectorXd x = start ? *start : Eigen::VectorXd::Zero(n);
    if (x.size() != n) x = Eigen::VectorXd::Zero(n);

    const detail::Compiled main = detail::compile(p, false);

    if (n == 0) {
        Tag worst;
        res.x = x;
        if (detail::max_violation(p, x, &worst) >= 0.0) {
            res.status = Status::infeasible;
            res.worst_constraint = worst;
            return res;
        }
        res.status = Status::optimal;
        res.interior = true;
        res.objective = p.objective(x);
        res.gap = 0.0;
        return res;
    }

    int budget = opt.max_newton;
    if (!std::isfinite(detail::barrier(main, x))) {
        // Phase I: minimize s subject to every cone shifted by s.
        const detail::Compiled ph1 = detail::compile(p, true);
        Eigen::VectorXd z(n + 1);
        z.head(n) = x;
        z[n] = 0.0;
        z[n] = std::max(detail::compiled_violation(ph1, z), 0.0) + 1.0;
        auto feasible_now = [&](const Eigen::VectorXd& zz) { return zz[n] < 0.0; };
        double t = 1.0;
        bool found = false;
        for (int outer = 0; outer < 200 && budget > 0; ++outer) {
            const auto out = detail::center(ph1, z, t, opt, budget, feasible_now);
            res.newton_iterations = opt.max_newton - budget;
            if (out == detail::CenterOutcome::early_exit || z[n] < 0.0) {
                found = true;
                break;
            }
            if (out == detail::CenterOutcome::failed) {
                res.status = Status::numerical_failure;
                return res;
            }
            const double gap = ph1.degree / t;
            if (gap < opt.tol * std::max(1.0, std::abs(z[n])) || gap < 1e-12) break;
            t *= opt.mu;
        }
        if (!found) {
            Tag worst;
            detail::max_violation(p, z.head(n), &worst);
            res.status = Status::infeasible;
            res.worst_constraint = worst;
            res.x = z.head(n);
            return res;
        }
        x = z.head(n);
        if (!std::isfinite(detail::barrier(main, x))) {
            res.status = Status::numerical_failure;
            return res;
        }
    }

    // start below the best-fit central-path value: centering from a far point is cheaper at small t
    double t = 1e-2 * detail::initial_t(main, x);
    auto never = [](const Eigen::VectorXd&) { return false; };
    for (;;) {
        const auto out = detail::center(main, x, t, opt, budget, never, opt.center_limit);
        if (out == detail::CenterOutcome::unbounded) {
            res.status = Status::unbounded;
            res.x = x;
            return res;
        }
        if (out == detail::CenterOutcome::failed) {
            res.status = Status::numerical_failure;
            res.x = x;
            res.objective = detail::objective(main, x);
            res.gap = main.degree / t;
            res.interior = std::isfinite(detail::barrier(main, x));
            res.newton_iterations = opt.max_newton - budget;
            return res;
        }
        const double f = detail::objective(main, x);
        const double gap = main.degree / t;
        if (std::abs(f) > opt.unbounded_limit) {
            res.status = Status::unbounded;
            res.x = x;
            return res;
        }
        if (gap <= opt.tol * std::max(1.0, std::abs(f)) || main.degree == 0.0) {
            res.status = Status::optimal;
            res.interior = true;
            res.x = x;
            res.objective = f;
            res.gap = gap;
            break;
        }
        if (budget <= 0) {
            // Out of iterations: report what was reached.
            res.status = gap <= 1e3 * opt.tol * std::max(1.0, std::abs(f)) ? Status::optimal : Status::numerical_failure;
            res.interior = true;
            res.x = x;
            res.objective = f;
            res.gap = gap;
            break;
        }
        t *= opt.mu;
    }
    res.newton_iterations = opt.max_newton - budget;
    return res;
}

} // namespace uavisac::conic
