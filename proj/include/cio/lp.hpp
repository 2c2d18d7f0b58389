#ifndef CIO_LP_HPP
#define CIO_LP_HPP

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "cio/common.hpp"
#include "cio/types.hpp"

namespace cio {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { le, eq, ge };
enum class LpStatus { optimal, infeasible, unbounded };

/// Dense LP: optimize c'x subject to row constraints and variable bounds.
/// Free variables are allowed (lower = -inf).
struct LinearProgram {
    Sense sense = Sense::minimize;
    Vec c;
    std::vector<Vec> A;
    std::vector<RowSense> row_sense;
    Vec b;
    Vec lower;
    Vec upper;

    int num_vars() const { return static_cast<int>(c.size()); }
    int num_rows() const { return static_cast<int>(A.size()); }

    /// Appends k variables with the given bounds; returns the first index.
    /// Existing rows are padded with zero coefficients.
    int add_vars(int k, double lo, double hi, double cost = 0.0) {
        const int first = num_vars();
        for (int i = 0; i < k; ++i) {
            c.push_back(cost);
            lower.push_back(lo);
            upper.push_back(hi);
        }
        for (auto& row : A) row.resize(c.size(), 0.0);
        return first;
    }

    void add_row(Vec row, RowSense s, double rhs) {
        if (static_cast<int>(row.size()) != num_vars())
            throw Error("LinearProgram: row size mismatch");
        A.push_back(std::move(row));
        row_sense.push_back(s);
        b.push_back(rhs);
    }

    void add_row_sparse(const std::vector<std::pair<int, double>>& terms, RowSense s,
                        double rhs) {
        Vec row(num_vars(), 0.0);
        for (auto [j, v] : terms) {
            if (j < 0 || j >= num_vars()) throw Error("LinearProgram: bad column index");
            row[j] += v;
        }
        add_row(std::move(row), s, rhs);
    }

    void validate() const {
        const int n = num_vars();
        if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n)
            throw Error("LinearProgram: bound size mismatch");
        if (!all_finite(c)) throw Error("LinearProgram: non-finite objective");
        for (int j = 0; j < n; ++j) {
            if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j])
                throw Error("LinearProgram: inconsistent bounds");
        }
        for (int i = 0; i < num_rows(); ++i) {
            if (!all_finite(A[i]) || !std::isfinite(b[i]))
                throw Error("LinearProgram: non-finite row");
        }
    }
};

struct LpSolution {
    LpStatus status = LpStatus::optimal;
    Vec x;             // primal values in the original variable space
    double objective = 0.0;  // in the original sense
    Vec duals;         // per original row; see convention below
    int iterations = 0;
};

// Dual convention: for minimize, duals satisfy y_i <= 0 on `<=` rows and
// y_i >= 0 on `>=` rows; for maximize the signs are flipped. With zero lower
// bounds, b'y equals the optimal objective.

namespace lpdetail {

struct Canonical {
    // min c'z  s.t.  A z (sense) b,  z >= 0
    Vec c;
    std::vector<Vec> A;
    std::vector<RowSense> sense;
    Vec b;
    double obj_shift = 0.0;

    // variable reconstruction: x = shift + sign*z[col] (col2 < 0), or
    // x = z[col] - z[col2] for split free variables.
    struct VarMap {
        int col = -1;
        int col2 = -1;
        double shift = 0.0;
        double sign = 1.0;
    };
    std::vector<VarMap> vmap;
    int orig_rows = 0;  // first orig_rows rows map 1:1 to user rows
};

inline Canonical canonicalize(const LinearProgram& lp) {
    lp.validate();
    Canonical P;
    const int n = lp.num_vars();
    const double sgn_obj = lp.sense == Sense::minimize ? 1.0 : -1.0;

    P.vmap.resize(n);
    std::vector<double> ub_row_bound;  // z upper bounds realized as rows later
    std::vector<int> ub_row_col;
    for (int j = 0; j < n; ++j) {
        auto& m = P.vmap[j];
        const double lo = lp.lower[j], hi = lp.upper[j];
        if (lo == -kInf && hi == kInf) {
            m.col = static_cast<int>(P.c.size());
            m.col2 = m.col + 1;
            P.c.push_back(sgn_obj * lp.c[j]);
            P.c.push_back(-sgn_obj * lp.c[j]);
        } else if (lo != -kInf) {
            m.col = static_cast<int>(P.c.size());
            m.shift = lo;
            m.sign = 1.0;
            P.c.push_back(sgn_obj * lp.c[j]);
            P.obj_shift += sgn_obj * lp.c[j] * lo;
            if (hi != kInf) {
                ub_row_col.push_back(m.col);
                ub_row_bound.push_back(hi - lo);
            }
        } else {  // lo = -inf, hi finite: x = hi - z
            m.col = static_cast<int>(P.c.size());
            m.shift = hi;
            m.sign = -1.0;
            P.c.push_back(-sgn_obj * lp.c[j]);
            P.obj_shift += sgn_obj * lp.c[j] * hi;
        }
    }
    const int nz = static_cast<int>(P.c.size());

    P.orig_rows = lp.num_rows();
    for (int i = 0; i < lp.num_rows(); ++i) {
        Vec row(nz, 0.0);
        double rhs = lp.b[i];
        for (int j = 0; j < n; ++j) {
            const double a = lp.A[i][j];
            if (a == 0.0) continue;
            const auto& m = P.vmap[j];
            if (m.col2 >= 0) {
                row[m.col] += a;
                row[m.col2] -= a;
            } else {
                row[m.col] += a * m.sign;
                rhs -= a * m.shift;
            }
        }
        P.A.push_back(std::move(row));
        P.sense.push_back(lp.row_sense[i]);
        P.b.push_back(rhs);
    }
    for (std::size_t k = 0; k < ub_row_col.size(); ++k) {
        Vec row(nz, 0.0);
        row[ub_row_col[k]] = 1.0;
        P.A.push_back(std::move(row));
        P.sense.push_back(RowSense::le);
        P.b.push_back(ub_row_bound[k]);
    }
    return P;
}

struct TableauResult {
    LpStatus status = LpStatus::optimal;
    Vec z;
    Vec pi;  // row multipliers of the canonical rows (0 for redundant rows)
    double objective = 0.0;  // canonical objective c'z
    int iterations = 0;
};

/// Two-phase dense tableau simplex on the canonical form. Dantzig pricing
/// with a permanent switch to Bland's rule after a stall, which guarantees
/// termination.
class Tableau {
public:
    explicit Tableau(const Canonical& P) : P_(P) { build(); }

    TableauResult solve() {
        TableauResult res;
        if (has_artificial_) {
            if (!run(true)) {
                // iteration cap inside run() throws; phase 1 cannot be unbounded
            }
            if (obj_value(p1_) > 1e-7) {
                res.status = LpStatus::infeasible;
                res.iterations = iters_;
                return res;
            }
            drive_out_artificials();
        }
        if (!run(false)) {
            res.status = LpStatus::unbounded;
            res.iterations = iters_;
            return res;
        }
        res.status = LpStatus::optimal;
        res.iterations = iters_;
        res.z.assign(n_struct_, 0.0);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_struct_) res.z[basis_[i]] = rhs(i);
        res.objective = dot_c(res.z);
        res.pi.assign(P_.A.size(), 0.0);
        for (int i = 0; i < m_; ++i) {
            const int orig = row_id_[i];
            // multiplier = -(phase-2 reduced cost of the row's initial unit column)
            res.pi[orig] = -row(p2_)[init_col_[orig]] * flip_[orig];
        }
        return res;
    }

private:
    const Canonical& P_;
    int m_ = 0;           // live constraint rows
    int n_struct_ = 0;    // structural columns
    int n_total_ = 0;     // structural + slack/surplus + artificial
    int width_ = 0;       // n_total_ + 1 (rhs)
    int p1_ = 0, p2_ = 0;  // indices of the cost rows
    bool has_artificial_ = false;
    bool bland_ = false;
    int iters_ = 0;
    std::vector<double> T_;
    std::vector<int> basis_;
    std::vector<int> row_id_;    // live row -> canonical row index
    std::vector<int> init_col_;  // canonical row -> its initial unit column
    std::vector<double> flip_;   // canonical row -> +-1 (b >= 0 normalization)
    std::vector<char> is_artificial_;

    double* row(int i) { return T_.data() + static_cast<std::size_t>(i) * width_; }
    const double* row(int i) const { return T_.data() + static_cast<std::size_t>(i) * width_; }
    double rhs(int i) const { return row(i)[width_ - 1]; }
    double obj_value(int cost_row) const { return -row(cost_row)[width_ - 1]; }

    double dot_c(const Vec& z) const {
        double s = 0.0;
        for (int j = 0; j < n_struct_; ++j) s += P_.c[j] * z[j];
        return s;
    }

    void build() {
        const int rows = static_cast<int>(P_.A.size());
        m_ = rows;
        n_struct_ = static_cast<int>(P_.c.size());
        // count extra columns
        int n_slack = 0, n_art = 0;
        std::vector<RowSense> sense(rows);
        flip_.assign(rows, 1.0);
        for (int i = 0; i < rows; ++i) {
            sense[i] = P_.sense[i];
            if (P_.b[i] < 0.0) {
                flip_[i] = -1.0;
                if (sense[i] == RowSense::le)
                    sense[i] = RowSense::ge;
                else if (sense[i] == RowSense::ge)
                    sense[i] = RowSense::le;
            }
            if (sense[i] != RowSense::eq) ++n_slack;
            if (sense[i] != RowSense::le) ++n_art;
        }
        has_artificial_ = n_art > 0;
        n_total_ = n_struct_ + n_slack + n_art;
        width_ = n_total_ + 1;
        T_.assign(static_cast<std::size_t>(rows + 2) * width_, 0.0);
        p1_ = rows;
        p2_ = rows + 1;
        basis_.assign(rows, -1);
        row_id_.resize(rows);
        init_col_.assign(rows, -1);
        is_artificial_.assign(n_total_, 0);

        int next_slack = n_struct_;
        int next_art = n_struct_ + n_slack;
        for (int i = 0; i < rows; ++i) {
            row_id_[i] = i;
            double* r = row(i);
            for (int j = 0; j < n_struct_; ++j) r[j] = flip_[i] * P_.A[i][j];
            r[width_ - 1] = flip_[i] * P_.b[i];
            if (sense[i] == RowSense::le) {
                r[next_slack] = 1.0;
                basis_[i] = next_slack;
                init_col_[i] = next_slack;
                ++next_slack;
            } else if (sense[i] == RowSense::ge) {
                r[next_slack] = -1.0;
                ++next_slack;
                r[next_art] = 1.0;
                is_artificial_[next_art] = 1;
                basis_[i] = next_art;
                init_col_[i] = next_art;
                ++next_art;
            } else {
                r[next_art] = 1.0;
                is_artificial_[next_art] = 1;
                basis_[i] = next_art;
                init_col_[i] = next_art;
                ++next_art;
            }
        }
        // phase-2 reduced costs: basis is slack/artificial with zero cost
        double* r2 = row(p2_);
        for (int j = 0; j < n_struct_; ++j) r2[j] = P_.c[j];
        // phase-1 reduced costs: subtract artificial-basic rows
        if (has_artificial_) {
            double* r1 = row(p1_);
            for (int i = 0; i < rows; ++i) {
                if (!is_artificial_[basis_[i]]) continue;
                const double* ri = row(i);
                for (int j = 0; j < width_; ++j) r1[j] -= ri[j];
                r1[basis_[i]] += 1.0;  // cost 1 of the basic artificial
            }
        }
    }

    void pivot(int r, int jcol, int cost_row_a, int cost_row_b) {
        double* pr = row(r);
        const double piv = pr[jcol];
        const double inv = 1.0 / piv;
        for (int j = 0; j < width_; ++j) pr[j] *= inv;
        pr[jcol] = 1.0;
        auto eliminate = [&](int i) {
            double* ri = row(i);
            const double f = ri[jcol];
            if (f == 0.0) return;
            for (int j = 0; j < width_; ++j) ri[j] -= f * pr[j];
            ri[jcol] = 0.0;
        };
        for (int i = 0; i < m_; ++i)
            if (i != r) eliminate(i);
        eliminate(cost_row_a);
        if (cost_row_b >= 0) eliminate(cost_row_b);
        basis_[r] = jcol;
        ++iters_;
        if (iters_ > 2'000'000)
            throw Error("simplex: iteration limit exceeded (numerical breakdown?)");
        if (std::abs(pr[width_ - 1]) > 1e13)
            throw Error("simplex: tableau blow-up (ill-conditioned problem)");
    }

    // returns false when the phase objective is unbounded (phase 2 only)
    bool run(bool phase1) {
        const int cost_row = phase1 ? p1_ : p2_;
        const int other_row = phase1 ? p2_ : -1;
        double last_obj = obj_value(cost_row);
        int stall = 0;
        for (;;) {
            const double* rc = row(cost_row);
            int enter = -1;
            if (bland_) {
                for (int j = 0; j < n_total_; ++j) {
                    if (!phase1 && is_artificial_[j]) continue;
                    if (rc[j] < -1e-9) {
                        enter = j;
                        break;
                    }
                }
            } else {
                double best = -1e-9;
                for (int j = 0; j < n_total_; ++j) {
                    if (!phase1 && is_artificial_[j]) continue;
                    if (rc[j] < best) {
                        best = rc[j];
                        enter = j;
                    }
                }
            }
            if (enter < 0) return true;  // optimal for this phase

            int leave = -1;
            double best_ratio = kInf, best_piv = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double a = row(i)[enter];
                if (a <= 1e-9) continue;
                const double ratio = rhs(i) / a;
                bool take;
                if (leave < 0)
                    take = true;
                else if (ratio < best_ratio - 1e-12)
                    take = true;
                else if (ratio > best_ratio + 1e-12)
                    take = false;
                else if (bland_)
                    take = basis_[i] < basis_[leave];
                else if (std::abs(a) > std::abs(best_piv) + 1e-12)
                    take = true;
                else if (std::abs(a) < std::abs(best_piv) - 1e-12)
                    take = false;
                else
                    take = basis_[i] < basis_[leave];
                if (take) {
                    leave = i;
                    best_ratio = ratio;
                    best_piv = a;
                }
            }
            if (leave < 0) {
                if (phase1) throw Error("simplex: phase-1 unbounded (internal error)");
                return false;  // unbounded
            }
            pivot(leave, enter, cost_row, other_row);
            const double obj = obj_value(cost_row);
            if (obj < last_obj - 1e-12) {
                last_obj = obj;
                stall = 0;
            } else if (!bland_ && ++stall > 4000) {
                bland_ = true;  // anti-cycling guarantee from here on
                stall = 0;
            }
        }
    }

    void drive_out_artificials() {
        for (int i = 0; i < m_;) {
            if (!is_artificial_[basis_[i]]) {
                ++i;
                continue;
            }
            int jcol = -1;
            const double* ri = row(i);
            for (int j = 0; j < n_total_; ++j) {
                if (is_artificial_[j]) continue;
                if (std::abs(ri[j]) > 1e-7) {
                    jcol = j;
                    break;
                }
            }
            if (jcol >= 0) {
                pivot(i, jcol, p1_, p2_);
                ++i;
            } else {
                // redundant row: remove by swapping with the last live row
                const int last = m_ - 1;
                if (i != last) {
                    double* a = row(i);
                    double* b = row(last);
                    for (int j = 0; j < width_; ++j) std::swap(a[j], b[j]);
                    std::swap(basis_[i], basis_[last]);
                    std::swap(row_id_[i], row_id_[last]);
                }
                --m_;
            }
        }
    }
};

inline TableauResult solve_canonical(const Canonical& P) { return Tableau(P).solve(); }

inline Vec reconstruct_x(const LinearProgram& lp, const Canonical& P, const Vec& z) {
    Vec x(lp.num_vars());
    for (int j = 0; j < lp.num_vars(); ++j) {
        const auto& m = P.vmap[j];
        if (m.col2 >= 0)
            x[j] = z[m.col] - z[m.col2];
        else
            x[j] = m.shift + m.sign * z[m.col];
    }
    return x;
}

inline double eval_objective(const LinearProgram& lp, const Vec& x) {
    return dot(lp.c, x);
}

inline void check_primal_feasible(const LinearProgram& lp, const Vec& x) {
    double scale = 1.0;
    for (int i = 0; i < lp.num_rows(); ++i) scale = std::max(scale, std::abs(lp.b[i]));
    for (double v : x) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < lp.num_rows(); ++i) {
        const double lhs = dot(lp.A[i], x);
        const double resid = lhs - lp.b[i];
        const double tolr = tol::lp_feasibility * scale * 10.0;
        if (lp.row_sense[i] == RowSense::le && resid > tolr)
            throw Error("simplex: primal residual exceeds tolerance");
        if (lp.row_sense[i] == RowSense::ge && resid < -tolr)
            throw Error("simplex: primal residual exceeds tolerance");
        if (lp.row_sense[i] == RowSense::eq && std::abs(resid) > tolr)
            throw Error("simplex: primal residual exceeds tolerance");
    }
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (x[j] < lp.lower[j] - tol::lp_feasibility * 10.0 ||
            x[j] > lp.upper[j] + tol::lp_feasibility * 10.0)
            throw Error("simplex: bound violation in solution");
    }
}

inline LpSolution solve_direct(const LinearProgram& lp) {
    const Canonical P = canonicalize(lp);
    TableauResult t = solve_canonical(P);
    LpSolution sol;
    sol.status = t.status;
    sol.iterations = t.iterations;
    if (t.status != LpStatus::optimal) return sol;
    sol.x = reconstruct_x(lp, P, t.z);
    check_primal_feasible(lp, sol.x);
    sol.objective = eval_objective(lp, sol.x);
    // duality-gap audit in canonical space
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < P.b.size(); ++i) dual_obj += t.pi[i] * P.b[i];
    const double gap = std::abs(t.objective - dual_obj);
    if (gap > 1e-7 * std::max(1.0, std::abs(t.objective)))
        throw Error("simplex: strong-duality audit failed (numerical breakdown)");
    const double sgn = lp.sense == Sense::minimize ? 1.0 : -1.0;
    sol.duals.assign(lp.num_rows(), 0.0);
    for (int i = 0; i < lp.num_rows(); ++i) sol.duals[i] = sgn * t.pi[i];
    return sol;
}

/// Builds the dual of the canonical form and solves it; the primal solution is
/// read off the dual's row multipliers. Pays off when rows >> columns.
inline LpSolution solve_via_dual(const LinearProgram& lp) {
    const Canonical P = canonicalize(lp);
    const int m = static_cast<int>(P.A.size());
    const int n = static_cast<int>(P.c.size());

    LinearProgram D;
    D.sense = Sense::maximize;
    for (int i = 0; i < m; ++i) {
        double lo = -kInf, hi = kInf;
        if (P.sense[i] == RowSense::le) hi = 0.0;
        if (P.sense[i] == RowSense::ge) lo = 0.0;
        D.add_vars(1, lo, hi, P.b[i]);
    }
    // rows: A' y <= c
    for (int j = 0; j < n; ++j) {
        Vec row(m, 0.0);
        for (int i = 0; i < m; ++i) row[i] = P.A[i][j];
        D.add_row(std::move(row), RowSense::le, P.c[j]);
    }
    const Canonical PD = canonicalize(D);
    TableauResult td = solve_canonical(PD);

    LpSolution sol;
    sol.iterations = td.iterations;
    if (td.status == LpStatus::unbounded) {
        sol.status = LpStatus::infeasible;
        return sol;
    }
    if (td.status == LpStatus::infeasible) {
        // primal is unbounded or infeasible; settle it with a direct solve
        return solve_direct(lp);
    }
    // z_j = multiplier of dual row j, negated: D is a max problem solved as min.
    Vec z(n, 0.0);
    for (int j = 0; j < n; ++j) z[j] = -td.pi[j];
    for (double& v : z)
        if (v < 0.0 && v > -1e-9) v = 0.0;
    sol.status = LpStatus::optimal;
    sol.x = reconstruct_x(lp, P, z);
    check_primal_feasible(lp, sol.x);
    sol.objective = eval_objective(lp, sol.x);

    // duals of the original rows are the dual's primal values
    const Vec y = reconstruct_x(D, PD, td.z);
    double primal_canon = 0.0;
    for (int j = 0; j < n; ++j) primal_canon += P.c[j] * z[j];
    double dual_canon = 0.0;
    for (int i = 0; i < m; ++i) dual_canon += P.b[i] * y[i];
    if (std::abs(primal_canon - dual_canon) >
        1e-6 * std::max(1.0, std::abs(primal_canon)))
        throw Error("simplex: dualized solve failed the duality audit");
    const double sgn = lp.sense == Sense::minimize ? 1.0 : -1.0;
    sol.duals.assign(lp.num_rows(), 0.0);
    for (int i = 0; i < lp.num_rows() && i < P.orig_rows; ++i) sol.duals[i] = sgn * y[i];
    return sol;
}

}  // namespace lpdetail

/// Dense two-phase simplex with a Bland anti-cycling fallback. Row-heavy
/// problems are solved through their dual transparently.
inline LpSolution simplex_solve(const LinearProgram& lp) {
    const bool row_heavy = lp.num_rows() > 400 && lp.num_rows() > 3 * lp.num_vars();
    return row_heavy ? lpdetail::solve_via_dual(lp) : lpdetail::solve_direct(lp);
}

}  // namespace cio

#endif  // CIO_LP_HPP
