#ifndef CIO_KERNEL_HPP
#define CIO_KERNEL_HPP

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "cio/common.hpp"
#include "cio/lp.hpp"
#include "cio/types.hpp"

namespace cio {

/// tau-th largest element (1-based, duplicates counted with multiplicity).
inline double quantile_gamma(Vec values, int tau) {
    const int n = static_cast<int>(values.size());
    if (tau < 1 || tau > n) throw Error("quantile_gamma: tau out of range");
    std::nth_element(values.begin(), values.begin() + (tau - 1), values.end(),
                     std::greater<double>());
    return values[tau - 1];
}

struct CapSupport {
    double value = 0.0;
    Vec argmax;
};

/// max { theta' x : ||theta||=1, theta' center >= cos(alpha) } in closed form.
/// Decompose x = a*center + p with p orthogonal to the center. If x lies
/// within the cap's angle the maximizer is x/||x||; otherwise it sits on the
/// cap boundary in the span of (center, p).
inline CapSupport spherical_cap_support(const Vec& x, const ConeUncertaintySet& cone) {
    const Vec& cen = cone.center().values();
    if (x.size() != cen.size()) throw Error("spherical_cap_support: dimension mismatch");
    const double alpha = cone.half_angle();
    const double nx = norm2(x);
    if (nx == 0.0) return {0.0, cen};

    const double a = dot(x, cen);
    Vec p = x;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= a * cen[i];
    const double np = norm2(p);
    const double ang = std::atan2(np, a);  // angle(x, center) in [0, pi]

    if (ang <= alpha + 1e-15) return {nx, scaled(x, 1.0 / nx)};

    Vec q;
    if (np > 1e-14) {
        q = scaled(p, 1.0 / np);
    } else {
        // x is anti-parallel to the center: any unit direction orthogonal to
        // the center attains the boundary value. Pick one deterministically.
        q.assign(cen.size(), 0.0);
        std::size_t k = 0;
        for (std::size_t i = 1; i < cen.size(); ++i)
            if (std::abs(cen[i]) < std::abs(cen[k])) k = i;
        q[k] = 1.0;
        const double proj = dot(q, cen);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] -= proj * cen[i];
        q = normalized(q);
    }
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    Vec arg(cen.size());
    for (std::size_t i = 0; i < arg.size(); ++i) arg[i] = ca * cen[i] + sa * q[i];
    return {a * ca + np * sa, std::move(arg)};
}

/// min over the cap; mirror of the support function.
inline CapSupport spherical_cap_min(const Vec& x, const ConeUncertaintySet& cone) {
    Vec neg = x;
    for (double& v : neg) v = -v;
    CapSupport s = spherical_cap_support(neg, cone);
    return {-s.value, std::move(s.argmax)};
}

struct LinearConstraint {
    Vec coeffs;
    RowSense sense = RowSense::le;
    double rhs = 0.0;
};

struct KelleyResult {
    Vec theta;        // ball-variable part of the solution
    Vec x;            // full original variable vector of the final LP solve
    double value = 0.0;
    int iterations = 0;
    int cuts = 0;
};

struct KelleyOptions {
    int max_iter = 600;
    // rows are homogeneous (the feasible set is a cone), so normalized
    // iterates are feasible and provide valid lower bounds
    bool conic_rows = false;
    // tie-break target in ball-variable space; a tiny L1-distance penalty
    // keeps the simplex off degenerate optimal faces
    const Vec* anchor = nullptr;
};

/// Maximizes lp's objective subject to its rows plus ||x[ball_vars]||_2 <= 1
/// by Kelley outer approximation: the ball is linearized with cuts
/// theta'(theta_hat/||theta_hat||) <= 1 at each violating iterate, re-solving
/// until ||theta_hat|| <= 1 + 1e-6 (or, for conic rows, until the outer LP
/// value meets the best normalized feasible iterate).
inline KelleyResult kelley_ball_max(LinearProgram lp, const std::vector<int>& ball_vars,
                                    const KelleyOptions& opt = {}) {
    if (lp.sense != Sense::maximize) throw Error("kelley_ball_max: expected a max problem");
    const int n_orig = lp.num_vars();
    const int nb = static_cast<int>(ball_vars.size());
    for (int j : ball_vars) {
        lp.lower[j] = std::max(lp.lower[j], -1.0);
        lp.upper[j] = std::min(lp.upper[j], 1.0);
    }
    const Vec pure_c = lp.c;

    static constexpr double kAnchorEps = 1e-7;
    int j_t = -1;
    if (opt.anchor) {
        if (static_cast<int>(opt.anchor->size()) != nb)
            throw Error("kelley_ball_max: anchor dimension mismatch");
        j_t = lp.add_vars(nb, 0.0, kInf, -kAnchorEps);
        for (int i = 0; i < nb; ++i) {
            lp.add_row_sparse({{ball_vars[i], 1.0}, {j_t + i, -1.0}}, RowSense::le,
                              (*opt.anchor)[i]);
            lp.add_row_sparse({{ball_vars[i], -1.0}, {j_t + i, -1.0}}, RowSense::le,
                              -(*opt.anchor)[i]);
        }
    }

    auto pure_value = [&](const Vec& x) {
        double v = 0.0;
        for (int j = 0; j < n_orig; ++j) v += pure_c[j] * x[j];
        return v;
    };

    KelleyResult out;
    double best_lb = -kInf;
    Vec best_q;
    for (int it = 0; it < opt.max_iter; ++it) {
        const LpSolution sol = simplex_solve(lp);
        if (sol.status == LpStatus::infeasible)
            throw Error("kelley_ball_max: constraint system infeasible");
        if (sol.status == LpStatus::unbounded)
            throw Error("kelley_ball_max: unbounded despite ball box (bad model)");
        Vec theta(nb);
        for (int i = 0; i < nb; ++i) theta[i] = sol.x[ball_vars[i]];
        const double nt = norm2(theta);
        out.x.assign(sol.x.begin(), sol.x.begin() + n_orig);
        out.iterations = it + 1;

        if (nt <= 1.0 + tol::ball_violation) {
            out.theta = std::move(theta);
            out.value = pure_value(out.x);
            return out;
        }

        if (opt.conic_rows && nt > 0.0) {
            Vec q = scaled(theta, 1.0 / nt);
            double lb = 0.0;
            for (int i = 0; i < nb; ++i) lb += pure_c[ball_vars[i]] * q[i];
            if (lb > best_lb) {
                best_lb = lb;
                best_q = std::move(q);
            }
        }

        std::vector<std::pair<int, double>> cut;
        cut.reserve(nb);
        for (int i = 0; i < nb; ++i) cut.emplace_back(ball_vars[i], theta[i] / nt);
        lp.add_row_sparse(cut, RowSense::le, 1.0);
        ++out.cuts;

        if (opt.conic_rows && best_lb > -kInf && (it % 5) == 4) {
            // rigorous gap check: the outer LP without the anchor penalty
            LinearProgram pure = lp;
            if (j_t >= 0)
                for (int i = 0; i < nb; ++i) pure.c[j_t + i] = 0.0;
            const LpSolution ub_sol = simplex_solve(pure);
            if (ub_sol.status == LpStatus::optimal &&
                ub_sol.objective - best_lb <= tol::ball_violation) {
                out.theta = best_q;
                out.x.assign(n_orig, 0.0);
                for (int i = 0; i < nb; ++i) out.x[ball_vars[i]] = best_q[i];
                out.value = best_lb;
                return out;
            }
        }
    }
    throw Error("kelley_ball_max: iteration cap exceeded");
}

struct BallLpResult {
    double value = 0.0;
    Vec argmax;
    int iterations = 0;
};

/// max { c' theta : linear rows on theta, ||theta||_2 <= 1 }.
inline BallLpResult ball_constrained_lp_max(const Vec& c,
                                            const std::vector<LinearConstraint>& rows,
                                            int max_iter = 500) {
    const int d = static_cast<int>(c.size());
    LinearProgram lp;
    lp.sense = Sense::maximize;
    lp.add_vars(d, -kInf, kInf);
    lp.c = c;
    std::vector<int> ball(d);
    for (int j = 0; j < d; ++j) ball[j] = j;
    for (const auto& r : rows) {
        if (static_cast<int>(r.coeffs.size()) != d)
            throw Error("ball_constrained_lp_max: row dimension mismatch");
        lp.add_row(r.coeffs, r.sense, r.rhs);
    }
    KelleyOptions opt;
    opt.max_iter = max_iter;
    KelleyResult k = kelley_ball_max(std::move(lp), ball, opt);
    BallLpResult out;
    out.value = k.value;
    out.argmax = k.theta;
    out.iterations = k.iterations;
    return out;
}

struct ConeProjectionResult {
    Vec residual;       // b - y*, i.e. the projection of b onto the polar cone
    double norm = 0.0;  // ||residual||
    int lmo_calls = 0;
};

/// Generator oracle: argmax_{g in G} r'g over the (possibly huge) generator
/// set of a cone, together with exactness of the maximization.
using GeneratorOracle = std::function<Vec(const Vec& direction)>;

/// Projects b onto cone(G) by the min-norm-point / Lawson-Hanson active-set
/// scheme with delayed generator generation: the residual r = b - y is
/// optimal once max_g r'g <= 0. The returned residual is the projection of b
/// onto the polar cone of cone(G); its norm is max { b'theta : theta in
/// polar(G), ||theta|| <= 1 } by Moreau's decomposition.
inline ConeProjectionResult project_onto_cone(const Vec& b, const GeneratorOracle& lmo,
                                              int max_iter = 500) {
    const std::size_t n = b.size();
    std::vector<Vec> gens;
    Vec lam;
    Vec y(n, 0.0);

    auto rebuild_y = [&] {
        y.assign(n, 0.0);
        for (std::size_t i = 0; i < gens.size(); ++i)
            for (std::size_t j = 0; j < n; ++j) y[j] += lam[i] * gens[i][j];
    };
    // unconstrained least squares over the active set (ridge-stabilized)
    auto affine_weights = [&]() {
        const std::size_t m = gens.size();
        std::vector<Vec> G(m, Vec(m, 0.0));
        Vec rhs(m, 0.0);
        double trace = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i; j < m; ++j) {
                const double v = dot(gens[i], gens[j]);
                G[i][j] = v;
                G[j][i] = v;
            }
            trace += G[i][i];
            rhs[i] = dot(gens[i], b);
        }
        const double ridge = 1e-12 * (1.0 + trace / std::max<std::size_t>(1, m));
        for (std::size_t i = 0; i < m; ++i) G[i][i] += ridge;
        // gaussian elimination with partial pivoting
        Vec mu(m, 0.0);
        std::vector<int> idx(m);
        for (std::size_t i = 0; i < m; ++i) idx[i] = static_cast<int>(i);
        for (std::size_t c = 0; c < m; ++c) {
            std::size_t piv = c;
            for (std::size_t r2 = c + 1; r2 < m; ++r2)
                if (std::abs(G[r2][c]) > std::abs(G[piv][c])) piv = r2;
            std::swap(G[c], G[piv]);
            std::swap(rhs[c], rhs[piv]);
            if (std::abs(G[c][c]) < 1e-300) continue;
            for (std::size_t r2 = 0; r2 < m; ++r2) {
                if (r2 == c) continue;
                const double f = G[r2][c] / G[c][c];
                if (f == 0.0) continue;
                for (std::size_t cc = c; cc < m; ++cc) G[r2][cc] -= f * G[c][cc];
                rhs[r2] -= f * rhs[c];
            }
        }
        for (std::size_t i = 0; i < m; ++i)
            mu[i] = std::abs(G[i][i]) < 1e-300 ? 0.0 : rhs[i] / G[i][i];
        return mu;
    };

    ConeProjectionResult out;
    for (int it = 0; it < max_iter; ++it) {
        Vec r = b;
        for (std::size_t j = 0; j < n; ++j) r[j] -= y[j];
        const Vec g = lmo(r);
        ++out.lmo_calls;
        const double viol = dot(r, g);
        const double scale = std::max(1.0, norm2(r) * norm2(g));
        if (viol <= 1e-10 * scale) {
            out.residual = std::move(r);
            out.norm = norm2(out.residual);
            return out;
        }
        gens.push_back(g);
        lam.push_back(0.0);

        for (int minor = 0; minor < 1000; ++minor) {
            const Vec mu = affine_weights();
            bool ok = true;
            for (double v : mu)
                if (v < -1e-12) ok = false;
            if (ok) {
                lam = mu;
                break;
            }
            double t = 1.0;
            for (std::size_t i = 0; i < mu.size(); ++i)
                if (mu[i] < 0.0 && lam[i] > mu[i])
                    t = std::min(t, lam[i] / (lam[i] - mu[i]));
            for (std::size_t i = 0; i < mu.size(); ++i)
                lam[i] = lam[i] + t * (mu[i] - lam[i]);
            for (std::size_t i = gens.size(); i-- > 0;) {
                if (lam[i] <= 1e-14) {
                    gens.erase(gens.begin() + i);
                    lam.erase(lam.begin() + i);
                }
            }
            if (gens.empty()) break;
        }
        rebuild_y();
    }
    throw Error("project_onto_cone: iteration cap exceeded");
}

}  // namespace cio

#endif  // CIO_KERNEL_HPP
