#ifndef CIO_EXAMPLE1_HPP
#define CIO_EXAMPLE1_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "cio/calibration.hpp"
#include "cio/common.hpp"
#include "cio/evaluation.hpp"
#include "cio/kernel.hpp"
#include "cio/robust.hpp"
#include "cio/types.hpp"

// The 2-D linear program with feasible region
//   x1 + u x2 >= u, 0 <= x1 <= u, 0 <= x2 <= 2   (u > 1)
// and ground truth theta* = (cos pi/4, sin pi/4); perceived parameters are
// uniform on the quarter circle. Everything here is closed-form or
// vertex-exact so the module can serve as ground truth for end-to-end tests.

namespace cio::ex1 {

inline Vec theta_star() { return {std::cos(M_PI / 4), std::sin(M_PI / 4)}; }

inline double delta_u(double u) {
    if (!(u > 1.0)) throw Error("example1: requires u > 1");
    return std::acos(1.0 / std::sqrt(1.0 + u * u));
}

/// Asymptotic point estimate (1, u)/sqrt(1+u^2).
inline CostVector theta_u(double u) {
    if (!(u > 1.0)) throw Error("example1: requires u > 1");
    const double s = std::sqrt(1.0 + u * u);
    return CostVector({1.0 / s, u / s});
}

inline std::vector<Vec> vertices(double u) {
    return {{0.0, 1.0}, {0.0, 2.0}, {u, 0.0}, {u, 2.0}};
}

struct Ex1OptimalSet {
    double value = 0.0;
    std::vector<Vec> optimal_vertices;  // one vertex, or the two ends of a facet

    Vec sample(RandomSource& rng) const {
        if (optimal_vertices.size() == 1) return optimal_vertices.front();
        std::uniform_real_distribution<double> t(0.0, 1.0);
        const double a = t(rng);
        const Vec &v1 = optimal_vertices[0], &v2 = optimal_vertices[1];
        return {v1[0] + a * (v2[0] - v1[0]), v1[1] + a * (v2[1] - v1[1])};
    }
};

/// Exact forward solve by vertex enumeration; ties give the optimal facet.
inline Ex1OptimalSet solve_fo(const Vec& theta, double u) {
    const auto vs = vertices(u);
    Ex1OptimalSet s;
    double best = kInf;
    for (const auto& v : vs) best = std::min(best, dot(theta, v));
    s.value = best;
    const double tolv = 1e-12 * std::max(1.0, std::abs(best)) + 1e-12;
    for (const auto& v : vs)
        if (dot(theta, v) <= best + tolv) s.optimal_vertices.push_back(v);
    if (s.optimal_vertices.size() > 2)
        throw Error("example1: degenerate cost with more than one optimal facet");
    return s;
}

inline double optimal_value(const Vec& theta, double u) { return solve_fo(theta, u).value; }

inline Vec oracle(const Vec& theta, double u, RandomSource& rng) {
    return solve_fo(theta, u).sample(rng);
}

/// Empirical sub-optimality loss minimized exactly over the quarter circle.
/// The loss is piecewise K cos(delta - phi) with the single breakpoint at
/// delta_u, so per piece the minimum sits at an endpoint or the interior
/// critical point. When the minimizing set is an interval (one-sided data)
/// its midpoint is returned: "an optimal solution".
inline CostVector fit_arc(const std::vector<Vec>& decisions, double u) {
    if (decisions.empty()) throw Error("example1: empty training set");
    double A = 0.0, B = 0.0;
    for (const auto& x : decisions) {
        A += x[0];
        B += x[1];
    }
    A /= decisions.size();
    B /= decisions.size();
    const double du = delta_u(u);
    const double eps = 1e-9;
    auto loss = [&](double delta) {
        const double c = std::cos(delta), s = std::sin(delta);
        return A * c + B * s - std::min(s, u * c);
    };
    // candidate minimizers per piece: endpoints and the interior minimum of
    // a*cos + b*sin, which sits at atan2(b, a) + pi (mod 2pi)
    auto piece_candidates = [&](double a, double b, double lo, double hi,
                                std::vector<double>& out) {
        out.push_back(lo);
        out.push_back(hi);
        double crit = std::atan2(b, a) + M_PI;
        while (crit >= 2 * M_PI) crit -= 2 * M_PI;
        if (crit > lo && crit < hi) out.push_back(crit);
    };
    std::vector<double> cand;
    piece_candidates(A, B - 1.0, eps, du, cand);
    piece_candidates(A - u, B, du, M_PI / 2 - eps, cand);
    double best = kInf;
    for (double dta : cand) best = std::min(best, loss(dta));
    std::vector<double> arg;
    for (double dta : cand)
        if (loss(dta) <= best + 1e-12) arg.push_back(dta);
    double lo = arg.front(), hi = arg.front();
    for (double dta : arg) {
        lo = std::min(lo, dta);
        hi = std::max(hi, dta);
    }
    double out = lo;
    if (hi > lo + 1e-12 && loss(0.5 * (lo + hi)) <= best + 1e-9)
        out = 0.5 * (lo + hi);  // minimizing interval
    else {
        for (double dta : arg)
            if (loss(dta) < loss(out) - 1e-15) out = dta;
    }
    return CostVector({std::cos(out), std::sin(out)});
}

/// Conformity score via the ball LP with the four vertex optimality cuts
/// theta'(x_hat - v) <= 0 (for an LP, optimality against the vertices is
/// optimality against the whole feasible set).
inline ScoreResult conformity(const Vec& x_hat, double u, const CostVector& theta_bar) {
    std::vector<LinearConstraint> rows;
    for (const auto& v : vertices(u)) {
        LinearConstraint c;
        c.coeffs = {x_hat[0] - v[0], x_hat[1] - v[1]};
        c.sense = RowSense::le;
        c.rhs = 0.0;
        rows.push_back(std::move(c));
    }
    const auto r = ball_constrained_lp_max(theta_bar.values(), rows);
    ScoreResult out;
    out.theta_k = CostVector(r.argmax);
    out.c = std::clamp(dot(r.argmax, theta_bar.values()), -1.0, 1.0);
    out.iterations = r.iterations;
    return out;
}

/// Robust forward problem over the cone via the usual scenario loop on the
/// explicit 2-D feasible region.
inline RobustSolution solve_rfo(const ConeUncertaintySet& cone, double u,
                                int max_iter = 200) {
    LinearProgram lp;
    lp.add_vars(1, 0.0, u);
    lp.add_vars(1, 0.0, 2.0);
    const int j_omega = lp.add_vars(1, -kInf, kInf, 1.0);
    lp.add_row({1.0, u, 0.0}, RowSense::ge, u);
    return rfo_detail::minimize_over_lp(cone, std::move(lp), 0, 2, j_omega, max_iter);
}

struct Gaps {
    double aog = 0.0;
    double pog = 0.0;
};

/// Closed-form gaps of the classic policy that samples uniformly from the
/// facet rationalized by theta_u.
inline Gaps classic_gaps(double u) {
    if (!(u > 1.0)) throw Error("example1: requires u > 1");
    Gaps g;
    g.aog = std::sqrt(2.0) * (u - 1.0) / 4.0;
    g.pog = std::sqrt(1.0 + u * u) - (u + 1.0) / 2.0;
    return g;
}

/// Closed-form gaps of the robust policy (0,1); valid for alpha in (0, pi/2).
inline Gaps conformal_gaps(double u, double alpha) {
    if (!(u > 1.0)) throw Error("example1: requires u > 1");
    if (!(alpha > 0.0) || !(alpha < M_PI / 2))
        throw Error("example1: conformal closed form requires alpha in (0, pi/2)");
    Gaps g;
    g.aog = 0.0;
    g.pog = M_PI / (2.0 * std::sqrt(1.0 + u * u));
    return g;
}

namespace detail {

/// Simpson quadrature on [lo, hi] (n panels, even).
template <typename F>
double simpson(F f, double lo, double hi, int n = 2000) {
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * ((i % 2) ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace detail

/// Expectations of the policy gaps under the generative model, by quadrature
/// over delta ~ U(0, pi/2) with density 2/pi. These are the values a large
/// Monte Carlo run converges to.
inline Gaps expected_classic_gaps(double u) {
    if (!(u > 1.0)) throw Error("example1: requires u > 1");
    const double du = delta_u(u);
    const Vec ts = theta_star();
    const Vec mid = {u / 2.0, 0.5};  // mean of the uniform facet draw
    Gaps g;
    g.aog = dot(ts, mid) - optimal_value(ts, u);
    auto pog_integrand = [&](double d) {
        const Vec th = {std::cos(d), std::sin(d)};
        return dot(th, mid) - optimal_value(th, u);
    };
    g.pog = (2.0 / M_PI) * (detail::simpson(pog_integrand, 0.0, du) +
                            detail::simpson(pog_integrand, du, M_PI / 2));
    return g;
}

/// Expected gaps of any fixed decision under the generative model.
inline Gaps expected_fixed_policy_gaps(double u, const Vec& xbar) {
    if (!(u > 1.0)) throw Error("example1: requires u > 1");
    const double du = delta_u(u);
    Gaps g;
    g.aog = dot(theta_star(), xbar) - optimal_value(theta_star(), u);
    auto pog_integrand = [&](double d) {
        const Vec th = {std::cos(d), std::sin(d)};
        return dot(th, xbar) - optimal_value(th, u);
    };
    g.pog = (2.0 / M_PI) * (detail::simpson(pog_integrand, 0.0, du) +
                            detail::simpson(pog_integrand, du, M_PI / 2));
    return g;
}

/// The robust problem's optimum over the cone around theta_u: the facet is
/// orthogonal to theta_u, so the perpendicular foot of the origin on the
/// facet minimizes the worst case, with value u/sqrt(1+u^2).
inline Vec robust_facet_optimum(double u) {
    if (!(u > 1.0)) throw Error("example1: requires u > 1");
    return {u / (1.0 + u * u), u * u / (1.0 + u * u)};
}

struct BoundConstants {
    double eta = 0.0;
    double sigma = 0.0;
    double mu = 0.0;
    double mu_cio = 0.0;
    double mu_star = 0.0;
};

/// Constants feeding the gap-bound formulas, in closed form:
///  - eta: the largest chord among the four vertices' inverse-feasible arcs
///    ((0,1): [0, delta_u]; (0,2): [-pi/2, 0]; (u,0): [delta_u, pi];
///     (u,2): [pi, 3pi/2]; the (u,0) arc dominates),
///  - sigma: || E(theta_hat) - theta* || with theta_hat uniform on the arc,
///  - mu: E||x~(theta_hat, u)|| over the two-point decision distribution,
///  - mu_cio: the norm of the decision the robust policy actually prescribes
///    (the facet optimum), u/sqrt(1+u^2),
///  - mu_star = ||(0,1)|| = 1.
inline BoundConstants bound_constants(double u, double alpha) {
    if (!(alpha > 0.0) || !(alpha < M_PI / 2))
        throw Error("example1: bound constants assume alpha in (0, pi/2)");
    const double du = delta_u(u);
    BoundConstants b;
    b.eta = 2.0 * std::cos(du / 2.0);
    b.sigma = 1.0 - 2.0 * std::sqrt(2.0) / M_PI;
    const double p1 = 2.0 * du / M_PI;
    b.mu = p1 * 1.0 + (1.0 - p1) * u;
    b.mu_cio = u / std::sqrt(1.0 + u * u);
    b.mu_star = 1.0;
    return b;
}

struct SimReport {
    double u = 0.0;
    int n = 0;
    double alpha_used = 0.0;
    double gamma = 0.0;
    CostVector theta_bar_conformal;
    CostVector theta_bar_classic;
    EvaluationReport classic;
    EvaluationReport conformal;
    double coverage = -1.0;
};

/// Full pipeline on synthetic Example-1 data: generate, fit, calibrate (or
/// force alpha), solve the robust problem, and measure both policies' gaps on
/// a held-out test set (60/20/20 split). fixed_delta >= 0 freezes the
/// perception angle (noiseless when fixed_delta = pi/4).
inline SimReport simulate(double u, int n, double alpha_forced, double gamma,
                          std::uint64_t seed, double fixed_delta = -1.0) {
    if (n < 100) throw Error("example1: simulate needs n >= 100");
    RandomSource rng = make_rng(seed, 0x657831);
    std::uniform_real_distribution<double> ud(0.0, M_PI / 2);

    struct Sample {
        double delta;
        Vec theta_hat;
        Vec x_hat;
    };
    std::vector<Sample> data(n);
    for (auto& s : data) {
        s.delta = fixed_delta >= 0.0 ? fixed_delta : ud(rng);
        s.theta_hat = {std::cos(s.delta), std::sin(s.delta)};
        s.x_hat = oracle(s.theta_hat, u, rng);
    }
    const int n_train = static_cast<int>(std::lround(0.6 * n));
    const int n_val = static_cast<int>(std::lround(0.2 * n));
    std::vector<Vec> train, trainval;
    for (int k = 0; k < n_train; ++k) train.push_back(data[k].x_hat);
    for (int k = 0; k < n_train + n_val; ++k) trainval.push_back(data[k].x_hat);

    SimReport rep;
    rep.u = u;
    rep.n = n;
    rep.gamma = gamma;
    rep.theta_bar_conformal = fit_arc(train, u);
    rep.theta_bar_classic = fit_arc(trainval, u);

    double alpha = alpha_forced;
    if (alpha <= 0.0) {
        Vec scores(n_val);
        for (int k = 0; k < n_val; ++k)
            scores[k] =
                conformity(data[n_train + k].x_hat, u, rep.theta_bar_conformal).c;
        const int tau = static_cast<int>(std::ceil(gamma * (n_val + 1) - 1e-9));
        alpha = tau <= 0
                    ? 0.0
                    : std::acos(std::clamp(quantile_gamma(scores, tau), -1.0, 1.0));
    }
    rep.alpha_used = alpha;

    // conformal policy: fixed robust decision when the cone is non-degenerate,
    // otherwise the plain forward policy at the point estimate
    Vec x_cio;
    if (alpha > 0.0) {
        const ConeUncertaintySet cone(rep.theta_bar_conformal, alpha);
        x_cio = solve_rfo(cone, u).x.values();
    }

    Vec cl_aog, cl_pog, co_aog, co_pog;
    int covered = 0, n_test = 0;
    for (int k = n_train + n_val; k < n; ++k) {
        const auto& s = data[k];
        const double f_star = optimal_value(theta_star(), u);
        const double f_hat = optimal_value(s.theta_hat, u);
        const Vec x_cl = oracle(rep.theta_bar_classic.values(), u, rng);
        cl_aog.push_back(dot(theta_star(), x_cl) - f_star);
        cl_pog.push_back(dot(s.theta_hat, x_cl) - f_hat);
        const Vec x_co = alpha > 0.0 ? x_cio : oracle(rep.theta_bar_conformal.values(), u, rng);
        co_aog.push_back(dot(theta_star(), x_co) - f_star);
        co_pog.push_back(dot(s.theta_hat, x_co) - f_hat);
        if (conformity(s.x_hat, u, rep.theta_bar_conformal).c >= std::cos(alpha) - 1e-8)
            ++covered;
        ++n_test;
    }
    using eval_detail::mean_se;
    std::tie(rep.classic.aog, rep.classic.aog_se) = mean_se(cl_aog);
    std::tie(rep.classic.pog, rep.classic.pog_se) = mean_se(cl_pog);
    std::tie(rep.conformal.aog, rep.conformal.aog_se) = mean_se(co_aog);
    std::tie(rep.conformal.pog, rep.conformal.pog_se) = mean_se(co_pog);
    rep.classic.n_test = rep.conformal.n_test = n_test;
    rep.coverage = n_test > 0 ? static_cast<double>(covered) / n_test : -1.0;
    rep.conformal.coverage = rep.coverage;
    return rep;
}

}  // namespace cio::ex1

#endif  // CIO_EXAMPLE1_HPP
