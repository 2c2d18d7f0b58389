#ifndef CIO_POINT_ESTIMATION_HPP
#define CIO_POINT_ESTIMATION_HPP

#include <set>
#include <utility>
#include <vector>

#include "cio/common.hpp"
#include "cio/forward.hpp"
#include "cio/lp.hpp"
#include "cio/types.hpp"

namespace cio {

/// Result of fitting a cost direction from training decisions.
struct PointEstimate {
    CostVector theta_bar;  // unit norm
    CostVector raw_theta;  // pre-normalization master solution
    int cut_count = 0;
    int iterations = 0;
    double train_loss = 0.0;  // final master objective

    /// Wraps an externally supplied estimate; only normalizes.
    static PointEstimate from_external(const CostVector& raw) {
        if (norm2(raw.values()) <= 0.0)
            throw Error("PointEstimate: external estimate is the zero vector");
        PointEstimate pe;
        pe.raw_theta = raw;
        pe.theta_bar = raw.unit();
        return pe;
    }
};

struct FitOptions {
    int max_iter = 100;
    double cut_tol = tol::cut_violation;
    int jobs = 1;
};

/// Per-iteration diagnostics: master objective (a lower bound that tightens)
/// and the exact training loss of each iterate.
struct FitTrace {
    std::vector<double> master_values;
    std::vector<double> true_losses;
};

struct FitError : Error {
    FitError(const std::string& msg, PointEstimate last)
        : Error(msg), last_iterate(std::move(last)) {}
    PointEstimate last_iterate;
};

/// Fits theta by minimizing the average sub-optimality loss over the training
/// decisions with delayed cut generation. Master LP:
///   min (1/N) sum_k l_k
///   s.t. l_k >= theta'(xhat_k - x') for generated x'   (sense-flipped for max)
///        ||theta - 1||_1 <= d/4     (linearized with t_i >= |theta_i - 1|)
///        l_k >= 0
/// Per iteration the forward problem is solved exactly for every k and a cut
/// is added when violated by more than cut_tol; terminates when no cut is
/// added.
inline PointEstimate fit_suboptimality(const std::vector<Observation>& train,
                                       ProblemKind kind, const FitOptions& opt = {},
                                       FitTrace* trace = nullptr) {
    if (train.empty()) throw Error("fit_suboptimality: empty training set");
    const int N = static_cast<int>(train.size());
    const int d = static_cast<int>(train.front().decision.dim());
    std::vector<ForwardInstance> insts;
    insts.reserve(N);
    for (const auto& o : train) {
        if (static_cast<int>(o.decision.dim()) != d)
            throw Error("fit_suboptimality: mixed decision dimensions");
        insts.push_back(make_instance(o.exo));
        if (insts.back().kind != kind) throw Error("fit_suboptimality: kind mismatch");
    }
    const bool maximize = insts.front().sense == Sense::maximize;

    LinearProgram master;
    const int j_theta = master.add_vars(d, -kInf, kInf);
    const int j_t = master.add_vars(d, 0.0, kInf);
    const int j_l = master.add_vars(N, 0.0, kInf);
    for (int k = 0; k < N; ++k) master.c[j_l + k] = 1.0 / N;
    for (int i = 0; i < d; ++i) {
        master.add_row_sparse({{j_theta + i, 1.0}, {j_t + i, -1.0}}, RowSense::le, 1.0);
        master.add_row_sparse({{j_theta + i, -1.0}, {j_t + i, -1.0}}, RowSense::le, -1.0);
    }
    {
        Vec row(master.num_vars(), 0.0);
        for (int i = 0; i < d; ++i) row[j_t + i] = 1.0;
        master.add_row(std::move(row), RowSense::le, d / 4.0);
    }

    // per-observation set of already-generated cut decisions (dedup)
    std::vector<std::set<Vec>> seen(N);

    PointEstimate pe;
    int total_cuts = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
        const LpSolution sol = simplex_solve(master);
        if (sol.status != LpStatus::optimal)
            throw Error("fit_suboptimality: master LP not optimal");
        Vec theta(sol.x.begin() + j_theta, sol.x.begin() + j_theta + d);
        const CostVector theta_cv{Vec(theta)};

        struct Sep {
            Vec xprime;
            double gap = 0.0;
        };
        std::vector<Sep> sep(N);
        parallel_for(N, opt.jobs, [&](std::size_t k) {
            const auto fo = solve_forward(theta_cv, insts[k]);
            const double obs = dot(theta, train[k].decision.values());
            sep[k].xprime = fo.representative().values();
            sep[k].gap = maximize ? fo.optimal_value() - obs : obs - fo.optimal_value();
        });

        double true_loss = 0.0;
        int added = 0;
        for (int k = 0; k < N; ++k) {
            true_loss += sep[k].gap / N;
            const double lk = sol.x[j_l + k];
            if (lk < sep[k].gap - opt.cut_tol) {
                if (seen[k].insert(sep[k].xprime).second) {
                    std::vector<std::pair<int, double>> row;
                    row.reserve(d + 1);
                    const Vec& xhat = train[k].decision.values();
                    for (int i = 0; i < d; ++i) {
                        const double coef = maximize ? sep[k].xprime[i] - xhat[i]
                                                     : xhat[i] - sep[k].xprime[i];
                        if (coef != 0.0) row.emplace_back(j_theta + i, coef);
                    }
                    row.emplace_back(j_l + k, -1.0);
                    master.add_row_sparse(row, RowSense::le, 0.0);
                    ++added;
                }
            }
        }
        total_cuts += added;
        if (trace) {
            trace->master_values.push_back(sol.objective);
            trace->true_losses.push_back(true_loss);
        }

        pe.raw_theta = theta_cv;
        pe.cut_count = total_cuts;
        pe.iterations = it + 1;
        pe.train_loss = sol.objective;
        if (added == 0) {
            if (norm2(theta) <= 0.0)
                throw Error("fit_suboptimality: degenerate zero estimate");
            pe.theta_bar = pe.raw_theta.unit();
            return pe;
        }
    }
    if (norm2(pe.raw_theta.values()) > 0.0) pe.theta_bar = pe.raw_theta.unit();
    throw FitError("fit_suboptimality: max_iter exceeded before cut generation converged",
                   pe);
}

}  // namespace cio

#endif  // CIO_POINT_ESTIMATION_HPP
