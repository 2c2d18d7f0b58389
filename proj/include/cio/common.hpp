#ifndef CIO_COMMON_HPP
#define CIO_COMMON_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cio {

using Vec = std::vector<double>;
using RandomSource = std::mt19937_64;

/// Error type thrown by every operation in the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Centralized numeric tolerances.
namespace tol {
inline constexpr double lp_feasibility = 1e-8;   // LP primal residuals
inline constexpr double ball_violation = 1e-6;   // Kelley stopping rule on ||theta||
inline constexpr double value_compare = 1e-5;    // value agreement between routes
inline constexpr double cut_violation = 1e-7;    // delayed-cut generation threshold
inline constexpr double decision_feas = 1e-9;    // decision feasibility checks
inline constexpr double reduced_cost = 1e-9;     // tight-edge test in shortest path
inline constexpr double scenario_dedup = 1e-8;   // angular dedup of RFO scenarios
inline constexpr double unit_norm = 1e-10;       // cone-center normalization
}  // namespace tol

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw Error("dot: dimension mismatch");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2(const Vec& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

inline Vec scaled(Vec a, double s) {
    for (double& v : a) v *= s;
    return a;
}

inline Vec normalized(const Vec& a) {
    const double n = norm2(a);
    if (n <= 0.0) throw Error("normalized: zero vector");
    return scaled(a, 1.0 / n);
}

inline bool all_finite(const Vec& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

/// Angle between two vectors in [0, pi], robust near 0 and pi.
inline double angle_between(const Vec& a, const Vec& b) {
    const double na = norm2(a), nb = norm2(b);
    if (na == 0.0 || nb == 0.0) throw Error("angle_between: zero vector");
    double c = dot(a, b) / (na * nb);
    c = std::clamp(c, -1.0, 1.0);
    return std::acos(c);
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic sub-stream derivation; streams are independent of thread scheduling.
inline RandomSource make_rng(uint64_t seed, uint64_t stream = 0) {
    return RandomSource(splitmix64(seed ^ splitmix64(stream)));
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written
/// to pre-sized slots so aggregation stays deterministic.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs) : hw;
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errs(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) break;
                    fn(i);
                }
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace cio

#endif  // CIO_COMMON_HPP
