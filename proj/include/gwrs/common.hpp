#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace gwrs {

/// Invalid configuration or contract violation in inputs (CLI exit code 2).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Requested computation exceeds the operation budget (CLI exit code 3).
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A requested numerical assertion failed (CLI exit code 4).
struct AssertionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Lebesgue measure of the unit ball in R^d, d in {1,2,3}.
double unit_ball_volume(int dim);

/// Deterministic pairwise summation; independent of thread count.
double pairwise_sum(std::span<const double> xs);

/// Pairwise summation of f(i) for i in [0, n). f must be pure.
template <class F>
double pairwise_map_sum(std::size_t begin, std::size_t end, F&& f) {
    const std::size_t n = end - begin;
    if (n <= 16) {
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) acc += f(i);
        return acc;
    }
    const std::size_t mid = begin + n / 2;
    return pairwise_map_sum(begin, mid, f) + pairwise_map_sum(mid, end, f);
}

/// Canonical float formatting used in all emitted result files (17 significant digits).
std::string format_g17(double x);

/// FNV-1a 64-bit hash of a byte string, rendered as fixed-width hex.
std::uint64_t fnv1a64(std::span<const std::byte> bytes);
std::string fnv1a64_hex(std::string_view text);

/// Worker count for parallel sections: explicit override, else GWRS_THREADS,
/// else hardware concurrency. Results are independent of this value.
int thread_count();
void set_thread_count(int n);

/// Runs fn(begin, end) over a partition of [0, n) on thread_count() workers.
void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Default discretization tolerance at per-axis resolution n.
inline double tol_disc(int k, int dim, int n) {
    return 10.0 * static_cast<double>(k + 1) * static_cast<double>(dim) / static_cast<double>(n);
}

}  // namespace gwrs
