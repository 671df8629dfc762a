#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace gwrs::fft {

/**
 * Circular self-correlation machinery shared by the autocorrelation and
 * norm evaluators. Inputs are real arrays of shape dims[0..rank-1]
 * (row-major, first axis slowest); each axis is zero-padded to the next
 * power of two >= 2*dims so the circular correlation equals the linear one.
 *
 * Plans are cached per padded shape and plan creation is serialized;
 * execution uses caller-owned aligned buffers, so concurrent correlations
 * from worker threads are safe.
 */

/// Integer-weight self-correlation c(s) = sum_x v(x) v(x+s) for shifts
/// s in [-(w-1), w-1]^rank, returned row-major with shape (2w-1) per axis.
/// Negative round-off values are clamped to zero; when min_raw is given it
/// receives the most negative pre-clamp value (0 if none).
std::vector<double> self_correlation(const std::vector<double>& v,
                                     const std::array<int, 3>& dims, int rank,
                                     double* min_raw = nullptr);

/// Sum over the padded frequency lattice of |v_hat|^4, along with the
/// padded lattice size. Parseval mate of the correlation square-sum.
struct QuarticSum {
    double sum;
    double lattice_size;
};
QuarticSum quartic_spectrum_sum(const std::vector<double>& v,
                                const std::array<int, 3>& dims, int rank);

}  // namespace gwrs::fft
