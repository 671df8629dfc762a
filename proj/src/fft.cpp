#include "gwrs/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>

#include "gwrs/common.hpp"

namespace gwrs::fft {

namespace {

using Key = std::array<int, 4>;  // rank, padded dims (1 for unused axes)

int next_pow2(int x) {
    int p = 1;
    while (p < x) p *= 2;
    return p;
}

Key padded_key(const std::array<int, 3>& dims, int rank) {
    Key k{rank, 1, 1, 1};
    for (int a = 0; a < rank; ++a) k[1 + a] = next_pow2(std::max(2 * dims[a] - 1, 1));
    return k;
}

std::size_t real_count(const Key& k) {
    return static_cast<std::size_t>(k[1]) * k[2] * k[3];
}

std::size_t complex_count(const Key& k) {
    std::size_t c = 1;
    for (int a = 0; a < k[0] - 1; ++a) c *= static_cast<std::size_t>(k[1 + a]);
    return c * (static_cast<std::size_t>(k[k[0]]) / 2 + 1);
}

struct Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// Plan creation is not thread-safe in FFTW; cache plans per padded shape.
Plans& plans_for(const Key& key) {
    static std::mutex mu;
    static std::map<Key, Plans> cache;
    std::scoped_lock lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const int rank = key[0];
    int n[3] = {key[1], key[2], key[3]};
    double* re = fftw_alloc_real(real_count(key));
    fftw_complex* cx = fftw_alloc_complex(complex_count(key));
    if (!re || !cx) throw std::bad_alloc();
    Plans p;
    p.fwd = fftw_plan_dft_r2c(rank, n, re, cx, FFTW_ESTIMATE);
    p.bwd = fftw_plan_dft_c2r(rank, n, cx, re, FFTW_ESTIMATE);
    fftw_free(re);
    fftw_free(cx);
    if (!p.fwd || !p.bwd) throw std::runtime_error("fftw plan creation failed");
    return cache.emplace(key, p).first->second;
}

struct Scratch {
    double* re = nullptr;
    fftw_complex* cx = nullptr;
    ~Scratch() {
        if (re) fftw_free(re);
        if (cx) fftw_free(cx);
    }
    Scratch() = default;
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;
    Scratch(Scratch&& o) noexcept : re(o.re), cx(o.cx) { o.re = nullptr; o.cx = nullptr; }
    Scratch& operator=(Scratch&&) = delete;
};

Scratch& scratch_for(const Key& key) {
    thread_local std::map<Key, Scratch> cache;
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Scratch s;
    s.re = fftw_alloc_real(real_count(key));
    s.cx = fftw_alloc_complex(complex_count(key));
    if (!s.re || !s.cx) throw std::bad_alloc();
    return cache.emplace(key, std::move(s)).first->second;
}

// Copies v (shape dims) into the zero-initialized padded buffer.
void pad_into(const std::vector<double>& v, const std::array<int, 3>& dims, int rank,
              const Key& key, double* re) {
    std::memset(re, 0, real_count(key) * sizeof(double));
    const int w0 = rank > 0 ? dims[0] : 1;
    const int w1 = rank > 1 ? dims[1] : 1;
    const int w2 = rank > 2 ? dims[2] : 1;
    const std::size_t m1 = key[2];
    const std::size_t m2 = key[3];
    for (int i = 0; i < w0; ++i)
        for (int j = 0; j < w1; ++j) {
            const double* src = v.data() + (static_cast<std::size_t>(i) * w1 + j) * w2;
            double* dst = re + (static_cast<std::size_t>(i) * m1 + j) * m2;
            std::memcpy(dst, src, static_cast<std::size_t>(w2) * sizeof(double));
        }
}

}  // namespace

std::vector<double> self_correlation(const std::vector<double>& v,
                                     const std::array<int, 3>& dims, int rank,
                                     double* min_raw) {
    const Key key = padded_key(dims, rank);
    Plans& plans = plans_for(key);
    Scratch& s = scratch_for(key);

    pad_into(v, dims, rank, key, s.re);
    fftw_execute_dft_r2c(plans.fwd, s.re, s.cx);
    const std::size_t nc = complex_count(key);
    for (std::size_t i = 0; i < nc; ++i) {
        const double a = s.cx[i][0], b = s.cx[i][1];
        s.cx[i][0] = a * a + b * b;
        s.cx[i][1] = 0.0;
    }
    fftw_execute_dft_c2r(plans.bwd, s.cx, s.re);

    const double inv = 1.0 / static_cast<double>(real_count(key));
    const int o0 = rank > 0 ? 2 * dims[0] - 1 : 1;
    const int o1 = rank > 1 ? 2 * dims[1] - 1 : 1;
    const int o2 = rank > 2 ? 2 * dims[2] - 1 : 1;
    const int m0 = key[1], m1 = key[2], m2 = key[3];
    std::vector<double> out(static_cast<std::size_t>(o0) * o1 * o2);
    double worst = 0.0;
    for (int i = 0; i < o0; ++i) {
        const int si = (i - (o0 - 1) / 2 + m0) % m0;
        for (int j = 0; j < o1; ++j) {
            const int sj = (j - (o1 - 1) / 2 + m1) % m1;
            for (int l = 0; l < o2; ++l) {
                const int sl = (l - (o2 - 1) / 2 + m2) % m2;
                double val = s.re[(static_cast<std::size_t>(si) * m1 + sj) * m2 + sl] * inv;
                if (val < 0.0) {
                    worst = std::min(worst, val);
                    val = 0.0;
                }
                out[(static_cast<std::size_t>(i) * o1 + j) * o2 + l] = val;
            }
        }
    }
    if (min_raw) *min_raw = worst;
    return out;
}

QuarticSum quartic_spectrum_sum(const std::vector<double>& v,
                                const std::array<int, 3>& dims, int rank) {
    const Key key = padded_key(dims, rank);
    Plans& plans = plans_for(key);
    Scratch& s = scratch_for(key);

    pad_into(v, dims, rank, key, s.re);
    fftw_execute_dft_r2c(plans.fwd, s.re, s.cx);

    const int last = key[key[0]];
    const std::size_t half = static_cast<std::size_t>(last) / 2 + 1;
    const std::size_t rows = complex_count(key) / half;
    std::vector<double> parts(complex_count(key));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t l = 0; l < half; ++l) {
            const std::size_t i = r * half + l;
            const double a = s.cx[i][0], b = s.cx[i][1];
            const double m2 = a * a + b * b;
            const double weight = (l == 0 || 2 * l == static_cast<std::size_t>(last)) ? 1.0 : 2.0;
            parts[i] = weight * m2 * m2;
        }
    }
    return QuarticSum{pairwise_sum(parts), static_cast<double>(real_count(key))};
}

}  // namespace gwrs::fft
