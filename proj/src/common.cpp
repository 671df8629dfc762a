#include "gwrs/common.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <numbers>
#include <thread>
#include <vector>

namespace gwrs {

double unit_ball_volume(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi / 3.0;
        default: throw ConfigError("unit_ball_volume: dim must be 1, 2, or 3");
    }
}

double pairwise_sum(std::span<const double> xs) {
    return pairwise_map_sum(0, xs.size(), [&](std::size_t i) { return xs[i]; });
}

std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::uint64_t fnv1a64(std::span<const std::byte> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::byte b : bytes) {
        h ^= static_cast<std::uint64_t>(b);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view text) {
    const auto h = fnv1a64(std::as_bytes(std::span(text.data(), text.size())));
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {
std::atomic<int> g_threads{0};

int detect_threads() {
    if (const char* env = std::getenv("GWRS_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}
}  // namespace

int thread_count() {
    int n = g_threads.load(std::memory_order_relaxed);
    if (n == 0) {
        n = detect_threads();
        g_threads.store(n, std::memory_order_relaxed);
    }
    return n;
}

void set_thread_count(int n) {
    if (n < 1) throw ConfigError("set_thread_count: n must be >= 1");
    g_threads.store(n, std::memory_order_relaxed);
}

void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const int workers = thread_count();
    if (workers <= 1 || n < 2) {
        if (n > 0) fn(0, n);
        return;
    }
    const std::size_t blocks = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::future<void>> futs;
    futs.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t lo = n * b / blocks;
        const std::size_t hi = n * (b + 1) / blocks;
        futs.push_back(std::async(std::launch::async, [&fn, lo, hi] { fn(lo, hi); }));
    }
    for (auto& f : futs) f.get();
}

}  // namespace gwrs
